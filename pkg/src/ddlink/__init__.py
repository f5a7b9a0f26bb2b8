"""Delay-Doppler link-level simulator and receiver processing library."""

from .channel import (
    PathSet,
    PathSpec,
    add_awgn,
    apply_channel,
    draw_veha,
    ground_truth_heff,
    load_paths,
    make_path,
    save_paths,
)
from .equalize import (
    CgaConfig,
    CgaTrace,
    ber_convergence_iteration,
    cga_equalize,
    lmmse_equalize,
)
from .grid import (
    Constellation,
    GridConfig,
    ber,
    flatten,
    hard_demod,
    make_constellation,
    modulate,
    unflatten,
)
from .harness import (
    LatencyStats,
    PacketResult,
    SimConfig,
    aggregate,
    benchmark_latency,
    oracle_check,
    run_packet,
    run_packets,
    run_sweep,
    throughput_mbps,
    write_csv,
)
from .pilot import (
    build_twist_kernel,
    default_pilot_amplitude,
    estimate_heff,
    make_pilot_frame,
)
from .sparse import (
    DominantPath,
    EmptyChannel,
    StructuredSparseChannel,
    build_dense_hdd,
    build_ss_channel,
    coefficient,
    detect_paths,
    forward_index,
    inverse_index,
    ss_mvm,
    ss_mvm_hermitian,
    threshold_frame,
)
from .zak import build_zak_kernel, dzt, dzt_gemm, idzt

__all__ = [
    "PathSet",
    "PathSpec",
    "add_awgn",
    "apply_channel",
    "draw_veha",
    "ground_truth_heff",
    "load_paths",
    "make_path",
    "save_paths",
    "CgaConfig",
    "CgaTrace",
    "ber_convergence_iteration",
    "cga_equalize",
    "lmmse_equalize",
    "Constellation",
    "GridConfig",
    "ber",
    "flatten",
    "hard_demod",
    "make_constellation",
    "modulate",
    "unflatten",
    "LatencyStats",
    "PacketResult",
    "SimConfig",
    "aggregate",
    "benchmark_latency",
    "oracle_check",
    "run_packet",
    "run_packets",
    "run_sweep",
    "throughput_mbps",
    "write_csv",
    "build_twist_kernel",
    "default_pilot_amplitude",
    "estimate_heff",
    "make_pilot_frame",
    "DominantPath",
    "EmptyChannel",
    "StructuredSparseChannel",
    "build_dense_hdd",
    "build_ss_channel",
    "coefficient",
    "detect_paths",
    "forward_index",
    "inverse_index",
    "ss_mvm",
    "ss_mvm_hermitian",
    "threshold_frame",
    "build_zak_kernel",
    "dzt",
    "dzt_gemm",
    "idzt",
]

__version__ = "0.1.0"
