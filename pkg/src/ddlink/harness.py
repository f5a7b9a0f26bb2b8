"""End-to-end packet pipeline, experiment sweeps, latency benchmarking and CSV
emission.

A packet is one pilot frame plus one data frame through the same channel
realization. Receiver-side work (DZT, estimation, operator build, equalize,
demod) is timed; waveform generation, channel simulation and RNG are not.
"""

import csv
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import channel as chan
from . import grid as gridmod
from . import pilot as pilotmod
from . import sparse as sp
from .equalize import CgaConfig, cga_equalize, lmmse_equalize
from .zak import build_zak_kernel, dzt_gemm, idzt

MODULATIONS = ("qpsk", "qam16")
EQUALIZERS = ("ss-cga", "lmmse")
SWEEP_AXES = ("snr", "nu_max", "m", "theta")

CSV_COLUMNS = (
    "m", "n", "delta_f_hz", "mod", "snr_db", "nu_max_hz", "theta", "iters",
    "equalizer", "seed", "packets", "ber_mean", "bits_total", "bit_errors",
    "lat_median_us", "lat_p99_us", "lat_p999_us", "deadline_us",
    "deadline_met_rate", "throughput_mbps",
)


@dataclass(frozen=True)
class SimConfig:
    """One experiment configuration."""

    m: int = 32
    n: int = 32
    delta_f: float = 30e3
    mod: str = "qpsk"
    snr_db: float = 25.0
    nu_max_hz: float = 100.0
    theta: float = 0.08
    iters: int = 10
    equalizer: str = "ss-cga"
    packets: int = 200
    seed: int = 0
    deadline_frames: float = 2.0
    workers: int = 1

    def __post_init__(self):
        if self.mod not in MODULATIONS:
            raise ValueError(f"mod must be one of {MODULATIONS}, got {self.mod!r}")
        if self.equalizer not in EQUALIZERS:
            raise ValueError(
                f"equalizer must be one of {EQUALIZERS}, got {self.equalizer!r}"
            )
        if self.packets < 1:
            raise ValueError("packets must be >= 1")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")
        if self.nu_max_hz < 0:
            raise ValueError("nu_max must be nonnegative")
        if self.deadline_frames <= 0:
            raise ValueError("deadline_frames must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        gridmod.GridConfig(self.m, self.n, self.delta_f)  # validates geometry

    @property
    def grid(self):
        return gridmod.GridConfig(self.m, self.n, self.delta_f)

    @property
    def deadline_s(self):
        return self.deadline_frames * self.n / self.delta_f

    @property
    def snr_linear(self):
        return 10.0 ** (self.snr_db / 10.0) if not math.isinf(self.snr_db) else math.inf


@dataclass
class PacketResult:
    ber: float
    bits_total: int
    bit_errors: int
    time_dzt_s: float
    time_est_s: float
    time_build_s: float
    time_eq_s: float
    time_demod_s: float
    pilot_time_s: float
    data_time_s: float
    deadline_met: bool
    failed: bool = False

    @property
    def rx_time_s(self):
        return self.pilot_time_s + self.data_time_s


@dataclass(frozen=True)
class LatencyStats:
    median_s: float
    p99_s: float
    p999_s: float
    max_s: float
    met_rate: float


class Workspace:
    """Per-config precomputed kernels, shared across packets."""

    def __init__(self, cfg):
        self.grid = cfg.grid
        self.const = gridmod.make_constellation(cfg.mod)
        self.zak_kernel = build_zak_kernel(self.grid.N)
        self.twist = pilotmod.build_twist_kernel(self.grid)
        self.pilot_dd = pilotmod.make_pilot_frame(self.grid)
        self.pilot_tx = idzt(self.pilot_dd, self.grid)


def run_packet(cfg, rng, ws=None, pset=None):
    """Simulate and receive one packet; returns a timed PacketResult.

    pset overrides the fading draw with a fixed path set (useful for
    loopback checks over a known channel)."""
    if ws is None:
        ws = Workspace(cfg)
    grid = ws.grid
    const = ws.const

    if pset is None:
        pset = chan.draw_veha(cfg.nu_max_hz, grid, rng)
    tx_bits = rng.integers(0, 2, size=const.bits_per_symbol * grid.size)
    data_dd = gridmod.modulate(tx_bits, const, grid)
    data_tx = idzt(data_dd, grid)
    pilot_rx = chan.add_awgn(chan.apply_channel(ws.pilot_tx, pset, grid),
                             cfg.snr_db, rng)
    data_rx = chan.add_awgn(chan.apply_channel(data_tx, pset, grid),
                            cfg.snr_db, rng)

    bits_total = tx_bits.size
    pc = time.perf_counter

    # pilot frame processing
    t0 = pc()
    y_pilot = dzt_gemm(pilot_rx, ws.zak_kernel, grid)
    t1 = pc()
    heff = pilotmod.estimate_heff(y_pilot, ws.twist, grid)
    taps = sp.detect_paths(heff, cfg.theta, grid)
    t2 = pc()
    try:
        if cfg.equalizer == "ss-cga":
            operator = sp.build_ss_channel(taps, grid)
        else:
            if not taps:
                raise sp.EmptyChannel("no taps above threshold")
            operator = sp.build_dense_hdd(
                sp.threshold_frame(heff, cfg.theta, grid), grid
            )
    except sp.EmptyChannel:
        t3 = pc()
        return PacketResult(
            ber=0.5, bits_total=bits_total, bit_errors=bits_total // 2,
            time_dzt_s=t1 - t0, time_est_s=t2 - t1, time_build_s=t3 - t2,
            time_eq_s=0.0, time_demod_s=0.0,
            pilot_time_s=t3 - t0, data_time_s=0.0,
            deadline_met=(t3 - t0) <= cfg.deadline_s, failed=True,
        )
    t3 = pc()
    pilot_time = t3 - t0

    # data frame processing
    t4 = pc()
    y_data = dzt_gemm(data_rx, ws.zak_kernel, grid)
    t5 = pc()
    y_vec = gridmod.flatten(y_data, grid)
    if cfg.equalizer == "ss-cga":
        lam = 0.0 if math.isinf(cfg.snr_linear) else 1.0 / cfg.snr_linear
        x_hat, _ = cga_equalize(operator, y_vec,
                                CgaConfig(iterations=cfg.iters, lam=lam))
    else:
        x_hat = lmmse_equalize(operator, y_vec, cfg.snr_linear)
    t6 = pc()
    _, rx_bits = gridmod.hard_demod(gridmod.unflatten(x_hat, grid), const, grid)
    t7 = pc()
    data_time = t7 - t4

    errors = int(np.sum(tx_bits != rx_bits))
    return PacketResult(
        ber=errors / bits_total, bits_total=bits_total, bit_errors=errors,
        time_dzt_s=(t1 - t0) + (t5 - t4), time_est_s=t2 - t1,
        time_build_s=t3 - t2, time_eq_s=t6 - t5, time_demod_s=t7 - t6,
        pilot_time_s=pilot_time, data_time_s=data_time,
        deadline_met=(pilot_time + data_time) <= cfg.deadline_s,
    )


def _run_chunk(cfg, indices):
    ws = Workspace(cfg)
    out = []
    for idx in indices:
        rng = np.random.default_rng([cfg.seed, idx])
        out.append((idx, run_packet(cfg, rng, ws)))
    return out


def run_packets(cfg, packets=None):
    """Run the configured number of packets; deterministic in (seed, config)
    regardless of worker count."""
    count = cfg.packets if packets is None else packets
    indices = list(range(count))
    if cfg.workers == 1:
        pairs = _run_chunk(cfg, indices)
    else:
        chunks = [indices[w::cfg.workers] for w in range(cfg.workers)]
        chunks = [c for c in chunks if c]
        pairs = []
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            for part in pool.map(_run_chunk, [cfg] * len(chunks), chunks):
                pairs.extend(part)
    pairs.sort(key=lambda t: t[0])
    return [r for _, r in pairs]


def latency_stats(results, deadline_s):
    times = np.array([r.rx_time_s for r in results])
    met = float(np.mean([t <= deadline_s for t in times]))
    return LatencyStats(
        median_s=float(np.median(times)),
        p99_s=float(np.percentile(times, 99)),
        p999_s=float(np.percentile(times, 99.9)),
        max_s=float(times.max()),
        met_rate=met,
    )


def throughput_mbps(cfg, mean_ber):
    """Effective rate in Mbps: half the symbol rate times bits/symbol times (1-BER)."""
    if not 0.0 <= mean_ber <= 1.0:
        raise ValueError("mean_ber must lie in [0, 1]")
    const = gridmod.make_constellation(cfg.mod)
    bandwidth = cfg.m * cfg.delta_f
    return 0.5 * bandwidth * const.bits_per_symbol * (1.0 - mean_ber) / 1e6


def aggregate(cfg, results):
    """Collapse per-packet results into one CSV row dict."""
    stats = latency_stats(results, cfg.deadline_s)
    ber_mean = float(np.mean([r.ber for r in results]))
    return {
        "m": cfg.m, "n": cfg.n, "delta_f_hz": cfg.delta_f, "mod": cfg.mod,
        "snr_db": cfg.snr_db, "nu_max_hz": cfg.nu_max_hz, "theta": cfg.theta,
        "iters": cfg.iters, "equalizer": cfg.equalizer, "seed": cfg.seed,
        "packets": len(results),
        "ber_mean": ber_mean,
        "bits_total": int(sum(r.bits_total for r in results)),
        "bit_errors": int(sum(r.bit_errors for r in results)),
        "lat_median_us": stats.median_s * 1e6,
        "lat_p99_us": stats.p99_s * 1e6,
        "lat_p999_us": stats.p999_s * 1e6,
        "deadline_us": cfg.deadline_s * 1e6,
        "deadline_met_rate": stats.met_rate,
        "throughput_mbps": throughput_mbps(cfg, ber_mean),
    }


def apply_axis(cfg, axis, value):
    """New config with one sweep axis replaced; raises on bad axis/value."""
    if axis == "snr":
        return replace(cfg, snr_db=float(value))
    if axis == "nu_max":
        return replace(cfg, nu_max_hz=float(value))
    if axis == "m":
        m = int(value)
        if m != value:
            raise ValueError(f"m sweep value {value!r} is not an integer")
        return replace(cfg, m=m)
    if axis == "theta":
        return replace(cfg, theta=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")


def run_sweep(cfg, axis, values):
    """One aggregated row per axis value."""
    rows = []
    for v in values:
        point = apply_axis(cfg, axis, v)
        rows.append(aggregate(point, run_packets(point)))
    return rows


def benchmark_latency(cfg, packets):
    """Latency distribution over receiver-side processing, single worker."""
    if packets < 100:
        warnings.warn(
            f"{packets} packets is too few for stable percentiles; use >= 100",
            stacklevel=2,
        )
    elif packets < 10_000:
        warnings.warn(
            "p99.9 needs >= 10000 packets to be meaningful; "
            f"got {packets}", stacklevel=2,
        )
    pinned = replace(cfg, workers=1)
    results = run_packets(pinned, packets)
    return latency_stats(results, cfg.deadline_s), results


def write_csv(path, rows):
    """Append rows to a CSV file, writing the header only when the file is new."""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if new_file:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)


def oracle_check(perturb=0.0, rng=None):
    """Small-grid correctness gate: worked index example, bijections,
    dense-vs-sparse equivalence, CG-vs-dense parity.

    perturb != 0 scales the sparse coefficients to prove the gate can fail.
    Returns (ok, report_lines).
    """
    if rng is None:
        rng = np.random.default_rng(2024)
    lines = []
    ok = True

    def check(name, passed, detail=""):
        nonlocal ok
        ok = ok and passed
        lines.append(f"[{'PASS' if passed else 'FAIL'}] {name}{detail}")

    # worked example on the (8,2) grid with pilot (4,1)
    g = gridmod.GridConfig(8, 2, 30e3)
    tap_a = sp.DominantPath(4, 1, 1.0 + 0j)
    tap_b = sp.DominantPath(0, 0, 0.5 + 0j)
    r_a = sp.forward_index(tap_a, 7, g)
    r_b = sp.forward_index(tap_b, 7, g)
    check("index map, co-located tap", r_a == 7, f": r0(7)={r_a} (want 7)")
    check("index map, shifted tap", r_b == 11, f": r1(7)={r_b} (want 11)")
    check("inverse recovers the row",
          sp.inverse_index(tap_b, 11, g) == 7,
          f": q1(11)={sp.inverse_index(tap_b, 11, g)} (want 7)")

    # dense-vs-sparse equivalence on random integer-shift channels
    worst = 0.0
    for m, n in ((8, 2), (8, 4), (16, 8), (32, 16)):
        gc = gridmod.GridConfig(m, n, 30e3)
        for _ in range(5):
            heff = _random_integer_heff(gc, rng)
            taps = sp.detect_paths(heff, 0.0, gc)
            ch = sp.build_ss_channel(taps, gc)
            if perturb:
                ch = replace(ch, fwd_coef=ch.fwd_coef * (1.0 + perturb))
            dense = sp.build_dense_hdd(heff, gc)
            v = rng.standard_normal(gc.size) + 1j * rng.standard_normal(gc.size)
            worst = max(worst, np.abs(sp.ss_mvm(ch, v) - dense @ v).max())
            worst = max(
                worst,
                np.abs(sp.ss_mvm_hermitian(ch, v) - dense.conj().T @ v).max(),
            )
            q = np.arange(gc.size)
            for p, tap in enumerate(ch.paths):
                cols = sp.forward_index(tap, q, gc)
                worst = max(
                    worst, np.abs(ch.fwd_coef[p] - dense[q, cols]).max()
                )
    check("dense-vs-sparse equivalence", worst < 1e-9,
          f": worst abs deviation {worst:.3e}")

    # full-rank conjugate-gradient run agrees with the dense solve
    gc = gridmod.GridConfig(16, 8, 30e3)
    heff = _random_integer_heff(gc, rng)
    taps = sp.detect_paths(heff, 0.0, gc)
    ch = sp.build_ss_channel(taps, gc)
    dense = sp.build_dense_hdd(heff, gc)
    y = rng.standard_normal(gc.size) + 1j * rng.standard_normal(gc.size)
    lam = 1e-3
    x_cg, _ = cga_equalize(ch, y, CgaConfig(iterations=gc.size, lam=lam))
    x_ref = lmmse_equalize(dense, y, 1.0 / lam)
    rel = np.linalg.norm(x_cg - x_ref) / np.linalg.norm(x_ref)
    check("conjugate gradient matches dense solve", rel < 1e-6,
          f": relative error {rel:.3e}")

    return ok, lines


def _random_integer_heff(gc, rng, max_paths=5):
    """Random effective-channel frame with integer-bin taps for oracle runs.

    One dominant unit tap plus weaker extras, so the resulting operator is
    well conditioned (its smallest singular value stays bounded away from
    zero) and the conjugate-gradient parity check is numerically meaningful.
    """
    frame = np.zeros((gc.M, gc.N), dtype=complex)
    k0 = int(rng.integers(0, gc.M))
    l0 = int(rng.integers(0, gc.N))
    frame[k0, l0] = np.exp(2j * np.pi * rng.uniform())
    for _ in range(int(rng.integers(0, max_paths))):
        k = int(rng.integers(0, gc.M))
        l = int(rng.integers(0, gc.N))
        mag = rng.uniform(0.05, 0.2)
        frame[k, l] += mag * np.exp(2j * np.pi * rng.uniform())
    return frame
