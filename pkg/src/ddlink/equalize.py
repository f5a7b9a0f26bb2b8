"""Equalizers for the DD-domain channel: fixed-iteration conjugate-gradient on
the structured-sparse operator, and the dense LMMSE baseline it is judged
against. Also the offline rule that picks an iteration count from a BER trace.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .sparse import ss_mvm, ss_mvm_hermitian


@dataclass(frozen=True)
class CgaConfig:
    """Conjugate-gradient settings: fixed iteration count and ridge term.

    lam is the noise regularizer 1/SNR_linear; 0 means no regularization.
    profile=True stores per-iteration solution snapshots for offline study.
    """

    iterations: int = 10
    lam: float = 0.0
    profile: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")


@dataclass
class CgaTrace:
    """Per-run diagnostics: residual norms, MVM count, early-exit flag."""

    c_norm: list = field(default_factory=list)
    mvm_count: int = 0
    exact_converged: bool = False
    snapshots: list = field(default_factory=list)


def cga_equalize(ch, y_dd, cfg):
    """Run cfg.iterations conjugate-gradient steps on (H^H H + lam I) x = H^H y.

    Every product with H goes through the sparse tables. The only
    data-dependent exit is an exactly zero curvature p^H a_p, which can only
    happen at an exact solution; it is flagged in the trace.
    """
    y_dd = np.asarray(y_dd)
    trace = CgaTrace()
    b = ss_mvm_hermitian(ch, y_dd)
    trace.mvm_count += 1
    x = np.zeros_like(b)
    c = b.copy()
    p = b.copy()
    c_norm = np.vdot(c, c).real
    trace.c_norm.append(c_norm)
    for _ in range(cfg.iterations):
        ap = ss_mvm_hermitian(ch, ss_mvm(ch, p))
        trace.mvm_count += 2
        if cfg.lam:
            ap = ap + cfg.lam * p
        denom = np.vdot(p, ap).real
        if denom == 0.0:
            trace.exact_converged = True
            break
        alpha = c_norm / denom
        x = x + alpha * p
        c = c - alpha * ap
        new_norm = np.vdot(c, c).real
        p = c + (new_norm / c_norm) * p
        c_norm = new_norm
        trace.c_norm.append(c_norm)
        if cfg.profile:
            trace.snapshots.append(x.copy())
    return x, trace


def lmmse_equalize(h_dense, y_dd, snr_linear):
    """Solve (H^H H + I/snr) x = H^H y exactly via a Hermitian factorization."""
    h_dense = np.asarray(h_dense)
    y_dd = np.asarray(y_dd)
    mn = y_dd.size
    if h_dense.shape != (mn, mn):
        raise ValueError(f"matrix shape {h_dense.shape} does not match y ({mn})")
    if snr_linear <= 0:
        raise ValueError("snr_linear must be positive")
    gram = h_dense.conj().T @ h_dense
    lam = 0.0 if np.isinf(snr_linear) else 1.0 / snr_linear
    if lam:
        gram[np.diag_indices(mn)] += lam
    rhs = h_dense.conj().T @ y_dd
    return scipy.linalg.solve(gram, rhs, assume_a="pos")


def ber_convergence_iteration(ber_trace, eta=1e-2, zeta=1e-12):
    """First iteration where the signed relative BER improvement drops below eta.

    ber_trace[i] is the BER measured after iteration i+1. Returns the
    1-based iteration index, or len(ber_trace) if no step qualifies.
    """
    trace = list(ber_trace)
    if len(trace) < 2:
        raise ValueError("need a trace of at least two BER values")
    for i in range(1, len(trace)):
        r = (trace[i - 1] - trace[i]) / max(trace[i - 1], zeta)
        if r < eta:
            return i + 1
    return len(trace)
