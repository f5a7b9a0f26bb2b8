"""Discrete Zak transforms between the DD grid and the time domain.

Both directions carry a 1/sqrt(N) normalization, making the pair unitary.
`dzt` and `idzt` evaluate the defining sums directly (vectorized); `dzt_gemm`
is the compact-matrix route through a precomputed kernel, kept separate so the
two can cross-check each other.
"""

import numpy as np

from .grid import check_frame, check_signal


def idzt(X_dd, cfg):
    """Inverse transform: x[k + n*M] = (1/sqrt(N)) sum_l X_dd[k,l] e^{+j2pi n l/N}."""
    X_dd = check_frame(X_dd, cfg)
    n = np.arange(cfg.N)
    phase = np.exp(2j * np.pi * np.outer(n, n) / cfg.N) / np.sqrt(cfg.N)
    # columns of x_mat are the n-th length-M blocks of the time signal
    x_mat = X_dd @ phase
    return x_mat.reshape(cfg.size, order="F")


def dzt(y, cfg):
    """Forward transform: Y_dd[k,l] = (1/sqrt(N)) sum_i y[k + i*M] e^{-j2pi i l/N}."""
    y = check_signal(y, cfg)
    n = np.arange(cfg.N)
    phase = np.exp(-2j * np.pi * np.outer(n, n) / cfg.N) / np.sqrt(cfg.N)
    y_mat = y.reshape(cfg.M, cfg.N, order="F")
    return y_mat @ phase


def build_zak_kernel(N, half_shift=False):
    """N x N transform kernel: kernel[i, l] = (1/sqrt(N)) e^{-j2pi i l/N}.

    half_shift=True multiplies column l by (-1)^l, an alternative convention
    kept for A/B comparison only; the default matches the summation form of
    dzt and is what the rest of the library uses.
    """
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(N)
    kernel = np.exp(-2j * np.pi * np.outer(n, n) / N) / np.sqrt(N)
    if half_shift:
        kernel = kernel * np.where(n % 2, -1.0, 1.0)[None, :]
    kernel.setflags(write=False)
    return kernel


def dzt_gemm(y, kernel, cfg):
    """DZT as one GEMM: reshape y column-major to (M, N), multiply by the kernel."""
    y = check_signal(y, cfg)
    if kernel.shape != (cfg.N, cfg.N):
        raise ValueError(f"kernel shape {kernel.shape} does not match N={cfg.N}")
    return y.reshape(cfg.M, cfg.N, order="F") @ kernel
