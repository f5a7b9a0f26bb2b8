"""Point-pilot frames and effective-channel estimation.

The estimate lives on the absolute grid: bin (K0, L0) is the zero-delay
zero-Doppler tap, a path delayed by dk and Doppler-shifted by dl bins shows
up at ((K0+dk) mod M, (L0+dl) mod N).
"""

import numpy as np

from .grid import check_frame


def default_pilot_amplitude(cfg):
    """sqrt(M*N): gives the pilot frame the same energy as a unit-power data frame."""
    return float(np.sqrt(cfg.size))


def make_pilot_frame(cfg, amplitude=None):
    """Single impulse of the given amplitude at (K0, L0)."""
    if amplitude is None:
        amplitude = default_pilot_amplitude(cfg)
    if amplitude <= 0:
        raise ValueError("pilot amplitude must be positive")
    frame = np.zeros((cfg.M, cfg.N), dtype=complex)
    frame[cfg.K0, cfg.L0] = amplitude
    return frame


def build_twist_kernel(cfg):
    """M x N phase grid e^{-j2pi K0 (l - L0) / (M N)}, constant along the delay axis."""
    l = np.arange(cfg.N)
    row = np.exp(-2j * np.pi * cfg.K0 * (l - cfg.L0) / cfg.size)
    kernel = np.broadcast_to(row, (cfg.M, cfg.N)).copy()
    kernel.setflags(write=False)
    return kernel


def estimate_heff(Y_dd, twist, cfg, amplitude=None):
    """Effective-channel estimate from a received pilot frame.

    Element-wise product with the twist kernel, divided by the pilot
    amplitude. No index shifting: the output is already on the absolute grid.
    """
    Y_dd = check_frame(Y_dd, cfg)
    if amplitude is None:
        amplitude = default_pilot_amplitude(cfg)
    if amplitude <= 0:
        raise ValueError("pilot amplitude must be positive")
    return Y_dd * twist / amplitude
