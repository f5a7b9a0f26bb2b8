"""Multipath fading channel: Vehicular-A realizations, time-domain application
with Doppler phase ramps, and AWGN.

Delay acts as a circular shift of round(tau*B) samples; Doppler as a
continuous phase ramp, so fractional Doppler leakage shows up in the DD
domain without any special casing.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grid import check_signal

# ITU Vehicular-A power-delay profile
VEHA_DELAYS_US = (0.00, 0.31, 0.71, 1.09, 1.73, 2.51)
VEHA_POWERS_DB = (0.0, -1.0, -9.0, -10.0, -15.0, -20.0)


@dataclass(frozen=True)
class PathSpec:
    """One propagation path."""

    gain: complex
    delay_s: float
    doppler_hz: float
    delay_bin: int       # round(delay_s * B)
    doppler_frac: float  # doppler_hz / delta_nu, may be fractional


@dataclass(frozen=True)
class PathSet:
    paths: tuple

    @property
    def P(self):
        return len(self.paths)

    def total_power(self):
        return float(sum(abs(p.gain) ** 2 for p in self.paths))


def make_path(gain, delay_s, doppler_hz, cfg):
    """Build a PathSpec with derived grid coordinates, validating the ranges."""
    delay_bin = int(round(delay_s * cfg.B))
    doppler_frac = doppler_hz / cfg.delta_nu
    if not 0 <= delay_bin < cfg.M:
        raise ValueError(
            f"delay {delay_s * 1e6:.3f} us maps to bin {delay_bin}, "
            f"outside the delay period of {cfg.M} bins"
        )
    if abs(doppler_frac) > cfg.N / 2:
        raise ValueError(
            f"Doppler {doppler_hz:.1f} Hz exceeds half the Doppler period "
            f"({cfg.N / 2 * cfg.delta_nu:.1f} Hz)"
        )
    return PathSpec(complex(gain), float(delay_s), float(doppler_hz),
                    delay_bin, doppler_frac)


def draw_veha(nu_max, cfg, rng):
    """Draw one Vehicular-A channel realization.

    Tap magnitudes are deterministic from the power profile, normalized so
    the total power is exactly 1; phases are i.i.d. uniform. Each path's
    Doppler is nu_max*cos(2*pi*U) with U uniform on [0,1).
    """
    if nu_max < 0:
        raise ValueError("nu_max must be nonnegative")
    delays = np.asarray(VEHA_DELAYS_US) * 1e-6
    if delays[-1] >= cfg.M * cfg.delta_tau:
        raise ValueError(
            f"delay spread {delays[-1] * 1e6:.2f} us exceeds the delay period "
            f"{cfg.M * cfg.delta_tau * 1e6:.2f} us; increase M or delta_f"
        )
    powers = 10.0 ** (np.asarray(VEHA_POWERS_DB) / 10.0)
    mags = np.sqrt(powers / powers.sum())
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(mags))
    dopplers = nu_max * np.cos(2.0 * np.pi * rng.uniform(0.0, 1.0, size=len(mags)))
    paths = tuple(
        make_path(m * np.exp(1j * ph), d, nu, cfg)
        for m, ph, d, nu in zip(mags, phases, delays, dopplers)
    )
    return PathSet(paths)


def apply_channel(x, pset, cfg):
    """Noiseless channel output y[i] = sum_p h_p x[(i-k_p) mod MN] e^{j2pi nu_p (i/B - tau_p)}."""
    x = check_signal(x, cfg)
    i = np.arange(cfg.size)
    y = np.zeros(cfg.size, dtype=complex)
    for p in pset.paths:
        ramp = np.exp(2j * np.pi * p.doppler_hz * (i / cfg.B - p.delay_s))
        y += p.gain * np.roll(x, p.delay_bin) * ramp
    return y


def add_awgn(y, snr_db, rng):
    """Add complex AWGN at the requested SNR relative to the mean power of y.

    snr_db=inf is the noiseless sentinel and returns y unchanged.
    """
    y = np.asarray(y)
    if math.isinf(snr_db):
        return y.copy()
    snr_lin = 10.0 ** (snr_db / 10.0)
    sig_power = float(np.mean(np.abs(y) ** 2))
    sigma = math.sqrt(sig_power / snr_lin)
    noise = (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y + sigma / math.sqrt(2.0) * noise


def save_paths(pset, fh):
    """Write one realization as text rows: gain_re gain_im delay_s doppler_hz."""
    fh.write("# gain_re gain_im delay_s doppler_hz\n")
    for p in pset.paths:
        fh.write(
            f"{p.gain.real:.17g} {p.gain.imag:.17g} "
            f"{p.delay_s:.17g} {p.doppler_hz:.17g}\n"
        )


def load_paths(fh, cfg):
    """Rebuild a PathSet from save_paths output."""
    paths = []
    for line in fh:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        re_, im, delay_s, doppler = (float(tok) for tok in line.split())
        paths.append(make_path(complex(re_, im), delay_s, doppler, cfg))
    if not paths:
        raise ValueError("no path records found")
    return PathSet(tuple(paths))


def ground_truth_heff(pset, cfg):
    """Effective-channel frame on the absolute grid, for integer-Doppler oracles.

    Each path lands at ((K0+k_p) mod M, (L0+round(doppler_frac)) mod N);
    coincident paths accumulate.
    """
    frame = np.zeros((cfg.M, cfg.N), dtype=complex)
    for p in pset.paths:
        k = (cfg.K0 + p.delay_bin) % cfg.M
        l = (cfg.L0 + int(round(p.doppler_frac))) % cfg.N
        frame[k, l] += p.gain
    return frame
