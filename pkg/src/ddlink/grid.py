"""Delay-Doppler grid geometry, constellations, framing and BER accounting.

A DD frame is a complex ndarray of shape (M, N), indexed [k, l] with k the
delay bin and l the Doppler bin. Its time-domain counterpart is a complex
vector of length M*N at sample rate B. Frames are vectorized column-major:
q = l*M + k.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridConfig:
    """DD grid geometry: M delay bins, N Doppler bins, subcarrier spacing delta_f."""

    M: int
    N: int
    delta_f: float = 30e3

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ValueError(f"grid must be at least 2x2, got ({self.M},{self.N})")
        if self.M % 2 or self.N % 2:
            raise ValueError(
                f"M and N must be even so the pilot sits on a bin center, "
                f"got ({self.M},{self.N})"
            )
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")

    @property
    def B(self):
        """Bandwidth in Hz."""
        return self.M * self.delta_f

    @property
    def T(self):
        """Frame duration in seconds."""
        return self.N / self.delta_f

    @property
    def delta_tau(self):
        """Delay resolution in seconds (1/B)."""
        return 1.0 / self.B

    @property
    def delta_nu(self):
        """Doppler resolution in Hz (1/T)."""
        return self.delta_f / self.N

    @property
    def K0(self):
        """Pilot delay index M/2."""
        return self.M // 2

    @property
    def L0(self):
        """Pilot Doppler index N/2."""
        return self.N // 2

    @property
    def size(self):
        return self.M * self.N


def check_frame(frame, cfg):
    """Raise if frame is not a complex (M, N) array for this grid."""
    frame = np.asarray(frame)
    if frame.shape != (cfg.M, cfg.N):
        raise ValueError(
            f"frame shape {frame.shape} does not match grid ({cfg.M},{cfg.N})"
        )
    return frame


def check_signal(x, cfg):
    """Raise if x is not a length-M*N vector."""
    x = np.asarray(x)
    if x.shape != (cfg.size,):
        raise ValueError(f"signal length {x.shape} != M*N = {cfg.size}")
    return x


def flatten(frame, cfg):
    """Vectorize a DD frame column-major: out[l*M + k] = frame[k, l]."""
    frame = check_frame(frame, cfg)
    return frame.reshape(cfg.size, order="F").copy()


def unflatten(v, cfg):
    """Inverse of flatten: frame[k, l] = v[l*M + k]."""
    v = check_signal(v, cfg)
    return v.reshape(cfg.M, cfg.N, order="F").copy()


def _gray_axis_levels(bits_per_axis):
    # Gray-coded PAM levels per TS 38.211 style layouts: for 1 bit {+1,-1},
    # for 2 bits b -> (1-2b0)*(2-(1-2b1)) giving {+1,+3,-1,-3} in bit order.
    if bits_per_axis == 1:
        return np.array([1.0, -1.0])
    if bits_per_axis == 2:
        lv = []
        for b0 in (0, 1):
            for b1 in (0, 1):
                lv.append((1 - 2 * b0) * (2 - (1 - 2 * b1)))
        return np.array(lv, dtype=float)
    raise ValueError("only 1 or 2 bits per axis supported")


@dataclass(frozen=True)
class Constellation:
    """Gray-mapped constellation with unit mean symbol energy.

    points[s] is the symbol for the integer label s whose bits (MSB first)
    alternate I-axis, Q-axis per the standard Gray layout.
    """

    name: str
    points: np.ndarray
    bits_per_symbol: int
    bit_map: np.ndarray = field(repr=False)  # (2**b, b) array of bit rows


def make_constellation(name):
    """Build 'qpsk' or 'qam16'."""
    key = name.lower().replace("-", "").replace("_", "")
    if key == "qpsk":
        bits_per_axis = 1
    elif key in ("qam16", "16qam"):
        bits_per_axis = 2
    else:
        raise ValueError(f"unknown constellation {name!r}")
    b = 2 * bits_per_axis
    order = 1 << b
    axis = _gray_axis_levels(bits_per_axis)
    pts = np.empty(order, dtype=complex)
    bit_map = np.empty((order, b), dtype=np.int8)
    for s in range(order):
        bits = [(s >> (b - 1 - i)) & 1 for i in range(b)]
        # even bit positions drive I, odd drive Q
        i_idx = 0
        q_idx = 0
        for pos in range(0, b, 2):
            i_idx = (i_idx << 1) | bits[pos]
        for pos in range(1, b, 2):
            q_idx = (q_idx << 1) | bits[pos]
        pts[s] = axis[i_idx] + 1j * axis[q_idx]
        bit_map[s] = bits
    pts /= np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    bit_map.setflags(write=False)
    return Constellation(name=key, points=pts, bits_per_symbol=b, bit_map=bit_map)


def modulate(bits, const, cfg):
    """Map a bit sequence onto a DD frame in flattened-index order."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    b = const.bits_per_symbol
    if bits.size != b * cfg.size:
        raise ValueError(
            f"need {b * cfg.size} bits for a ({cfg.M},{cfg.N}) "
            f"{const.name} frame, got {bits.size}"
        )
    groups = bits.reshape(-1, b)
    weights = 1 << np.arange(b - 1, -1, -1)
    labels = groups @ weights
    return unflatten(const.points[labels], cfg)


def hard_demod(x_hat, const, cfg):
    """Nearest-point hard decisions; returns (symbol frame, bit sequence).

    Ties go to the lowest constellation index.
    """
    x_hat = check_frame(x_hat, cfg)
    v = flatten(x_hat, cfg)
    d2 = np.abs(v[:, None] - const.points[None, :]) ** 2
    labels = d2.argmin(axis=1)
    symbols = unflatten(const.points[labels], cfg)
    bits = const.bit_map[labels].reshape(-1).astype(np.int64)
    return symbols, bits


def ber(tx_bits, rx_bits):
    """Bit error rate: Hamming distance over length."""
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise ValueError(f"bit sequences differ in length: {tx.size} vs {rx.size}")
    if tx.size == 0:
        raise ValueError("empty bit sequences")
    return float(np.count_nonzero(tx != rx)) / tx.size
