"""Structured-sparse representation of the DD channel matrix.

A channel with P dominant taps defines, per tap, a permutation of the MN
flattened grid indices plus a phase-corrected coefficient per output index.
Storing those P coefficient/index tables (P*MN entries per direction) replaces
the dense MN x MN matrix and turns both matrix-vector products into
gather-multiply-reduce passes.

`build_dense_hdd` constructs the full matrix from the unique-wrap relation,
entry by entry. It is deliberately independent of the per-path tables so the
two construction routes can be checked against each other.
"""

from dataclasses import dataclass

import numpy as np

from .grid import check_frame

DENSE_GUARD = 4096


class EmptyChannel(Exception):
    """No taps survived thresholding; there is no channel to equalize against."""


@dataclass(frozen=True)
class DominantPath:
    """One detected tap on the absolute grid."""

    k_p: int
    l_p: int
    gain: complex

    def offsets(self, cfg):
        """(d_k, d_l): column offset this tap induces on the flattened grid."""
        return cfg.K0 - self.k_p, cfg.L0 - self.l_p


@dataclass(frozen=True)
class StructuredSparseChannel:
    """Path-major coefficient/index tables for both product directions.

    fwd_coef[p, q] scales v[fwd_col[p, q]] into output q; herm_coef[p, r]
    scales v[herm_row[p, r]] into output r of the Hermitian product.
    """

    M: int
    N: int
    paths: tuple
    fwd_coef: np.ndarray   # complex, (P, MN)
    fwd_col: np.ndarray    # int32, (P, MN)
    herm_coef: np.ndarray  # complex, (P, MN)
    herm_row: np.ndarray   # int32, (P, MN)

    @property
    def P(self):
        return len(self.paths)

    @property
    def size(self):
        return self.M * self.N

    def entries_per_direction(self):
        """Stored coefficient count per direction (== P*MN by construction)."""
        return int(self.fwd_coef.size)


def detect_paths(heff, theta, cfg):
    """Threshold the estimate at theta relative to its largest magnitude.

    Returns taps sorted by descending magnitude. theta >= 1 (or an all-zero
    frame) can legitimately come back empty; callers decide whether that is
    an EmptyChannel error.
    """
    heff = check_frame(heff, cfg)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    mags = np.abs(heff)
    peak = mags.max()
    if peak == 0.0:
        return []
    ks, ls = np.nonzero(mags > theta * peak)
    order = np.argsort(-mags[ks, ls], kind="stable")
    return [
        DominantPath(int(ks[i]), int(ls[i]), complex(heff[ks[i], ls[i]]))
        for i in order
    ]


def forward_index(path, q, cfg):
    """Column index feeding output q for this tap: a 2D circular shift of q."""
    d_k, d_l = path.offsets(cfg)
    k_q = q % cfg.M
    l_q = q // cfg.M
    return ((l_q + d_l) % cfg.N) * cfg.M + (k_q + d_k) % cfg.M


def inverse_index(path, r, cfg):
    """Output index fed by column r: inverse of forward_index."""
    d_k, d_l = path.offsets(cfg)
    k_r = r % cfg.M
    l_r = r // cfg.M
    return ((l_r - d_l) % cfg.N) * cfg.M + (k_r - d_k) % cfg.M


def coefficient(path, q, cfg):
    """Phase-corrected gain multiplying v[forward_index(path, q)] in row q.

    The rotation accounts for the tap's Doppler offset and for delay wraps of
    the flattened grid; its magnitude is always |gain|.
    """
    k_q = q % cfg.M
    l_q = q // cfg.M
    a = cfg.K0 + k_q - path.k_p
    n_wrap = a // cfg.M
    l_img = (cfg.L0 + l_q - path.l_p) % cfg.N
    phi = (2.0 * np.pi / cfg.size) * (
        (path.l_p - cfg.L0) * a + n_wrap * l_img * cfg.M
    )
    return path.gain * np.exp(1j * phi)


def build_ss_channel(paths, cfg):
    """Assemble forward and Hermitian tables for the detected taps."""
    if len(paths) == 0:
        raise EmptyChannel("no taps above threshold")
    mn = cfg.size
    q = np.arange(mn)
    fwd_coef = np.empty((len(paths), mn), dtype=complex)
    fwd_col = np.empty((len(paths), mn), dtype=np.int32)
    herm_coef = np.empty((len(paths), mn), dtype=complex)
    herm_row = np.empty((len(paths), mn), dtype=np.int32)
    for p, path in enumerate(paths):
        fwd_col[p] = forward_index(path, q, cfg)
        fwd_coef[p] = coefficient(path, q, cfg)
        rows = inverse_index(path, q, cfg)
        herm_row[p] = rows
        herm_coef[p] = np.conj(fwd_coef[p, rows])
    return StructuredSparseChannel(
        M=cfg.M, N=cfg.N, paths=tuple(paths),
        fwd_coef=fwd_coef, fwd_col=fwd_col,
        herm_coef=herm_coef, herm_row=herm_row,
    )


def ss_mvm(ch, v):
    """u[q] = sum_p fwd_coef[p, q] * v[fwd_col[p, q]]."""
    v = np.asarray(v)
    if v.shape != (ch.size,):
        raise ValueError(f"vector length {v.shape} != {ch.size}")
    return np.einsum("pq,pq->q", ch.fwd_coef, v[ch.fwd_col])


def ss_mvm_hermitian(ch, v):
    """u[r] = sum_p herm_coef[p, r] * v[herm_row[p, r]] (adjoint of ss_mvm)."""
    v = np.asarray(v)
    if v.shape != (ch.size,):
        raise ValueError(f"vector length {v.shape} != {ch.size}")
    return np.einsum("pq,pq->q", ch.herm_coef, v[ch.herm_row])


def threshold_frame(heff, theta, cfg):
    """Zero every bin at or below theta times the peak magnitude."""
    heff = check_frame(heff, cfg)
    mags = np.abs(heff)
    peak = mags.max()
    out = np.where(mags > theta * peak, heff, 0.0) if peak > 0 else heff.copy()
    return out


def build_dense_hdd(heff, cfg, row_block=512):
    """Full MN x MN channel matrix from the effective-channel frame.

    For each (row q' = l'M+k', column q = lM+k) there is exactly one wrap
    pair (n, m) putting (k'-k-nM, l'-l-mN) in the signed fundamental range;
    the entry is the corresponding frame tap times the quasi-periodicity
    phases. Built in row blocks to bound peak memory.
    """
    heff = check_frame(heff, cfg)
    mn = cfg.size
    if mn > DENSE_GUARD:
        raise ValueError(
            f"dense channel matrix limited to MN <= {DENSE_GUARD}, got {mn}"
        )
    q = np.arange(mn)
    k_col = q % cfg.M
    l_col = q // cfg.M
    h = np.empty((mn, mn), dtype=complex)
    for start in range(0, mn, row_block):
        rows = np.arange(start, min(start + row_block, mn))
        k_row = (rows % cfg.M)[:, None]
        l_row = (rows // cfg.M)[:, None]
        n = (k_row - k_col[None, :] + cfg.K0) // cfg.M
        m = (l_row - l_col[None, :] + cfg.L0) // cfg.N
        dk = k_row - k_col[None, :] - n * cfg.M
        dl = l_row - l_col[None, :] - m * cfg.N
        taps = heff[cfg.K0 + dk, cfg.L0 + dl]
        phase = np.exp(
            2j * np.pi * (
                dl * (k_col[None, :] + n * cfg.M) / mn
                + n * l_col[None, :] / cfg.N
            )
        )
        h[rows] = taps * phase
    return h


def dump_tables(ch, fh):
    """Write the sparse tables as text rows: path, q, r, coef re, coef im."""
    fh.write("# path q r coef_re coef_im\n")
    for p in range(ch.P):
        for q in range(ch.size):
            c = ch.fwd_coef[p, q]
            fh.write(f"{p} {q} {ch.fwd_col[p, q]} {c.real:.17g} {c.imag:.17g}\n")
