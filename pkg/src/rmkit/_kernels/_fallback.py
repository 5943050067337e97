"""Pure-numpy implementations of the hot inner-loop kernels.

Semantics here are the reference contract for the compiled twin in
``_core.pyx``: both minimize the same piecewise objective over the same
candidate set (segment endpoints, interior stationary points, floor, cap)
and both break near-ties (relative 1e-12) toward the smallest weight.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

_REL_TIE = 1e-12


def _fin_int(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & _MASK
    z = (z ^ (z >> 27)) * _MIX2 & _MASK
    return z ^ (z >> 31)


def hash_key(seed: int) -> int:
    """Spread a user seed into a 64-bit stream key."""
    return _fin_int((seed & _MASK) + _GOLDEN & _MASK)


def unit_hash(key: int, cells: np.ndarray) -> np.ndarray:
    """Map 64-bit cell counters to uniform [0,1) floats, deterministically.

    This is a counter-based construction: position ``c`` of a SplitMix64
    stream keyed by ``key``. Integer arithmetic wraps mod 2**64, so the
    compiled and numpy paths agree bit-for-bit.
    """
    z = np.asarray(cells, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + (z + np.uint64(1)) * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _pick(ws: np.ndarray, fs: np.ndarray) -> tuple[float, float]:
    """Smallest w within relative 1e-12 of the minimum value.

    ``ws`` must be ascending; exact float ties and sub-1e-12 'improvements'
    both resolve to the earliest candidate.
    """
    fmin = float(fs.min())
    cutoff = fmin + _REL_TIE * abs(fmin)
    idx = int(np.argmax(fs <= cutoff))
    return float(ws[idx]), float(fs[idx])


def _segments(R: np.ndarray, r: np.ndarray, floor: float, cap: float):
    """Shared breakpoint sweep: per-segment active-set sums.

    Returns ascending segment starts [floor, b_1, ..., b_m], matching
    per-segment (sum r^2, sum R*r, sum R^2) arrays, and the active mask
    deltas already folded in via prefix sums.
    """
    v0 = R + floor * r
    act = (v0 > 0.0) | ((v0 == 0.0) & (r > 0.0))
    a0 = float(np.sum(r[act] * r[act]))
    b0 = float(np.sum(R[act] * r[act]))
    c0 = float(np.sum(R[act] * R[act]))

    nz = r != 0.0
    Rn, rn = R[nz], r[nz]
    bp = -Rn / rn
    keep = (bp > floor) & (bp < cap)
    bp, Rn, rn = bp[keep], Rn[keep], rn[keep]
    order = np.argsort(bp, kind="stable")
    bp, Rn, rn = bp[order], Rn[order], rn[order]

    sign = np.where(rn > 0.0, 1.0, -1.0)
    A = a0 + np.concatenate(([0.0], np.cumsum(sign * rn * rn)))
    B = b0 + np.concatenate(([0.0], np.cumsum(sign * Rn * rn)))
    C = c0 + np.concatenate(([0.0], np.cumsum(sign * Rn * Rn)))
    starts = np.concatenate(([floor], bp))
    return starts, A, B, C


def best_weight_squared(
    R: np.ndarray, r: np.ndarray, w_sum: float, floor: float, cap: float
) -> tuple[float, float]:
    """Minimize sum_j max(0, R_j + w*r_j)^2 / (w_sum + w)^2 over [floor, cap]."""
    if cap <= floor:
        v = np.maximum(0.0, R + floor * r)
        return floor, float(v @ v) / (w_sum + floor) ** 2

    starts, A, B2, C = _segments(R, r, floor, cap)
    B = 2.0 * B2
    ends = np.concatenate((starts[1:], [cap]))

    with np.errstate(divide="ignore", invalid="ignore"):
        den = 2.0 * A * w_sum - B
        wstar = (2.0 * C - B * w_sum) / den
    ok = (den != 0.0) & np.isfinite(wstar) & (wstar > starts) & (wstar < ends)
    wstar = np.where(ok, wstar, starts)  # harmless duplicate when infeasible

    # Ascending candidate order: start_0, stat_0, start_1, stat_1, ..., cap.
    ws = np.empty(2 * starts.size + 1)
    ws[0:-1:2] = starts
    ws[1:-1:2] = wstar
    ws[-1] = cap
    seg_of = np.empty(ws.size, dtype=np.intp)
    seg_of[0:-1:2] = np.arange(starts.size)
    seg_of[1:-1:2] = np.arange(starts.size)
    seg_of[-1] = starts.size - 1

    num = A[seg_of] * ws * ws + B[seg_of] * ws + C[seg_of]
    fs = num / (w_sum + ws) ** 2
    w, _ = _pick(ws, fs)
    v = np.maximum(0.0, R + w * r)
    return w, float(v @ v) / (w_sum + w) ** 2


def best_weight_linear_sum(
    R: np.ndarray, r: np.ndarray, w_sum: float, floor: float, cap: float
) -> tuple[float, float]:
    """Minimize sum_j max(0, R_j + w*r_j) / (w_sum + w) over [floor, cap].

    Piecewise linear-over-linear, so each segment's minimum sits at an
    endpoint; the candidate set is just segment starts plus cap.
    """
    if cap <= floor:
        v = np.maximum(0.0, R + floor * r)
        return floor, float(v.sum()) / (w_sum + floor)

    v0 = R + floor * r
    act = (v0 > 0.0) | ((v0 == 0.0) & (r > 0.0))
    la0 = float(np.sum(r[act]))
    lb0 = float(np.sum(R[act]))

    nz = r != 0.0
    Rn, rn = R[nz], r[nz]
    bp = -Rn / rn
    keep = (bp > floor) & (bp < cap)
    bp, Rn, rn = bp[keep], Rn[keep], rn[keep]
    order = np.argsort(bp, kind="stable")
    bp, Rn, rn = bp[order], Rn[order], rn[order]

    sign = np.where(rn > 0.0, 1.0, -1.0)
    La = la0 + np.concatenate(([0.0], np.cumsum(sign * rn)))
    Lb = lb0 + np.concatenate(([0.0], np.cumsum(sign * Rn)))
    ws = np.concatenate(([floor], bp, [cap]))
    seg_of = np.concatenate((np.arange(bp.size + 1), [bp.size]))

    fs = (La[seg_of] * ws + Lb[seg_of]) / (w_sum + ws)
    w, _ = _pick(ws, fs)
    return w, float(np.maximum(0.0, R + w * r).sum()) / (w_sum + w)
