"""Shared numerical routines: adaptive quadrature, bisection, superlevel extraction."""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

QUAD_TOL = 1e-8
QUAD_MAX_DEPTH = 50
ENDPOINT_SNAP = 1e-12


class QuadratureError(Exception):
    """Adaptive quadrature could not meet its tolerance or met a non-finite value."""


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = QUAD_TOL, max_depth: int = QUAD_MAX_DEPTH) -> float:
    """Integrate f over [a, b] by adaptive Simpson to absolute tolerance `tol`.

    Raises QuadratureError on non-finite integrand values or when the
    subdivision depth cap is breached before the tolerance is met.
    """
    if b <= a:
        return 0.0

    def ev(x: float) -> float:
        y = f(x)
        if not math.isfinite(y):
            raise QuadratureError(f"density not integrable on interval: f({x!r}) = {y!r}")
        return y

    fa, fb = ev(a), ev(b)
    m = 0.5 * (a + b)
    fm = ev(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(ev, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(ev, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = ev(lm), ev(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(f"quadrature subdivision cap breached on [{a!r}, {b!r}]")
    half = 0.5 * tol
    return (_simpson_rec(ev, a, m, fa, flm, fm, left, half, depth - 1)
            + _simpson_rec(ev, m, b, fm, frm, fb, right, half, depth - 1))


def bisect_root(f: Callable[[float], float], lo: float, hi: float,
                flo: float | None = None, fhi: float | None = None,
                xtol: float = 1e-10, max_iter: int = 200) -> float:
    """Locate a sign change of f inside [lo, hi] to absolute x-tolerance `xtol`.

    The bracket must have f(lo) and f(hi) of opposite (or zero) sign; jump
    discontinuities are acceptable, the bisection then converges to the jump.
    """
    if flo is None:
        flo = f(lo)
    if fhi is None:
        fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"no sign change on bracket [{lo!r}, {hi!r}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid == lo or mid == hi:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def decreasing_bisect_max(predicate: Callable[[float], bool], lo_hint: float,
                          hi: float, rel_tol: float = 1e-6,
                          max_iter: int = 200) -> float:
    """Largest x in (0, hi] satisfying a predicate that turns false as x grows.

    `lo_hint` must satisfy the predicate; `hi` must not.  Returns the last
    feasible point of the bisection (supremum minus tolerance).
    """
    lo = lo_hint
    for _ in range(max_iter):
        if hi - lo <= rel_tol * max(abs(lo), 1e-300):
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def geometric_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """Ascending geometric grid of `count` points from lo to hi."""
    if lo <= 0 or hi <= lo:
        raise ValueError("geometric grid needs 0 < lo < hi")
    return np.geomspace(lo, hi, count)


def superlevel_intervals(f: Callable[[float], float], values: np.ndarray,
                         grid: np.ndarray, threshold: float,
                         refine_tol: float = 1e-10) -> list[tuple[float, float]]:
    """Extract {x in [grid0, grid-1] : f(x) >= threshold} as interval endpoints.

    `values` are f evaluated on `grid` (ascending).  Runs of grid points at or
    above the threshold seed the intervals; each boundary between an inside and
    an outside grid point is refined by bisection of f - threshold.  The result
    is clipped to the grid range and endpoints within `refine_tol`.
    """
    above = values >= threshold
    if not above.any():
        return []
    g = lambda x: f(x) - threshold
    out: list[tuple[float, float]] = []
    idx = np.flatnonzero(np.diff(above.astype(np.int8)))
    starts = [0] if above[0] else []
    ends: list[int] = []
    for i in idx:
        if above[i + 1] and not above[i]:
            starts.append(i + 1)
        elif above[i] and not above[i + 1]:
            ends.append(i)
    if above[-1]:
        ends.append(len(grid) - 1)
    def refine(lo_i: int, hi_i: int, inside: float) -> float:
        # vectorized grid values and the scalar f can disagree by one ulp at
        # exact ties; fall back to the inside grid point in that case
        try:
            return bisect_root(g, float(grid[lo_i]), float(grid[hi_i]), xtol=refine_tol)
        except ValueError:
            return inside

    for s, e in zip(starts, ends):
        if s == 0:
            left = float(grid[0])
        else:
            left = refine(s - 1, s, float(grid[s]))
        if e == len(grid) - 1:
            right = float(grid[-1])
        else:
            right = refine(e, e + 1, float(grid[e]))
        out.append((left, right))
    return out


def snap_endpoints(pairs: Sequence[tuple[float, float]],
                   tol: float = ENDPOINT_SNAP) -> list[tuple[float, float]]:
    """Collapse sub-tolerance slivers and gaps left behind by root refinement."""
    merged: list[list[float]] = []
    for a, b in sorted(pairs):
        if b - a < 0:
            a, b = b, a
        if merged and a - merged[-1][1] <= tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]
