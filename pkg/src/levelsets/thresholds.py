"""Threshold estimation: numerical integration, the quantile rule, and the
empirical rule for set families indexed by a height parameter."""
from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from .intervals import IntervalSet, canonicalize, empirical_mass
from .kde import KernelEstimate
from .numerics import superlevel_intervals

THRESHOLD_RULES = ("hyndman", "integration", "walther")


class FamilyMonotonicityWarning(UserWarning):
    """Sample mass of the set family increased with the height parameter."""


class DegenerateFamilyError(ValueError):
    """The set family holds no sample mass at any height."""


def kde_superlevel(est: KernelEstimate, threshold: float, points: int = 4096) -> IntervalSet:
    """{f_n >= threshold} on the widened sample window, endpoints refined."""
    grid = est.eval_window(points)
    vals = est.grid_eval(grid)
    pairs = superlevel_intervals(est.at, vals, grid, threshold, refine_tol=1e-10)
    return canonicalize(pairs, snap=True)


def solve_mass_threshold(scalar_f: Callable[[float], float], grid: np.ndarray,
                         vals: np.ndarray, interval_mass: Callable[[float, float], float],
                         tau: float, rel_tol: float = 1e-8) -> float:
    """Largest t whose superlevel set of f carries mass >= 1 - tau.

    Bisection on t; the superlevel set comes from grid bracketing plus root
    refinement, its mass from the supplied exact interval integral.  Ties
    resolve toward the larger t (the last feasible bisection point).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    target = 1.0 - tau
    finite = np.where(np.isfinite(vals), vals, np.inf)

    def mass_at(t: float) -> float:
        pairs = superlevel_intervals(scalar_f, finite, grid, t, refine_tol=1e-10)
        return sum(interval_mass(a, b) for a, b in pairs)

    t_hi = float(np.max(vals[np.isfinite(vals)]))
    while mass_at(t_hi) >= target:
        t_hi *= 2.0
    t_lo = t_hi * 1e-12
    while mass_at(t_lo) < target:
        t_lo *= 0.5
        if t_lo < 1e-300:
            raise ValueError("threshold search collapsed")
    while t_hi - t_lo > rel_tol * t_lo:
        mid = 0.5 * (t_lo + t_hi)
        if mid == t_lo or mid == t_hi:
            break
        if mass_at(mid) >= target:
            t_lo = mid
        else:
            t_hi = mid
    return t_lo


def integration_threshold(est: KernelEstimate, tau: float) -> float:
    """The t solving integral of f_n over {f_n >= t} = 1 - tau.

    The mass map is continuous and monotone from 1 to 0, so bisection cannot
    fail; superlevel masses use the exact Gaussian-mixture closed form.
    """
    grid = est.eval_window()
    vals = est.grid_eval(grid)
    return solve_mass_threshold(est.at, grid, vals, est.interval_mass, tau)


def density_integration_threshold(model, tau: float, points: int = 4096) -> float:
    """Oracle mode: the integration rule run on a true model density."""
    grid = np.linspace(model.support_hint[0], model.support_hint[1], points)
    vals = model.pdf_vec(grid)
    return solve_mass_threshold(model.pdf, grid, vals, model.interval_mass, tau)


def hyndman_threshold(est: KernelEstimate, tau: float) -> float:
    """tau-quantile of the estimate's own values at the sample points.

    Lower order statistic at index ceil(n * tau): the plug-in set then keeps
    empirical mass >= 1 - tau of the sample-point values.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    vals = np.sort(est.values_at_sample())
    k = max(1, math.ceil(est.n * tau))
    return float(vals[k - 1])


def quantile_of_values(values: np.ndarray, tau: float) -> float:
    """The same lower order-statistic convention on precomputed values."""
    vals = np.sort(np.asarray(values, dtype=float))
    k = max(1, math.ceil(len(vals) * tau))
    return float(vals[k - 1])


def walther_threshold(family: Callable[[float], IntervalSet], sample: np.ndarray,
                      tau: float, rel_tol: float = 1e-6) -> tuple[float, IntervalSet]:
    """Largest height lam with sample mass of family(lam) still >= 1 - tau.

    Bisection over lam returns the last feasible point (the supremum minus
    tolerance).  The upper bracket starts at n / sample range and doubles
    until the family loses feasibility; the family's sample mass must be
    non-increasing in lam (violations are detected on the probed points and
    reported as FamilyMonotonicityWarning).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    sample = np.asarray(sample, dtype=float)
    n = len(sample)
    target = 1.0 - tau
    probes: list[tuple[float, float]] = []

    def mass(lam: float) -> float:
        s = family(lam)
        p = empirical_mass(s, sample) if s else 0.0
        probes.append((lam, p))
        return p

    rng = float(sample[-1] - sample[0])
    lam_hi = n / rng if rng > 0 else float(n)
    doublings = 0
    while mass(lam_hi) >= target:
        lam_hi *= 2.0
        doublings += 1
        if doublings > 64:
            # family never loses feasibility; the largest probed height stands
            result = family(lam_hi)
            return lam_hi, result
    lam_lo = lam_hi / 2.0
    shrinks = 0
    while mass(lam_lo) < target:
        lam_lo *= 0.5
        shrinks += 1
        if shrinks > 128:
            raise DegenerateFamilyError("degenerate family: no feasible height")
    while lam_hi - lam_lo > rel_tol * lam_lo:
        mid = 0.5 * (lam_lo + lam_hi)
        if mid == lam_lo or mid == lam_hi:
            break
        if mass(mid) >= target:
            lam_lo = mid
        else:
            lam_hi = mid

    probes.sort()
    masses = [p for _, p in probes]
    if any(b > a + 1e-12 for a, b in zip(masses[:-1], masses[1:])):
        warnings.warn("family sample mass is not monotone in the height parameter",
                      FamilyMonotonicityWarning, stacklevel=2)
    return lam_lo, family(lam_lo)
