"""Level-set estimators under one interface.

Methods: "plugin" (kernel superlevel set), "ssn" (dyadic histogram),
"ms" (excess-mass maximizer over at most M intervals), "ch" (convex hull of
the filtered sample), "chr" (its r-convex hull), and "walther"
(granulometric smoothing).  estimate() dispatches an EstimatorSpec; the
SampleSession variant reuses per-sample work across methods and taus, which
is what the simulation harness leans on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bandwidths import (BandwidthGrid, SELECTOR_IDS, _pair_diffs, bc_bandwidth,
                         lscv_bandwidth, sj_bandwidth, sw_bandwidth)
from .intervals import IntervalSet
from .kde import KernelEstimate
from .thresholds import (hyndman_threshold, integration_threshold, kde_superlevel,
                         walther_threshold)

METHOD_IDS = ("plugin", "ssn", "ms", "ch", "chr", "walther")

DEFAULT_BANDWIDTH = "sj"
DEFAULT_THRESHOLD = "hyndman"


class EmptyFilteredSampleError(ValueError):
    """No sample point clears the pilot threshold."""


@dataclass(frozen=True)
class EstimatorSpec:
    """A method identifier plus exactly the parameters that method needs."""

    method: str
    bandwidth: str | float | None = None  # selector id or fixed h (plugin/ch/chr/walther)
    threshold: str | None = None          # "hyndman" | "integration" (plugin/ch/chr)
    M: int | None = None                  # ms
    r: float | None = None                # chr / walther
    j: int | None = None                  # ssn
    name: str | None = None               # optional label override

    def __post_init__(self):
        if self.method not in METHOD_IDS:
            raise ValueError(f"unknown method {self.method!r}")
        needs = {
            "plugin": ("bandwidth", "threshold"),
            "ch": ("bandwidth", "threshold"),
            "chr": ("bandwidth", "threshold", "r"),
            "walther": ("bandwidth", "r"),
            "ms": ("M",),
            "ssn": ("j",),
        }[self.method]
        for param in ("M", "r", "j"):
            if param in needs and getattr(self, param) is None:
                raise ValueError(f"method {self.method!r} requires parameter {param!r}")
            if param not in needs and getattr(self, param) is not None:
                raise ValueError(f"method {self.method!r} does not take parameter {param!r}")
        for param in ("bandwidth", "threshold"):
            if param not in needs and getattr(self, param) is not None:
                raise ValueError(f"method {self.method!r} does not take parameter {param!r}")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be >= 1")
        if self.r is not None and self.r <= 0:
            raise ValueError("r must be positive")
        if self.j is not None and not 0 <= self.j <= 12:
            raise ValueError("j must be in [0, 12]")
        if isinstance(self.bandwidth, str) and self.bandwidth not in SELECTOR_IDS:
            raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}")
        if isinstance(self.bandwidth, (int, float)) and self.bandwidth <= 0:
            raise ValueError("fixed bandwidth must be positive")
        if self.threshold is not None and self.threshold not in ("hyndman", "integration"):
            raise ValueError(f"unknown threshold rule {self.threshold!r}")

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.method == "plugin":
            bw = self.bandwidth if self.bandwidth is not None else DEFAULT_BANDWIDTH
            bw = bw if isinstance(bw, str) else f"h{bw:g}"
            return f"plugin-{bw}"
        if self.method == "ms":
            return f"ms{self.M}"
        if self.method == "ch":
            return "ch"
        if self.method == "chr":
            return f"chr-r{self.r:g}"
        if self.method == "walther":
            return f"w-r{self.r:g}"
        return f"ssn-j{self.j}"


# -- excess mass ------------------------------------------------------------

def _max_disjoint_segments(weights: Sequence, point_mask: Sequence[bool], m: int):
    """Maximum-sum selection of at most m disjoint runs over an alternating
    point/gap item sequence; runs must start and end on point items.

    Works elementwise with +, and comparisons only, so exact numeric types
    (int, Fraction) stay exact end to end.
    """
    big_neg = float("-inf")
    t_len = len(weights)
    open_v = [[big_neg] * t_len for _ in range(m + 1)]
    closed_v = [[0] * t_len for _ in range(m + 1)]
    for k in range(1, m + 1):
        ov, cv = open_v[k], closed_v[k]
        cv_below = closed_v[k - 1]
        ov_prev = big_neg
        cv_prev = 0
        for t in range(t_len):
            w = weights[t]
            cand = ov_prev + w if ov_prev != big_neg else big_neg
            if point_mask[t]:
                started = (cv_below[t - 1] if t > 0 else 0) + w
                if started > cand:
                    cand = started
                ov[t] = cand
                cv[t] = cand if cand > cv_prev else cv_prev
            else:
                ov[t] = cand
                cv[t] = cv_prev
            ov_prev = ov[t]
            cv_prev = cv[t]
    # backtrack, preferring to skip zero-contribution segments on ties
    segments: list[tuple[int, int]] = []
    k, t = m, t_len - 1
    mode_closed = True
    end = -1
    while k > 0 and t >= 0:
        if mode_closed:
            prev = closed_v[k][t - 1] if t > 0 else 0
            if not point_mask[t] or closed_v[k][t] == prev:
                t -= 1
                continue
            end = t
            mode_closed = False
        else:
            started = (closed_v[k - 1][t - 1] if t > 0 else 0) + weights[t]
            if point_mask[t] and open_v[k][t] == started:
                segments.append((t, end))
                k -= 1
                t -= 1
                mode_closed = True
            else:
                t -= 1
    segments.reverse()
    return closed_v[m][t_len - 1], segments


def ms_maximizer(sample: Sequence, lam, m: int) -> IntervalSet:
    """Maximizer of the empirical excess mass P_n(B) - lam*mu(B) over unions
    of at most m closed intervals.

    Candidate endpoints can be restricted to sample points: shrinking an
    interval to its extreme contained points keeps the mass and reduces the
    length penalty.  Solved as a maximum-sum selection of at most m runs in
    O(n m); intervals with non-positive contribution are never included.
    """
    xs = sorted(sample)
    n = len(xs)
    if n < 1:
        raise ValueError("sample must be nonempty")
    if m < 1:
        raise ValueError("m must be >= 1")
    # scaled objective n*H: points count 1 each, gaps cost lam*n*width
    lam_n = lam * n
    weights: list = []
    point_mask: list[bool] = []
    for i, x in enumerate(xs):
        if i > 0:
            weights.append(-(lam_n * (x - xs[i - 1])))
            point_mask.append(False)
        weights.append(1)
        point_mask.append(True)
    _, segments = _max_disjoint_segments(weights, point_mask, m)
    pairs = [(float(xs[s // 2]), float(xs[e // 2])) for s, e in segments]
    return IntervalSet.from_pairs(pairs)


def ms_estimate(sample: np.ndarray, tau: float, m: int) -> IntervalSet:
    """Excess-mass estimate at the empirical mass-content threshold."""
    sample = np.sort(np.asarray(sample, dtype=float))
    _, result = walther_threshold(lambda lam: ms_maximizer(sample, lam, m), sample, tau)
    return result


def ssn_family(sample: np.ndarray, j: int):
    """Height-indexed family of dyadic-cell unions for a mapped sample.

    The sample is mapped affinely onto [0, 1] with padding range/n per side;
    family sets are mapped back to data scale.
    """
    sample = np.sort(np.asarray(sample, dtype=float))
    n = len(sample)
    lo, hi = float(sample[0]), float(sample[-1])
    rng = hi - lo
    pad = rng / n if rng > 0 else 1.0 / n
    width = rng + 2.0 * pad
    u = (sample - lo + pad) / width
    cells = 1 << j
    counts = np.bincount(np.clip((u * cells).astype(int), 0, cells - 1), minlength=cells)
    heights = counts * cells / n

    def family(lam: float) -> IntervalSet:
        keep = np.flatnonzero(heights >= lam)
        pairs = [(lo - pad + k / cells * width, lo - pad + (k + 1) / cells * width)
                 for k in keep]
        return IntervalSet.from_pairs(pairs)

    return family


# -- histogram on dyadic cells ----------------------------------------------

def ssn_estimate(sample: np.ndarray, tau: float, j: int) -> IntervalSet:
    """Union of dyadic histogram cells at resolution j, with the cell height
    chosen by the empirical mass-content rule."""
    sample = np.sort(np.asarray(sample, dtype=float))
    _, result = walther_threshold(ssn_family(sample, j), sample, tau)
    return result


# -- hybrid methods ----------------------------------------------------------

def xplus(sample: np.ndarray, tau: float, h: float,
          threshold_rule: str = DEFAULT_THRESHOLD) -> np.ndarray:
    """Sample points whose pilot density estimate clears the threshold."""
    est = KernelEstimate(np.sort(np.asarray(sample, dtype=float)), h)
    thr = _kde_threshold(est, tau, threshold_rule)
    kept = est.sample[est.values_at_sample() >= thr]
    if len(kept) == 0:
        raise EmptyFilteredSampleError("empty filtered sample")
    return kept


def ch_estimate(sample: np.ndarray, tau: float, h: float,
                threshold_rule: str = DEFAULT_THRESHOLD) -> IntervalSet:
    """Convex hull of the filtered sample (a single interval on the line)."""
    try:
        pts = xplus(sample, tau, h, threshold_rule)
    except EmptyFilteredSampleError:
        return IntervalSet.empty()
    return IntervalSet.from_pairs([(float(pts[0]), float(pts[-1]))])


def rconvex_hull(points: np.ndarray, r: float) -> IntervalSet:
    """r-convex hull of a finite point set on the line.

    Gaps of at most 2r merge (no open ball of radius r fits strictly inside);
    wider gaps separate components.
    """
    pts = np.sort(np.asarray(points, dtype=float))
    if len(pts) == 0:
        return IntervalSet.empty()
    breaks = np.flatnonzero(np.diff(pts) > 2.0 * r)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [len(pts) - 1]))
    return IntervalSet.from_pairs([(float(pts[s]), float(pts[e])) for s, e in zip(starts, ends)])


def chr_estimate(sample: np.ndarray, tau: float, h: float, r: float,
                 threshold_rule: str = DEFAULT_THRESHOLD) -> IntervalSet:
    """r-convex hull of the filtered sample."""
    try:
        pts = xplus(sample, tau, h, threshold_rule)
    except EmptyFilteredSampleError:
        return IntervalSet.empty()
    return rconvex_hull(pts, r)


def granulometric_family(sample: np.ndarray, values: np.ndarray, r: float,
                         lam: float) -> IntervalSet:
    """Union of r-balls around above-threshold points at distance >= r from
    every below-threshold point."""
    plus = sample[values >= lam]
    minus = sample[values < lam]
    if len(plus) == 0:
        return IntervalSet.empty()
    if len(minus) > 0:
        idx = np.searchsorted(minus, plus)
        left = np.where(idx > 0, plus - minus[np.maximum(idx - 1, 0)], np.inf)
        right = np.where(idx < len(minus), minus[np.minimum(idx, len(minus) - 1)] - plus, np.inf)
        plus = plus[np.minimum(left, right) >= r]
        if len(plus) == 0:
            return IntervalSet.empty()
    return IntervalSet.from_pairs([(float(x) - r, float(x) + r) for x in plus])


def walther_estimate(sample: np.ndarray, tau: float, r: float, pilot_h: float) -> IntervalSet:
    """Granulometric smoothing with the empirical mass-content height rule."""
    sample = np.sort(np.asarray(sample, dtype=float))
    est = KernelEstimate(sample, pilot_h)
    values = est.values_at_sample()
    _, result = walther_threshold(
        lambda lam: granulometric_family(sample, values, r, lam), sample, tau)
    return result


# -- plug-in and dispatch -----------------------------------------------------

def _kde_threshold(est: KernelEstimate, tau: float, rule: str) -> float:
    if rule == "hyndman":
        return hyndman_threshold(est, tau)
    if rule == "integration":
        return integration_threshold(est, tau)
    raise ValueError(f"unknown threshold rule {rule!r}")


def plugin_estimate(sample: np.ndarray, tau: float, h: float,
                    threshold_rule: str = DEFAULT_THRESHOLD) -> IntervalSet:
    """Superlevel set of the kernel estimate at the estimated threshold.

    A threshold above the estimate's maximum yields the empty set, which is a
    legal estimate."""
    est = KernelEstimate(np.sort(np.asarray(sample, dtype=float)), h)
    thr = _kde_threshold(est, tau, threshold_rule)
    return kde_superlevel(est, thr)


class SampleSession:
    """One sample's worth of cached work shared across estimator pipelines.

    The paired simulation design evaluates many (method, tau) cells on the
    same sample; bandwidths, kernel estimates, sample-point values, and
    thresholds are all reused.  `events` collects non-fatal diagnostics
    (boundary grid minimizers, empty filtered samples).
    """

    def __init__(self, sample: np.ndarray, grid: BandwidthGrid | None = None):
        self.sample = np.sort(np.asarray(sample, dtype=float))
        if len(self.sample) < 10:
            raise ValueError("estimation needs n >= 10")
        self.grid = grid if grid is not None else BandwidthGrid.default(self.sample)
        self.events: list[str] = []
        self._diffs: np.ndarray | None = None
        self._bw: dict = {}
        self._est: dict[float, KernelEstimate] = {}
        self._thr: dict = {}

    def pair_diffs(self) -> np.ndarray:
        if self._diffs is None:
            self._diffs = _pair_diffs(self.sample)
        return self._diffs

    def kernel_estimate(self, h: float) -> KernelEstimate:
        est = self._est.get(h)
        if est is None:
            est = KernelEstimate(self.sample, h)
            self._est[h] = est
        return est

    def bandwidth(self, rule: str | float, tau: float) -> float:
        if not isinstance(rule, str):
            return float(rule)
        key = (rule, tau) if rule in ("bc", "sw") else rule
        h = self._bw.get(key)
        if h is None:
            if rule == "cv":
                h = lscv_bandwidth(self.sample, self.grid, self.pair_diffs())
            elif rule == "sj":
                h = sj_bandwidth(self.sample, self.pair_diffs())
            elif rule == "bc":
                h = bc_bandwidth(self.sample, tau, self.grid)
            elif rule == "sw":
                h, thr = sw_bandwidth(self.sample, tau, self.grid, self.pair_diffs())
                self._thr[(h, tau, "integration")] = thr
            else:
                raise ValueError(f"unknown bandwidth rule {rule!r}")
            hs = self.grid.values()
            if rule != "sj" and (h == hs[0] or h == hs[-1]):
                self.events.append(f"boundary-bandwidth:{rule}")
            self._bw[key] = h
        return h

    def threshold(self, h: float, tau: float, rule: str) -> float:
        key = (h, tau, rule)
        thr = self._thr.get(key)
        if thr is None:
            thr = _kde_threshold(self.kernel_estimate(h), tau, rule)
            self._thr[key] = thr
        return thr

    def _xplus(self, tau: float, spec: EstimatorSpec) -> tuple[np.ndarray | None, float]:
        h = self.bandwidth(spec.bandwidth or DEFAULT_BANDWIDTH, tau)
        est = self.kernel_estimate(h)
        thr = self.threshold(h, tau, spec.threshold or DEFAULT_THRESHOLD)
        kept = est.sample[est.values_at_sample() >= thr]
        if len(kept) == 0:
            self.events.append(f"empty-filtered-sample:{spec.label}")
            return None, thr
        return kept, thr

    def estimate_full(self, spec: EstimatorSpec, tau: float) -> tuple[IntervalSet, float]:
        """The estimate plus its threshold (the density height for plug-in and
        hybrid pilots, the excess-mass height otherwise)."""
        if not 0.0 < tau < 1.0:
            raise ValueError("tau must be in (0, 1)")
        if spec.method == "plugin":
            h = self.bandwidth(spec.bandwidth or DEFAULT_BANDWIDTH, tau)
            thr = self.threshold(h, tau, spec.threshold or DEFAULT_THRESHOLD)
            return kde_superlevel(self.kernel_estimate(h), thr), thr
        if spec.method == "ms":
            lam, result = walther_threshold(
                lambda lam: ms_maximizer(self.sample, lam, spec.M), self.sample, tau)
            return result, lam
        if spec.method == "ssn":
            lam, result = walther_threshold(ssn_family(self.sample, spec.j),
                                            self.sample, tau)
            return result, lam
        if spec.method == "ch":
            pts, thr = self._xplus(tau, spec)
            if pts is None:
                return IntervalSet.empty(), thr
            return IntervalSet.from_pairs([(float(pts[0]), float(pts[-1]))]), thr
        if spec.method == "chr":
            pts, thr = self._xplus(tau, spec)
            if pts is None:
                return IntervalSet.empty(), thr
            return rconvex_hull(pts, spec.r), thr
        if spec.method == "walther":
            h = self.bandwidth(spec.bandwidth or DEFAULT_BANDWIDTH, tau)
            est = self.kernel_estimate(h)
            values = est.values_at_sample()
            lam, result = walther_threshold(
                lambda lam: granulometric_family(self.sample, values, spec.r, lam),
                self.sample, tau)
            return result, lam
        raise ValueError(f"unknown method {spec.method!r}")

    def estimate(self, spec: EstimatorSpec, tau: float) -> IntervalSet:
        return self.estimate_full(spec, tau)[0]


def estimate(spec: EstimatorSpec, sample: np.ndarray, tau: float,
             grid: BandwidthGrid | None = None) -> IntervalSet:
    """One-shot dispatch of a spec on a sample (sorted internally)."""
    return SampleSession(sample, grid).estimate(spec, tau)
