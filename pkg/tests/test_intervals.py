import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from levelsets.intervals import (IntervalSet, canonicalize, empirical_mass,
                                 interval_set, lebesgue_measure, levelset_error,
                                 measure_under_density, membership_grid,
                                 symmetric_difference, union)
from levelsets.numerics import QuadratureError, adaptive_simpson


def test_union_overlap_merge():
    assert union(interval_set((0, 1)), interval_set((0.5, 2))) == interval_set((0, 2))


def test_union_identity_case():
    assert union(IntervalSet.empty(), interval_set((3, 4))) == interval_set((3, 4))


def test_union_touching_merges():
    a = interval_set((0, 1), (2, 3))
    b = interval_set((1, 2))
    assert union(a, b) == interval_set((0, 3))


def test_symmetric_difference_textbook_overlap():
    a, b = interval_set((0, 0.5)), interval_set((0.25, 0.75))
    assert symmetric_difference(a, b) == interval_set((0, 0.25), (0.5, 0.75))


def test_symmetric_difference_identity():
    a = interval_set((0, 1), (2, 3))
    assert symmetric_difference(a, a) == IntervalSet.empty()


def test_symmetric_difference_empty_operand():
    a = interval_set((0, 1))
    assert symmetric_difference(a, IntervalSet.empty()) == a


def test_lebesgue_measure_examples():
    assert lebesgue_measure(interval_set((0, 0.5), (1, 1.25))) == pytest.approx(0.75)
    assert lebesgue_measure(IntervalSet.empty()) == 0.0
    assert lebesgue_measure(interval_set((2, 2))) == 0.0


def test_empirical_mass_examples():
    assert empirical_mass(interval_set((0, 1)), [-1.0, 0.5, 2.0]) == pytest.approx(1 / 3)
    assert empirical_mass(interval_set((-5, 5)), [-1.0, 0.5, 2.0]) == 1.0
    # boundary membership counts
    assert empirical_mass(interval_set((0.5, 0.5)), [0.5, 1.0]) == 0.5


def test_empirical_mass_empty_sample_errors():
    with pytest.raises(ValueError, match="empty sample"):
        empirical_mass(interval_set((0, 1)), [])


def test_measure_under_density_uniform():
    f = lambda x: 1.0 if 0 <= x <= 1 else 0.0
    assert measure_under_density(interval_set((0, 0.5)), f) == pytest.approx(0.5, abs=1e-8)
    assert measure_under_density(IntervalSet.empty(), f) == 0.0


def test_measure_under_density_normal_cdf_oracle():
    got = measure_under_density(interval_set((-0.6745, 0.6745)), norm.pdf)
    want = norm.cdf(0.6745) - norm.cdf(-0.6745)
    assert got == pytest.approx(want, abs=1e-6)


def test_measure_under_density_nonfinite_errors():
    f = lambda x: float("inf") if abs(x) < 0.25 else 1.0
    with pytest.raises(QuadratureError, match="not integrable"):
        measure_under_density(interval_set((0, 1)), f)


def test_quadrature_subdivision_cap_breach_errors():
    with pytest.raises(QuadratureError, match="cap breached"):
        adaptive_simpson(lambda x: math.sin(1000 * x) * 1000, 0.0, 3.0,
                         tol=1e-12, max_depth=2)


def test_levelset_error_examples():
    a = interval_set((0, 0.5))
    assert levelset_error(a, a, norm.pdf) == 0.0
    funif = lambda x: 1.0 if 0 <= x <= 1 else 0.0
    assert levelset_error(interval_set((0, 0.5)), interval_set((0.25, 0.75)),
                          funif) == pytest.approx(0.5, abs=1e-8)
    got = levelset_error(interval_set((-1, 1)), IntervalSet.empty(), norm.pdf)
    assert got == pytest.approx(norm.cdf(1) - norm.cdf(-1), abs=1e-6)


def test_canonical_invariants_enforced():
    with pytest.raises(ValueError):
        IntervalSet(((1.0, 0.5),))
    with pytest.raises(ValueError):
        IntervalSet(((0.0, 1.0), (1.0, 2.0)))  # touching must be merged first
    assert IntervalSet(((0.0, 1.0), (1.5, 2.0))).intervals == ((0.0, 1.0), (1.5, 2.0))


def test_json_round_trip():
    s = interval_set((0, 1), (2, 2), (3.5, 4))
    assert IntervalSet.from_json(s.to_json()) == s
    assert s.to_json() == '{"intervals": [[0.0, 1.0], [2.0, 2.0], [3.5, 4.0]]}'


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
raw_pairs = st.lists(st.tuples(finite, st.floats(min_value=0, max_value=5)), max_size=8)


def build(pairs):
    return IntervalSet.from_pairs([(a, a + w) for a, w in pairs])


@given(raw_pairs)
def test_canonicalization_idempotent(pairs):
    s = build(pairs)
    assert IntervalSet.from_pairs(s.intervals) == s
    assert canonicalize(s.intervals) == s


@given(raw_pairs, raw_pairs)
@settings(max_examples=60, deadline=None)
def test_union_matches_membership_oracle(pa, pb):
    a, b = build(pa), build(pb)
    grid = np.linspace(-16.0, 16.0, 100_000)
    got = membership_grid(union(a, b), grid)
    want = membership_grid(a, grid) | membership_grid(b, grid)
    assert np.array_equal(got, want)


@given(raw_pairs, raw_pairs)
@settings(max_examples=60, deadline=None)
def test_symmetric_difference_matches_membership_oracle(pa, pb):
    a, b = build(pa), build(pb)
    grid = np.linspace(-16.0, 16.0, 100_000)
    # closure adds measure-zero boundary points; exclude them from the oracle
    endpoints = np.array([x for s in (a, b) for iv in s.intervals for x in iv])
    if len(endpoints):
        keep = np.min(np.abs(grid[:, None] - endpoints[None, :]), axis=1) > 1e-9
    else:
        keep = np.ones(len(grid), dtype=bool)
    got = membership_grid(symmetric_difference(a, b), grid)
    want = membership_grid(a, grid) ^ membership_grid(b, grid)
    assert np.array_equal(got[keep], want[keep])


@given(raw_pairs, st.lists(finite, min_size=1, max_size=40))
def test_empirical_mass_matches_naive_count(pairs, xs):
    s = build(pairs)
    sample = sorted(xs)
    naive = sum(1 for x in sample if s.contains(x)) / len(sample)
    assert empirical_mass(s, sample) == pytest.approx(naive, abs=1e-15)


def test_pseudometric_axioms_randomized():
    rng = np.random.default_rng(4)
    densities = [norm.pdf,
                 lambda x: 0.5 * norm.pdf(x, -2, 0.5) + 0.5 * norm.pdf(x, 2, 1.0),
                 lambda x: 1.0 / 8.0 if -4 <= x <= 4 else 0.0]
    for _ in range(25):
        sets = []
        for _ in range(3):
            k = rng.integers(0, 4)
            starts = rng.uniform(-4, 4, size=k)
            widths = rng.uniform(0, 2, size=k)
            sets.append(IntervalSet.from_pairs(zip(starts, starts + widths)))
        a, b, c = sets
        f = densities[int(rng.integers(0, 3))]
        dab = levelset_error(a, b, f)
        dba = levelset_error(b, a, f)
        assert dab >= 0
        assert levelset_error(a, a, f) == 0.0
        assert dab == pytest.approx(dba, abs=1e-9)
        assert dab <= levelset_error(a, c, f) + levelset_error(c, b, f) + 1e-6
