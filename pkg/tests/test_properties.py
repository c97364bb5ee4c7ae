import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from assockde.bandwidth import h12_candidates
from assockde.estimator import DensityGrid, Sample2, estimate_standard, normalize
from assockde.kernels import (
    BandwidthMatrix2,
    RegionLabel,
    bs_h12_bounds,
    bs_kernel_eval,
    classify_region,
    modified_bs_moments,
    sarmanov_correlation_bounds,
    BetaParams,
)

unit = st.floats(0.0, 1.0)
bandwidth = st.floats(0.01, 1.0)
fraction = st.floats(0.0, 1.0)

settings.register_profile("assockde", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("assockde")

_AXIS = np.linspace(0.0, 1.0, 41)
_GRID = np.stack(np.meshgrid(_AXIS, _AXIS, indexing="ij"), axis=-1)


@given(unit, unit, bandwidth, bandwidth, fraction)
def test_kernel_nonnegative_across_admissible_interval(x1, x2, h11, h22, t):
    lo, hi = bs_h12_bounds((x1, x2), h11, h22)
    assert lo < 0 < hi
    H = BandwidthMatrix2.full(h11, h22, lo + t * (hi - lo))
    assert np.all(bs_kernel_eval((x1, x2), H, _GRID) >= -1e-12)


@given(st.floats(0.5, 20), st.floats(0.5, 20), st.floats(0.5, 20), st.floats(0.5, 20))
def test_sarmanov_bounds_bracket_zero(a1, b1, a2, b2):
    lo, hi = sarmanov_correlation_bounds(BetaParams(a1, b1), BetaParams(a2, b2))
    assert lo < 0 < hi


@given(st.floats(-1, -1e-9), st.floats(1e-9, 1), st.integers(1, 25))
def test_h12_candidates_contain_zero_and_stay_inside(lo, hi, m):
    c = h12_candidates(lo, hi, m)
    assert len(c) == m and 0.0 in c
    assert np.all((c >= lo) & (c <= hi))
    assert np.all(np.diff(c) > 0)


@given(st.lists(st.tuples(unit, unit), min_size=1, max_size=12), st.randoms(use_true_random=False), unit, unit)
def test_estimate_invariant_under_permutation(points, rnd, y1, y2):
    H = BandwidthMatrix2.diagonal(0.1, 0.2)
    shuffled = list(points)
    rnd.shuffle(shuffled)
    a = estimate_standard(Sample2(points), H, (y1, y2))
    b = estimate_standard(Sample2(shuffled), H, (y1, y2))
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@given(st.integers(2, 20), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_normalize_idempotent_and_scale_free(r, seed, c):
    vals = np.random.default_rng(seed).random((r, r)) + 1e-3
    g = normalize(DensityGrid(vals))
    assert abs(g.integral() - 1) < 1e-12
    np.testing.assert_allclose(normalize(g).values, g.values, rtol=1e-12)
    np.testing.assert_allclose(normalize(DensityGrid(c * vals)).values, g.values, rtol=1e-12)


@given(unit, unit, st.floats(0.01, 0.49), st.floats(0.01, 0.49))
def test_regions_partition_the_square(x1, x2, a1, a2):
    label = classify_region((x1, x2), (a1, a2))
    low1, high1 = x1 <= a1, x1 >= 1 - a1
    low2, high2 = x2 <= a2, x2 >= 1 - a2
    inside1 = not (low1 or high1)
    inside2 = not (low2 or high2)
    assert (label is RegionLabel.INTERIOR) == (inside1 and inside2)
    assert label.value.startswith("Angle") == (not inside1 and not inside2)


@given(st.floats(0.3, 0.7), st.floats(0.3, 0.7), st.floats(0.01, 0.1), st.floats(0.01, 0.1))
def test_interior_modified_kernel_is_unbiased(x1, x2, h11, h22):
    mom = modified_bs_moments((x1, x2), BandwidthMatrix2.diagonal(h11, h22))
    np.testing.assert_allclose(mom.a, 0.0, atol=1e-15)
    for j, (x, h) in enumerate(((x1, h11), (x2, h22))):
        assert abs(mom.B[j, j] - h * x * (1 - x) / (1 + h)) <= 1e-12
