import math

import numpy as np
import pytest
from scipy import stats

from assockde.bandwidth import SearchGrid
from assockde.estimator import DensityGrid
from assockde.simulation import (
    MODELS,
    dirichlet_correlation,
    get_target,
    ise_hat,
    replication_seed,
    run_study,
    target_pdf,
    target_sample,
)

from . import oracles

TINY_GRID = SearchGrid(
    h11_values=tuple(np.geomspace(0.02, 0.3, 4)),
    h22_values=tuple(np.geomspace(0.02, 0.3, 4)),
    h12_points_per_cell=3,
    h_values=tuple(np.linspace(0.2, 1.5, 6)),
)


def _fine_grid(resolution):
    g = DensityGrid(np.zeros((resolution, resolution)))
    return g, g.nodes


def test_model_a_value_at_centre():
    # Beta(3,3)(0.5) * Beta(5,5)(0.5) = 1.875 * 2.4609375
    assert target_pdf("A", [0.5, 0.5]) == pytest.approx(1.875 * 2.4609375, rel=1e-13)


def test_dirichlet_models_vanish_off_simplex():
    for m in ("B", "D"):
        assert target_pdf(m, [0.7, 0.6]) == 0.0
        assert target_pdf(m, [0.3, 0.3]) > 0
    # Dirichlet(2,2,7) at (0.2, 0.3): Gamma(11)/(Gamma(2)^2 Gamma(7)) * 0.2 * 0.3 * 0.5^6
    want = math.gamma(11) / (math.gamma(7)) * 0.2 * 0.3 * 0.5**6
    assert target_pdf("B", [0.2, 0.3]) == pytest.approx(want, rel=1e-12)


def test_mixture_model_value():
    x = (0.3, 0.6)
    m1 = 3 / 7 * stats.beta.pdf(x[0], 2, 7) + 4 / 7 * stats.beta.pdf(x[0], 7, 2)
    assert target_pdf("E", x) == pytest.approx(m1 * stats.beta.pdf(x[1], 6, 6), rel=1e-12)
    f1 = 8 / 11 * stats.beta.pdf(x[0], 3.5, 7) + 3 / 11 * stats.beta.pdf(x[0], 7, 3.5)
    f2 = 5 / 7 * stats.beta.pdf(x[1], 7, 2) + 2 / 7 * stats.beta.pdf(x[1], 2, 7)
    assert target_pdf("F", x) == pytest.approx(f1 * f2, rel=1e-12)


def test_unknown_model():
    with pytest.raises(ValueError):
        get_target("Z")
    assert get_target("c").model == "C"


def test_dirichlet_correlation():
    assert dirichlet_correlation(2, 2, 7) == pytest.approx(-2 / 9, abs=1e-12)
    assert dirichlet_correlation(10, 10, 3) == pytest.approx(-10 / 13, abs=1e-12)
    assert dirichlet_correlation(1, 1, 1) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        dirichlet_correlation(0, 1, 1)


@pytest.mark.parametrize("model", MODELS)
def test_pdf_integrates_to_one(model):
    g, nodes = _fine_grid(1024)
    f = target_pdf(model, nodes)
    assert abs(np.sum(f) * g.cell_weight - 1) < 1e-6


@pytest.mark.parametrize("model", MODELS)
def test_pdf_has_unit_mass_under_accurate_quadrature(model):
    pts, w = oracles.gauss_square(300)
    if model in ("B", "D"):
        # map the square onto the simplex: (u, t) -> (u, (1 - u) t)
        u, t = pts[..., 0], pts[..., 1]
        pts = np.stack([u, (1 - u) * t], axis=-1)
        w = w * (1 - u)
    assert np.sum(target_pdf(model, pts) * w) == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("model", MODELS)
def test_midpoint_mass_error_is_second_order(model):
    errs = []
    for r in (256, 512, 1024):
        g, nodes = _fine_grid(r)
        errs.append(np.sum(target_pdf(model, nodes)) * g.cell_weight - 1)
    if abs(errs[-1]) > 1e-9:
        assert errs[0] / errs[1] == pytest.approx(4, rel=0.01)
        assert errs[1] / errs[2] == pytest.approx(4, rel=0.01)


@pytest.mark.parametrize("model", MODELS)
def test_derivatives_match_finite_differences(model):
    T = get_target(model)
    rng = np.random.default_rng(42)
    pts = rng.uniform(0.1, 0.9, size=(20, 2))
    if model in ("B", "D"):
        pts = pts[pts.sum(axis=1) < 0.9]
    eps = 1e-5
    for k in range(2):
        e = np.zeros(2)
        e[k] = eps
        fd = (T.pdf(pts + e) - T.pdf(pts - e)) / (2 * eps)
        np.testing.assert_allclose(T.grad(pts)[:, k], fd, rtol=1e-6, atol=1e-6)
        fd2 = (T.grad(pts + e) - T.grad(pts - e)) / (2 * eps)
        np.testing.assert_allclose(T.hess(pts)[:, k, :], fd2, rtol=1e-5, atol=1e-4)


def test_sampler_determinism_and_support():
    a = target_sample("B", 500, 42).points
    b = target_sample("B", 500, 42).points
    assert np.array_equal(a, b)
    assert np.all(a.sum(axis=1) <= 1)
    assert not np.array_equal(a, target_sample("B", 500, 43).points)
    with pytest.raises(ValueError):
        target_sample("A", 0, 1)


def test_model_a_sample_mean():
    pts = target_sample("A", 20000, 42).points
    np.testing.assert_allclose(pts.mean(axis=0), [0.5, 0.5], atol=0.01)


@pytest.mark.parametrize("model", MODELS)
def test_sampler_matches_density(model):
    # chi-square on a 10x10 partition; cell probabilities from a 40x40 midpoint sub-grid per cell
    k, sub = 10, 40
    g, nodes = _fine_grid(k * sub)
    f = target_pdf(model, nodes).reshape(k * sub, k * sub) * g.cell_weight
    probs = f.reshape(k, sub, k, sub).sum(axis=(1, 3)).ravel()
    probs /= probs.sum()
    n = 20000
    pts = target_sample(model, n, 42).points
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=k, range=[[0, 1], [0, 1]])
    counts = counts.ravel()
    keep = probs * n >= 5
    expected = probs[keep] * n
    observed = counts[keep]
    expected *= observed.sum() / expected.sum()
    assert stats.chisquare(observed, expected).pvalue > 1e-3
    assert counts[~keep].sum() <= max(20, 3 * probs[~keep].sum() * n)


def test_ise_of_exact_and_zero_fit():
    g, nodes = _fine_grid(128)
    f = target_pdf("C", nodes).reshape(128, 128)
    assert ise_hat(DensityGrid(f), "C") == 0.0
    want = np.sum(f * f) * g.cell_weight
    assert ise_hat(DensityGrid(np.zeros_like(f)), "C") == pytest.approx(want, rel=1e-13)


def test_replication_seed_is_shared_across_families():
    a = replication_seed(5, "C", 3).generate_state(4)
    b = replication_seed(5, "C", 3).generate_state(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, replication_seed(5, "C", 4).generate_state(4))
    assert not np.array_equal(a, replication_seed(5, "D", 3).generate_state(4))


def test_run_study_shape_and_reproducibility():
    kw = dict(n=40, N=3, seed=42, grid=TINY_GRID, lscv_resolution=32, eval_resolution=64)
    a = run_study(["A", "D"], ["full", "scott", "diagonal"], **kw)
    assert [(s.model, s.bandwidth_family) for s in a] == [
        (m, f) for m in ("A", "D") for f in ("full", "scott", "diagonal")
    ]
    for s in a:
        assert s.N == 3 and len(s.per_rep) == 3 and s.n == 40
        assert all(v > 0 and math.isfinite(v) for v in s.per_rep)
        assert s.mean_ise == pytest.approx(np.mean(s.per_rep), rel=1e-12)
        assert s.sd_ise == pytest.approx(np.std(s.per_rep, ddof=1), rel=1e-10)
    b = run_study(["A", "D"], ["full", "scott", "diagonal"], parallelism=4, **kw)
    assert [s.per_rep for s in a] == [s.per_rep for s in b]
    assert [s.bandwidths for s in a] == [s.bandwidths for s in b]


def test_run_study_normalized_fits():
    kw = dict(n=30, N=2, seed=1, grid=TINY_GRID, lscv_resolution=32, eval_resolution=64)
    plain = run_study(["C"], ["diagonal"], **kw)[0]
    normed = run_study(["C"], ["diagonal"], normalize_fit=True, **kw)[0]
    assert plain.bandwidths == normed.bandwidths
    assert plain.per_rep != normed.per_rep
