"""Synthetic bivariate targets on the unit square and the ISE replication study."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from .bandwidth import DEFAULT_EVAL_RESOLUTION, DEFAULT_LSCV_RESOLUTION, SearchGrid, select
from .estimator import DiagnosticsInput, Sample2, estimate_grid, normalize
from .kernels import Family

__all__ = [
    "MODELS",
    "TargetDensity",
    "IseSummary",
    "get_target",
    "target_pdf",
    "target_sample",
    "dirichlet_correlation",
    "ise_hat",
    "run_study",
    "replication_seed",
]

MODELS = ("A", "B", "C", "D", "E", "F")


# ---------------------------------------------------------------------------
# Univariate beta mixtures: value and first two derivatives
# ---------------------------------------------------------------------------


def _beta_terms(t, a, b):
    """Beta(a, b) pdf on (0, 1) with its first and second derivatives."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (a - 1.0) * np.log(t) + (b - 1.0) * np.log1p(-t) - betaln(a, b)
        f = np.exp(logf)
        u = (a - 1.0) / t - (b - 1.0) / (1.0 - t)
        du = -(a - 1.0) / t**2 - (b - 1.0) / (1.0 - t) ** 2
        d1 = f * u
        d2 = f * (u * u + du)
    inside = (t > 0) & (t < 1)
    return (np.where(inside, f, 0.0), np.where(inside, d1, 0.0), np.where(inside, d2, 0.0))


@dataclass(frozen=True)
class _BetaMixture:
    components: tuple  # (weight, a, b)

    def terms(self, t):
        f = d1 = d2 = 0.0
        for w, a, b in self.components:
            g, g1, g2 = _beta_terms(t, a, b)
            f, d1, d2 = f + w * g, d1 + w * g1, d2 + w * g2
        return f, d1, d2

    def sample(self, rng, n):
        weights = np.array([c[0] for c in self.components])
        if len(self.components) == 1:
            comp = np.zeros(n, dtype=int)
        else:
            comp = rng.choice(len(weights), size=n, p=weights / weights.sum())
        a = np.array([c[1] for c in self.components])[comp]
        b = np.array([c[2] for c in self.components])[comp]
        ga, gb = rng.standard_gamma(a), rng.standard_gamma(b)
        return ga / (ga + gb)


@dataclass(frozen=True)
class _ProductMixture:
    m1: _BetaMixture
    m2: _BetaMixture

    def terms(self, v):
        f1, d1, s1 = self.m1.terms(v[:, 0])
        f2, d2, s2 = self.m2.terms(v[:, 1])
        grad = np.column_stack([d1 * f2, f1 * d2])
        hess = np.empty((v.shape[0], 2, 2))
        hess[:, 0, 0], hess[:, 1, 1] = s1 * f2, f1 * s2
        hess[:, 0, 1] = hess[:, 1, 0] = d1 * d2
        return f1 * f2, grad, hess

    def sample(self, rng, n):
        return np.column_stack([self.m1.sample(rng, n), self.m2.sample(rng, n)])


@dataclass(frozen=True)
class _Dirichlet:
    """Law of the first two coordinates of a Dirichlet(a1, a2, a3) vector."""

    a1: float
    a2: float
    a3: float

    def terms(self, v):
        a1, a2, a3 = self.a1, self.a2, self.a3
        x, y = v[:, 0], v[:, 1]
        w = 1.0 - x - y
        inside = (x > 0) & (y > 0) & (w > 0)
        logc = gammaln(a1 + a2 + a3) - gammaln(a1) - gammaln(a2) - gammaln(a3)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.exp(logc + (a1 - 1) * np.log(x) + (a2 - 1) * np.log(y) + (a3 - 1) * np.log(w))
            l1 = (a1 - 1) / x - (a3 - 1) / w
            l2 = (a2 - 1) / y - (a3 - 1) / w
            c = -(a3 - 1) / w**2
            h11 = f * (l1 * l1 - (a1 - 1) / x**2 + c)
            h22 = f * (l2 * l2 - (a2 - 1) / y**2 + c)
            h12 = f * (l1 * l2 + c)
            grad = np.column_stack([f * l1, f * l2])
        f = np.where(inside, f, 0.0)
        grad = np.where(inside[:, None], grad, 0.0)
        hess = np.zeros((v.shape[0], 2, 2))
        hess[:, 0, 0] = np.where(inside, h11, 0.0)
        hess[:, 1, 1] = np.where(inside, h22, 0.0)
        hess[:, 0, 1] = hess[:, 1, 0] = np.where(inside, h12, 0.0)
        return f, grad, hess

    def sample(self, rng, n):
        g = rng.standard_gamma(np.array([self.a1, self.a2, self.a3]), size=(n, 3))
        return g[:, :2] / g.sum(axis=1, keepdims=True)


def _beta(a, b):
    return _BetaMixture(((1.0, a, b),))


_LAWS = {
    "A": _ProductMixture(_beta(3, 3), _beta(5, 5)),
    "B": _Dirichlet(2, 2, 7),
    "C": _ProductMixture(_beta(3, 2), _beta(2, 5)),
    "D": _Dirichlet(10, 10, 3),
    "E": _ProductMixture(_BetaMixture(((3 / 7, 2, 7), (4 / 7, 7, 2))), _beta(6, 6)),
    "F": _ProductMixture(
        _BetaMixture(((8 / 11, 3.5, 7), (3 / 11, 7, 3.5))),
        _BetaMixture(((5 / 7, 7, 2), (2 / 7, 2, 7))),
    ),
}


@dataclass(frozen=True)
class TargetDensity:
    """One of the six synthetic models, with vectorized pdf, gradient, Hessian and sampler."""

    model: str
    _law: object

    def _points(self, v):
        v = np.asarray(v, dtype=float)
        return v.reshape(-1, 2), v.shape[:-1]

    def pdf(self, v):
        pts, shape = self._points(v)
        f = self._law.terms(pts)[0].reshape(shape)
        return float(f) if f.ndim == 0 else f

    def grad(self, v):
        pts, shape = self._points(v)
        return self._law.terms(pts)[1].reshape(shape + (2,))

    def hess(self, v):
        pts, shape = self._points(v)
        return self._law.terms(pts)[2].reshape(shape + (2, 2))

    def sample(self, n, rng):
        if n < 1:
            raise ValueError("n must be at least 1")
        return Sample2(self._law.sample(rng, int(n)))

    def diagnostics(self):
        return DiagnosticsInput(self.pdf, self.grad, self.hess)


def get_target(model):
    key = str(model).upper()
    if key not in _LAWS:
        raise ValueError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
    return TargetDensity(key, _LAWS[key])


def target_pdf(model, v):
    """Exact density of ``model`` at ``v`` (array of shape ``(..., 2)``)."""
    return get_target(model).pdf(v)


def target_sample(model, n, seed):
    """``n`` iid draws from ``model``; ``seed`` may be an int, SeedSequence or Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return get_target(model).sample(n, rng)


def dirichlet_correlation(a1, a2, a3):
    """Correlation of the first two coordinates of a Dirichlet(a1, a2, a3) vector."""
    if min(a1, a2, a3) <= 0:
        raise ValueError("Dirichlet parameters must be positive")
    return -math.sqrt(a1 * a2 / ((a1 + a3) * (a2 + a3)))


def ise_hat(fitted, model):
    """Midpoint-rule ``int (fhat - f)^2`` on the grid of ``fitted``."""
    f = get_target(model).pdf(fitted.nodes).reshape(fitted.values.shape)
    d = fitted.values - f
    return float(np.sum(d * d) * fitted.cell_weight)


# ---------------------------------------------------------------------------
# Replication study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IseSummary:
    model: str
    bandwidth_family: str
    n: int
    N: int
    mean_ise: float
    sd_ise: float
    per_rep: tuple
    bandwidths: tuple = ()

    @classmethod
    def from_values(cls, model, family, n, values, bandwidths=()):
        vals = sorted(values)
        mean = math.fsum(vals) / len(vals)
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)) if len(vals) > 1 else 0.0
        return cls(model, family, n, len(values), mean, sd, tuple(values), tuple(bandwidths))


def replication_seed(seed, model, rep):
    """Substream for replication ``rep`` of ``model``; every family of a replication uses it."""
    return np.random.SeedSequence([int(seed), MODELS.index(model), int(rep)])


def _one_replication(model, rep, families, n, seed, grid, lscv_resolution, eval_resolution, normalize_fit):
    sample = target_sample(model, n, replication_seed(seed, model, rep))
    out = []
    for fam in families:
        res = select(sample, fam, grid, grid_resolution=lscv_resolution, eval_resolution=eval_resolution)
        fit = estimate_grid(sample, res.best, eval_resolution)
        if normalize_fit:
            fit = normalize(fit)
        out.append((ise_hat(fit, model), res.best))
    return out


def run_study(models, families, n=100, N=10, seed=0, grid=None,
              lscv_resolution=DEFAULT_LSCV_RESOLUTION, eval_resolution=DEFAULT_EVAL_RESOLUTION,
              normalize_fit=False, parallelism=1):
    """ISE of LSCV-selected fits over ``N`` replications per model and family.

    Replications are independent tasks; results are identical for any
    ``parallelism``.  Returns one :class:`IseSummary` per (model, family)
    in input order.
    """
    models = [get_target(m).model for m in models]
    families = [Family.parse(f) for f in families]
    grid = grid or SearchGrid()
    tasks = [(m, r) for m in models for r in range(N)]

    def run(task):
        return _one_replication(task[0], task[1], families, n, seed, grid,
                                lscv_resolution, eval_resolution, normalize_fit)

    if parallelism <= 1:
        results = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=int(parallelism)) as pool:
            results = list(pool.map(run, tasks))
    by_task = dict(zip(tasks, results))
    summaries = []
    for m in models:
        for k, fam in enumerate(families):
            reps = [by_task[(m, r)][k] for r in range(N)]
            summaries.append(IseSummary.from_values(m, fam.value, n, [r[0] for r in reps], [r[1] for r in reps]))
    return summaries
