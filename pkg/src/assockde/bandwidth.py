"""Least-squares cross-validation over full, Scott and diagonal bandwidth families.

For fixed ``(h11, h22)`` the LSCV objective is a quadratic polynomial in
``rho = h12 / sqrt(h11 h22)``::

    LSCV(rho) = w (c0 + 2 rho c1 + rho^2 c2) - 2 / (n (n - 1)) (s0 + rho s1)

where the ``c`` terms come from midpoint quadrature of the squared estimate
and the ``s`` terms are exact leave-one-out sums.  Each ``(h11, h22)`` cell
is therefore tabulated once and every ``h12`` candidate in it is scored in
constant time.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyCandidateSetError, InadmissibleBandwidthError
from .estimator import _as_sample, map_blocks, midpoint_axis, tabulate_axis
from .kernels import BandwidthMatrix2, Family, _as_bandwidth, margin_table, paired_rho_bounds, rho_bounds_from_corners, within_bounds

__all__ = [
    "SearchGrid",
    "TraceEntry",
    "LscvResult",
    "h12_candidates",
    "lscv_objective",
    "select_full",
    "select_scott",
    "select_diagonal",
    "select",
    "DEFAULT_LSCV_RESOLUTION",
    "DEFAULT_EVAL_RESOLUTION",
]

DEFAULT_LSCV_RESOLUTION = 64
DEFAULT_EVAL_RESOLUTION = 201


def _default_diagonal_values():
    return tuple(np.geomspace(0.01, 0.8, 20))


def _default_scott_values():
    return tuple(np.linspace(2.0 / 40, 2.0, 40))


def _strictly_increasing(name, values):
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"{name} must be a non-empty list")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must contain positive finite values")
    if np.any(np.diff(v) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return tuple(float(t) for t in v)


@dataclass(frozen=True)
class SearchGrid:
    """Candidate values scanned by the three selectors.

    ``H0`` is the fixed Scott matrix; ``None`` means the sample covariance.
    """

    h11_values: tuple = field(default_factory=_default_diagonal_values)
    h22_values: tuple = field(default_factory=_default_diagonal_values)
    h12_points_per_cell: int = 9
    h_values: tuple = field(default_factory=_default_scott_values)
    H0: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "h11_values", _strictly_increasing("h11_values", self.h11_values))
        object.__setattr__(self, "h22_values", _strictly_increasing("h22_values", self.h22_values))
        object.__setattr__(self, "h_values", _strictly_increasing("h_values", self.h_values))
        if int(self.h12_points_per_cell) != self.h12_points_per_cell or self.h12_points_per_cell < 1:
            raise ValueError("h12_points_per_cell must be a positive integer")
        if self.H0 is not None:
            H0 = np.asarray(self.H0, dtype=float)
            if H0.shape != (2, 2) or not np.allclose(H0, H0.T):
                raise ValueError("H0 must be a symmetric 2x2 matrix")
            if H0[0, 0] <= 0 or np.linalg.det(H0) <= 0:
                raise ValueError("H0 must be positive definite")
            object.__setattr__(self, "H0", tuple(map(tuple, H0.tolist())))


@dataclass(frozen=True)
class TraceEntry:
    candidate: BandwidthMatrix2
    objective: float
    admissible: bool
    h12_raw: Optional[float] = None

    @property
    def clamped(self):
        return self.h12_raw is not None and self.h12_raw != self.candidate.h12


@dataclass(frozen=True)
class LscvResult:
    best: BandwidthMatrix2
    objective: float
    trace: tuple
    family: Family


def h12_candidates(lo, hi, m):
    """``m`` evenly spaced values in ``[lo, hi]`` with the one nearest zero set to zero."""
    if m == 1:
        return np.zeros(1)
    vals = np.linspace(lo, hi, m)
    vals[np.argmin(np.abs(vals))] = 0.0
    return vals


class _LscvTables:
    """Per-bandwidth margin tables for one sample, built once and shared read-only."""

    def __init__(self, sample, grid_resolution, eval_resolution):
        if sample.n < 2:
            raise ValueError("LSCV needs at least two observations")
        self.n = sample.n
        self.pts = sample.points
        self.nodes = midpoint_axis(grid_resolution)
        self.weight = 1.0 / grid_resolution**2
        self.eval_nodes = None if eval_resolution is None else midpoint_axis(eval_resolution)

    def axis(self, coord, h):
        x = self.pts[:, coord]
        quad = tabulate_axis(self.nodes, h, x)
        loo = tabulate_axis(x, h, x)
        g, gz = loo.g.copy(), loo.gz.copy()
        np.fill_diagonal(g, 0.0)
        np.fill_diagonal(gz, 0.0)
        if self.eval_nodes is None:
            ev = (quad.z_lo, quad.z_hi)
        else:
            t = margin_table(self.eval_nodes, h, [])
            ev = (t.z_lo, t.z_hi)
        return {"quad": quad, "loo_g": g, "loo_gz": gz, "loo_z": (loo.z_lo, loo.z_hi), "eval_z": ev}


def _rho_interval(t1, t2):
    lo_q, hi_q = rho_bounds_from_corners(t1["quad"].z_lo, t1["quad"].z_hi, t2["quad"].z_lo, t2["quad"].z_hi)
    lo_e, hi_e = rho_bounds_from_corners(*t1["eval_z"], *t2["eval_z"])
    lo_s, hi_s = paired_rho_bounds(*t1["loo_z"], *t2["loo_z"])
    return max(lo_q, lo_e, lo_s), min(hi_q, hi_e, hi_s)


def _h12_interval(t1, t2, h11, h22):
    lo, hi = _rho_interval(t1, t2)
    s = math.sqrt(h11 * h22)
    lo_h, hi_h = lo * s, hi * s
    if lo_h <= -s:
        lo_h = float(np.nextafter(-s, 0.0))
    if hi_h >= s:
        hi_h = float(np.nextafter(s, 0.0))
    return lo_h, hi_h


def _quadratic_terms(t1, t2, n, weight):
    """Coefficients of the LSCV quadratic in ``rho`` for one cell."""
    q1, q2 = t1["quad"], t2["quad"]

    def block(rows):
        m0 = q1.g[rows] @ q2.g.T
        m1 = q1.gz[rows] @ q2.gz.T
        return np.array([np.sum(m0 * m0), np.sum(m0 * m1), np.sum(m1 * m1)])

    c = np.zeros(3)
    for part in map_blocks(block, q1.g.shape[0]):
        c += part
    c *= weight / (n * n)
    s0 = np.sum(t1["loo_g"] * t2["loo_g"])
    s1 = np.sum(t1["loo_gz"] * t2["loo_gz"])
    k = 2.0 / (n * (n - 1.0))
    return c, k * s0, k * s1


def _objective(terms, rho):
    (c0, c1, c2), s0, s1 = terms
    return float((c0 + 2.0 * rho * c1 + rho * rho * c2) - (s0 + rho * s1))


def lscv_objective(sample, H, grid_resolution=DEFAULT_LSCV_RESOLUTION, eval_resolution=None):
    """``int fhat^2 - (2/n) sum_i fhat_{-i}(X_i)`` for one bandwidth matrix.

    The first term uses the midpoint rule at ``grid_resolution``; the
    leave-one-out term is exact.  ``H`` must be admissible at every
    quadrature node, every observation and, if given, every node of the
    ``eval_resolution`` grid.
    """
    sample = _as_sample(sample)
    H = _as_bandwidth(H)
    tables = _LscvTables(sample, grid_resolution, eval_resolution)
    t1, t2 = tables.axis(0, H.h11), tables.axis(1, H.h22)
    lo, hi = _h12_interval(t1, t2, H.h11, H.h22)
    if not within_bounds(H.h12, lo, hi):
        raise InadmissibleBandwidthError(
            f"h12={H.h12:.6g} outside the globally admissible interval [{lo:.6g}, {hi:.6g}]",
            value=H.h12,
            interval=(lo, hi),
        )
    return _objective(_quadratic_terms(t1, t2, sample.n, tables.weight), H.rho)


def _parallel_map(fn, items, parallelism):
    if parallelism <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=int(parallelism)) as pool:
        return list(pool.map(fn, items))


def _build_tables(tables, coord, values, parallelism):
    return dict(zip(values, _parallel_map(lambda h: tables.axis(coord, h), list(values), parallelism)))


def _argmin(trace, family):
    scored = [e for e in trace if e.admissible and math.isfinite(e.objective)]
    if not scored:
        raise EmptyCandidateSetError(f"no admissible {family.value} bandwidth candidate was scored")
    best = min(scored, key=lambda e: (e.objective, e.candidate.key()))
    return LscvResult(best.candidate, best.objective, tuple(trace), family)


def _entry(candidate, objective, h12_raw=None):
    ok = math.isfinite(objective)
    return TraceEntry(candidate, objective if ok else math.nan, ok, h12_raw)


def select_full(sample, grid=None, grid_resolution=DEFAULT_LSCV_RESOLUTION,
                eval_resolution=DEFAULT_EVAL_RESOLUTION, parallelism=1):
    """Full-matrix search: every ``(h11, h22)`` cell with a discretized admissible ``h12`` range.

    The admissible ``h12`` interval of a cell is the intersection of the
    pointwise intervals over the quadrature nodes, the observations and the
    ``eval_resolution`` grid used later for export (``None`` to skip it).
    Zero is always among the scored ``h12`` values.
    """
    sample = _as_sample(sample)
    grid = grid or SearchGrid()
    tables = _LscvTables(sample, grid_resolution, eval_resolution)
    tab1 = _build_tables(tables, 0, grid.h11_values, parallelism)
    tab2 = _build_tables(tables, 1, grid.h22_values, parallelism)
    cells = [(a, b) for a in grid.h11_values for b in grid.h22_values]

    def score(cell):
        h11, h22 = cell
        t1, t2 = tab1[h11], tab2[h22]
        lo, hi = _h12_interval(t1, t2, h11, h22)
        terms = _quadratic_terms(t1, t2, sample.n, tables.weight)
        s = math.sqrt(h11 * h22)
        out = []
        for h12 in h12_candidates(lo, hi, grid.h12_points_per_cell):
            H = BandwidthMatrix2.full(h11, h22, float(h12))
            out.append(_entry(H, _objective(terms, float(h12) / s)))
        return out

    trace = [e for cell in _parallel_map(score, cells, parallelism) for e in cell]
    return _argmin(trace, Family.FULL)


def select_diagonal(sample, grid=None, grid_resolution=DEFAULT_LSCV_RESOLUTION,
                    eval_resolution=DEFAULT_EVAL_RESOLUTION, parallelism=1):
    """Exhaustive scan of ``(h11, h22)`` with ``h12 = 0``."""
    sample = _as_sample(sample)
    grid = grid or SearchGrid()
    tables = _LscvTables(sample, grid_resolution, eval_resolution)
    tab1 = _build_tables(tables, 0, grid.h11_values, parallelism)
    tab2 = _build_tables(tables, 1, grid.h22_values, parallelism)
    cells = [(a, b) for a in grid.h11_values for b in grid.h22_values]

    def score(cell):
        h11, h22 = cell
        terms = _quadratic_terms(tab1[h11], tab2[h22], sample.n, tables.weight)
        return _entry(BandwidthMatrix2.diagonal(h11, h22), _objective(terms, 0.0))

    return _argmin(_parallel_map(score, cells, parallelism), Family.DIAGONAL)


def select_scott(sample, grid=None, grid_resolution=DEFAULT_LSCV_RESOLUTION,
                 eval_resolution=DEFAULT_EVAL_RESOLUTION, parallelism=1):
    """Scan ``h * H0``, clamping the off-diagonal into the admissible interval.

    ``H0`` defaults to the sample covariance.  Each trace entry keeps the
    unclamped ``h * h0_12`` in ``h12_raw``.
    """
    sample = _as_sample(sample)
    grid = grid or SearchGrid()
    H0 = sample.covariance() if grid.H0 is None else np.asarray(grid.H0, dtype=float)
    if not (H0[0, 0] > 0 and H0[1, 1] > 0 and np.linalg.det(H0) > 0):
        raise ValueError("Scott reference matrix H0 is not positive definite (degenerate sample?)")
    tables = _LscvTables(sample, grid_resolution, eval_resolution)

    def score(h):
        h11, h22, raw = h * H0[0, 0], h * H0[1, 1], h * H0[0, 1]
        t1, t2 = tables.axis(0, h11), tables.axis(1, h22)
        lo, hi = _h12_interval(t1, t2, h11, h22)
        H = BandwidthMatrix2.scott(h, H0, float(np.clip(raw, lo, hi)))
        terms = _quadratic_terms(t1, t2, sample.n, tables.weight)
        return _entry(H, _objective(terms, H.rho), H.h12_raw)

    return _argmin(_parallel_map(score, list(grid.h_values), parallelism), Family.SCOTT)


_SELECTORS = {Family.FULL: select_full, Family.SCOTT: select_scott, Family.DIAGONAL: select_diagonal}


def select(sample, family, grid=None, **kwargs):
    """Dispatch to the selector of ``family`` (``"full"``, ``"scott"`` or ``"diagonal"``)."""
    return _SELECTORS[Family.parse(family)](sample, grid, **kwargs)
