"""Associated-kernel density estimators on the unit square.

Pointwise estimates average kernel values over the sample.  Grid estimates
use the fact that the beta-Sarmanov kernel is separable: writing ``A[i, k]``
for the first margin of target node ``i`` at observation ``k`` (and ``B`` for
the second margin), the estimate on a tensor grid is::

    fhat = (A @ B.T + rho * (A * Z1) @ (B * Z2).T) / n

which is computed in fixed blocks of rows so the result does not depend on
how many threads are used.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import betaln

from .errors import InadmissibleBandwidthError, NumericalError, SupportError, ZeroMassError
from .kernels import (
    BandwidthMatrix2,
    _as_bandwidth,
    _as_point,
    _check_alpha,
    _check_h12,
    bs_kernel_eval,
    default_alpha,
    margin_shapes,
    margin_table,
    modified_bs_eval,
    rho_bounds_from_corners,
    within_bounds,
)

__all__ = [
    "Sample2",
    "DensityGrid",
    "DiagnosticsInput",
    "midpoint_axis",
    "estimate_standard",
    "estimate_modified",
    "estimate_grid",
    "total_mass",
    "normalize",
    "bs_norm_squared",
    "bias_diagnostic",
    "variance_diagnostic",
    "amise_diagnostic",
    "scott_reference",
]

ROW_BLOCK = 32


@dataclass(frozen=True, eq=False)
class Sample2:
    """Observations in the closed unit square, stored as an ``(n, 2)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"sample must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample contains non-finite values")
        bad = np.flatnonzero(np.any((pts < 0) | (pts > 1), axis=1))
        if bad.size:
            i = int(bad[0])
            raise SupportError(f"observation {i} = {tuple(pts[i])} lies outside the unit square")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n

    def covariance(self):
        return np.cov(self.points, rowvar=False)


def _as_sample(sample):
    return sample if isinstance(sample, Sample2) else Sample2(sample)


def midpoint_axis(resolution):
    """Midpoints ``(i + 0.5) / G`` of ``G`` equal cells of [0, 1]."""
    if int(resolution) != resolution or resolution < 1:
        raise ValueError(f"grid resolution must be a positive integer, got {resolution}")
    return (np.arange(int(resolution)) + 0.5) / resolution


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Density values on the ``G x G`` midpoint grid.

    ``values[i, j]`` belongs to node ``(axis[i], axis[j])``.  Flattening in
    C order therefore lists nodes with ``x1`` varying slowest.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError(f"grid values must be a square matrix, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise NumericalError("density grid contains non-finite values")
        if np.any(vals < 0):
            raise ValueError("density grid contains negative values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def resolution(self):
        return self.values.shape[0]

    @property
    def axis(self):
        return midpoint_axis(self.resolution)

    @property
    def nodes(self):
        a = self.axis
        x1, x2 = np.meshgrid(a, a, indexing="ij")
        return np.column_stack([x1.ravel(), x2.ravel()])

    @property
    def cell_weight(self):
        return 1.0 / self.resolution**2

    def integral(self):
        return float(self.values.sum() * self.cell_weight)

    def scaled(self, factor):
        return DensityGrid(self.values * factor)

    def to_csv(self, path):
        """Write ``x1,x2,fhat`` rows with 17 significant digits."""
        nodes = self.nodes
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("x1,x2,fhat\n")
            for (a, b), f in zip(nodes, self.values.ravel()):
                fh.write(f"{a:.17g},{b:.17g},{f:.17g}\n")

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        g = math.isqrt(data.shape[0])
        if g * g != data.shape[0]:
            raise ValueError(f"{path}: row count {data.shape[0]} is not a perfect square")
        expected = cls(np.zeros((g, g))).nodes
        if not np.allclose(data[:, :2], expected, rtol=0, atol=1e-12):
            raise ValueError(f"{path}: nodes are not a row-major midpoint grid")
        return cls(data[:, 2].reshape(g, g))


# ---------------------------------------------------------------------------
# Pointwise estimates
# ---------------------------------------------------------------------------


def estimate_standard(sample, H, x):
    """``(1/n) sum_i BS_{theta(x, H)}(X_i)`` at a single target ``x``."""
    sample = _as_sample(sample)
    return float(np.mean(bs_kernel_eval(x, H, sample.points)))


def estimate_modified(sample, H, x, alpha=None):
    """Average of the modified kernel at target ``x`` over the sample."""
    sample = _as_sample(sample)
    return float(np.mean(modified_bs_eval(x, H, sample.points, alpha)))


# ---------------------------------------------------------------------------
# Grid estimates
# ---------------------------------------------------------------------------


def _row_blocks(nrows):
    return [slice(i, min(i + ROW_BLOCK, nrows)) for i in range(0, nrows, ROW_BLOCK)]


def map_blocks(fn, nrows, parallelism=1):
    """Apply ``fn`` to fixed row blocks, in order, optionally on a thread pool."""
    blocks = _row_blocks(nrows)
    if parallelism <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=int(parallelism)) as pool:
        return list(pool.map(fn, blocks))


@dataclass(frozen=True)
class _Axis:
    g: np.ndarray
    gz: np.ndarray
    z_lo: np.ndarray
    z_hi: np.ndarray


def tabulate_axis(targets, h, points, alpha=None):
    t = margin_table(targets, h, points, alpha)
    with np.errstate(invalid="ignore"):
        gz = t.g * t.z
    return _Axis(t.g, gz, t.z_lo, t.z_hi)


def separable_blocks(ax1, ax2, rho, n, parallelism=1):
    """Unclipped estimate rows ``(A B^T + rho (A Z1)(B Z2)^T) / n`` per row block."""

    def block(rows):
        out = ax1.g[rows] @ ax2.g.T
        if rho != 0.0:
            out += rho * (ax1.gz[rows] @ ax2.gz.T)
        return out / n

    return map_blocks(block, ax1.g.shape[0], parallelism)


def _first_failing_node(axis, ax1, ax2, H):
    a0, a1 = ax1.z_lo[:, None], ax1.z_hi[:, None]
    b0, b1 = ax2.z_lo[None, :], ax2.z_hi[None, :]
    lo = -1.0 / np.maximum(a0 * b0, a1 * b1)
    hi = np.abs(1.0 / np.minimum(a0 * b1, a1 * b0))
    bad = np.argwhere(~within_bounds(H.rho, lo, hi))
    i, j = bad[0]
    s = math.sqrt(H.h11 * H.h22)
    return (float(axis[i]), float(axis[j])), (float(lo[i, j] * s), float(hi[i, j] * s))


def estimate_grid(sample, H, resolution=201, modified=False, alpha=None, parallelism=1):
    """Evaluate the (standard or modified) estimator on the midpoint grid.

    Raises
    ------
    InadmissibleBandwidthError
        When ``h12`` is inadmissible at some node; the first failing node in
        row-major order is reported.
    """
    sample = _as_sample(sample)
    H = _as_bandwidth(H)
    axis = midpoint_axis(resolution)
    if modified:
        alpha = _check_alpha(default_alpha([H.h11, H.h22]) if alpha is None else alpha)
        a1, a2 = alpha
    else:
        a1 = a2 = None
    ax1 = tabulate_axis(axis, H.h11, sample.points[:, 0], a1)
    ax2 = tabulate_axis(axis, H.h22, sample.points[:, 1], a2)
    lo, hi = rho_bounds_from_corners(ax1.z_lo, ax1.z_hi, ax2.z_lo, ax2.z_hi)
    if not within_bounds(H.rho, lo, hi):
        node, interval = _first_failing_node(axis, ax1, ax2, H)
        raise InadmissibleBandwidthError(
            f"h12={H.h12:.6g} inadmissible at grid node {node}; local interval "
            f"[{interval[0]:.6g}, {interval[1]:.6g}]",
            value=H.h12,
            interval=interval,
            target=node,
        )
    values = np.vstack(separable_blocks(ax1, ax2, H.rho, sample.n, parallelism))
    if not np.all(np.isfinite(values)):
        raise NumericalError(
            "estimate is infinite at some grid node; a modified margin with a shape "
            "below 1 is evaluated at an observation on the edge of the square"
        )
    # rounding can leave -1e-17 where the Sarmanov bracket vanishes
    return DensityGrid(np.maximum(values, 0.0))


def total_mass(sample, H, grid_resolution=201, parallelism=1):
    """Midpoint-rule integral of the unnormalized standard estimate."""
    return estimate_grid(sample, H, grid_resolution, parallelism=parallelism).integral()


def normalize(grid):
    """Rescale a grid so its midpoint integral is one."""
    mass = grid.integral()
    if not (mass > 0 and math.isfinite(mass)):
        raise ZeroMassError(f"cannot normalize a grid with mass {mass}")
    return DensityGrid(grid.values / mass)


# ---------------------------------------------------------------------------
# Squared L2 norm of the kernel
# ---------------------------------------------------------------------------


def _squared_margin_terms(p, q):
    """For ``g = Beta(p, q)`` pdf: ``int g^2`` and the first two moments of ``z`` under ``g^2``.

    ``g^2`` is proportional to the ``Beta(2p - 1, 2q - 1)`` density, so with
    ``w`` drawn from that law the returned ``m = E[z(w)]`` and
    ``s = E[z(w)^2]``.
    """
    P, Q = 2.0 * p - 1.0, 2.0 * q - 1.0
    norm = np.exp(betaln(P, Q) - 2.0 * betaln(p, q))
    mu, var = p / (p + q), p * q / ((p + q) ** 2 * (p + q + 1.0))
    mu_w, var_w = P / (P + Q), P * Q / ((P + Q) ** 2 * (P + Q + 1.0))
    d = mu_w - mu
    return norm, d / np.sqrt(var), (var_w + d * d) / var


def _norm_squared_from_shapes(p1, q1, p2, q2, rho):
    n1, m1, s1 = _squared_margin_terms(p1, q1)
    n2, m2, s2 = _squared_margin_terms(p2, q2)
    return n1 * n2 * (1.0 + 2.0 * rho * m1 * m2 + rho * rho * s1 * s2)


def bs_norm_squared(x, H):
    """Closed form of ``||BS_{theta(x, H)}||_2^2``.

    A product of beta-function ratios ``B(2p-1, 2q-1) / B(p, q)^2`` for the
    two margins times a quadratic in ``rho = h12 / sqrt(h11 h22)``.
    """
    x = _as_point(x)
    H = _as_bandwidth(H)
    _check_h12(x, H)
    p1, q1 = margin_shapes(x[0], H.h11)
    p2, q2 = margin_shapes(x[1], H.h22)
    return float(_norm_squared_from_shapes(p1, q1, p2, q2, H.rho))


# ---------------------------------------------------------------------------
# Diagnostics against a known density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticsInput:
    """A known density with its gradient and Hessian.

    Each callable takes an ``(m, 2)`` array of points and returns arrays of
    shape ``(m,)``, ``(m, 2)`` and ``(m, 2, 2)`` respectively.
    """

    f: Callable
    grad_f: Callable
    hess_f: Callable


def _moment_arrays(x1, x2, H):
    h = np.array([H.h11, H.h22])
    x = np.column_stack([x1, x2])
    a = (1.0 - 2.0 * x) * h / (1.0 + 2.0 * h)
    var = (x + h) * (1.0 + h - x) * h / ((1.0 + 2.0 * h) ** 2 * (1.0 + 3.0 * h))
    b12 = H.rho * np.sqrt(var[:, 0] * var[:, 1])
    B = np.empty((x.shape[0], 2, 2))
    B[:, 0, 0], B[:, 1, 1] = var[:, 0], var[:, 1]
    B[:, 0, 1] = B[:, 1, 0] = b12
    return a, B


def _bias_at(points, H, diag):
    a, B = _moment_arrays(points[:, 0], points[:, 1], H)
    grad = np.asarray(diag.grad_f(points), dtype=float)
    hess = np.asarray(diag.hess_f(points), dtype=float)
    second = np.einsum("mi,mj->mij", a, a) + B
    return np.einsum("mi,mi->m", a, grad) + 0.5 * np.einsum("mij,mij->m", second, hess)


def bias_diagnostic(x, H, diag):
    """Leading-order bias ``a^T grad f + trace[(a a^T + B) hess f] / 2`` at ``x``."""
    x = _as_point(x)
    H = _as_bandwidth(H)
    _check_h12(x, H)
    return float(_bias_at(x[None, :], H, diag)[0])


def variance_diagnostic(x, H, n, f_value):
    """Leading variance term ``||K||^2 f(x) / n``."""
    if n < 1:
        raise ValueError("n must be a positive count")
    return bs_norm_squared(x, H) * float(f_value) / n


def amise_diagnostic(H, n, diag, grid_resolution=256):
    """Midpoint integral of squared bias plus leading variance over the square."""
    H = _as_bandwidth(H)
    axis = midpoint_axis(grid_resolution)
    ax1 = margin_table(axis, H.h11, [])
    ax2 = margin_table(axis, H.h22, [])
    lo, hi = rho_bounds_from_corners(ax1.z_lo, ax1.z_hi, ax2.z_lo, ax2.z_hi)
    if not within_bounds(H.rho, lo, hi):
        raise InadmissibleBandwidthError(
            f"rho={H.rho:.6g} inadmissible on the {grid_resolution}^2 grid",
            value=H.h12,
            interval=(lo * math.sqrt(H.h11 * H.h22), hi * math.sqrt(H.h11 * H.h22)),
        )
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([x1.ravel(), x2.ravel()])
    bias = _bias_at(pts, H, diag)
    p1, q1 = margin_shapes(pts[:, 0], H.h11)
    p2, q2 = margin_shapes(pts[:, 1], H.h22)
    var = _norm_squared_from_shapes(p1, q1, p2, q2, H.rho) * np.asarray(diag.f(pts)) / n
    return float(np.sum(bias * bias + var) / grid_resolution**2)


def scott_reference(n, H0, r2=0.5, C=1.0):
    """Scott-rate bandwidth ``C n^(-1/(2 r2 + 2)) H0`` in dimension two."""
    if r2 <= 0 or C <= 0 or n < 1:
        raise ValueError("need n >= 1, r2 > 0 and C > 0")
    H0 = np.asarray(H0, dtype=float)
    h = C * n ** (-1.0 / (2.0 * r2 + 2.0))
    return BandwidthMatrix2.scott(h, H0)
