"""Associated kernels on the unit square.

The centrepiece is the bivariate beta-Sarmanov kernel: two univariate beta
margins whose shapes are tied to the target point ``x`` and the diagonal of
the bandwidth matrix, coupled by a Sarmanov correction
``1 + rho * z1(v1) * z2(v2)`` where ``z_j`` are the standardized margins and
``rho = h12 / sqrt(h11 * h22)``.

A modified (nine-region) version, the classical Gaussian associated kernel,
and the multiple (product) beta kernel are provided alongside.

Scalar entry points (``bs_kernel_eval``, ``modified_bs_eval`` ...) accept a
single target and any array of evaluation points.  ``margin_table`` is the
vectorized building block used by the estimators: because every
kernel here factorizes margin by margin, the two margins can be tabulated
separately and recombined with matrix products.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import betaln, xlog1py, xlogy

from .errors import InadmissibleBandwidthError, SupportError, UndefinedModeError

__all__ = [
    "BetaParams",
    "BetaMoments",
    "BetaSarmanovShape",
    "Family",
    "BandwidthMatrix2",
    "RegionLabel",
    "KernelMoments2",
    "beta_pdf",
    "beta_moments",
    "sarmanov_correlation_bounds",
    "sarmanov_pdf",
    "bs_shape_from_target",
    "bs_h12_bounds",
    "bs_kernel_eval",
    "bs_kernel_moments",
    "classical_gaussian_kernel",
    "multiple_kernel_eval",
    "classify_region",
    "boundary_region_count",
    "default_alpha",
    "psi",
    "modified_bs_shape",
    "modified_bs_eval",
    "modified_bs_moments",
    "modified_continuity_jump",
    "MarginTable",
    "margin_shapes",
    "margin_table",
    "rho_bounds_from_corners",
    "paired_rho_bounds",
    "within_bounds",
]


# ---------------------------------------------------------------------------
# Univariate beta building blocks
# ---------------------------------------------------------------------------


class BetaMoments(NamedTuple):
    mean: float
    variance: float
    mode: float
    dispersion: float


@dataclass(frozen=True)
class BetaParams:
    """Shape pair ``(p, q)`` of a beta law on [0, 1]."""

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (p > 0 and q > 0) or not (math.isfinite(p) and math.isfinite(q)):
            raise ValueError(f"beta shapes must be positive and finite, got ({p}, {q})")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def mean(self):
        return self.p / (self.p + self.q)

    @property
    def variance(self):
        s = self.p + self.q
        return self.p * self.q / (s * s * (s + 1.0))

    @property
    def std(self):
        return math.sqrt(self.variance)

    @property
    def is_unimodal(self):
        return self.p >= 1 and self.q >= 1 and (self.p, self.q) != (1, 1)

    @property
    def mode(self):
        self._require_unimodal()
        return (self.p - 1.0) / (self.p + self.q - 2.0)

    @property
    def dispersion(self):
        self._require_unimodal()
        return 1.0 / (self.p + self.q - 2.0)

    def corner_z(self):
        """Standardized values ``(v - mean) / std`` at ``v = 0`` and ``v = 1``."""
        m, s = self.mean, self.std
        return -m / s, (1.0 - m) / s

    def _require_unimodal(self):
        if not self.is_unimodal:
            raise UndefinedModeError(
                f"mode/dispersion undefined for Beta({self.p}, {self.q}); "
                "need p >= 1, q >= 1 and (p, q) != (1, 1)"
            )


def _log_beta_pdf(t, p, q):
    # xlogy gives 0*log(0) = 0, so shapes equal to 1 stay finite at the endpoints
    return xlogy(p - 1.0, t) + xlog1py(q - 1.0, -t) - betaln(p, q)


def _beta_pdf_array(t, p, q):
    t = np.asarray(t, dtype=float)
    inside = (t >= 0.0) & (t <= 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(_log_beta_pdf(np.where(inside, t, 0.5), p, q))
    return np.where(inside, out, 0.0)


def beta_pdf(t, params):
    """Beta density ``t^(p-1) (1-t)^(q-1) / B(p, q)``, zero outside [0, 1].

    Raises
    ------
    SupportError
        If the result is not finite, which happens at ``t = 0`` (``t = 1``)
        when ``p < 1`` (``q < 1``).
    """
    out = _beta_pdf_array(t, params.p, params.q)
    if not np.all(np.isfinite(out)):
        raise SupportError(
            f"Beta({params.p}, {params.q}) density is infinite at an endpoint of [0, 1]"
        )
    return float(out) if out.ndim == 0 else out


def beta_moments(params, with_mode=True):
    """Mean, variance, mode and dispersion of a beta law.

    With ``with_mode=False`` the mode and dispersion slots are NaN, which
    allows querying non-unimodal laws such as Beta(1, 1).
    """
    if with_mode:
        mode, disp = params.mode, params.dispersion
    else:
        mode = disp = math.nan
    return BetaMoments(params.mean, params.variance, mode, disp)


# ---------------------------------------------------------------------------
# Sarmanov bivariate beta
# ---------------------------------------------------------------------------


def rho_bounds_from_corners(z1_lo, z1_hi, z2_lo, z2_hi):
    """Admissible ``[-eps, eps']`` for ``rho`` given ranges of the two standardized margins.

    The product ``z1 * z2`` is bi-affine in ``(v1, v2)``, so over the unit
    square its extremes sit at the corners.  Arguments may be arrays of
    corner values (one per target); the returned interval is then the
    intersection over all of them.
    """
    z1 = np.concatenate([np.ravel(z1_lo), np.ravel(z1_hi)])
    z2 = np.concatenate([np.ravel(z2_lo), np.ravel(z2_hi)])
    a_min, a_max = z1.min(), z1.max()
    b_min, b_max = z2.min(), z2.max()
    prods = (a_min * b_min, a_min * b_max, a_max * b_min, a_max * b_max)
    return -1.0 / max(prods), abs(1.0 / min(prods))


def paired_rho_bounds(z1_lo, z1_hi, z2_lo, z2_hi):
    """Like :func:`rho_bounds_from_corners` but intersecting per target pair.

    Entry ``i`` of each argument belongs to target ``i``; only the four
    corner products of each target are combined, never across targets.
    """
    a0, a1, b0, b1 = (np.ravel(np.asarray(t, dtype=float)) for t in (z1_lo, z1_hi, z2_lo, z2_hi))
    if a0.size == 0:
        return -np.inf, np.inf
    max_prod = np.maximum(a0 * b0, a1 * b1)
    min_prod = np.minimum(a0 * b1, a1 * b0)
    return float(np.max(-1.0 / max_prod)), float(np.min(np.abs(1.0 / min_prod)))


ADMISSIBILITY_RTOL = 1e-12


def within_bounds(value, lo, hi):
    """Inclusive interval test that forgives rounding in the computed endpoints."""
    ok = (lo - ADMISSIBILITY_RTOL * np.abs(lo) <= value) & (value <= hi + ADMISSIBILITY_RTOL * np.abs(hi))
    return bool(ok) if np.ndim(ok) == 0 else ok


def sarmanov_correlation_bounds(m1, m2):
    """Closed interval of admissible Sarmanov ``rho`` for the margins ``m1``, ``m2``."""
    a0, a1 = m1.corner_z()
    b0, b1 = m2.corner_z()
    lo, hi = rho_bounds_from_corners(a0, a1, b0, b1)
    return float(lo), float(hi)


@dataclass(frozen=True)
class BetaSarmanovShape:
    """Five-parameter vector ``(p1, q1, p2, q2, rho)``."""

    margin1: BetaParams
    margin2: BetaParams
    rho: float = 0.0

    @classmethod
    def from_tuple(cls, theta):
        p1, q1, p2, q2, rho = theta
        return cls(BetaParams(p1, q1), BetaParams(p2, q2), float(rho))

    def as_tuple(self):
        return (self.margin1.p, self.margin1.q, self.margin2.p, self.margin2.q, self.rho)

    def rho_bounds(self):
        return sarmanov_correlation_bounds(self.margin1, self.margin2)

    def is_admissible(self):
        return within_bounds(self.rho, *self.rho_bounds())

    def check(self):
        lo, hi = self.rho_bounds()
        if not within_bounds(self.rho, lo, hi):
            raise InadmissibleBandwidthError(
                f"rho={self.rho:.6g} outside admissible interval [{lo:.6g}, {hi:.6g}]",
                value=self.rho,
                interval=(lo, hi),
            )
        return self


def _sarmanov_eval(v, p1, q1, p2, q2, rho):
    v = np.asarray(v, dtype=float)
    v1, v2 = v[..., 0], v[..., 1]
    inside = (v1 >= 0) & (v1 <= 1) & (v2 >= 0) & (v2 <= 1)
    v1 = np.where(inside, v1, 0.5)
    v2 = np.where(inside, v2, 0.5)
    m1, m2 = BetaParams(p1, q1), BetaParams(p2, q2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logg = _log_beta_pdf(v1, p1, q1) + _log_beta_pdf(v2, p2, q2)
        bracket = 1.0 + rho * ((v1 - m1.mean) / m1.std) * ((v2 - m2.mean) / m2.std)
        out = np.exp(logg) * bracket
    out = np.where(inside, out, 0.0)
    return float(out) if out.ndim == 0 else out


def sarmanov_pdf(v, shape):
    """Density of the beta-Sarmanov law at ``v`` (array of shape ``(..., 2)``).

    Raises InadmissibleBandwidthError before evaluating when ``shape.rho``
    would make the density negative somewhere on the square.
    """
    shape.check()
    return _sarmanov_eval(v, *shape.as_tuple())


# ---------------------------------------------------------------------------
# Bandwidth matrices
# ---------------------------------------------------------------------------


class Family(enum.Enum):
    FULL = "full"
    SCOTT = "scott"
    DIAGONAL = "diagonal"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(
                f"unknown bandwidth family {name!r}; expected one of full, scott, diagonal"
            ) from None


@dataclass(frozen=True)
class BandwidthMatrix2:
    """Symmetric positive-definite 2x2 bandwidth matrix tagged with its family.

    For the Scott family ``scale`` is ``h`` and ``h0`` holds
    ``(h0_11, h0_22, h0_12)``.  The diagonal always equals ``h * diag(H0)``;
    the off-diagonal may have been clamped into an admissible interval, in
    which case ``h12_raw`` keeps the unclamped ``h * h0_12``.
    """

    h11: float
    h22: float
    h12: float = 0.0
    family: Family = Family.FULL
    scale: float = None
    h0: tuple = None
    h12_raw: float = field(default=None, compare=False)

    def __post_init__(self):
        h11, h22, h12 = float(self.h11), float(self.h22), float(self.h12)
        object.__setattr__(self, "h11", h11)
        object.__setattr__(self, "h22", h22)
        object.__setattr__(self, "h12", h12)
        if not (h11 > 0 and h22 > 0) or not all(map(math.isfinite, (h11, h22, h12))):
            raise ValueError(f"bandwidth diagonal must be positive and finite, got ({h11}, {h22})")
        if h12 * h12 >= h11 * h22:
            raise ValueError(f"bandwidth matrix not positive definite: h12={h12}, h11*h22={h11 * h22}")
        if self.family is Family.DIAGONAL and h12 != 0.0:
            raise ValueError("diagonal bandwidth matrix requires h12 = 0")
        if self.family is Family.SCOTT:
            if self.scale is None or self.h0 is None:
                raise ValueError("Scott bandwidth matrix needs scale and h0")
            s, (a, b, _) = self.scale, self.h0
            if not (math.isclose(h11, s * a, rel_tol=1e-12) and math.isclose(h22, s * b, rel_tol=1e-12)):
                raise ValueError("Scott bandwidth diagonal must equal h * diag(H0)")

    @classmethod
    def full(cls, h11, h22, h12=0.0):
        return cls(h11, h22, h12, Family.FULL)

    @classmethod
    def diagonal(cls, h11, h22):
        return cls(h11, h22, 0.0, Family.DIAGONAL)

    @classmethod
    def scott(cls, h, H0, h12=None):
        """``h * H0``; pass ``h12`` to override (clamp) the off-diagonal."""
        H0 = np.asarray(H0, dtype=float)
        h0 = (float(H0[0, 0]), float(H0[1, 1]), float(H0[0, 1]))
        raw = h * h0[2]
        if h12 is None:
            h12 = raw
        return cls(h * h0[0], h * h0[1], h12, Family.SCOTT, float(h), h0, raw)

    @property
    def matrix(self):
        return np.array([[self.h11, self.h12], [self.h12, self.h22]])

    @property
    def rho(self):
        return self.h12 / math.sqrt(self.h11 * self.h22)

    @property
    def det(self):
        return self.h11 * self.h22 - self.h12 * self.h12

    def with_h12(self, h12):
        if self.family is Family.SCOTT:
            return BandwidthMatrix2.scott(self.scale, _h0_matrix(self.h0), h12)
        fam = Family.FULL if self.family is Family.DIAGONAL and h12 != 0 else self.family
        return BandwidthMatrix2(self.h11, self.h22, h12, fam)

    def key(self):
        """Lexicographic tie-breaking key."""
        return (self.h11, self.h22, self.h12)


def _h0_matrix(h0):
    a, b, c = h0
    return np.array([[a, c], [c, b]])


def _as_bandwidth(H):
    if isinstance(H, BandwidthMatrix2):
        return H
    H = np.asarray(H, dtype=float)
    return BandwidthMatrix2.full(H[0, 0], H[1, 1], H[0, 1])


def _as_point(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError(f"{name} must be a 2-vector, got shape {x.shape}")
    if not np.all((x >= 0) & (x <= 1)):
        raise SupportError(f"{name}={tuple(x)} lies outside the unit square")
    return x


# ---------------------------------------------------------------------------
# Margin tabulation (shared by standard and modified kernels)
# ---------------------------------------------------------------------------


def psi(z, alpha):
    """Boundary shape function ``alpha * (z - alpha + 1)``."""
    return alpha * (z - alpha + 1.0)


def default_alpha(h):
    """``2 h`` clamped to (0, 0.45]."""
    return np.minimum(2.0 * np.asarray(h, dtype=float), 0.45)


def margin_shapes(x, h, alpha=None):
    """Beta shapes of one kernel margin for targets ``x`` (array) and bandwidth ``h``.

    ``alpha=None`` gives the standard shapes ``(x/h + 1, (1-x)/h + 1)``;
    otherwise the modified three-piece rule with boundary width ``alpha``.
    """
    x = np.asarray(x, dtype=float)
    if alpha is None:
        return x / h + 1.0, (1.0 - x) / h + 1.0
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    low = x <= alpha
    high = x >= 1.0 - alpha
    p = np.where(low, psi(x, alpha) / h, np.where(high, (1.0 - x) / h, x / h))
    q = np.where(low, x / h, np.where(high, psi(1.0 - x, alpha) / h, (1.0 - x) / h))
    if np.any(p <= 0) or np.any(q <= 0):
        bad = x[(p <= 0) | (q <= 0)] if x.ndim else x
        raise SupportError(
            f"modified kernel has a zero shape at target coordinate(s) {np.ravel(bad)[:5]}; "
            "evaluate away from the exact support edge"
        )
    return p, q


class MarginTable(NamedTuple):
    """Tabulated margin: ``g[i, k]`` = pdf of target i's margin at point k, ``z`` the standardization."""

    g: np.ndarray
    z: np.ndarray
    z_lo: np.ndarray
    z_hi: np.ndarray


def margin_table(x, h, v, alpha=None):
    """Tabulate one margin for targets ``x`` (m,) against points ``v`` (k,)."""
    p, q = margin_shapes(np.atleast_1d(x), h, alpha)
    s = p + q
    mu = p / s
    sd = np.sqrt(p * q / (s * s * (s + 1.0)))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    P, Q = p[:, None], q[:, None]
    g = _beta_pdf_array(v[None, :], P, Q)
    z = (v[None, :] - mu[:, None]) / sd[:, None]
    return MarginTable(g, z, -mu / sd, (1.0 - mu) / sd)


# ---------------------------------------------------------------------------
# Standard beta-Sarmanov kernel
# ---------------------------------------------------------------------------


def bs_shape_from_target(x, H, check=True):
    """Shape vector of the beta-Sarmanov kernel at target ``x``."""
    x = _as_point(x)
    H = _as_bandwidth(H)
    (p1,), (q1,) = margin_shapes([x[0]], H.h11)
    (p2,), (q2,) = margin_shapes([x[1]], H.h22)
    if check:
        _check_h12(x, H)
    return BetaSarmanovShape(BetaParams(p1, q1), BetaParams(p2, q2), H.rho)


def _rho_interval(x, H, alpha=None):
    a = margin_table([x[0]], H.h11, [], alpha if alpha is None else alpha[0])
    b = margin_table([x[1]], H.h22, [], alpha if alpha is None else alpha[1])
    return rho_bounds_from_corners(a.z_lo, a.z_hi, b.z_lo, b.z_hi)


def _h12_from_rho_interval(lo, hi, h11, h22):
    s = math.sqrt(h11 * h22)
    lo, hi = lo * s, hi * s
    # intersect with the open positive-definiteness interval
    if lo <= -s:
        lo = np.nextafter(-s, 0.0)
    if hi >= s:
        hi = np.nextafter(s, 0.0)
    return float(lo), float(hi)


def bs_h12_bounds(x, h11, h22):
    """Admissible ``h12`` interval at target ``x`` for the standard kernel.

    Any ``h12`` in the returned closed interval keeps the Sarmanov bracket
    nonnegative on the whole unit square, and keeps H positive definite.
    """
    x = _as_point(x)
    H = BandwidthMatrix2.diagonal(h11, h22)
    lo, hi = _rho_interval(x, H)
    return _h12_from_rho_interval(lo, hi, h11, h22)


def _check_h12(x, H, alpha=None):
    lo, hi = _rho_interval(x, H, alpha)
    if not within_bounds(H.rho, lo, hi):
        s = math.sqrt(H.h11 * H.h22)
        raise InadmissibleBandwidthError(
            f"h12={H.h12:.6g} outside admissible interval [{lo * s:.6g}, {hi * s:.6g}] "
            f"at target x=({x[0]:.6g}, {x[1]:.6g})",
            value=H.h12,
            interval=(lo * s, hi * s),
            target=tuple(x),
        )


def bs_kernel_eval(x, H, v, check=True):
    """Beta-Sarmanov associated kernel ``BS_theta(x, H)`` evaluated at ``v``.

    Parameters
    ----------
    x : array_like, shape (2,)
        Target point in the closed unit square.
    H : BandwidthMatrix2 or (2, 2) array
    v : array_like, shape (..., 2)
        Evaluation point(s); the kernel vanishes outside the square.
    check : bool
        Reject inadmissible ``h12`` (default).  ``check=False`` evaluates
        the raw formula, which can be negative.
    """
    shape = bs_shape_from_target(x, H, check=check)
    return _sarmanov_eval(v, *shape.as_tuple())


class KernelMoments2(NamedTuple):
    """Mean shift ``a = E[Z] - x`` and covariance ``B`` of the kernel's random vector."""

    a: np.ndarray
    B: np.ndarray


def bs_kernel_moments(x, H, check=True):
    """Closed-form ``a_theta(x, H)`` and ``B_theta(x, H)`` of the standard kernel."""
    x = _as_point(x)
    H = _as_bandwidth(H)
    if check:
        _check_h12(x, H)
    h = np.array([H.h11, H.h22])
    a = (1.0 - 2.0 * x) * h / (1.0 + 2.0 * h)
    var = (x + h) * (1.0 + h - x) * h / ((1.0 + 2.0 * h) ** 2 * (1.0 + 3.0 * h))
    b12 = H.rho * math.sqrt(var[0] * var[1])
    return KernelMoments2(a, np.array([[var[0], b12], [b12, var[1]]]))


# ---------------------------------------------------------------------------
# Classical and multiple kernels
# ---------------------------------------------------------------------------


def classical_gaussian_kernel(x, H, v):
    """Gaussian associated kernel ``(1/det H) K(H^{-1}(x - v))``.

    ``K`` is the standard bivariate normal density, so the induced random
    vector has mean ``x`` and covariance ``H @ H``.
    """
    Hm = _as_bandwidth(H).matrix if isinstance(H, BandwidthMatrix2) else np.asarray(H, dtype=float)
    det = np.linalg.det(Hm)
    if not np.isfinite(det) or abs(det) < 1e-300:
        raise np.linalg.LinAlgError("bandwidth matrix is singular")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    u = np.linalg.solve(Hm, np.moveaxis(x - v, -1, 0).reshape(2, -1))
    dens = np.exp(-0.5 * np.sum(u * u, axis=0)) / (2.0 * math.pi * abs(det))
    dens = dens.reshape(np.broadcast_shapes(x.shape, v.shape)[:-1])
    return float(dens) if dens.ndim == 0 else dens


def multiple_kernel_eval(x, h11, h22, v):
    """Product of the two univariate beta associated kernels."""
    x = _as_point(x)
    v = np.asarray(v, dtype=float)
    (p1,), (q1,) = margin_shapes([x[0]], h11)
    (p2,), (q2,) = margin_shapes([x[1]], h22)
    out = _beta_pdf_array(v[..., 0], p1, q1) * _beta_pdf_array(v[..., 1], p2, q2)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Modified (nine-region) kernel
# ---------------------------------------------------------------------------


class RegionLabel(enum.Enum):
    INTERIOR = "Interior"
    EDGE_LEFT = "EdgeLeft"
    EDGE_RIGHT = "EdgeRight"
    EDGE_BOTTOM = "EdgeBottom"
    EDGE_TOP = "EdgeTop"
    ANGLE_BL = "AngleBL"
    ANGLE_BR = "AngleBR"
    ANGLE_TL = "AngleTL"
    ANGLE_TR = "AngleTR"


# (position along x1, position along x2) -> label; -1 low boundary, 0 interior, 1 high boundary
_REGIONS = {
    (0, 0): RegionLabel.INTERIOR,
    (-1, 0): RegionLabel.EDGE_LEFT,
    (1, 0): RegionLabel.EDGE_RIGHT,
    (0, -1): RegionLabel.EDGE_BOTTOM,
    (0, 1): RegionLabel.EDGE_TOP,
    (-1, -1): RegionLabel.ANGLE_BL,
    (1, -1): RegionLabel.ANGLE_BR,
    (-1, 1): RegionLabel.ANGLE_TL,
    (1, 1): RegionLabel.ANGLE_TR,
}


def _check_alpha(alpha):
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (2,))
    if not np.all((alpha > 0) & (alpha < 0.5)):
        raise ValueError(f"alpha must lie in (0, 0.5) componentwise, got {tuple(alpha)}")
    return alpha


def _position(xj, aj):
    if xj <= aj:
        return -1
    if xj >= 1.0 - aj:
        return 1
    return 0


def classify_region(x, alpha):
    """Which of the nine subregions of the square contains ``x``.

    Boundary bands are closed (``[0, alpha]`` and ``[1 - alpha, 1]``); the
    interior is the open rectangle between them.
    """
    x = _as_point(x)
    alpha = _check_alpha(alpha)
    return _REGIONS[(_position(x[0], alpha[0]), _position(x[1], alpha[1]))]


def boundary_region_count(d_inf, d_z, d_uw):
    """Number of boundary subregions, ``1^d_inf * 2^d_z * 3^d_uw - 1``."""
    for d in (d_inf, d_z, d_uw):
        if d < 0 or int(d) != d:
            raise ValueError("dimension counts must be nonnegative integers")
    return 2 ** int(d_z) * 3 ** int(d_uw) - 1


def modified_bs_shape(x, H, alpha=None, check=True):
    """Shape vector of the modified kernel at target ``x``.

    ``alpha`` defaults to ``2 * diag(H)`` clamped to 0.45.  The fifth
    component is ``h12 / sqrt(h11 h22)`` in all nine regions.
    """
    x = _as_point(x)
    H = _as_bandwidth(H)
    alpha = _check_alpha(default_alpha([H.h11, H.h22]) if alpha is None else alpha)
    (p1,), (q1,) = margin_shapes([x[0]], H.h11, alpha[0])
    (p2,), (q2,) = margin_shapes([x[1]], H.h22, alpha[1])
    if check:
        _check_h12(x, H, alpha)
    return BetaSarmanovShape(BetaParams(p1, q1), BetaParams(p2, q2), H.rho)


def modified_bs_eval(x, H, v, alpha=None, check=True):
    """Modified beta-Sarmanov kernel at ``v``.

    The Sarmanov bracket is standardized with the modified margins' own
    means and standard deviations, and ``h12`` admissibility is judged
    against those margins.
    """
    shape = modified_bs_shape(x, H, alpha, check=check)
    return _sarmanov_eval(v, *shape.as_tuple())


def modified_bs_moments(x, H, alpha=None, check=True):
    """Mean shift and covariance of the modified kernel from its beta margins."""
    x = _as_point(x)
    shape = modified_bs_shape(x, H, alpha, check=check)
    H = _as_bandwidth(H)
    alpha = _check_alpha(default_alpha([H.h11, H.h22]) if alpha is None else alpha)
    shift, var = [], []
    for xj, hj, aj, m in zip(x, (H.h11, H.h22), alpha, (shape.margin1, shape.margin2)):
        if aj < xj < 1.0 - aj:
            # Beta(x/h, (1-x)/h): the mean is x itself, so use the simplified forms
            shift.append(0.0)
            var.append(hj * xj * (1.0 - xj) / (1.0 + hj))
        else:
            shift.append(m.mean - xj)
            var.append(m.variance)
    b12 = shape.rho * math.sqrt(var[0] * var[1])
    return KernelMoments2(np.array(shift), np.array([[var[0], b12], [b12, var[1]]]))


def modified_continuity_jump(h, alpha):
    """Jump of the modified margin shapes across the interior/boundary frontier.

    Returns ``(left, right)`` where each entry is the difference
    ``(p, q)[interior side] - (p, q)[boundary side]`` of the one-dimensional
    margin shapes at ``x = alpha`` and ``x = 1 - alpha`` respectively.  The
    nine-region rule is discontinuous there: the left jump is
    ``(0, (1 - 2 alpha) / h)``.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    out = []
    for frontier in (alpha, 1.0 - alpha):
        pb, qb = margin_shapes(np.array([frontier]), h, alpha)
        # interior formula taken at the frontier itself (its limit from inside)
        pi, qi = frontier / h, (1.0 - frontier) / h
        out.append((float(pi - pb[0]), float(qi - qb[0])))
    return tuple(out)
