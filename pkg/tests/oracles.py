"""Straight-line reference implementations used to cross-check the package.

Everything here is written directly from the defining formulas, mostly
with scalar loops, and shares no code path with ``assockde``.
"""

import math

import numpy as np


def beta_pdf(t, p, q):
    if t < 0 or t > 1:
        return 0.0
    logb = math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)
    return t ** (p - 1) * (1 - t) ** (q - 1) / math.exp(logb)


def std_margin(x, h):
    """Mean and std of the standard kernel margin, from the explicit formulas in ``x`` and ``h``."""
    mu = (x + h) / (1 + 2 * h)
    var = (x + h) * (1 + h - x) * h / ((1 + 2 * h) ** 2 * (1 + 3 * h))
    return mu, math.sqrt(var)


def bs_kernel(x, h11, h22, h12, v):
    p1, q1 = x[0] / h11 + 1, (1 - x[0]) / h11 + 1
    p2, q2 = x[1] / h22 + 1, (1 - x[1]) / h22 + 1
    m1, s1 = std_margin(x[0], h11)
    m2, s2 = std_margin(x[1], h22)
    rho = h12 / math.sqrt(h11 * h22)
    bracket = 1 + rho * (v[0] - m1) / s1 * (v[1] - m2) / s2
    return beta_pdf(v[0], p1, q1) * beta_pdf(v[1], p2, q2) * bracket


def corner_h12_bounds(x, h11, h22, steps=200):
    """Admissible h12 interval by brute-force search of the bracket over a closed grid."""
    m1, s1 = std_margin(x[0], h11)
    m2, s2 = std_margin(x[1], h22)
    lo_prod, hi_prod = math.inf, -math.inf
    for i in range(steps + 1):
        z1 = (i / steps - m1) / s1
        for j in range(steps + 1):
            z = z1 * (j / steps - m2) / s2
            lo_prod, hi_prod = min(lo_prod, z), max(hi_prod, z)
    s = math.sqrt(h11 * h22)
    # bracket 1 + rho * z >= 0 for all z  <=>  -1/max z <= rho <= -1/min z
    return -s / hi_prod, -s / lo_prod


def lscv(points, h11, h22, h12, resolution):
    n = len(points)
    cell = 1.0 / resolution
    total = 0.0
    for i in range(resolution):
        for j in range(resolution):
            x = ((i + 0.5) * cell, (j + 0.5) * cell)
            f = sum(bs_kernel(x, h11, h22, h12, v) for v in points) / n
            total += f * f
    integral = total * cell * cell
    loo = 0.0
    for i, xi in enumerate(points):
        loo += sum(bs_kernel(xi, h11, h22, h12, xj) for j, xj in enumerate(points) if j != i) / (n - 1)
    return integral - 2.0 / n * loo


def gauss_square(n, warps=2):
    """Tensor Gauss-Legendre rule on [0, 1]^2 with nodes pulled toward the edges.

    Each warp applies ``v -> (1 - cos(pi v)) / 2``, which flattens the
    algebraic endpoint behaviour of beta densities so that a few hundred
    nodes integrate them to near machine precision.  Returns ``(points, weights)``
    with shapes ``(m, m, 2)`` and ``(m, m)``.
    """
    u, w = np.polynomial.legendre.leggauss(n)
    v, w = (u + 1) / 2, w / 2
    for _ in range(warps):
        w = w * (math.pi / 2) * np.sin(math.pi * v)
        v = (1 - np.cos(math.pi * v)) / 2
    keep = (v > 0) & (v < 1)
    v, w = v[keep], w[keep]
    v1, v2 = np.meshgrid(v, v, indexing="ij")
    return np.stack([v1, v2], axis=-1), np.outer(w, w)
