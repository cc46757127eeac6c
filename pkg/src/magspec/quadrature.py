"""Quadrature helpers: nested midpoint with Richardson extrapolation,
radial integrals around a singular point, and integrals over superlevel sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import gamma as gamma_fn

from .errors import DivergenceError

OVERFLOW_GUARD = 1e250


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int = 0

    def __float__(self):
        return float(self.value)


def sphere_area(d):
    """Surface measure of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / gamma_fn(d / 2)


def ball_volume(k):
    """Volume of the unit ball in R^k (1 for k = 0)."""
    return math.pi ** (k / 2) / gamma_fn(k / 2 + 1)


def _check_finite(value, what):
    if not np.isfinite(value) or abs(value) > OVERFLOW_GUARD:
        raise DivergenceError(f"{what}: value left the finite range during refinement")


def midpoint_sequence(f, a, b, levels):
    """Plain midpoint sums on 1, 3, 9, ... intervals (points are reused).

    Used to measure the raw convergence order; ``nested_midpoint`` builds
    its Richardson table on top of the same sums.
    """
    width = b - a
    total = float(np.sum(f(np.array([a + 0.5 * width]))))
    out = [width * total]
    n = 1
    for _ in range(levels - 1):
        h3 = width / (3 * n)
        left = a + 3 * h3 * np.arange(n)
        new = np.concatenate([left + 0.5 * h3, left + 2.5 * h3])
        total += float(np.sum(f(new)))
        n *= 3
        out.append(width / n * total)
    return out


def nested_midpoint(f, a, b, tol=1e-8, max_level=13, min_level=3, what="integral"):
    """Integrate a vectorised ``f`` over [a, b].

    Midpoint sums are refined by tripling so that old nodes are reused; the
    even error expansion in the step is eliminated by a Richardson table.
    Returns the extrapolated value and the difference of the last two
    diagonal entries as error estimate.
    """
    width = b - a
    if width == 0:
        return QuadResult(0.0, 0.0, 0)
    total = float(np.sum(f(np.array([a + 0.5 * width]))))
    _check_finite(total, what)
    n, evals = 1, 1
    prev = [width * total]
    err = math.inf
    for level in range(1, max_level + 1):
        h3 = width / (3 * n)
        left = a + 3 * h3 * np.arange(n)
        new = np.concatenate([left + 0.5 * h3, left + 2.5 * h3])
        total += float(np.sum(f(new)))
        evals += new.size
        n *= 3
        row = [width / n * total]
        _check_finite(row[0], what)
        for j in range(1, level + 1):
            row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (9.0 ** j - 1.0))
        err = abs(row[-1] - prev[-1])
        prev = row
        if level >= min_level and err <= tol * abs(row[-1]) + 1e-300:
            break
    return QuadResult(prev[-1], err, evals)


def radial_integral(fr, d, r_min, r_max, tol=1e-8, decade_chunks=1.0,
                    max_chunks=200, condition="integrand not integrable"):
    """Integrate a radial function over the shell ``r_min <= |x| <= r_max``.

    The radius is substituted by ``s = log r`` so power singularities at 0
    and power tails at infinity become exponentials, which the nested
    midpoint rule handles well.  Infinite or zero end points are treated by
    marching outward in chunks of ``decade_chunks`` decades until the chunk
    contributions fall below the tolerance.  ``condition`` is reported in
    the divergence diagnostic.
    """
    if r_min < 0 or r_max <= r_min:
        raise ValueError("need 0 <= r_min < r_max")
    area = sphere_area(d)

    def g(s):
        r = np.exp(s)
        return fr(r) * r ** d * area

    step = decade_chunks * math.log(10.0)

    def march(s0, direction):
        total, err, evals = 0.0, 0.0, 0
        small = 0
        last = None
        for k in range(max_chunks):
            a, b = s0 + direction * k * step, s0 + direction * (k + 1) * step
            piece = nested_midpoint(g, min(a, b), max(a, b), tol=tol, what=condition)
            total += piece.value
            err += piece.error
            evals += piece.evaluations
            _check_finite(total, condition)
            mag = abs(piece.value)
            if last is not None and k >= 4 and mag >= last > 0:
                raise DivergenceError(f"{condition} (contributions do not decay)")
            last = mag
            if mag <= 0.1 * tol * abs(total) or (mag == 0.0 and k >= 2):
                small += 1
                if small >= 2:
                    return total, err + mag, evals
            else:
                small = 0
        raise DivergenceError(f"{condition} (no convergence after {max_chunks} chunks)")

    if r_min > 0 and math.isfinite(r_max):
        return nested_midpoint(g, math.log(r_min), math.log(r_max), tol=tol, what=condition)
    pivot = 1.0
    if r_min > 0:
        pivot = r_min
    elif math.isfinite(r_max):
        pivot = r_max
    value = err = 0.0
    evals = 0
    if r_min == 0:
        if math.isfinite(r_max):
            v, e, n = march(math.log(pivot), -1)
        else:
            v, e, n = march(0.0, -1)
        value += v
        err += e
        evals += n
    if not math.isfinite(r_max):
        v, e, n = march(math.log(pivot) if r_min > 0 else 0.0, +1)
        value += v
        err += e
        evals += n
    return QuadResult(value, err, evals)


def box_integral(f, lower, upper, tol=1e-8, max_points=2_000_000, what="integral"):
    """Tensor-product nested midpoint rule with Richardson extrapolation.

    ``f`` takes points of shape ``(N, d)``.
    """
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    d = lower.size
    vol = float(np.prod(upper - lower))
    prev = None
    err = math.inf
    evals = 0
    level = 0
    while True:
        n = 3 ** level
        if n ** d > max_points:
            break
        axes = [lo + (np.arange(n) + 0.5) * (hi - lo) / n for lo, hi in zip(lower, upper)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        m = vol * float(np.mean(f(grid)))
        evals += grid.shape[0]
        _check_finite(m, what)
        row = [m]
        if prev is not None:
            for j in range(1, level + 1):
                row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (9.0 ** j - 1.0))
            err = abs(row[-1] - prev[-1])
            if level >= 3 and err <= tol * abs(row[-1]) + 1e-300:
                prev = row
                break
        prev = row
        level += 1
    return QuadResult(prev[-1], err, evals)


def piecewise_radial(fr, d, r_min, r_max, breakpoints=(), epsrel=1e-10):
    """Radial integral of a function with known jump locations.

    The shell is split at ``breakpoints`` and each smooth piece is handed to
    adaptive Gauss-Kronrod quadrature; ``r_max`` may be infinite.
    """
    area = sphere_area(d)
    pts = sorted({float(b) for b in breakpoints if r_min < b < r_max})
    edges = [float(r_min)] + pts + [float(r_max)]
    value = err = 0.0

    def integrand(r):
        return float(fr(np.array([r]))[0]) * r ** (d - 1)

    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(integrand, a, b, epsrel=epsrel, epsabs=0.0, limit=200)
        value += v
        err += e
    _check_finite(value, "radial integral")
    return QuadResult(area * value, area * err, 0)


def _directions(d, n_angles):
    """Quadrature directions and weights on the unit sphere (d = 2 or 3)."""
    if d == 2:
        th = 2 * math.pi * np.arange(n_angles) / n_angles
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(n_angles, 2 * math.pi / n_angles)
    if d == 3:
        nz = max(2, n_angles // 2)
        z, wz = np.polynomial.legendre.leggauss(nz)
        ph = 2 * math.pi * np.arange(n_angles) / n_angles
        Z, P = np.meshgrid(z, ph, indexing="ij")
        s = np.sqrt(1 - Z ** 2)
        dirs = np.stack([s * np.cos(P), s * np.sin(P), Z], axis=-1).reshape(-1, 3)
        w = (wz[:, None] * np.full(n_angles, 2 * math.pi / n_angles)[None, :]).ravel()
        return dirs, w
    raise ValueError("superlevel integrals support d = 2 or 3")


def _smoothed_segment(weight_fn, c, u, a, b, d, epsrel):
    """Integral of ``weight_fn(c + r u) r^(d-1)`` over ``[a, b]``.

    The map ``r = a + (b - a)(3t^2 - 2t^3)`` has vanishing derivative at both
    ends, which turns square-root behaviour at the boundary of the set into
    a smooth integrand; Gauss-Legendre rules are then doubled until two
    successive values agree.
    """
    prev = None
    n = 32
    while n <= 4096:
        t, w = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        r = a + (b - a) * (3 * t ** 2 - 2 * t ** 3)
        jac = (b - a) * 6 * t * (1 - t)
        val = float(np.sum(w * jac * weight_fn(c + r[:, None] * u[None, :]) * r ** (d - 1)))
        if prev is not None and abs(val - prev) <= epsrel * abs(val) + 1e-300:
            return val
        prev = val
        n *= 2

    def integrand(r):
        return float(weight_fn((c + r * u)[None, :])[0]) * r ** (d - 1)

    return integrate.quad(integrand, a, b, epsrel=epsrel, epsabs=0.0, limit=200)[0]


def superlevel_integral(level_fn, weight_fn, d, r_max=1e6, r_min=0.0, n_angles=64,
                        per_decade=24, epsrel=1e-10, center=None,
                        what="superlevel integral"):
    """Integrate ``weight_fn`` over ``{x : level_fn(x) >= 0, r_min <= |x| <= r_max}``.

    Both callables take points of shape ``(N, d)``.  Along each ray the set
    is located by sampling on a logarithmic radius grid and refining sign
    changes with Brent's method; the radial pieces are integrated
    adaptively.  If the set still contains the outermost sample the set is
    considered unbounded and ``DivergenceError`` is raised.
    """
    dirs, wdir = _directions(d, n_angles)
    c = np.zeros(d) if center is None else np.asarray(center, float)
    r_lo = max(r_min, 1e-9)
    decades = math.log10(r_max / r_lo)
    radii = np.geomspace(r_lo, r_max, max(8, int(per_decade * decades) + 1))
    total = 0.0
    for u, wu in zip(dirs, wdir):
        pts = c + radii[:, None] * u[None, :]
        inside = level_fn(pts) >= 0
        if inside[-1]:
            raise DivergenceError(
                f"{what}: set reaches r = {r_max:g} along a ray (non-decaying level function)")
        if not inside.any():
            continue

        def g(r, u=u):
            return float(level_fn((c + r * u)[None, :])[0])

        edges = []
        start = r_min if inside[0] else None
        for i in range(1, radii.size):
            if inside[i] != inside[i - 1]:
                root = optimize.brentq(g, radii[i - 1], radii[i], xtol=1e-14, rtol=1e-15)
                if inside[i]:
                    start = root
                else:
                    edges.append((start, root))
                    start = None
        for a, b in edges:
            total += wu * _smoothed_segment(weight_fn, c, u, a, b, d, epsrel)
    _check_finite(total, what)
    return total
