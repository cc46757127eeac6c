"""Landau levels, classical and magnetic Weyl densities, Riesz means,
essential-spectrum lattices and eta-counting integrals near Landau levels.

Pointwise functions accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import quadrature
from .model import normalize_kind


# ----------------------------------------------------------------- Landau levels

@dataclass(frozen=True)
class LandauLevelSet:
    """Pointwise Landau levels at one point.

    For Dirac operators ``upper`` and ``lower`` hold the two branches
    ``V +- sqrt(M^2 + 2 j mu h F)`` and ``excepted`` the omitted ``j = 0`` value.
    """

    kind: str
    V: float
    F: float
    mu_h: float
    M: float
    levels: tuple
    upper: tuple = ()
    lower: tuple = ()
    excepted: float | None = None


def landau_levels(kind, V, F, mu_h, M=0.0, n_max=0, sign=1) -> LandauLevelSet:
    """First ``n_max + 1`` levels (per branch for Dirac).

    ``sign`` is the sign of the product of the Dirac orientation and ``F_12``;
    the ``j = 0`` level on the branch of that sign is excepted.
    """
    kind = normalize_kind(kind)
    if F < 0:
        raise ValueError("F must be nonnegative")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    b = mu_h * F
    n = np.arange(n_max + 1)
    if kind == "schrodinger":
        lev = V + (2 * n + 1) * b
        return LandauLevelSet(kind, V, F, mu_h, M, tuple(map(float, lev)))
    if kind == "pauli":
        lev = V + 2 * n * b
        return LandauLevelSet(kind, V, F, mu_h, M, tuple(map(float, lev)))
    if M < 0:
        raise ValueError("Dirac mass M must be nonnegative")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    j_up = n + (1 if sign > 0 else 0)
    j_lo = n + (1 if sign < 0 else 0)
    upper = V + np.sqrt(M * M + 2 * j_up * b)
    lower = V - np.sqrt(M * M + 2 * j_lo * b)
    excepted = V + sign * M
    levels = np.sort(np.concatenate([lower, upper]))
    return LandauLevelSet(kind, V, F, mu_h, M, tuple(map(float, levels)),
                          tuple(map(float, upper)), tuple(map(float, lower)), float(excepted))


def _count_arith(start, step, tau):
    """Number of ``k >= 0`` with ``start + k * step < tau`` (step > 0), exact
    at the boundary."""
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.ceil((tau - start) / step)
    k = np.where(np.isfinite(k), k, 0.0)
    k = np.maximum(k, 0.0)
    k = k + (start + k * step < tau)
    k = k - ((k > 0) & (start + (k - 1) * step >= tau))
    return k


def levels_below(kind, V, F, mu_h, tau):
    """Number of pointwise Landau levels strictly below ``tau``."""
    kind = normalize_kind(kind)
    V, F, tau = np.broadcast_arrays(*(np.asarray(a, float) for a in (V, F, tau)))
    b = mu_h * F
    pos = b > 0
    bb = np.where(pos, b, 1.0)
    if kind == "schrodinger":
        return np.where(pos, _count_arith(V + bb, 2 * bb, tau), 0.0)
    if kind == "pauli":
        return np.where(pos, _count_arith(V, 2 * bb, tau), 0.0)
    raise ValueError("level counting below tau is unbounded for Dirac operators; "
                     "use dirac_levels_between")


def dirac_levels_between(V, F, mu_h, M, lower, tau, sign=1):
    """Number of Dirac Landau levels in ``[lower, tau)`` at each point (F > 0)."""
    V, F = np.broadcast_arrays(np.asarray(V, float), np.asarray(F, float))
    b = np.where(F > 0, mu_h * F, 1.0)
    j_up = 1 if sign > 0 else 0
    j_lo = 1 if sign < 0 else 0

    def upper_below(t):
        # j >= j_up with V + sqrt(M^2 + 2jb) < t
        s = t - V
        q = np.where(s > 0, (s * s - M * M) / (2 * b), -1.0)
        return np.maximum(np.ceil(q) - j_up, 0.0)

    def lower_at_most(s):
        # j >= j_lo with sqrt(M^2 + 2jb) <= s
        q = np.where(s >= M, (s * s - M * M) / (2 * b), -1.0)
        return np.where(q >= 0, np.maximum(np.floor(q) + 1 - j_lo, 0.0), 0.0)

    count = (upper_below(tau) - upper_below(lower)
             + lower_at_most(V - lower) - lower_at_most(V - tau))
    return np.where(F > 0, count, 0.0)


# ----------------------------------------------------------------- densities

def weyl_density(V, tau, h=1.0, d=2, sqrt_g=1.0):
    """Classical Weyl density ``(2 pi h)^{-d} omega_d (tau - V)_+^{d/2} sqrt(g)``."""
    t = np.maximum(np.asarray(tau, float) - np.asarray(V, float), 0.0)
    return (2 * math.pi * h) ** (-d) * quadrature.ball_volume(d) * t ** (d / 2) * sqrt_g


def magnetic_weyl_density_2d(V, F, tau, mu, h, sqrt_g=1.0, kind="schrodinger",
                             M=0.0, lower=None):
    """Level-counting density in d = 2, per unit area at parameters (mu, h):
    ``mu h F sqrt(g) / (2 pi h^2) * #{levels below tau}``.

    Where ``F = 0`` the classical density is returned (its ``mu h -> 0`` limit).
    For Dirac operators pass ``lower`` to count levels in ``[lower, tau)``.
    """
    kind = normalize_kind(kind)
    V, F, tau = np.broadcast_arrays(*(np.asarray(a, float) for a in (V, F, tau)))
    if kind == "dirac":
        if lower is None:
            raise ValueError("Dirac densities need a lower end of the energy window")
        count = dirac_levels_between(V, F, mu * h, M, lower, tau)
    else:
        count = levels_below(kind, V, F, mu * h, tau)
    dens = mu * h * F * count / (2 * math.pi) / h ** 2 * sqrt_g
    classical = weyl_density(V, tau, h, 2, sqrt_g)
    out = np.where(F > 0, dens, classical)
    return out if out.ndim else float(out)


def magnetic_weyl_density_3d_pauli(V, F, tau, mu, h, sqrt_g=1.0, schrodinger=False):
    """``(4 pi^2)^{-1} sum_n (tau - V - c_n mu h F)_+^{1/2} F mu h sqrt(g) / h^3``
    with ``c_n = 2n`` (Pauli) or ``2n + 1`` (``schrodinger=True``).

    Where ``F = 0`` the ``mu h -> 0`` limit ``(tau - V)_+^{3/2} / (12 pi^2 h^3)``
    is returned.
    """
    V, F, tau = np.broadcast_arrays(*(np.asarray(a, float) for a in (V, F, tau)))
    b = mu * h * F
    t = tau - V
    total = np.zeros(t.shape)
    offset = 1.0 if schrodinger else 0.0
    n = 0
    while True:
        arg = t - (2 * n + offset) * b
        live = (arg > 0) & (b > 0)
        if not live.any():
            break
        total += np.where(live, np.sqrt(np.where(live, arg, 0.0)), 0.0)
        n += 1
    dens = total * b / (4 * math.pi ** 2) / h ** 3 * sqrt_g
    limit = np.maximum(t, 0.0) ** 1.5 / (12 * math.pi ** 2) / h ** 3 * sqrt_g
    out = np.where(b > 0, dens, limit)
    return out if out.ndim else float(out)


def model_density(spec, x, tau, **kw):
    """Density of the model at points ``x`` (2D magnetic Weyl or 3D sum)."""
    x = np.asarray(x, float)
    V = spec.potential(x)
    F = spec.scalar_intensity_at(x)
    sg = spec.sqrt_g(x)
    if spec.dimension == 2:
        return magnetic_weyl_density_2d(V, F, tau, spec.mu, spec.h, sg, spec.kind, spec.M, **kw)
    return magnetic_weyl_density_3d_pauli(V, F, tau, spec.mu, spec.h, sg,
                                          schrodinger=spec.kind == "schrodinger")


# ----------------------------------------------------------------- counting functions

@dataclass(frozen=True)
class CountingFunction:
    """``N(tau) = sum_i w_i (tau - a_i)_+^order`` (right-continuous steps for
    ``order = 0``), or a monotone callable with known support start.

    ``func`` (optional) takes an array of ``tau`` and overrides the
    piecewise-power representation; ``lower`` is then a point below which
    ``N`` vanishes and ``breakpoints`` lists non-smooth points for quadrature.
    """

    breaks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    order: float = 0.0
    func: object = None
    lower: float = -math.inf
    breakpoints: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.breaks, float)
        w = np.asarray(self.weights, float)
        if a.shape != w.shape or a.ndim != 1:
            raise ValueError("breaks and weights must be 1D arrays of equal length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative (monotone counting function)")
        idx = np.argsort(a, kind="stable")
        object.__setattr__(self, "breaks", a[idx])
        object.__setattr__(self, "weights", w[idx])
        if self.func is None and self.breaks.size:
            object.__setattr__(self, "lower", float(self.breaks[0]))

    @classmethod
    def from_eigenvalues(cls, eigenvalues):
        ev = np.sort(np.asarray(eigenvalues, float))
        return cls(ev, np.ones_like(ev), 0.0)

    @classmethod
    def from_steps(cls, taus, values):
        """Staircase that takes ``values[i]`` on ``[taus[i], taus[i+1])``."""
        taus = np.asarray(taus, float)
        values = np.asarray(values, float)
        jumps = np.diff(np.concatenate([[0.0], values]))
        if np.any(jumps < 0):
            raise ValueError("values must be nondecreasing")
        keep = jumps > 0
        return cls(taus[keep], jumps[keep], 0.0)

    @classmethod
    def from_callable(cls, func, lower, breakpoints=()):
        return cls(func=func, lower=float(lower), breakpoints=tuple(sorted(breakpoints)))

    @property
    def is_piecewise(self):
        return self.func is None

    def __call__(self, tau):
        tau = np.asarray(tau, float)
        if self.func is not None:
            return np.asarray(self.func(tau), float)
        t = tau[..., None] - self.breaks
        if self.order == 0:
            vals = (t >= 0) * self.weights
        else:
            vals = np.maximum(t, 0.0) ** self.order * self.weights
        return vals.sum(axis=-1)

    def write_csv(self, path, taus=None):
        """Write ``(tau, N)`` rows; defaults to the breakpoints."""
        from .harness.io import fmt
        taus = self.breaks if taus is None else np.asarray(taus, float)
        vals = self(taus)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tau", "N"])
            for t, v in zip(taus, vals):
                w.writerow([fmt(t), fmt(v)])


def riesz_coefficient(order, theta):
    """``Gamma(theta+1) Gamma(order+1) / Gamma(order+theta+1)``: the factor by
    which ``theta t_+^{theta-1} *`` maps ``t_+^order`` to ``t_+^{order+theta}``."""
    return math.exp(gammaln(theta + 1) + gammaln(order + 1) - gammaln(order + theta + 1))


def riesz_transform(N: CountingFunction, theta: float, epsrel=1e-12) -> CountingFunction:
    """Riesz mean ``theta tau_+^{theta-1} * N``.

    Piecewise-power input is transformed exactly (order raised by ``theta``).
    Callable input is transformed by adaptive quadrature with the algebraic
    end-point weight.  As ``theta -> 0`` the result tends to ``N`` at its
    continuity points.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    if N.is_piecewise:
        c = riesz_coefficient(N.order, theta)
        return CountingFunction(N.breaks, N.weights * c, N.order + theta)
    if not math.isfinite(N.lower):
        raise ValueError("callable counting functions need a finite support start")

    base = N.func
    lo = N.lower
    pts = N.breakpoints

    def transformed(taus):
        taus = np.atleast_1d(np.asarray(taus, float))
        out = np.zeros(taus.shape)
        for i, tau in enumerate(taus.ravel()):
            if tau <= lo:
                continue
            edges = [lo] + [p for p in pts if lo < p < tau] + [tau]
            total = 0.0
            f = lambda s: float(base(np.array([s]))[0])  # noqa: E731
            for a, b in zip(edges[:-2], edges[1:-1]):
                total += integrate.quad(lambda s: f(s) * (tau - s) ** (theta - 1), a, b,
                                        epsabs=0.0, epsrel=epsrel, limit=200)[0]
            a, b = edges[-2], edges[-1]
            total += integrate.quad(f, a, b, weight="alg", wvar=(0.0, theta - 1),
                                    epsabs=0.0, epsrel=epsrel, limit=200)[0]
            out.ravel()[i] = theta * total
        return out

    return CountingFunction.from_callable(transformed, lo, pts)


def pauli_3d_counting(V, F, mu, h, sqrt_g=1.0, tau_max=None, schrodinger=False):
    """The 3D density as a function of ``tau`` at one point, in
    piecewise-power form (order 1/2, break points ``V + c_n mu h F``)."""
    b = mu * h * F
    if b <= 0:
        raise ValueError("need mu h F > 0")
    if tau_max is None:
        raise ValueError("tau_max bounds the number of retained levels")
    offset = 1.0 if schrodinger else 0.0
    n = np.arange(int(max(0.0, (tau_max - V) / (2 * b))) + 2)
    breaks = V + (2 * n + offset) * b
    w = np.full(breaks.shape, b * sqrt_g / (4 * math.pi ** 2) / h ** 3)
    return CountingFunction(breaks, w, 0.5)


# ----------------------------------------------------------------- essential spectrum

@dataclass(frozen=True)
class EssentialSpectrumLattice:
    f_inf: tuple
    kind: str
    cutoff: float
    levels: tuple
    multiplicities: tuple

    def to_json(self):
        return {"kind": self.kind, "f_inf": list(self.f_inf), "cutoff": self.cutoff,
                "levels": list(self.levels), "multiplicities": list(self.multiplicities)}


def essential_levels(kind, f_inf, M=0.0, cutoff=10.0) -> EssentialSpectrumLattice:
    """Lattice points ``sum_j z_j f_{inf,j}`` below ``cutoff``.

    Schrödinger: ``z`` odd positive; Pauli: ``z`` even nonnegative.  Dirac
    (r = 1): ``+-sqrt(M^2 + 2 j f)`` with the ``j = 0`` upper level excepted,
    listed for ``|lambda| < cutoff``.
    """
    kind = normalize_kind(kind)
    f = tuple(float(v) for v in f_inf)
    r = len(f)
    if r == 0:
        return EssentialSpectrumLattice((), kind, float(cutoff), (), ())
    if any(v <= 0 for v in f):
        raise ValueError("intensities at infinity must be positive")
    values = []
    if kind == "dirac":
        if r != 1:
            raise ValueError("Dirac lattice implemented for r = 1")
        if M < 0:
            raise ValueError("Dirac mass M must be nonnegative")
        j = 0
        while M * M + 2 * j * f[0] < cutoff * cutoff:
            e = math.sqrt(M * M + 2 * j * f[0])
            if j > 0:
                values.append(e)
            values.append(-e)
            j += 1
    else:
        start, step = (1, 2) if kind == "schrodinger" else (0, 2)
        ranges = []
        for fj in f:
            base_others = sum(start * fk for fk in f) - start * fj
            zmax = start
            while base_others + (zmax + step) * fj < cutoff:
                zmax += step
            ranges.append(range(start, zmax + 1, step))
        for z in itertools.product(*ranges):
            v = sum(zj * fj for zj, fj in zip(z, f))
            if v < cutoff:
                values.append(v)
    if not values:
        return EssentialSpectrumLattice(f, kind, float(cutoff), (), ())
    vals = np.sort(np.asarray(values))
    scale = max(1.0, abs(cutoff))
    groups = [[vals[0]]]
    for v in vals[1:]:
        if abs(v - groups[-1][-1]) <= 1e-12 * scale:
            groups[-1].append(v)
        else:
            groups.append([v])
    levels = tuple(float(g[0]) for g in groups)
    mult = tuple(len(g) for g in groups)
    return EssentialSpectrumLattice(f, kind, float(cutoff), levels, mult)


def perturbed_level_potential(V, f, f_inf, z):
    """``V + sum_j z_j (f_j - f_{inf,j})``; ``f`` has a trailing axis of length r."""
    f = np.asarray(f, float)
    f_inf = np.asarray(f_inf, float)
    z = np.asarray(z, float)
    if f.shape[-1] != f_inf.size or z.size != f_inf.size:
        raise ValueError("lengths of f, f_inf and z must match")
    return np.asarray(V, float) + np.sum(z * (f - f_inf), axis=-1)


# ----------------------------------------------------------------- eta counting

def _spec_center(spec):
    return getattr(spec.potential, "center", None)


def _intensity_fn(spec, intensities, r):
    if intensities is not None:
        return lambda x: np.broadcast_to(np.asarray(intensities(x), float),
                                         x.shape[:-1] + (r,))
    return lambda x: spec.intensities_at(x)[..., :r]


def eta_count_landau(spec, W, eta, f_inf, sign=-1, intensities=None, r_max=1e6,
                     n_angles=64, per_decade=24, epsrel=1e-10):
    """``(2 pi)^{-r} sum_{z in W} int_{-+V_z >= eta} f_1 ... f_r sqrt(g) dx``.

    ``sign = -1`` counts below a level (set ``-V_z >= eta``), ``+1`` above.
    ``intensities`` optionally overrides the field of ``spec`` (callable on
    points returning ``(..., r)``).
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    f_inf = np.atleast_1d(np.asarray(f_inf, float))
    r = f_inf.size
    fx = _intensity_fn(spec, intensities, r)
    total = 0.0
    for z in W:
        z = np.atleast_1d(np.asarray(z, float))

        def level(x, z=z):
            vz = perturbed_level_potential(spec.potential(x), fx(x), f_inf, z)
            return (-vz if sign < 0 else vz) - eta

        def weight(x):
            return np.prod(fx(x), axis=-1) * spec.sqrt_g(x)

        total += quadrature.superlevel_integral(
            level, weight, spec.dimension, r_max=r_max, n_angles=n_angles,
            per_decade=per_decade, epsrel=epsrel, center=_spec_center(spec),
            what=f"eta-count for z={tuple(z)}")
    return total / (2 * math.pi) ** r


def eta_count_pauli(spec, p, eta, intensities=None, r_max=1e6, n_angles=64,
                    per_decade=24, epsrel=1e-10):
    """``(2 pi)^{-d+p} varpi_{d-2p} int_{-V >= eta} f_1..f_p (-V-eta)_+^{(d-2p)/2} sqrt(g) dx``."""
    d = spec.dimension
    if not (1 <= p and 2 * p <= d):
        raise ValueError("need 1 <= p and 2p <= d")
    if not eta > 0:
        raise ValueError("eta must be positive")
    fx = _intensity_fn(spec, intensities, p)
    k = d - 2 * p

    def level(x):
        return -spec.potential(x) - eta

    def weight(x):
        s = np.maximum(-spec.potential(x) - eta, 0.0)
        return np.prod(fx(x), axis=-1) * s ** (k / 2) * spec.sqrt_g(x)

    val = quadrature.superlevel_integral(level, weight, d, r_max=r_max, n_angles=n_angles,
                                         per_decade=per_decade, epsrel=epsrel,
                                         center=_spec_center(spec), what="Pauli eta-count")
    return (2 * math.pi) ** (-d + p) * quadrature.ball_volume(k) * val


def radial_weyl_integral(density_r, d, r_min, r_max, breakpoints=(), epsrel=1e-10):
    """Integrate a radial density over a shell, splitting at its jumps."""
    return quadrature.piecewise_radial(density_r, d, r_min, r_max, breakpoints, epsrel)


def _positive_intervals(g, r_min, r_max, per_decade=32):
    """Intervals of ``{r : g(r) > 0}`` in ``[r_min, r_max]``; ``r_max`` may be infinite.

    A set still positive at the last sample of an infinite range is taken to
    extend to infinity.
    """
    from scipy import optimize
    lo = max(r_min, 1e-12)
    hi = r_max if math.isfinite(r_max) else max(1e12, 1e6 * lo)
    r = np.geomspace(lo, hi, max(16, int(per_decade * math.log10(hi / lo)) + 1))
    pos = g(r) > 0
    out, start = [], (r_min if pos[0] else None)
    for i in range(1, r.size):
        if pos[i] != pos[i - 1]:
            root = optimize.brentq(g, r[i - 1], r[i], xtol=1e-14, rtol=1e-14)
            if pos[i]:
                start = root
            else:
                out.append((start, root))
                start = None
    if start is not None:
        out.append((start, r_max))
    return out


def radial_magnetic_count(V_r, F_r, d, mu, h, r_min, r_max=math.inf, tau=0.0,
                          kind="schrodinger", schrodinger=False, rtol=1e-10,
                          max_levels=200_000):
    """Integrated magnetic Weyl expression for radial ``V`` and ``F`` over a shell.

    The level sum is exchanged with the integral: level ``n`` contributes
    the integral of its own density over the radii where it lies below
    ``tau``.  Levels are added until a contribution falls below ``rtol``
    times the running total.  ``d = 2`` uses the level-counting density
    (kinds "schrodinger" and "pauli"); ``d = 3`` the square-root density
    with ``c_n = 2n`` or ``2n + 1`` (``schrodinger=True``).
    """
    kind = normalize_kind(kind)
    area = quadrature.sphere_area(d)
    b = lambda r: mu * h * F_r(r)
    if d == 2:
        if kind not in ("schrodinger", "pauli"):
            raise ValueError("2D level sums support Schrodinger and Pauli kinds")
        offset = 1.0 if kind == "schrodinger" else 0.0
    elif d == 3:
        offset = 1.0 if schrodinger else 0.0
    else:
        raise ValueError("d must be 2 or 3")
    total = 0.0
    for n in range(max_levels):
        c = 2 * n + offset

        def g(r, c=c):
            return tau - V_r(r) - c * b(r)

        if d == 2:
            def f(r):
                return b(r) / (2 * math.pi * h * h) * area * r
        else:
            def f(r, g=g):
                return (math.sqrt(max(g(r), 0.0)) * b(r) / (4 * math.pi ** 2 * h ** 3)
                        * area * r * r)
        term = 0.0
        for a, e in _positive_intervals(g, r_min, r_max):
            v, _ = integrate.quad(f, a, e, epsrel=1e-12, epsabs=0.0, limit=400)
            term += v
        total += term
        if term <= rtol * abs(total):
            return total
    raise quadrature.DivergenceError(f"level sum not converged after {max_levels} levels")
