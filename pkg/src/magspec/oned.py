"""One-dimensional auxiliary operators ``D g D + eps V`` on a truncated line.

The operator is discretised by a mass-lumped finite-volume scheme on a
``sinh`` graded mesh (fine near the origin, coarse far out), giving a
symmetric tridiagonal matrix whose eigenvalues are counted exactly with
Sturm sequences.  On top of that sit the shallow-well, slow-decay and
Hardy-threshold experiments and the reduction of a 3D operator with a
rank-two field to a family of 1D problems.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError

DECAY_CLASSES = ("compact", "rho-squared", "power")


@numba.njit(cache=True, nogil=True)
def _sturm(diag, off2, tau):
    # number of negative pivots of the LDL^T factorisation of T - tau;
    # -1 flags an exactly zero pivot
    count = 0
    q = diag[0] - tau
    if q < 0.0:
        count += 1
    for i in range(1, diag.size):
        if q == 0.0:
            return -1
        q = (diag[i] - tau) - off2[i - 1] / q
        if q < 0.0:
            count += 1
    if q == 0.0:
        return -1
    return count


# ------------------------------------------------------------------ profiles

@dataclass(frozen=True)
class Profile1D:
    """Coefficients of ``D_t g(t) D_t + V(t)``.

    ``potential`` and ``coefficient`` are vectorised callables.  When
    ``antiderivative`` (a primitive of V) is given, cell averages of V are
    taken exactly, which matters for potentials with jumps or integrable
    singularities.  ``decay`` declares the behaviour at infinity:
    ``"compact"`` (V vanishes for ``|t| > support``), ``"rho-squared"``
    (``|V| <= <t>^{-2q}`` with ``q > 1``) or ``"power"`` (``|V| ~ <t>^{-2q}``).
    """

    potential: Callable
    coefficient: Callable | None = None
    decay: str = "power"
    q: float | None = None
    support: float | None = None
    antiderivative: Callable | None = None
    bounds: tuple = (1e-8, 1e8)
    singular_points: tuple = ()

    def __post_init__(self):
        if self.decay not in DECAY_CLASSES:
            raise ValueError(f"decay must be one of {DECAY_CLASSES}")
        if self.decay == "compact" and self.support is None:
            raise ValueError("compact decay needs a support radius")

    def V(self, t):
        return np.asarray(self.potential(np.asarray(t, float)), float)

    def g(self, t):
        t = np.asarray(t, float)
        if self.coefficient is None:
            return np.ones_like(t)
        return np.asarray(self.coefficient(t), float)

    @property
    def integrable(self):
        """Whether the declared decay makes V integrable on the line."""
        if self.decay == "compact":
            return True
        return self.q is not None and 2 * self.q > 1

    def check(self, samples=None, rtol=1e-9):
        """Verify ellipticity of g and the declared decay on sample points."""
        if samples is None:
            samples = np.concatenate([-np.geomspace(1e-3, 1e6, 400), np.geomspace(1e-3, 1e6, 400)])
        t = np.asarray(samples, float)
        t = t[~np.isin(t, self.singular_points)]
        gv = self.g(t)
        lo, hi = self.bounds
        if np.any(gv < lo) or np.any(gv > hi):
            raise DomainError("coefficient g leaves its ellipticity bounds")
        v = np.abs(self.V(t))
        if self.decay == "compact":
            if np.any(v[np.abs(t) > self.support] > 0):
                raise DomainError("potential does not vanish outside its declared support")
        elif self.q is not None:
            far = np.abs(t) >= 10.0
            bound = (1 + t[far] ** 2) ** (-self.q)
            ratio = v[far] / bound
            if self.decay == "rho-squared" and np.any(ratio > 1 + rtol):
                raise DomainError("potential exceeds the declared weight rho^2")
            if self.decay == "power" and ratio.size and ratio.max() > 1e3 * max(ratio.min(), 1e-300):
                raise DomainError("potential does not follow the declared power decay")
        return True


def gaussian_well(depth=1.0) -> Profile1D:
    """``V = -depth * exp(-t^2)``."""
    from scipy.special import erf
    return Profile1D(lambda t: -depth * np.exp(-t * t), decay="rho-squared", q=2.0,
                     antiderivative=lambda t: -depth * 0.5 * math.sqrt(math.pi) * erf(t))


def square_well(depth=1.0, width=1.0) -> Profile1D:
    """``V = -depth`` on ``[-width, width]`` and 0 outside."""
    return Profile1D(lambda t: np.where(np.abs(t) <= width, -depth, 0.0), decay="compact",
                     support=width,
                     antiderivative=lambda t: -depth * np.clip(t, -width, width),
                     singular_points=(-width, width))


def bracket_power(c=1.0, q=0.25) -> Profile1D:
    """``V = -c <t>^{-2q}``."""
    return Profile1D(lambda t: -c * (1 + t * t) ** (-q), decay="power", q=q)


def homogeneous_power(c=1.0, q=0.25) -> Profile1D:
    """``V = -c |t|^{-2q}``, integrable at the origin for ``q < 1/2``."""
    if not 0 < q < 0.5:
        raise DomainError("homogeneous power needs 0 < q < 1/2")
    return Profile1D(lambda t: -c * np.abs(t) ** (-2 * q), decay="power", q=q,
                     antiderivative=lambda t: -c * np.sign(t) * np.abs(t) ** (1 - 2 * q) / (1 - 2 * q),
                     singular_points=(0.0,))


def hardy_potential(c) -> Profile1D:
    """``V = c |t|^{-2}`` for ``|t| >= 1`` and 0 inside."""
    def V(t):
        a = np.abs(t)
        return np.where(a >= 1, c / np.maximum(a * a, 1.0), 0.0)

    return Profile1D(V, decay="power", q=1.0,
                     antiderivative=lambda t: c * np.sign(t) * np.maximum(0.0, 1 - 1 / np.maximum(np.abs(t), 1.0)),
                     singular_points=(-1.0, 1.0))


PROFILE_KINDS = {
    "gaussian": lambda doc: gaussian_well(float(doc.get("depth", 1.0))),
    "square-well": lambda doc: square_well(float(doc.get("depth", 1.0)), float(doc.get("width", 1.0))),
    "bracket-power": lambda doc: bracket_power(float(doc.get("c", 1.0)), float(doc["q"])),
    "homogeneous-power": lambda doc: homogeneous_power(float(doc.get("c", 1.0)), float(doc["q"])),
    "hardy": lambda doc: hardy_potential(float(doc["c"])),
}


def profile_from_json(doc, pointer="") -> Profile1D:
    """Build a 1D profile from ``{"kind": ..., parameters}``."""
    from .errors import ConfigError
    if not isinstance(doc, dict) or doc.get("kind") not in PROFILE_KINDS:
        raise ConfigError(f"1D potential kind must be one of {sorted(PROFILE_KINDS)}", pointer + "/kind")
    try:
        return PROFILE_KINDS[doc["kind"]](doc)
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}", pointer) from None
    except (TypeError, ValueError, DomainError) as exc:
        raise ConfigError(str(exc), pointer) from None


def _as_profile(V) -> Profile1D:
    return V if isinstance(V, Profile1D) else Profile1D(V)


# ------------------------------------------------------------ discretisation

@dataclass(frozen=True)
class Tridiag:
    """Symmetric tridiagonal discretisation with Dirichlet ends at ``+-L``.

    ``nodes`` are the interior mesh points and ``weights`` their dual cell
    lengths; the matrix is ``W^{-1/2} K W^{-1/2}`` plus the lumped potential.
    """

    L: float
    n: int
    diag: np.ndarray = field(repr=False)
    off: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def dense(self):
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def gershgorin(self):
        r = np.abs(self.off)
        rad = np.r_[r, 0.0] + np.r_[0.0, r]
        return float(np.min(self.diag - rad)), float(np.max(self.diag + rad))


def sinh_mesh(L, n, core=None):
    """``n + 2`` points on ``[-L, L]``, graded as ``core * sinh(s)``; uniform if ``core`` is None."""
    if core is None:
        return np.linspace(-L, L, n + 2)
    smax = math.asinh(L / core)
    x = core * np.sinh(np.linspace(-smax, smax, n + 2))
    x[0], x[-1] = -L, L
    return x


def _cell_average(profile, a, b):
    if profile.antiderivative is not None:
        P = profile.antiderivative
        return (P(b) - P(a)) / (b - a)
    # 4-point Gauss-Legendre on each cell; nodes never hit cell ends
    t, w = np.polynomial.legendre.leggauss(4)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    vals = sum(wk * profile.V(mid + half * tk) for tk, wk in zip(t, w))
    return 0.5 * vals


def discretize_1d(profile, eps=1.0, L=10.0, n=1000, core=None, center=0.0) -> Tridiag:
    """Assemble ``D g D + eps V`` on ``[center - L, center + L]`` with ``n`` interior nodes.

    The potential enters through its average over each dual cell, and g is
    sampled at cell midpoints.
    """
    if not L > 0 or n < 3:
        raise ValueError("need L > 0 and n >= 3")
    profile = _as_profile(profile)
    x = center + sinh_mesh(L, n, core)
    h = np.diff(x)
    w = 0.5 * (h[:-1] + h[1:])
    xi = x[1:-1]
    xm = 0.5 * (x[:-1] + x[1:])
    gm = profile.g(xm)
    vbar = _cell_average(profile, xm[:-1], xm[1:])
    diag = (gm[:-1] / h[:-1] + gm[1:] / h[1:]) / w + eps * vbar
    off = -gm[1:-1] / h[1:-1] / np.sqrt(w[:-1] * w[1:])
    return Tridiag(float(L), int(n), diag, off, xi, w)


# ------------------------------------------------------------------ counting

@dataclass(frozen=True)
class SturmCount:
    count: int
    threshold: float
    jitter: float = 0.0


def count_below(op: Tridiag, threshold, report=False, max_retries=8):
    """Number of eigenvalues strictly below ``threshold``.

    If a pivot vanishes exactly the threshold is moved by a few ulps
    (alternating sides, growing) and the move is reported.
    """
    threshold = float(threshold)
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    off2 = op.off * op.off
    c = _sturm(op.diag, off2, threshold)
    shift = 0.0
    k = 0
    while c < 0:
        if k >= max_retries:
            raise ArithmeticError("Sturm sequence kept hitting a zero pivot")
        k += 1
        shift = (-1) ** k * 4.0 ** k * math.ulp(max(abs(threshold), 1e-300))
        c = _sturm(op.diag, off2, threshold + shift)
    if shift:
        warnings.warn(f"zero pivot at threshold {threshold!r}; counted at shift {shift:.3g}",
                      RuntimeWarning, stacklevel=2)
    return SturmCount(int(c), threshold, shift) if report else int(c)


def lowest_eigenvalue(op: Tridiag, rtol=1e-10, atol=1e-300) -> float:
    """Smallest eigenvalue by bisection on the Sturm count.

    The invariant ``count(lo) == 0 < count(hi)`` holds at every step.
    """
    lo, hi = op.gershgorin()
    span = max(hi - lo, 1.0)
    lo -= 1e-12 * span
    hi += 1e-12 * span
    off2 = op.off * op.off

    def cnt(t):
        c = _sturm(op.diag, off2, t)
        return count_below(op, t) if c < 0 else c

    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if cnt(mid) >= 1:
            hi = mid
        else:
            lo = mid
        if hi - lo <= max(rtol * abs(mid), atol, 4 * math.ulp(abs(mid))):
            break
    return 0.5 * (lo + hi)


# ------------------------------------------------------------ functionals

def w_functional(V, epsrel=1e-10) -> float:
    """``W = -1/2 * integral of V over the line``."""
    prof = _as_profile(V)
    if not prof.integrable:
        raise DivergenceError(
            "potential is not integrable on the line (decay exponent 2q must exceed 1)")
    if prof.decay == "compact":
        s = prof.support
        pts = sorted({p for p in prof.singular_points if -s < p < s} | {0.0})
        edges = [-s] + pts + [s]
        val = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                val += integrate.quad(lambda t: float(prof.V(t)), a, b, epsrel=epsrel, limit=200)[0]
        return -0.5 * val
    if prof.antiderivative is not None and prof.decay == "rho-squared":
        big = 1e8
        return float(-0.5 * (prof.antiderivative(big) - prof.antiderivative(-big)))
    pts = sorted(set(prof.singular_points) | {0.0})
    edges = [-math.inf] + pts + [math.inf]
    val = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            for a, b in zip(edges[:-1], edges[1:]):
                if b > a:
                    val += integrate.quad(lambda t: float(prof.V(t)), a, b, epsrel=epsrel, limit=400)[0]
        except integrate.IntegrationWarning as exc:
            raise DivergenceError(f"integral of V did not converge: {exc}") from None
    return -0.5 * val


def _superlevel_intervals(f, r_max=1e8, n=4000):
    """Intervals of ``{t : f(t) > 0}`` within ``[-r_max, r_max]``."""
    s = np.linspace(-math.asinh(r_max), math.asinh(r_max), n)
    t = np.sinh(s)
    pos = f(t) > 0
    if pos[0] or pos[-1]:
        raise DivergenceError("superlevel set reaches the sampling window")
    out = []
    start = None
    for i in range(1, t.size):
        if pos[i] != pos[i - 1]:
            a, b = t[i - 1], t[i]
            # locate the switch; f may jump, so bisect on the sign
            for _ in range(200):
                m = 0.5 * (a + b)
                if (f(np.array([m]))[0] > 0) == pos[i - 1]:
                    a = m
                else:
                    b = m
                if b - a <= 1e-14 * max(1.0, abs(m)):
                    break
            root = 0.5 * (a + b)
            if pos[i]:
                start = root
            else:
                out.append((start, root))
    return out


def weyl_count_1d(V, eps, eta, epsrel=1e-10) -> float:
    """``(2 pi)^{-1} * integral of (-eps V - eta)_+^{1/2}``."""
    prof = _as_profile(V)

    def s(t):
        return -eps * prof.V(t) - eta

    if eta <= 0 and not (prof.decay == "compact"):
        raise DivergenceError("Weyl count at eta <= 0 needs a compactly supported potential")
    if prof.decay == "compact":
        edges = sorted({-prof.support, prof.support} | {p for p in prof.singular_points
                                                         if abs(p) < prof.support})
        pieces = list(zip(edges[:-1], edges[1:]))
    else:
        pieces = _superlevel_intervals(s)
    total = 0.0
    for a, b in pieces:
        v, _ = integrate.quad(lambda t: math.sqrt(max(float(s(np.array([t]))[0]), 0.0)), a, b,
                              epsrel=epsrel, limit=400)
        total += v
    return total / (2 * math.pi)


# ----------------------------------------------------------- experiments

def _adaptive_lowest(profile, eps, L0, core, per_unit, rel=1e-3, max_doublings=6):
    """Lowest eigenvalue with ``L`` doubled until it moves by less than ``rel``."""
    def solve(L):
        n = int(per_unit * 2 * math.asinh(L / core)) // 2 * 2
        op = discretize_1d(profile, eps, L, max(n, 8), core)
        return op, lowest_eigenvalue(op)

    L = L0
    op, lam = solve(L)
    for _ in range(max_doublings):
        op2, lam2 = solve(2 * L)
        moved = abs(lam2 - lam) <= rel * abs(lam2)
        L, op, lam = 2 * L, op2, lam2
        if moved:
            return op, lam, L, True
    warnings.warn(f"box size still moves the lowest eigenvalue at L = {L:g}", RuntimeWarning,
                  stacklevel=3)
    return op, lam, L, False


@dataclass
class ShallowWellReport:
    eps: np.ndarray
    lam: np.ndarray
    law: np.ndarray
    counts: np.ndarray
    box: np.ndarray
    W: float

    @property
    def ratios(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.lam / self.law

    @property
    def gaps(self):
        return np.abs(self.ratios - 1.0)

    def gaps_decreasing(self):
        order = np.argsort(-self.eps)
        g = self.gaps[order]
        return bool(np.all(np.diff(g) < 0))

    def rows(self):
        return np.column_stack([self.eps, self.lam, self.law, self.ratios, self.counts])

    columns = ("eps", "lambda", "law", "ratio", "count")


def shallow_well_check(profile, eps_grid, box_factor=30.0, core=1.0, per_unit=400) -> ShallowWellReport:
    """Lowest eigenvalue of ``D^2 + eps V`` against ``-W^2 eps^2`` on a grid of eps."""
    profile = _as_profile(profile)
    W = w_functional(profile)
    eps_grid = np.asarray(eps_grid, float)
    lam, counts, box = [], [], []
    for eps in eps_grid:
        scale = eps * W if W > 0 else eps
        op, l, L, _ = _adaptive_lowest(profile, eps, box_factor / scale, core, per_unit)
        lam.append(l)
        counts.append(count_below(op, 0.0))
        box.append(L)
    law = -(W ** 2) * eps_grid ** 2 if W > 0 else np.full(eps_grid.size, np.nan)
    return ShallowWellReport(eps_grid, np.array(lam), law, np.array(counts), np.array(box), W)


@dataclass
class FitLine:
    slope: float
    intercept: float
    r2: float


def _linfit(x, y) -> FitLine:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    p = np.polyfit(x, y, 1)
    res = y - np.polyval(p, x)
    ss = float((y - y.mean()) @ (y - y.mean()))
    r2 = 1.0 - float(res @ res) / ss if ss > 0 else (1.0 if float(res @ res) == 0 else 0.0)
    return FitLine(float(p[0]), float(p[1]), r2)


def homogeneous_ground_energy(c=1.0, q=0.25, L=200.0, n=16000, core=0.25) -> tuple[float, float]:
    """Lowest eigenvalue of ``D^2 - c|t|^{-2q}`` at two resolutions (n and n/2)."""
    prof = homogeneous_power(c, q)
    fine = lowest_eigenvalue(discretize_1d(prof, 1.0, L, n, core))
    coarse = lowest_eigenvalue(discretize_1d(prof, 1.0, L, n // 2 // 2 * 2, core))
    return fine, coarse


@dataclass
class SlowDecayReport:
    q: float
    c: float
    mu: float
    mu_coarse: float
    eps: np.ndarray
    lam: np.ndarray
    fit: FitLine

    @property
    def exponent(self):
        return 1.0 / (1.0 - self.q)

    @property
    def ratios(self):
        return self.lam * self.eps ** (-self.exponent) / self.mu

    def rows(self):
        return np.column_stack([self.eps, self.lam, self.mu * self.eps ** self.exponent, self.ratios])

    columns = ("eps", "lambda", "law", "ratio")


def slow_decay_check(q=0.25, c=1.0, eps_grid=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5),
                     box_factor=40.0, per_unit=1200) -> SlowDecayReport:
    """``lambda(eps) eps^{-1/(1-q)}`` against the homogeneous ground energy."""
    if not 0 < q < 0.5 or not c > 0:
        raise DomainError("need q in (0, 1/2) and c > 0")
    mu, mu2 = homogeneous_ground_energy(c, q)
    prof = bracket_power(c, q)
    eps_grid = np.asarray(eps_grid, float)
    lam = []
    for eps in eps_grid:
        ell = eps ** (-1.0 / (2.0 * (1.0 - q)))
        _, l, _, _ = _adaptive_lowest(prof, eps, box_factor * ell, 1.0, per_unit)
        lam.append(l)
    lam = np.array(lam)
    fit = _linfit(np.log(eps_grid), np.log(-lam))
    return SlowDecayReport(q, c, mu, mu2, eps_grid, lam, fit)


@dataclass
class WeylComparison:
    weyl: float
    count: int

    @property
    def ratio(self):
        return self.count / self.weyl if self.weyl > 0 else math.nan


def weyl_count_check(profile, eps, eta, box_factor=12.0, n=20000) -> WeylComparison:
    """Numerical count of eigenvalues below ``-eta`` next to the Weyl integral."""
    prof = _as_profile(profile)
    weyl = weyl_count_1d(prof, eps, eta)
    if prof.decay == "compact":
        L = box_factor * prof.support
    else:
        iv = _superlevel_intervals(lambda t: -eps * prof.V(t) - eta)
        L = box_factor * max([max(abs(a), abs(b)) for a, b in iv] + [1.0])
    op = discretize_1d(prof, eps, L, n)
    return WeylComparison(weyl, count_below(op, -eta))


@dataclass
class HardyReport:
    c: float
    L: np.ndarray
    counts: np.ndarray
    counts_coarse: np.ndarray
    fit: FitLine

    @property
    def bounded(self):
        return bool(np.all(self.counts == self.counts[0]))

    @property
    def classification(self):
        if self.bounded:
            return "bounded"
        return "growing" if self.fit.slope > 0 else "irregular"

    def rows(self):
        return np.column_stack([self.L, self.counts, self.counts_coarse])

    columns = ("L", "count", "count_coarse")


def hardy_threshold_check(c, L_grid=tuple(10.0 ** np.arange(2, 12.01, 0.5)), core=0.5,
                          per_decade=300, base=400) -> HardyReport:
    """Negative-eigenvalue counts of ``D^2 + c 1_{|t|>=1} |t|^{-2}`` on growing boxes.

    Each box is solved at ``n`` and ``2n`` nodes; the finer count is used
    and the coarse one kept for a resolution check.  The counts are fitted
    against ``log L``.
    """
    prof = hardy_potential(c)
    L_grid = np.asarray(L_grid, float)
    fine, coarse = [], []
    for L in L_grid:
        n = int(per_decade * math.log10(L)) + base
        coarse.append(count_below(discretize_1d(prof, 1.0, L, n, core), 0.0))
        fine.append(count_below(discretize_1d(prof, 1.0, L, 2 * n, core), 0.0))
    fine = np.array(fine)
    fit = _linfit(np.log(L_grid), fine) if len(L_grid) >= 2 else FitLine(0.0, float(fine[0]), 1.0)
    return HardyReport(c, L_grid, fine, np.array(coarse), fit)


def hardy_form_defect(n, L=1.0) -> float:
    """``1/4 - min u'^2 / (u/x)^2`` over discrete functions on ``[0, L]`` vanishing at both ends.

    Uses the uniform grid with ``n`` interior nodes, the standard difference
    form and the lumped weight ``delta / x_i^2``.
    """
    from scipy.linalg import eigh_tridiagonal
    delta = L / (n + 1)
    x = delta * np.arange(1, n + 1)
    m = delta / x ** 2
    s = 1.0 / np.sqrt(m)
    d = 2.0 / delta * s * s
    e = -1.0 / delta * s[:-1] * s[1:]
    lam = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, 0))[0]
    return 0.25 - float(lam)


# ------------------------------------------------------ dimensional reduction

@dataclass
class ReducedField:
    """Lowest 1D eigenvalue ``lambda(x')`` over a tensor grid of transverse points."""

    axes: tuple
    lam: np.ndarray
    W: np.ndarray
    negative_counts: np.ndarray
    f_inf: tuple

    @property
    def flagged(self):
        """Transverse points with more than one negative 1D eigenvalue."""
        return self.negative_counts > 1

    def _cell_areas(self):
        widths = []
        for a in self.axes:
            a = np.asarray(a, float)
            edges = np.concatenate([[a[0]], 0.5 * (a[1:] + a[:-1]), [a[-1]]])
            widths.append(np.diff(edges))
        return np.multiply.outer(*widths) if len(widths) == 2 else widths[0]

    def _count(self, values, eta):
        if not eta > 0:
            raise ValueError("eta must be positive")
        r = len(self.f_inf)
        weight = float(np.prod(self.f_inf)) / (2 * math.pi) ** r
        return weight * float(np.sum(self._cell_areas()[values >= eta]))

    def count(self, eta):
        """``(2 pi)^{-r} f_inf,1..f_inf,r * area{-lambda >= eta}``."""
        return self._count(-self.lam, eta)

    def surrogate_count(self, eta):
        """Same with ``lambda`` replaced by ``-W^2`` (only where W > 0)."""
        return self._count(np.where(self.W > 0, self.W ** 2, 0.0), eta)

    def rows(self):
        g = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([g[0].ravel(), g[1].ravel(), self.lam.ravel(), (self.W ** 2).ravel()])

    columns = ("x1", "x2", "lambda", "W2")


def reduced_potential(spec, f_inf, axis=None):
    """``V*(x) = V(x) + sum_j (f_j(x) - f_inf,j)`` as a vectorised callable."""
    f_inf = np.atleast_1d(np.asarray(f_inf, float))

    def vstar(x):
        x = np.asarray(x, float)
        f = spec.intensities_at(x)[..., : f_inf.size]
        return spec.potential_at(x) + np.sum(f - f_inf, axis=-1)

    return vstar


def reduced_lambda_field(spec, grid_axes, f_inf, axis=None, vstar=None, L=20.0,
                         box_factor=30.0, core=1.0, per_unit=150, threads=1) -> ReducedField:
    """Lowest eigenvalue of ``D_z g^{zz} D_z + V*(z; x')`` for each transverse point.

    ``axis`` is the direction along which the reduction runs; by default
    the last coordinate, which is the kernel of the standard rotation.  The
    remaining coordinates are sampled on the tensor grid ``grid_axes``.
    ``vstar`` overrides the reduced potential.  The box grows like ``1/W``
    so that weakly bound states are not squeezed by the Dirichlet ends.
    """
    d = spec.dimension
    if d != 3:
        raise DomainError("the reduction is implemented for d = 3")
    axis = d - 1 if axis is None else axis
    others = [k for k in range(d) if k != axis]
    f_inf = tuple(np.atleast_1d(np.asarray(f_inf, float)).tolist())
    vfun = reduced_potential(spec, f_inf, axis) if vstar is None else vstar
    ax = [np.asarray(a, float) for a in grid_axes]
    if len(ax) != 2:
        raise ValueError("need two transverse grid axes")
    shape = (ax[0].size, ax[1].size)

    def solve(idx):
        i, j = idx
        base = np.zeros(d)
        base[others[0]], base[others[1]] = ax[0][i], ax[1][j]

        def point(t):
            t = np.asarray(t, float)
            pts = np.broadcast_to(base, t.shape + (d,)).copy()
            pts[..., axis] = t
            return pts

        prof = Profile1D(lambda t: vfun(point(t)),
                         coefficient=lambda t: spec.metric.diagonal_at(point(t), axis))
        s = np.linspace(-math.asinh(1e6), math.asinh(1e6), 8001)
        W = -0.5 * float(integrate.trapezoid(prof.V(np.sinh(s)) * np.cosh(s), s))
        L0 = max(L, box_factor / W) if W > 0 else L
        op, lam, _, _ = _adaptive_lowest(prof, 1.0, L0, core, per_unit, max_doublings=4)
        neg = count_below(op, 0.0)
        return lam, W, neg

    idx = [(i, j) for i in range(shape[0]) for j in range(shape[1])]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            res = list(pool.map(solve, idx))
    else:
        res = [solve(k) for k in idx]
    lam = np.array([r[0] for r in res]).reshape(shape)
    W = np.array([r[1] for r in res]).reshape(shape)
    neg = np.array([r[2] for r in res]).reshape(shape)
    return ReducedField(tuple(ax), lam, W, neg, f_inf)


__all__ = [
    "Profile1D", "Tridiag", "SturmCount", "gaussian_well", "square_well", "bracket_power",
    "homogeneous_power", "hardy_potential", "profile_from_json", "sinh_mesh", "discretize_1d",
    "count_below", "lowest_eigenvalue", "w_functional", "weyl_count_1d", "weyl_count_check",
    "ShallowWellReport", "shallow_well_check", "SlowDecayReport", "slow_decay_check",
    "homogeneous_ground_energy", "HardyReport", "hardy_threshold_check", "hardy_form_defect",
    "ReducedField", "reduced_potential", "reduced_lambda_field", "FitLine",
]
