"""Vector potentials with prescribed field growth, the magnetic tensor
``F_jk = d_k V_j - d_j V_k`` and its intensities.

All potentials are vectorised: ``potential(x)`` and ``jacobian(x)`` accept
points of shape ``(..., d)`` and return ``(..., d)`` and ``(..., d, d)``
arrays, with ``jacobian[..., j, k] = d_k V_j``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import hyp2f1

from .errors import ConfigError, DomainError

DEFAULT_FD_SCALE = 1e-4


def rotation_matrix(d):
    """Block-diagonal ``Lambda`` with blocks ``[[0, 1], [-1, 0]]`` (zero last
    row/column when d is odd), so ``Lambda x = (x2, -x1, x4, -x3, ...)``."""
    lam = np.zeros((d, d))
    for j in range(0, d - 1, 2):
        lam[j, j + 1] = 1.0
        lam[j + 1, j] = -1.0
    return lam


# ----------------------------------------------------------------- radial profiles

@dataclass(frozen=True)
class Profile:
    """Radial profile ``coef * b(r)**m``.

    ``base`` is ``"abs"`` (``b = r``), ``"bracket"`` (``b = <r>``) or
    ``"const"`` (the constant ``coef``).
    """

    m: float = 0.0
    coef: float = 1.0
    base: str = "abs"

    def __post_init__(self):
        if self.base not in ("abs", "bracket", "const"):
            raise ValueError(f"unknown profile base {self.base!r}")

    def _check(self, r):
        if self.base == "abs" and self.m < 0 and np.any(r == 0):
            raise DomainError(f"profile |x|^{self.m} evaluated at the origin")

    def value(self, r):
        r = np.asarray(r, float)
        if self.base == "const":
            return np.full(r.shape, float(self.coef))
        self._check(r)
        b = r if self.base == "abs" else np.sqrt(1 + r * r)
        return self.coef * b ** self.m

    def deriv(self, r):
        r = np.asarray(r, float)
        return self.deriv_over_r(r) * r

    def deriv_over_r(self, r):
        """``sigma'(r) / r``, finite at r = 0 whenever the profile is smooth."""
        r = np.asarray(r, float)
        if self.base == "const" or self.m == 0:
            return np.zeros(r.shape)
        if self.base == "bracket":
            return self.coef * self.m * (1 + r * r) ** ((self.m - 2) / 2)
        if np.any(r == 0) and self.m < 2:
            raise DomainError(f"derivative of |x|^{self.m} is singular at the origin")
        return self.coef * self.m * r ** (self.m - 2)

    def to_json(self):
        return {"m": self.m, "coef": self.coef, "base": self.base}


def _norm(x):
    return np.linalg.norm(x, axis=-1)


# ----------------------------------------------------------------- constructions

class VectorPotentialSpec:
    """Interface for vector-potential constructions."""

    dimension: int

    def potential(self, x):
        raise NotImplementedError

    def jacobian(self, x):
        raise NotImplementedError(f"{type(self).__name__} has no closed-form derivatives")

    def period_gauge(self, axis, length):
        """Gradient ``c`` of the linear gauge ``chi = c.x`` with
        ``A(x + length e_axis) = A(x) + c``; zero for periodic potentials."""
        return np.zeros(self.dimension)


@dataclass(frozen=True)
class RotationalEven(VectorPotentialSpec):
    """``V = (Lambda x) sigma(|x|)`` in even dimension."""

    dimension: int
    profile: Profile = Profile()

    def __post_init__(self):
        if self.dimension % 2:
            raise ValueError("RotationalEven needs an even dimension")

    def potential(self, x):
        x = np.asarray(x, float)
        lam = rotation_matrix(self.dimension)
        return (x @ lam.T) * self.profile.value(_norm(x))[..., None]

    def jacobian(self, x):
        x = np.asarray(x, float)
        lam = rotation_matrix(self.dimension)
        r = _norm(x)
        lx = x @ lam.T
        s = self.profile.value(r)[..., None, None]
        sp = self.profile.deriv_over_r(r)[..., None, None]
        return lam * s + sp * lx[..., :, None] * x[..., None, :]


@dataclass(frozen=True)
class RotationalOdd(VectorPotentialSpec):
    """``V = (Lambda x) sigma(|x|)`` in odd dimension plus an optional axial
    component ``V_d = tau(|x|)`` (for instance ``a |x|^{m+1}``)."""

    dimension: int
    profile: Profile = Profile()
    axial: Profile | None = None

    def __post_init__(self):
        if self.dimension % 2 == 0:
            raise ValueError("RotationalOdd needs an odd dimension")

    @classmethod
    def with_axial(cls, d, m, a, base="abs", coef=1.0):
        """Profile ``coef*b**m`` with axial term ``a*b**(m+1)``."""
        return cls(d, Profile(m, coef, base), Profile(m + 1, a, base) if a else None)

    def potential(self, x):
        x = np.asarray(x, float)
        lam = rotation_matrix(self.dimension)
        r = _norm(x)
        v = (x @ lam.T) * self.profile.value(r)[..., None]
        if self.axial is not None:
            v[..., -1] += self.axial.value(r)
        return v

    def jacobian(self, x):
        x = np.asarray(x, float)
        lam = rotation_matrix(self.dimension)
        r = _norm(x)
        lx = x @ lam.T
        s = self.profile.value(r)[..., None, None]
        sp = self.profile.deriv_over_r(r)[..., None, None]
        jac = lam * s + sp * lx[..., :, None] * x[..., None, :]
        if self.axial is not None:
            jac[..., -1, :] += self.axial.deriv_over_r(r)[..., None] * x
        return jac


def _qh_norm(x, ls, n):
    """Quasi-homogeneous length ``(sum |x_j|^{2n/l_j})^{1/2n}`` and its gradient."""
    ls = np.asarray(ls, float)
    p = 2 * n / ls
    ax = np.abs(x)
    s = np.sum(ax ** p, axis=-1)
    if np.any(s == 0):
        raise DomainError("quasi-homogeneous length vanishes at the origin")
    q = s ** (1 / (2 * n))
    grad = q[..., None] ** (1 - 2 * n) * ax ** (p - 1) * np.sign(x) / ls
    return q, grad


@dataclass(frozen=True)
class QuasiHomogeneous(VectorPotentialSpec):
    """Potentials built from the quasi-homogeneous length ``[x]_L``.

    d = 2: ``(-a x2 [x]^m, x1 [x]^m)``.  d = 3: ``(0, x1 [x]^m, x1 [x]^{m+1})``
    for m != -1 and ``(-x2 [x]^m, x1 [x]^m, 0)`` for m = -1.
    """

    dimension: int
    L: tuple
    m: float
    a: float = 1.0
    n: int = 4

    def __post_init__(self):
        if self.dimension not in (2, 3) or len(self.L) != self.dimension:
            raise ValueError("QuasiHomogeneous needs d in (2, 3) and one exponent per axis")

    def potential(self, x):
        x = np.asarray(x, float)
        q, _ = _qh_norm(x, self.L, self.n)
        m = self.m
        v = np.zeros_like(x)
        if self.dimension == 2:
            v[..., 0] = -self.a * x[..., 1] * q ** m
            v[..., 1] = x[..., 0] * q ** m
        elif m != -1:
            v[..., 1] = x[..., 0] * q ** m
            v[..., 2] = x[..., 0] * q ** (m + 1)
        else:
            v[..., 0] = -x[..., 1] * q ** m
            v[..., 1] = x[..., 0] * q ** m
        return v

    def jacobian(self, x):
        x = np.asarray(x, float)
        q, gq = _qh_norm(x, self.L, self.n)
        m = self.m
        d = self.dimension
        jac = np.zeros(x.shape + (d,))

        def term(coef, xi, p):
            # gradient of coef * x_i * q^p
            g = coef * p * x[..., xi, None] * q[..., None] ** (p - 1) * gq
            g[..., xi] += coef * q ** p
            return g

        if d == 2:
            jac[..., 0, :] = term(-self.a, 1, m)
            jac[..., 1, :] = term(1.0, 0, m)
        elif m != -1:
            jac[..., 1, :] = term(1.0, 0, m)
            jac[..., 2, :] = term(1.0, 0, m + 1)
        else:
            jac[..., 0, :] = term(-1.0, 1, m)
            jac[..., 1, :] = term(1.0, 0, m)
        return jac


def phase_integral(rho, x3, beta):
    """``int_0^{x3} (rho^2 + y^2)^{(beta-1)/2} dy`` in closed form."""
    k = (beta - 1) / 2
    rho = np.asarray(rho, float)
    x3 = np.asarray(x3, float)
    return x3 * rho ** (2 * k) * hyp2f1(-k, 0.5, 1.5, -(x3 / rho) ** 2)


@dataclass(frozen=True)
class ExponentialPhase(VectorPotentialSpec):
    """d = 3: ``V = e^nu |x|^m (cos psi, sin psi, 0)`` with ``nu = a |x|^beta``
    and ``psi(x', x3) = int_0^{x3} (|x'|^2 + y^2)^{(beta-1)/2} dy``."""

    beta: float
    m: float = 0.0
    a: float = 1.0
    dimension: int = 3

    def __post_init__(self):
        if self.dimension != 3:
            raise ValueError("ExponentialPhase is a d = 3 construction")

    def _parts(self, x):
        x = np.asarray(x, float)
        rho = np.hypot(x[..., 0], x[..., 1])
        if np.any(rho == 0):
            raise DomainError("phase undefined on the x3 axis")
        r = _norm(x)
        return x, rho, r

    def psi(self, x):
        x, rho, _ = self._parts(x)
        return phase_integral(rho, x[..., 2], self.beta)

    def potential(self, x):
        x, rho, r = self._parts(x)
        amp = np.exp(self.a * r ** self.beta) * r ** self.m
        ps = phase_integral(rho, x[..., 2], self.beta)
        v = np.zeros_like(x)
        v[..., 0] = amp * np.cos(ps)
        v[..., 1] = amp * np.sin(ps)
        return v

    def jacobian(self, x):
        x, rho, r = self._parts(x)
        b, m, k = self.beta, self.m, (self.beta - 1) / 2
        amp = np.exp(self.a * r ** b) * r ** m
        # grad log(amp) = (a b r^{b-2} + m r^{-2}) x
        glog = (self.a * b * r ** (b - 2) + m * r ** -2.0)[..., None] * x
        x3 = x[..., 2]
        gpsi = np.zeros_like(x)
        if k != 0:
            inner = x3 * rho ** (2 * k - 2) * hyp2f1(1 - k, 0.5, 1.5, -(x3 / rho) ** 2)
            gpsi[..., 0] = 2 * k * x[..., 0] * inner
            gpsi[..., 1] = 2 * k * x[..., 1] * inner
        gpsi[..., 2] = (rho ** 2 + x3 ** 2) ** k
        ps = phase_integral(rho, x3, b)
        c, s = np.cos(ps), np.sin(ps)
        jac = np.zeros(x.shape + (3,))
        jac[..., 0, :] = amp[..., None] * (c[..., None] * glog - s[..., None] * gpsi)
        jac[..., 1, :] = amp[..., None] * (s[..., None] * glog + c[..., None] * gpsi)
        return jac


@dataclass(frozen=True)
class Landau(VectorPotentialSpec):
    """Constant field in d = 2, gauge ``A = (0, -B x1)`` so ``F_12 = B``."""

    B: float
    dimension: int = 2

    def potential(self, x):
        x = np.asarray(x, float)
        v = np.zeros_like(x)
        v[..., 1] = -self.B * x[..., 0]
        return v

    def jacobian(self, x):
        x = np.asarray(x, float)
        jac = np.zeros(x.shape + (2,))
        jac[..., 1, 0] = -self.B
        return jac

    def period_gauge(self, axis, length):
        c = np.zeros(2)
        if axis == 0:
            c[1] = -self.B * length
        return c


@dataclass(frozen=True)
class Tabulated(VectorPotentialSpec):
    """Componentwise cubic interpolation of grid samples (finite-difference
    derivatives only)."""

    axes: tuple
    components: tuple = field(repr=False)

    def __post_init__(self):
        interps = tuple(RegularGridInterpolator([np.asarray(a, float) for a in self.axes],
                                                np.asarray(c, float), method="cubic")
                        for c in self.components)
        object.__setattr__(self, "_interps", interps)

    @property
    def dimension(self):
        return len(self.axes)

    def potential(self, x):
        x = np.asarray(x, float)
        flat = x.reshape(-1, x.shape[-1])
        try:
            cols = [f(flat) for f in self._interps]
        except ValueError as exc:
            raise DomainError(f"point outside the tabulated grid: {exc}") from None
        return np.stack(cols, axis=-1).reshape(x.shape)


@dataclass(frozen=True)
class GaugeShifted(VectorPotentialSpec):
    """``A + grad chi`` with ``chi = x.Q.x/2 + b.x`` (Q symmetric)."""

    inner: VectorPotentialSpec
    Q: tuple
    b: tuple = ()

    @property
    def dimension(self):
        return self.inner.dimension

    def _qb(self):
        q = np.asarray(self.Q, float)
        b = np.zeros(self.dimension) if not self.b else np.asarray(self.b, float)
        return q, b

    def chi(self, x):
        q, b = self._qb()
        x = np.asarray(x, float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, q, x) + x @ b

    def potential(self, x):
        q, b = self._qb()
        return self.inner.potential(x) + np.asarray(x, float) @ q.T + b

    def jacobian(self, x):
        q, _ = self._qb()
        return self.inner.jacobian(x) + q

    def period_gauge(self, axis, length):
        q, _ = self._qb()
        return self.inner.period_gauge(axis, length) + length * q[:, axis]


def potential_at(spec: VectorPotentialSpec, x):
    """Evaluate the construction at one point or an array of points."""
    x = np.asarray(x, float)
    if x.shape[-1] != spec.dimension:
        raise ValueError("point dimension does not match the vector potential")
    return spec.potential(x)


# ----------------------------------------------------------------- magnetic tensor

@dataclass(frozen=True)
class MagneticTensor:
    point: np.ndarray
    F: np.ndarray

    @property
    def dimension(self):
        return self.F.shape[-1]


def fd_jacobian(spec, x, eta=None):
    """Central-difference Jacobian; default step ``1e-4 (1 + |x|)``."""
    x = np.asarray(x, float)
    d = x.shape[-1]
    if eta is None:
        eta = DEFAULT_FD_SCALE * (1 + _norm(x))
    eta = np.broadcast_to(np.asarray(eta, float), x.shape[:-1])
    if np.any(eta <= 0):
        raise ValueError("finite-difference step must be positive")
    jac = np.empty(x.shape + (d,))
    for k in range(d):
        step = np.zeros(x.shape)
        step[..., k] = eta
        jac[..., :, k] = (spec.potential(x + step) - spec.potential(x - step)) / (2 * eta[..., None])
    return jac


def tensor_array(spec, x, mode="analytic", eta=None):
    """``F = J - J^T`` at an array of points (exactly antisymmetric)."""
    if mode == "analytic":
        jac = spec.jacobian(np.asarray(x, float))
    elif mode in ("finite-difference", "fd"):
        jac = fd_jacobian(spec, x, eta)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return jac - np.swapaxes(jac, -1, -2)


def tensor_at(spec, x, mode="analytic", eta=None) -> MagneticTensor:
    x = np.asarray(x, float)
    return MagneticTensor(x, tensor_array(spec, x, mode, eta))


@dataclass(frozen=True)
class IntensityList:
    f: tuple
    kernel_dim: int
    scalar: float

    @property
    def r(self):
        return len(self.f)


def scalar_intensity(F):
    """Euclidean size of the field: ``|F_12|`` in 2D, ``|curl A|`` in 3D."""
    F = np.asarray(F, float)
    return np.sqrt(0.5 * np.sum(F * F, axis=(-2, -1)))


def _sqrtm_spd(g):
    w, v = np.linalg.eigh(g)
    if np.any(w <= 0):
        raise ValueError("metric is not positive definite")
    return (v * np.sqrt(w)[..., None, :]) @ np.swapaxes(v, -1, -2)


def _pair(sv, rel_tol):
    """Pair the (descending) singular values of an antisymmetric matrix."""
    top = sv[0] if sv.size else 0.0
    cutoff = rel_tol * top
    nz = int(np.sum(sv > cutoff)) if top > 0 else 0
    r = nz // 2
    f = tuple(float(0.5 * (sv[2 * j] + sv[2 * j + 1])) for j in range(r))
    return f, sv.size - 2 * r


def intensities(F, g=None, rel_tol=1e-12) -> IntensityList:
    """Intensities ``f_1 >= ... >= f_r`` from the singular values of
    ``g^{1/2} F g^{1/2}`` (a matrix similar to ``gF``)."""
    F = np.asarray(getattr(F, "F", F), float)
    d = F.shape[-1]
    if not np.array_equal(F, -F.T):
        if not np.allclose(F, -F.T, rtol=0, atol=1e-13 * (np.abs(F).max() + 1e-300)):
            raise ValueError("F is not antisymmetric")
    gh = np.eye(d) if g is None else _sqrtm_spd(np.asarray(g, float))
    sv = np.linalg.svd(gh @ F @ gh, compute_uv=False)
    f, kernel = _pair(sv, rel_tol)
    return IntensityList(f, kernel, float(scalar_intensity(F)))


def intensity_array(F, g=None, rel_tol=1e-12):
    """Vectorised intensities: array ``(..., d // 2)`` padded with zeros."""
    F = np.asarray(F, float)
    d = F.shape[-1]
    if g is not None:
        gh = _sqrtm_spd(np.asarray(g, float))
        F = gh @ F @ gh
    sv = np.linalg.svd(F, compute_uv=False)
    pairs = 0.5 * (sv[..., 0:2 * (d // 2):2] + sv[..., 1:2 * (d // 2):2])
    top = sv[..., :1]
    return np.where(pairs > rel_tol * top, pairs, 0.0)


# ----------------------------------------------------------------- closed forms

def closed_form_intensities(spec, x):
    """Closed-form intensities for the rotational constructions, descending.

    Even d: ``2 sigma + r sigma'`` and ``2 sigma`` (repeated).  Odd d: the
    first intensity is ``sqrt((2 sigma + |x'|^2 sigma'/r)^2
    + x_d^2 |x'|^2 sigma'^2 / r^2 + tau'^2 |x'|^2 / r^2)`` where ``tau`` is the
    axial profile, the others are ``2 sigma``.
    """
    x = np.asarray(x, float)
    r = _norm(x)
    prof = spec.profile
    s = prof.value(r)
    spr = prof.deriv_over_r(r)  # sigma'/r
    d = spec.dimension
    if isinstance(spec, RotationalEven):
        first = np.abs(2 * s + r * r * spr)
        rest = [np.abs(2 * s)] * (d // 2 - 1)
    elif isinstance(spec, RotationalOdd):
        xp2 = np.sum(x[..., :-1] ** 2, axis=-1)
        xd = x[..., -1]
        f2 = (2 * s + xp2 * spr) ** 2 + xd ** 2 * xp2 * spr ** 2
        if spec.axial is not None:
            f2 = f2 + spec.axial.deriv_over_r(r) ** 2 * xp2
        first = np.sqrt(f2)
        rest = [np.abs(2 * s)] * (d // 2 - 1)
    else:
        raise TypeError("closed forms exist for rotational constructions only")
    out = np.stack([first] + rest, axis=-1)
    return -np.sort(-out, axis=-1)


@dataclass(frozen=True)
class IntensityRow:
    point: tuple
    f_closed: tuple
    f_numeric: tuple
    rel_gap: float
    flagged: bool


@dataclass(frozen=True)
class IntensityReport:
    rows: tuple
    tolerance: float
    mode: str

    @property
    def max_gap(self):
        return max((row.rel_gap for row in self.rows), default=0.0)

    @property
    def passed(self):
        return not any(row.flagged for row in self.rows)

    def write_csv(self, path):
        from .harness.io import fmt
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["point", "f_closed", "f_numeric", "rel_gap"])
            for row in self.rows:
                w.writerow([" ".join(fmt(v) for v in row.point),
                            " ".join(fmt(v) for v in row.f_closed),
                            " ".join(fmt(v) for v in row.f_numeric),
                            fmt(row.rel_gap)])


def verify_intensity_formulas(spec, points, mode="analytic", tol=1e-9, metric=None,
                              eta=None) -> IntensityReport:
    """Compare closed-form intensities with eigen-decomposed numerical ones."""
    if not isinstance(spec, (RotationalEven, RotationalOdd)):
        raise TypeError("verify_intensity_formulas needs a rotational construction")
    points = np.atleast_2d(np.asarray(points, float))
    closed = closed_form_intensities(spec, points)
    F = tensor_array(spec, points, mode=mode, eta=eta)
    g = None if metric is None else metric
    rows = []
    for p, fc, Fp in zip(points, closed, F):
        fn = np.zeros_like(fc)
        il = intensities(Fp, g)
        fn[:len(il.f)] = il.f
        scale = max(float(np.max(np.abs(fc))), 1e-300)
        gap = float(np.max(np.abs(fc - fn)) / scale)
        rows.append(IntensityRow(tuple(map(float, p)), tuple(map(float, fc)),
                                 tuple(map(float, fn)), gap, gap > tol))
    return IntensityReport(tuple(rows), tol, mode)


# ----------------------------------------------------------------- JSON ingestion

def _profile_from_json(doc, pointer):
    if doc is None:
        return Profile()
    if isinstance(doc, (int, float)):
        return Profile(0.0, float(doc), "const")
    try:
        return Profile(float(doc.get("m", 0.0)), float(doc.get("coef", 1.0)),
                       doc.get("base", "abs"))
    except (AttributeError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), pointer) from None


def vector_potential_from_json(doc, dimension, pointer="") -> VectorPotentialSpec:
    """Build a construction from the ``vector_potential`` block."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("expected an object with a 'kind' key", pointer)
    kind = doc["kind"]
    try:
        if kind == "rotational-even":
            spec = RotationalEven(dimension, _profile_from_json(doc.get("profile"), pointer + "/profile"))
        elif kind == "rotational-odd":
            ax = doc.get("axial")
            spec = RotationalOdd(dimension, _profile_from_json(doc.get("profile"), pointer + "/profile"),
                                 None if ax is None else _profile_from_json(ax, pointer + "/axial"))
        elif kind == "quasi-homogeneous":
            spec = QuasiHomogeneous(dimension, tuple(map(float, doc["L"])), float(doc["m"]),
                                    float(doc.get("a", 1.0)), int(doc.get("n", 4)))
        elif kind == "exponential-phase":
            if dimension != 3:
                raise ConfigError("exponential-phase needs dimension 3", pointer + "/kind")
            spec = ExponentialPhase(float(doc["beta"]), float(doc.get("m", 0.0)),
                                    float(doc.get("a", 1.0)))
        elif kind == "landau":
            if dimension != 2:
                raise ConfigError("landau needs dimension 2", pointer + "/kind")
            spec = Landau(float(doc["B"]))
        elif kind == "tabulated":
            spec = Tabulated(tuple(tuple(map(float, a)) for a in doc["axes"]),
                             tuple(np.asarray(c, float) for c in doc["components"]))
        else:
            raise ConfigError(f"unknown vector potential kind {kind!r}", pointer + "/kind")
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}", pointer) from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), pointer) from None
    if spec.dimension != dimension:
        raise ConfigError("vector potential dimension does not match the model", pointer)
    if "gauge" in doc:
        gdoc = doc["gauge"]
        try:
            q = np.asarray(gdoc.get("Q", np.zeros((dimension, dimension))), float)
            if q.shape != (dimension, dimension) or not np.array_equal(q, q.T):
                raise ValueError("gauge Q must be a symmetric d x d matrix")
            b = tuple(map(float, gdoc.get("b", ())))
            spec = GaugeShifted(spec, tuple(map(tuple, q)), b)
        except (AttributeError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc), pointer + "/gauge") from None
    return spec


def sample_annulus(rng, n, d, r_min=0.5, r_max=2.0):
    """Isotropic random points with log-uniform radius."""
    u = rng.standard_normal((n, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * np.exp(rng.uniform(math.log(r_min), math.log(r_max), n))[:, None]
