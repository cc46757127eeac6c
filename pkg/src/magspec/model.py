"""Operator specification, scaling functions, effective parameters, zones,
remainder integrals and the power-singularity exponent catalog.
"""
from __future__ import annotations

import enum
import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import quadrature
from .errors import ConfigError, DomainError, UnknownRegime
from .fields import (Constant, Metric, ScalarField, field_from_json, metric_from_json,
                     radial_base)

KINDS = ("schrodinger", "pauli", "dirac")
_KIND_ALIASES = {"schrödinger": "schrodinger", "schroedinger": "schrodinger"}


def normalize_kind(kind: str) -> str:
    k = str(kind).strip().lower()
    k = _KIND_ALIASES.get(k, k)
    if k not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    return k


# ----------------------------------------------------------------- ScalingTriple

@dataclass(frozen=True)
class ScalingTriple:
    """Power-law scaling functions.

    ``gamma = gamma_eps * b(x)``, ``rho = b(x)**m``, ``rho1 = b(x)**m1`` where
    ``b`` is ``|x|`` (``base='abs'``), ``<x>`` (``base='bracket'``) or the
    constant 1 (``base='const'``, for which gamma has no gradient and any
    positive ``gamma_eps`` is admissible).
    """

    gamma_eps: float = 0.5
    m: float = 0.0
    m1: float = 0.0
    base: str = "abs"

    def __post_init__(self):
        if self.base == "const":
            if not self.gamma_eps > 0:
                raise ValueError(f"gamma_eps must be positive, got {self.gamma_eps}")
            return
        radial_base(1.0, self.base)
        # |grad gamma| = gamma_eps * |grad b| and |grad b| <= 1 for both bases
        if not 0 < self.gamma_eps <= 0.5:
            raise ValueError(f"gamma_eps must lie in (0, 1/2], got {self.gamma_eps}")

    def _base(self, r):
        if self.base == "const":
            return np.ones_like(np.asarray(r, float))
        return radial_base(r, self.base)

    def _b(self, x):
        r = np.linalg.norm(np.asarray(x, float), axis=-1)
        return self._base(r)

    def gamma(self, x):
        return self.gamma_eps * self._b(x)

    def rho(self, x):
        return self._b(x) ** self.m

    def rho1(self, x):
        return self._b(x) ** self.m1

    def radial(self, r):
        """(gamma, rho, rho1) as functions of ``r = |x|``."""
        b = self._base(r)
        with np.errstate(divide="ignore"):
            return self.gamma_eps * b, b ** self.m, b ** self.m1

    def grad_gamma_bound(self, points, step=1e-6):
        """Largest central-difference ``|grad gamma|`` over ``points``."""
        points = np.atleast_2d(np.asarray(points, float))
        eye = step * np.eye(points.shape[1])
        grads = np.stack([(self.gamma(points + e) - self.gamma(points - e)) / (2 * step)
                          for e in eye], axis=-1)
        return float(np.max(np.linalg.norm(grads, axis=-1)))


# ----------------------------------------------------------------- ModelSpec

@dataclass(frozen=True)
class ModelSpec:
    """A magnetic operator instance ``sum P_j g^{jk} P_k + V`` with
    ``P_j = h D_j - mu V_j`` (or its Pauli/Dirac relatives).

    ``vector_potential`` is a ``gauge.VectorPotentialSpec`` or None (no field).
    """

    dimension: int
    potential: ScalarField = field(default_factory=Constant)
    vector_potential: object = None
    mu: float = 1.0
    h: float = 1.0
    kind: str = "schrodinger"
    M: float = 0.0
    metric: Metric | None = None
    domain: dict | None = None
    ellipticity: tuple = (1e-12, 1e12)
    scaling: ScalingTriple | None = None

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not (self.mu > 0 and self.h > 0):
            raise ValueError("mu and h must be positive")
        if self.kind == "dirac" and self.M < 0:
            raise ValueError("Dirac mass M must be nonnegative")
        if self.metric is None:
            object.__setattr__(self, "metric", Metric(self.dimension))
        elif self.metric.dimension != self.dimension:
            raise ValueError("metric dimension mismatch")
        vp = self.vector_potential
        if vp is not None and getattr(vp, "dimension", self.dimension) != self.dimension:
            raise ValueError("vector potential dimension mismatch")

    def potential_at(self, x):
        return self.potential(x)

    def vector_potential_at(self, x):
        x = np.asarray(x, float)
        if self.vector_potential is None:
            return np.zeros_like(x)
        from .gauge import potential_at
        return potential_at(self.vector_potential, x)

    def tensor_at(self, x, mode="analytic"):
        """Antisymmetric tensors of shape ``(..., d, d)``."""
        x = np.asarray(x, float)
        d = self.dimension
        if self.vector_potential is None:
            return np.zeros(x.shape[:-1] + (d, d))
        from .gauge import tensor_array
        return tensor_array(self.vector_potential, x, mode=mode)

    def scalar_intensity_at(self, x, mode="analytic"):
        from .gauge import scalar_intensity
        return scalar_intensity(self.tensor_at(x, mode))

    def intensities_at(self, x, mode="analytic"):
        """Intensities ``f_1 >= ... >= f_r`` at each point, shape ``(..., r)``."""
        from .gauge import intensity_array
        x = np.asarray(x, float)
        return intensity_array(self.tensor_at(x, mode), self.metric.at(x))

    def sqrt_g(self, x):
        return self.metric.sqrt_det_inverse(x)

    def check_ellipticity(self, points):
        eps, c = self.ellipticity
        return self.metric.check_elliptic(points, eps, c)

    def with_params(self, **changes):
        from dataclasses import replace
        return replace(self, **changes)


def _req(doc, key, pointer):
    if key not in doc:
        raise ConfigError(f"missing required field {key!r}", f"{pointer}/{key}")
    return doc[key]


def model_from_json(doc, pointer="") -> ModelSpec:
    """Build a ``ModelSpec`` from a parsed model document."""
    from .gauge import vector_potential_from_json

    if not isinstance(doc, dict):
        raise ConfigError("model document must be an object", pointer)
    d = _req(doc, "dimension", pointer)
    if d not in (2, 3):
        raise ConfigError("dimension must be 2 or 3", f"{pointer}/dimension")
    try:
        kind = normalize_kind(doc.get("kind", "schrodinger"))
    except ValueError as exc:
        raise ConfigError(str(exc), f"{pointer}/kind") from None
    mu = doc.get("mu", 1.0)
    h = doc.get("h", 1.0)
    for key, val in (("mu", mu), ("h", h)):
        if not isinstance(val, (int, float)) or not val > 0:
            raise ConfigError("must be a positive number", f"{pointer}/{key}")
    M = doc.get("M", 0.0)
    if not isinstance(M, (int, float)) or M < 0:
        raise ConfigError("must be a nonnegative number", f"{pointer}/M")
    potential = field_from_json(doc.get("potential", {"kind": "constant", "value": 0.0}),
                                f"{pointer}/potential")
    vp = doc.get("vector_potential")
    vector_potential = None if vp is None else vector_potential_from_json(
        vp, d, f"{pointer}/vector_potential")
    metric = metric_from_json(doc.get("metric"), d, f"{pointer}/metric")
    scaling = None
    if "scaling" in doc:
        s = doc["scaling"]
        try:
            scaling = ScalingTriple(float(s.get("gamma_eps", 0.5)), float(s.get("m", 0.0)),
                                    float(s.get("m1", 0.0)), s.get("base", "abs"))
        except (ValueError, TypeError, AttributeError) as exc:
            raise ConfigError(str(exc), f"{pointer}/scaling") from None
    try:
        return ModelSpec(d, potential, vector_potential, float(mu), float(h), kind, float(M),
                         metric, doc.get("domain"), scaling=scaling)
    except ValueError as exc:
        raise ConfigError(str(exc), pointer) from None


def load_model(path) -> ModelSpec:
    with open(Path(path)) as fh:
        return model_from_json(json.load(fh))


# ----------------------------------------------------------------- effective parameters

@dataclass(frozen=True)
class EffectiveParams:
    mu_eff: float
    h_eff: float

    @property
    def product(self):
        return self.mu_eff * self.h_eff


def _scaling_values(triple, x):
    x = np.asarray(x, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        g, rho, rho1 = triple.gamma(x), triple.rho(x), triple.rho1(x)
    for name, v in (("gamma", g), ("rho", rho), ("rho1", rho1)):
        v = np.asarray(v)
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise DomainError(f"{name} is not finite and positive at the requested point "
                              "(singular point)")
    return g, rho, rho1


def effective_params(spec: ModelSpec, triple: ScalingTriple, x) -> EffectiveParams:
    """``(mu * rho1 * gamma / rho, h / (rho * gamma))`` at ``x``."""
    g, rho, rho1 = _scaling_values(triple, x)
    return EffectiveParams(spec.mu * rho1 * g / rho, spec.h / (rho * g))


class ZoneLabel(enum.Enum):
    SEMICLASSICAL = "Semiclassical"
    SINGULAR = "Singular"
    NORMAL_FIELD = "NormalField"
    STRONG_FIELD = "StrongField"
    FORBIDDEN_CANDIDATE = "ForbiddenCandidate"


def classify_zone(spec: ModelSpec, triple: ScalingTriple, x, c: float = 1.0) -> frozenset:
    """Zone labels at a single point.

    Semiclassical iff ``rho*gamma >= h``; Singular iff ``rho*gamma <= 2h``;
    inside the semiclassical zone NormalField iff ``mu*rho1 <= 2c*rho/gamma``
    and StrongField iff ``mu*rho1 >= c*rho/gamma``.  ForbiddenCandidate marks
    points where the lowest Landau level ``mu*h*rho1`` reaches the potential
    scale ``rho**2`` (``mu_eff*h_eff >= 1``).
    """
    g, rho, rho1 = (float(v) for v in _scaling_values(triple, x))
    labels = set()
    rg = rho * g
    if rg >= spec.h:
        labels.add(ZoneLabel.SEMICLASSICAL)
        if spec.mu * rho1 <= 2 * c * rho / g:
            labels.add(ZoneLabel.NORMAL_FIELD)
        if spec.mu * rho1 >= c * rho / g:
            labels.add(ZoneLabel.STRONG_FIELD)
    if rg <= 2 * spec.h:
        labels.add(ZoneLabel.SINGULAR)
    if spec.mu * spec.h * rho1 >= rho * rho:
        labels.add(ZoneLabel.FORBIDDEN_CANDIDATE)
    return frozenset(labels)


def check_nondegeneracy(triple: ScalingTriple, points, eps: float) -> bool:
    """Validator for ``rho1*gamma**2 + rho*gamma >= eps``; warns on failure."""
    g, rho, rho1 = triple.gamma(points), triple.rho(points), triple.rho1(points)
    ok = bool(np.all(rho1 * g ** 2 + rho * g >= eps))
    if not ok:
        warnings.warn("rho1*gamma^2 + rho*gamma >= eps fails at some sampled points",
                      RuntimeWarning, stacklevel=2)
    return ok


# ----------------------------------------------------------------- regions and R1

@dataclass(frozen=True)
class Annulus:
    """Shell ``r_min <= |x| <= r_max``; ``r_max`` may be ``inf``."""

    r_min: float = 0.0
    r_max: float = math.inf


@dataclass(frozen=True)
class Box:
    lower: tuple
    upper: tuple


def region_from_json(doc, pointer="") -> Annulus | Box:
    kind = doc.get("kind")
    if kind == "annulus":
        r_max = doc.get("r_max", "inf")
        return Annulus(float(doc.get("r_min", 0.0)), math.inf if r_max in ("inf", None) else float(r_max))
    if kind == "box":
        return Box(tuple(map(float, doc["lower"])), tuple(map(float, doc["upper"])))
    raise ConfigError("region kind must be 'annulus' or 'box'", f"{pointer}/kind")


def _r1_exponent(triple, d):
    if d == 2:
        return d * triple.m - triple.m1 - 2
    return (d - 1) * triple.m - 1


def remainder_integral_R1(spec: ModelSpec, triple: ScalingTriple, region,
                          tol: float = 1e-8) -> quadrature.QuadResult:
    """``mu^{-1} h^{1-d}`` times the remainder-weight integral over ``region``.

    Weight: ``rho^d rho1^{-1} gamma^{-2}`` for d = 2 and ``rho^{d-1} gamma^{-1}``
    for d = 3.
    """
    d = spec.dimension
    pref = spec.h ** (1 - d) / spec.mu

    def weight_r(r):
        g, rho, rho1 = triple.radial(r)
        if d == 2:
            return rho ** d / rho1 / g ** 2
        return rho ** (d - 1) / g

    if isinstance(region, Annulus):
        p = _r1_exponent(triple, d)
        where = []
        if region.r_min == 0 and triple.base == "abs":
            where.append(f"needs exponent {p:g} + d > 0 near the origin")
        if math.isinf(region.r_max):
            where.append(f"needs exponent {p:g} + d < 0 at infinity")
        cond = (f"weight ~ |x|^{p:g} with d = {d}: " + "; ".join(where)) if where else \
            "weight not integrable"
        res = quadrature.radial_integral(weight_r, d, region.r_min, region.r_max, tol=tol,
                                         condition=cond)
    elif isinstance(region, Box):
        if len(region.lower) != d:
            raise ValueError("box dimension mismatch")

        def weight_x(x):
            return weight_r(np.linalg.norm(x, axis=-1))

        res = quadrature.box_integral(weight_x, region.lower, region.upper, tol=tol)
    else:
        raise TypeError("region must be an Annulus or a Box")
    return quadrature.QuadResult(pref * res.value, pref * res.error, res.evaluations)


# ----------------------------------------------------------------- exponent catalog

@dataclass(frozen=True)
class Term:
    """``mu**mu_power * h**h_power``, optionally times ``(|log(mu h)| + 1)``."""

    mu_power: float
    h_power: float
    log: bool = False

    def __str__(self):
        s = f"mu^{_fmt(self.mu_power)} h^{_fmt(self.h_power)}"
        return s + " (|log mu h|+1)" if self.log else s


def _fmt(v):
    fr = Fraction(v).limit_denominator(1000)
    return str(fr) if fr.denominator != 1 else str(fr.numerator)


@dataclass(frozen=True)
class ExponentPrediction:
    row: str
    N_exponents: tuple
    remainder_exponents: tuple
    validity: str
    citation: str
    location: str

    @property
    def single_term(self) -> Term:
        if len(self.N_exponents) != 1:
            raise ValueError(f"catalog row {self.row} predicts a sum of {len(self.N_exponents)} terms")
        return self.N_exponents[0]


@dataclass(frozen=True)
class CatalogRow:
    key: str
    kind: str
    d: int
    regime: str
    location: str
    condition: Callable[[float, float], bool]
    condition_text: str
    counting: Callable[[float, float], tuple]
    remainder: Callable[[float, float], tuple]
    validity: str

    @property
    def citation(self) -> str:
        """Source reference for the row, kept in package data."""
        return _citations().get(self.key, "")

    def matches(self, kind, d, m, m1, regime):
        return (self.kind == kind and self.d == d and self.regime == regime
                and bool(self.condition(m, m1)))


def _singular_bounded(d, m, m1, at_origin):
    """Counting exponents for the bounded-(mu h) rows with an (mu h) power."""
    p = 2 * (m + 1) / (2 * m - m1)
    if m == -1:
        return (Term(0, -d, True),)
    if (m < -1) == at_origin:
        return (Term(p, -d + p),)
    return (Term(0, -d),)


def _strong_N(d, m, m1):
    return (Term(-d * (m + 1) / (m1 - 2 * m), -d * (m1 + 1 - m) / (m1 - 2 * m)),)


def _standard_R(m, m1, at_origin):
    if (m1 < 2 * m) == at_origin:
        return (Term(-1, -1),)
    return (Term(-(m + 1) / (m1 + 1 - m), -1),)


@functools.lru_cache(maxsize=None)
def _citations():
    from importlib import resources
    return json.loads(resources.files(__package__).joinpath("data/catalog_citations.json").read_text())


_STRONG_VALIDITY = "c h^-1 <= mu <= h^-((m1+1-m)/(m+1))"

CATALOG: tuple[CatalogRow, ...] = (
    CatalogRow("2d-schrodinger-standard-origin-fast", "schrodinger", 2, "standard", "origin",
               lambda m, m1: m1 < min(m - 1, 2 * m), "m1 < min(m-1, 2m)",
               lambda m, m1: _singular_bounded(2, m, m1, True),
               lambda m, m1: (Term(-1, -1),),
               "mu disjoint from 0, mu h <= t, h -> 0"),
    CatalogRow("2d-schrodinger-standard-infinity-fast", "schrodinger", 2, "standard", "infinity",
               lambda m, m1: m1 > max(m - 1, 2 * m), "m1 > max(m-1, 2m)",
               lambda m, m1: _singular_bounded(2, m, m1, False),
               lambda m, m1: (Term(-1, -1),),
               "mu disjoint from 0, mu h <= t, h -> 0"),
    CatalogRow("2d-schrodinger-standard-origin", "schrodinger", 2, "standard", "origin",
               lambda m, m1: m > -1 and m1 >= min(m - 1, 2 * m) and m1 != 2 * m,
               "m > -1, m1 >= min(m-1, 2m), m1 != 2m",
               lambda m, m1: (Term(0, -2),),
               lambda m, m1: _standard_R(m, m1, True),
               "mu disjoint from 0, mu h disjoint from infinity, h -> 0"),
    CatalogRow("2d-schrodinger-standard-infinity", "schrodinger", 2, "standard", "infinity",
               lambda m, m1: m < -1 and m1 <= max(m - 1, 2 * m) and m1 != 2 * m,
               "m < -1, m1 <= max(m-1, 2m), m1 != 2m",
               lambda m, m1: (Term(0, -2),),
               lambda m, m1: _standard_R(m, m1, False),
               "mu disjoint from 0, mu h disjoint from infinity, h -> 0"),
    CatalogRow("2d-schrodinger-strong-origin", "schrodinger", 2, "strong-field", "origin",
               lambda m, m1: m > -1 and m1 > 2 * m, "m > -1, m1 > 2m",
               lambda m, m1: _strong_N(2, m, m1),
               lambda m, m1: _standard_R(m, m1, True),
               _STRONG_VALIDITY),
    CatalogRow("2d-schrodinger-strong-infinity", "schrodinger", 2, "strong-field", "infinity",
               lambda m, m1: m < -1 and m1 < 2 * m, "m < -1, m1 < 2m",
               lambda m, m1: _strong_N(2, m, m1),
               lambda m, m1: _standard_R(m, m1, False),
               _STRONG_VALIDITY),
    CatalogRow("2d-pauli-origin", "pauli", 2, "standard", "origin",
               lambda m, m1: m > -1 and m1 > -2 and m1 != 2 * m, "m > -1, 2m != m1 > -2",
               lambda m, m1: (Term(0, -2), Term(1, -1)),
               lambda m, m1: _standard_R(m, m1, True) + (Term(0, 0),),
               "mu disjoint from 0, h -> 0"),
    CatalogRow("2d-pauli-infinity", "pauli", 2, "standard", "infinity",
               lambda m, m1: m < -1 and m1 < -2 and m1 != 2 * m, "m < -1, 2m != m1 < -2",
               lambda m, m1: (Term(0, -2), Term(1, -1)),
               lambda m, m1: _standard_R(m, m1, False) + (Term(0, 0),),
               "mu disjoint from 0, h -> 0"),
    CatalogRow("3d-schrodinger-standard-origin-fast", "schrodinger", 3, "standard", "origin",
               lambda m, m1: m1 < 2 * m <= -2, "m1 < 2m <= -2",
               lambda m, m1: _singular_bounded(3, m, m1, True),
               lambda m, m1: tuple(Term(t.mu_power, t.h_power + 1, t.log)
                                   for t in _singular_bounded(3, m, m1, True)),
               "mu h bounded, h -> 0"),
    CatalogRow("3d-schrodinger-standard-infinity-fast", "schrodinger", 3, "standard", "infinity",
               lambda m, m1: m1 > 2 * m >= -2, "m1 > 2m >= -2",
               lambda m, m1: _singular_bounded(3, m, m1, False),
               lambda m, m1: tuple(Term(t.mu_power, t.h_power + 1, t.log)
                                   for t in _singular_bounded(3, m, m1, False)),
               "mu h bounded, h -> 0"),
    CatalogRow("3d-schrodinger-standard-origin", "schrodinger", 3, "standard", "origin",
               lambda m, m1: m > -1 and m1 != 2 * m, "m > -1, m1 != 2m",
               lambda m, m1: (Term(0, -3),),
               lambda m, m1: (Term(0, -2),),
               "mu h bounded, h -> 0"),
    CatalogRow("3d-schrodinger-standard-infinity", "schrodinger", 3, "standard", "infinity",
               lambda m, m1: m < -1 and m1 != 2 * m, "m < -1, m1 != 2m",
               lambda m, m1: (Term(0, -3),),
               lambda m, m1: (Term(0, -2),),
               "mu h bounded, h -> 0"),
    CatalogRow("3d-schrodinger-strong-origin", "schrodinger", 3, "strong-field", "origin",
               lambda m, m1: m > -1 and m1 > 2 * m, "m > -1, m1 > 2m",
               lambda m, m1: _strong_N(3, m, m1),
               lambda m, m1: _strong_N(2, m, m1),
               _STRONG_VALIDITY),
    CatalogRow("3d-schrodinger-strong-infinity", "schrodinger", 3, "strong-field", "infinity",
               lambda m, m1: m < -1 and m1 < 2 * m, "m < -1, m1 < 2m",
               lambda m, m1: _strong_N(3, m, m1),
               lambda m, m1: _strong_N(2, m, m1),
               _STRONG_VALIDITY),
)

REGIMES = ("standard", "strong-field")


def predicted_exponents(kind, d, m, m1, regime, location=None) -> ExponentPrediction:
    """Look up the catalog row for ``(kind, d, m, m1, regime)``.

    ``location`` ("origin" or "infinity") disambiguates when the singular
    point is not implied by the exponents.  Raises ``UnknownRegime`` listing
    the rows that share kind and dimension when nothing matches.
    """
    kind = normalize_kind(kind)
    hits = [row for row in CATALOG if row.matches(kind, d, m, m1, regime)
            and (location is None or row.location == location)]
    if len(hits) != 1:
        near = [f"{r.key}: {r.condition_text} [{r.citation}]" for r in CATALOG
                if r.kind == kind and r.d == d]
        what = "no catalog row" if not hits else "several catalog rows (pass location)"
        raise UnknownRegime(
            f"{what} for kind={kind}, d={d}, m={m}, m1={m1}, regime={regime!r}", near)
    row = hits[0]
    return ExponentPrediction(row.key, row.counting(m, m1), row.remainder(m, m1),
                              row.validity, row.citation, row.location)


def strong_field_window(m, m1, h, c=1.0):
    """``(c/h, h**(-(m1+1-m)/(m+1)))``: admissible mu range for strong-field rows."""
    return c / h, h ** (-(m1 + 1 - m) / (m + 1))


def strong_field_radius(mu, h, m, m1):
    """``(mu h)^{-1/(m1-2m)}``: the radius where ``mu_eff h_eff = 1`` for ``|x|`` power laws."""
    return (mu * h) ** (-1.0 / (m1 - 2 * m))
