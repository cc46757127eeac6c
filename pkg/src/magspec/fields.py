"""Scalar field descriptors and metric coefficients.

Every field takes points of shape ``(..., d)`` and returns values of shape
``(...)``.  Descriptors are immutable and can be built from the JSON blocks
used in model documents (see ``docs/modelspec.schema.json``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, DomainError


def _points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        raise ValueError("points must have a trailing coordinate axis")
    return x


def radial_base(r, base):
    """Return ``|x|`` or ``<x> = sqrt(1 + |x|^2)`` given ``r = |x|``."""
    r = np.asarray(r, dtype=float)
    if base == "abs":
        return r
    if base == "bracket":
        return np.sqrt(1.0 + r * r)
    raise ValueError(f"unknown base {base!r}; expected 'abs' or 'bracket'")


class ScalarField:
    """Interface: callable on points, optional radial symmetry info."""

    #: centre of radial symmetry, or None when the field is not radial
    center = None

    def __call__(self, x):
        raise NotImplementedError

    def radial(self, r):
        """Value as a function of the distance to ``center``."""
        raise NotImplementedError(f"{type(self).__name__} is not radial")

    @property
    def is_radial(self):
        return False


@dataclass(frozen=True)
class Constant(ScalarField):
    value: float = 0.0

    def __call__(self, x):
        x = _points(x)
        return np.full(x.shape[:-1], float(self.value))

    def radial(self, r):
        return np.full(np.shape(r), float(self.value))

    @property
    def is_radial(self):
        return True


@dataclass(frozen=True)
class PowerLaw(ScalarField):
    """``coef * |x - center|**exponent`` or the same with ``<x - center>``."""

    coef: float = 1.0
    exponent: float = 0.0
    base: str = "abs"
    center: tuple | None = None

    def __post_init__(self):
        radial_base(1.0, self.base)

    def _r(self, x):
        x = _points(x)
        c = 0.0 if self.center is None else np.asarray(self.center, dtype=float)
        return np.linalg.norm(x - c, axis=-1)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        b = radial_base(r, self.base)
        if self.exponent < 0 and np.any(b == 0):
            raise DomainError(
                f"power law with exponent {self.exponent} evaluated at its centre")
        with np.errstate(divide="ignore"):
            return self.coef * b ** self.exponent

    def __call__(self, x):
        return self.radial(self._r(x))

    @property
    def is_radial(self):
        return True


@dataclass(frozen=True)
class RadialProfile(ScalarField):
    """Piecewise-linear profile in ``|x - center|``.

    Beyond the last sample the value ``fill`` is used (default: last sample).
    """

    radii: tuple
    values: tuple
    fill: float | None = None
    center: tuple | None = None

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or r.size < 2 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing with >= 2 entries")
        if len(self.values) != r.size:
            raise ValueError("radii and values differ in length")

    def radial(self, r):
        right = self.values[-1] if self.fill is None else self.fill
        return np.interp(r, self.radii, self.values, right=right)

    def __call__(self, x):
        x = _points(x)
        c = 0.0 if self.center is None else np.asarray(self.center, dtype=float)
        return self.radial(np.linalg.norm(x - c, axis=-1))

    @property
    def is_radial(self):
        return True


@dataclass(frozen=True)
class TabulatedGrid(ScalarField):
    """Multilinear interpolation of samples on a tensor grid; 0 outside."""

    axes: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        interp = RegularGridInterpolator(
            [np.asarray(a, dtype=float) for a in self.axes],
            np.asarray(self.values, dtype=float),
            bounds_error=False, fill_value=0.0)
        object.__setattr__(self, "_interp", interp)

    def __call__(self, x):
        x = _points(x)
        if x.shape[-1] != len(self.axes):
            raise ValueError("point dimension does not match the grid")
        return self._interp(x.reshape(-1, x.shape[-1])).reshape(x.shape[:-1])


@dataclass(frozen=True)
class Scaled(ScalarField):
    """``factor * inner``; keeps radial structure."""

    inner: ScalarField
    factor: float

    def __call__(self, x):
        return self.factor * self.inner(x)

    def radial(self, r):
        return self.factor * self.inner.radial(r)

    @property
    def center(self):
        return self.inner.center

    @property
    def is_radial(self):
        return self.inner.is_radial


def field_from_json(doc, pointer="") -> ScalarField:
    """Build a scalar field from its JSON descriptor."""
    if isinstance(doc, (int, float)):
        return Constant(float(doc))
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("expected an object with a 'kind' key", pointer)
    kind = doc["kind"]
    try:
        if kind == "constant":
            return Constant(float(doc.get("value", 0.0)))
        if kind == "power-law":
            center = doc.get("center")
            return PowerLaw(float(doc.get("coef", 1.0)), float(doc["exponent"]),
                            doc.get("base", "abs"),
                            None if center is None else tuple(map(float, center)))
        if kind == "radial-profile":
            center = doc.get("center")
            return RadialProfile(tuple(map(float, doc["r"])), tuple(map(float, doc["values"])),
                                 doc.get("fill"),
                                 None if center is None else tuple(map(float, center)))
        if kind == "tabulated-grid":
            axes = tuple(tuple(map(float, a)) for a in doc["axes"])
            return TabulatedGrid(axes, np.asarray(doc["values"], dtype=float))
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}", pointer) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), pointer) from None
    raise ConfigError(f"unknown field kind {kind!r}", pointer + "/kind")


# ---------------------------------------------------------------- metric

@dataclass(frozen=True)
class Metric:
    """Inverse metric ``g^{jk}``.

    ``kind`` is ``"identity"``, ``"constant"`` (a fixed SPD matrix) or
    ``"diagonal"`` (one scalar field per axis).
    """

    dimension: int
    kind: str = "identity"
    matrix: tuple | None = None
    entries: tuple = ()

    def __post_init__(self):
        if self.kind == "constant":
            g = np.asarray(self.matrix, dtype=float)
            if g.shape != (self.dimension, self.dimension):
                raise ValueError("metric matrix has the wrong shape")
            if not np.allclose(g, g.T, rtol=0, atol=1e-14 * np.abs(g).max()):
                raise ValueError("metric matrix is not symmetric")
        elif self.kind == "diagonal":
            if len(self.entries) != self.dimension:
                raise ValueError("diagonal metric needs one field per axis")
        elif self.kind != "identity":
            raise ValueError(f"unknown metric kind {self.kind!r}")

    @property
    def is_identity(self):
        return self.kind == "identity"

    @property
    def is_diagonal(self):
        return self.kind in ("identity", "diagonal") or (
            self.kind == "constant"
            and np.count_nonzero(np.asarray(self.matrix) - np.diag(np.diag(self.matrix))) == 0)

    def at(self, x):
        """Matrices of shape ``(..., d, d)`` at the given points."""
        x = _points(x)
        d = self.dimension
        shape = x.shape[:-1]
        if self.kind == "identity":
            return np.broadcast_to(np.eye(d), shape + (d, d)).copy()
        if self.kind == "constant":
            return np.broadcast_to(np.asarray(self.matrix, float), shape + (d, d)).copy()
        out = np.zeros(shape + (d, d))
        for j, f in enumerate(self.entries):
            out[..., j, j] = f(x)
        return out

    def diagonal_at(self, x, axis):
        """``g^{jj}`` at the given points for one axis (diagonal metrics)."""
        x = _points(x)
        if self.kind == "identity":
            return np.ones(x.shape[:-1])
        if self.kind == "diagonal":
            return self.entries[axis](x)
        if not self.is_diagonal:
            raise ValueError("metric is not diagonal")
        return np.full(x.shape[:-1], float(self.matrix[axis][axis]))

    def sqrt_det_inverse(self, x):
        """``sqrt(g)`` in the volume element, i.e. ``det(g^{jk})^{-1/2}``."""
        if self.kind == "identity":
            return np.ones(_points(x).shape[:-1])
        return np.linalg.det(self.at(x)) ** -0.5

    def check_elliptic(self, points, eps, c):
        """True when ``eps|xi|^2 <= g^{jk} xi_j xi_k <= c|xi|^2`` at all points."""
        ev = np.linalg.eigvalsh(self.at(points))
        return bool(np.all(ev >= eps) and np.all(ev <= c))


def metric_from_json(doc, dimension, pointer="") -> Metric:
    if doc is None or doc == "identity":
        return Metric(dimension)
    if not isinstance(doc, dict):
        raise ConfigError("metric must be 'identity' or an object", pointer)
    try:
        kind = doc.get("kind", "identity")
        if kind == "constant":
            return Metric(dimension, "constant", tuple(tuple(map(float, row)) for row in doc["matrix"]))
        if kind == "diagonal":
            ents = tuple(field_from_json(e, f"{pointer}/entries/{i}")
                         for i, e in enumerate(doc["entries"]))
            return Metric(dimension, "diagonal", entries=ents)
        return Metric(dimension, kind)
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}", pointer) from None
    except ValueError as exc:
        raise ConfigError(str(exc), pointer) from None


__all__: Sequence[str] = [
    "ScalarField", "Constant", "PowerLaw", "RadialProfile", "TabulatedGrid", "Scaled",
    "field_from_json", "Metric", "metric_from_json", "radial_base",
]
