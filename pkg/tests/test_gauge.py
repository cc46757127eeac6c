import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import special_ortho_group

from magspec.errors import ConfigError, DomainError
from magspec.gauge import (ExponentialPhase, GaugeShifted, Landau, Profile, QuasiHomogeneous,
                           RotationalEven, RotationalOdd, closed_form_intensities, intensities,
                           potential_at, sample_annulus, tensor_at, vector_potential_from_json,
                           verify_intensity_formulas)


def test_potential_even_unit_profile():
    spec = RotationalEven(2, Profile(0.0, 1.0, "const"))
    assert potential_at(spec, [1.0, 0.0]) == pytest.approx([0.0, -1.0])


def test_potential_odd_with_axial():
    spec = RotationalOdd.with_axial(3, 0.0, 1.0)
    assert potential_at(spec, [1.0, 0.0, 0.0]) == pytest.approx([0.0, -1.0, 1.0])


def _phase_oracle(x, beta, m, a):
    # independent re-implementation: numerical quadrature for the phase
    rho = math.hypot(x[0], x[1])
    r = float(np.linalg.norm(x))
    psi = quad(lambda y: (rho * rho + y * y) ** ((beta - 1) / 2), 0.0, x[2], epsabs=0, epsrel=1e-13)[0]
    amp = math.exp(a * r ** beta) * r ** m
    return np.array([amp * math.cos(psi), amp * math.sin(psi), 0.0])


@pytest.mark.parametrize("beta,m,a", [(0.5, -1.0, 1.0), (2.0, 0.0, 0.3), (1.5, 1.0, -0.5)])
def test_exponential_phase_matches_quadrature(beta, m, a):
    spec = ExponentialPhase(beta, m, a)
    rng = np.random.default_rng(11)
    for x in rng.uniform(-1.5, 1.5, (10, 3)):
        assert potential_at(spec, x) == pytest.approx(_phase_oracle(x, beta, m, a), rel=1e-10, abs=1e-12)


def test_exponential_phase_axis_is_singular():
    with pytest.raises(DomainError):
        potential_at(ExponentialPhase(0.5), [0.0, 0.0, 1.0])


def test_negative_exponent_origin_raises():
    with pytest.raises(DomainError):
        potential_at(RotationalEven(2, Profile(-1.0)), [0.0, 0.0])


def test_constant_profile_field():
    c = 1.7
    spec = RotationalEven(2, Profile(0.0, c, "const"))
    for x in sample_annulus(np.random.default_rng(0), 10, 2):
        F = tensor_at(spec, x).F
        assert F[0, 1] == pytest.approx(2 * c, rel=1e-14)


@pytest.mark.parametrize("m", [-1.5, -1.0, 0.5, 2.0])
def test_power_profile_field_2d(m):
    spec = RotationalEven(2, Profile(m))
    for x in sample_annulus(np.random.default_rng(1), 20, 2):
        r = np.linalg.norm(x)
        assert abs(tensor_at(spec, x).F[0, 1]) == pytest.approx((2 + m) * r ** m, rel=1e-12)


def _specs():
    return [RotationalEven(2, Profile(-1.0)), RotationalEven(4, Profile(0.5, 1.0, "bracket")),
            RotationalOdd.with_axial(3, -1.0, 0.7), RotationalOdd.with_axial(5, 1.0, 0.0),
            QuasiHomogeneous(3, (1.0, 2.0, 1.0), 1.0), ExponentialPhase(0.5, -1.0, 0.5),
            GaugeShifted(Landau(2.0), ((1.0, 0.5), (0.5, -2.0)), (0.3, 0.1))]


@pytest.mark.parametrize("spec", _specs(), ids=lambda s: type(s).__name__)
def test_finite_difference_agrees_with_analytic(spec):
    rng = np.random.default_rng(5)
    pts = sample_annulus(rng, 400, spec.dimension, 0.5, 1.5)
    if isinstance(spec, ExponentialPhase):
        # the phase is singular on the x3 axis; sample away from it
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 0.2]
    pts = pts[:100]
    Fa = tensor_at(spec, pts, "analytic").F
    Ff = tensor_at(spec, pts, "finite-difference", eta=1e-4).F
    assert np.max(np.abs(Fa - Ff)) < 1e-6


def test_finite_difference_is_second_order():
    spec = RotationalOdd.with_axial(3, -1.0, 0.7)
    x = np.array([0.6, -0.4, 0.8])
    Fa = tensor_at(spec, x).F
    errs = [np.max(np.abs(tensor_at(spec, x, "finite-difference", eta=e).F - Fa)) for e in (1e-2, 5e-3)]
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.1)


@pytest.mark.parametrize("spec", _specs(), ids=lambda s: type(s).__name__)
def test_tensor_is_exactly_antisymmetric(spec):
    pts = sample_annulus(np.random.default_rng(2), 10, spec.dimension)
    for mode in ("analytic", "finite-difference"):
        F = tensor_at(spec, pts, mode).F
        assert np.array_equal(F, -np.swapaxes(F, -1, -2))


def test_constant_intensities_4d():
    c = 0.8
    spec = RotationalEven(4, Profile(0.0, c, "const"))
    il = intensities(tensor_at(spec, [0.3, 0.1, -0.2, 0.5]).F)
    assert il.f == pytest.approx((2 * c, 2 * c))
    assert il.kernel_dim == 0


def test_axial_point_intensity():
    spec = RotationalOdd(3, Profile(-1.0))
    x = np.array([1.0, 0.0, 1.0])
    il = intensities(tensor_at(spec, x).F)
    assert il.f[0] ** 2 == pytest.approx(1.25, rel=1e-12)
    assert il.kernel_dim == 1
    # cross-check: FD curl and a dense complex eigensolve
    F = tensor_at(spec, x, "finite-difference", eta=1e-5).F
    ev = np.linalg.eigvals(F)
    assert np.max(np.abs(ev.imag)) ** 2 == pytest.approx(1.25, rel=1e-8)


def test_two_dimensional_single_intensity():
    F = np.array([[0.0, -3.2], [3.2, 0.0]])
    il = intensities(F)
    assert il.f == pytest.approx((3.2,)) and il.kernel_dim == 0 and il.scalar == pytest.approx(3.2)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_spectrum_pairing(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        A = rng.standard_normal((d, d))
        F = A - A.T
        G = rng.standard_normal((d, d))
        g = G @ G.T + d * np.eye(d)
        il = intensities(F, g)
        ev = np.linalg.eigvals(g @ F)
        assert 2 * il.r + il.kernel_dim == d
        for f in il.f:
            assert np.min(np.abs(ev - 1j * f)) < 1e-8
            assert np.min(np.abs(ev + 1j * f)) < 1e-8


@pytest.mark.parametrize("d", [3, 4])
def test_rotation_invariance(d):
    rng = np.random.default_rng(7)
    A = rng.standard_normal((d, d))
    F = A - A.T
    base = np.array(intensities(F).f)
    for _ in range(10):
        R = special_ortho_group.rvs(d, random_state=rng)
        rot = R @ F @ R.T
        rot = 0.5 * (rot - rot.T)
        assert np.max(np.abs(np.array(intensities(rot).f) - base)) < 1e-10


def test_non_spd_metric_rejected():
    with pytest.raises(ValueError):
        intensities(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.diag([1.0, -1.0]))


@pytest.mark.parametrize("spec", [RotationalEven(2, Profile(-1.0)), RotationalEven(4, Profile(1.0)),
                                  RotationalOdd(3, Profile(-0.5)), RotationalOdd.with_axial(3, -1.0, 2.0),
                                  RotationalOdd(5, Profile(0.5, 1.0, "bracket"))],
                         ids=lambda s: f"{type(s).__name__}{s.dimension}")
def test_closed_forms_on_radii(spec):
    rng = np.random.default_rng(3)
    radii = np.geomspace(0.1, 10, 20)
    u = rng.standard_normal((20, spec.dimension))
    pts = u / np.linalg.norm(u, axis=1, keepdims=True) * radii[:, None]
    rep = verify_intensity_formulas(spec, pts, tol=1e-9)
    assert rep.passed, rep.max_gap


def test_axial_term_keeps_first_intensity_comparable():
    spec = RotationalOdd.with_axial(3, -1.0, 1.0)
    rng = np.random.default_rng(4)
    pts = sample_annulus(rng, 400, 3, 0.1, 10.0)
    # include points in the plane x_d = 0, where the radial part is smallest
    pts = np.vstack([pts, [[1.0, 0.0, 0.0], [0.0, 3.0, 0.0]]])
    f1 = closed_form_intensities(spec, pts)[:, 0]
    r = np.linalg.norm(pts, axis=1)
    assert np.min(f1 / r ** -1.0) > 0.5


def test_bracket_profile_comparable():
    for m in (-1.5, -0.5, 1.0):
        spec = RotationalEven(2, Profile(m, 1.0, "bracket"))
        pts = sample_annulus(np.random.default_rng(6), 300, 2, 0.01, 100.0)
        ratio = closed_form_intensities(spec, pts)[:, 0] / (1 + np.sum(pts ** 2, axis=1)) ** (m / 2)
        # 2 + m r^2 / <r>^2 lies between 2 and 2 + m
        assert ratio.min() >= min(2.0, 2 + m) - 1e-12
        assert ratio.max() <= max(2.0, 2 + m) + 1e-12


@pytest.mark.parametrize("m", [-1.0, 0.5, 1.5])
def test_power_profile_min_intensity_bounded_below(m):
    spec = RotationalEven(4, Profile(m))
    pts = sample_annulus(np.random.default_rng(8), 200, 4, 0.2, 5.0)
    f = closed_form_intensities(spec, pts)
    r = np.linalg.norm(pts, axis=1)
    assert np.min(f[:, -1] / r ** m) >= min(2.0, 2 + m) - 1e-12


def test_json_kinds_and_gauge():
    spec = vector_potential_from_json({"kind": "rotational-even", "profile": {"m": -1}}, 2)
    assert isinstance(spec, RotationalEven)
    lan = vector_potential_from_json({"kind": "landau", "B": 2.0, "gauge": {"Q": [[1, 0], [0, 1]]}}, 2)
    assert isinstance(lan, GaugeShifted)
    assert tensor_at(lan, [0.3, 0.2]).F[0, 1] == pytest.approx(2.0)
    with pytest.raises(ConfigError) as info:
        vector_potential_from_json({"kind": "landau", "B": 1}, 3)
    assert info.value.pointer == "/kind"
    with pytest.raises(ConfigError) as info:
        vector_potential_from_json({"kind": "landau", "B": 1, "gauge": {"Q": [[0, 1], [0, 0]]}}, 2, "/vp")
    assert info.value.pointer == "/vp/gauge"


def test_gauge_shift_leaves_field_unchanged():
    inner = RotationalEven(2, Profile(-1.0))
    shifted = GaugeShifted(inner, ((0.4, -1.0), (-1.0, 2.0)), (1.0, -3.0))
    pts = sample_annulus(np.random.default_rng(9), 30, 2)
    assert np.allclose(tensor_at(inner, pts).F, tensor_at(shifted, pts).F, rtol=0, atol=1e-13)
