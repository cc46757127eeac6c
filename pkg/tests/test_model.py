import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magspec.errors import ConfigError, DivergenceError, DomainError, UnknownRegime
from magspec.fields import Metric, PowerLaw
from magspec.model import (Annulus, Box, ModelSpec, ScalingTriple, ZoneLabel, classify_zone,
                           effective_params, model_from_json, predicted_exponents,
                           remainder_integral_R1, strong_field_radius)
from magspec.quadrature import midpoint_sequence


def test_identity_effective_params():
    triple = ScalingTriple(1.0, 0.0, 0.0, "const")
    ep = effective_params(ModelSpec(2), triple, np.array([0.3, -0.2]))
    assert ep.mu_eff == pytest.approx(1.0)
    assert ep.h_eff == pytest.approx(1.0)


def test_effective_mu_by_substitution():
    # gamma = |x|/2 so the unscaled value 1/2 picks up the factor 1/2
    ep = effective_params(ModelSpec(2), ScalingTriple(0.5, -1, -3), np.array([2.0, 0.0]))
    assert ep.mu_eff == pytest.approx(0.5 * 2.0 ** -3 * 2.0 / 2.0 ** -1)
    assert ep.mu_eff == pytest.approx(0.25)


def test_singular_point_names_factor():
    with pytest.raises(DomainError, match="gamma|rho"):
        effective_params(ModelSpec(2), ScalingTriple(0.5, -1, -3), np.zeros(2))


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.05, 50.0), mu=st.floats(0.1, 10.0), h=st.floats(0.01, 1.0),
       m=st.floats(-3, 1), m1=st.floats(-6, 1))
def test_product_identity(r, mu, h, m, m1):
    triple = ScalingTriple(0.5, m, m1)
    x = np.array([r, 0.0, 0.0])
    ep = effective_params(ModelSpec(3, mu=mu, h=h), triple, x)
    assert ep.product == pytest.approx(mu * h * r ** m1 / r ** (2 * m), rel=1e-13)


def test_forbidden_radius_matches_closed_form():
    from scipy.optimize import brentq
    m, m1, h = -1.0, -3.0, 0.1
    for mu in (0.5, 1.0, 4.0):
        spec = ModelSpec(2, mu=mu, h=h)
        triple = ScalingTriple(0.5, m, m1)
        f = lambda r: math.log(effective_params(spec, triple, np.array([r, 0.0])).product)
        root = brentq(f, 1e-6, 1e6, xtol=1e-14)
        assert root == pytest.approx(strong_field_radius(mu, h, m, m1), rel=1e-10)
    # the r-bar form with mu^{-1} h coincides at mu = 1 only
    r_bar = lambda mu: (h / mu) ** (-1 / (m1 - 2 * m))
    assert strong_field_radius(1.0, h, m, m1) == pytest.approx(r_bar(1.0))
    assert strong_field_radius(4.0, h, m, m1) != pytest.approx(r_bar(4.0))


def _zones(h, rho_gamma):
    # const base: gamma = eps, rho = rho1 = 1, so rho*gamma = eps
    return classify_zone(ModelSpec(2, h=h), ScalingTriple(rho_gamma, 0, 0, "const"), np.ones(2))


def test_zone_semiclassical_only():
    z = _zones(1.0, 3.0)
    assert ZoneLabel.SEMICLASSICAL in z and ZoneLabel.SINGULAR not in z


def test_zone_overlap_band():
    z = _zones(1.0, 1.5)
    assert {ZoneLabel.SEMICLASSICAL, ZoneLabel.SINGULAR} <= z


def test_singular_label_monotone_in_h():
    triple = ScalingTriple(0.5, -1, -3)
    rng = np.random.default_rng(3)
    for x in rng.uniform(0.1, 5, (40, 2)):
        had = False
        for h in np.geomspace(1e-3, 10, 30):
            z = classify_zone(ModelSpec(2, h=h), triple, x)
            if had:
                assert ZoneLabel.SINGULAR in z
            had = had or ZoneLabel.SINGULAR in z


def test_strong_field_boundary_root():
    from scipy.optimize import brentq
    m, m1, c = -1.0, -3.0, 1.0
    spec = ModelSpec(2, mu=1.0, h=1e-3)
    triple = ScalingTriple(0.5, m, m1)
    # mu * rho1 * gamma = c * rho  <=>  0.5 r^{m1+1} = c r^m
    analytic = (c / 0.5) ** (1 / (m1 + 1 - m))
    strong = lambda r: ZoneLabel.STRONG_FIELD in classify_zone(spec, triple, np.array([r, 0.0]))
    lo, hi = 0.1, 10.0
    assert strong(lo) and not strong(hi)
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        lo, hi = (mid, hi) if strong(mid) else (lo, mid)
    assert lo == pytest.approx(analytic, rel=1e-9)
    f = lambda r: 0.5 * r ** (m1 + 1) - c * r ** m
    assert brentq(f, 0.1, 10) == pytest.approx(analytic, rel=1e-12)


def test_r1_unit_area():
    res = remainder_integral_R1(ModelSpec(2), ScalingTriple(1.0, 0, 0, "const"), Box((0, 0), (1, 1)))
    assert res.value == pytest.approx(1.0, rel=1e-12)


def test_r1_annulus():
    R = 3.0
    res = remainder_integral_R1(ModelSpec(2), ScalingTriple(0.5, -2, -5), Annulus(1.0, R))
    assert res.value == pytest.approx(8 * math.pi * (R - 1), rel=1e-9)


def test_r1_exterior_3d():
    res = remainder_integral_R1(ModelSpec(3), ScalingTriple(0.5, -2, -5), Annulus(1.0, math.inf))
    assert res.value == pytest.approx(4 * math.pi, rel=1e-8)


def test_r1_scales_with_mu_h():
    triple = ScalingTriple(0.5, -2, -5)
    a = remainder_integral_R1(ModelSpec(2, mu=2.0, h=0.25), triple, Annulus(1.0, 2.0)).value
    b = remainder_integral_R1(ModelSpec(2), triple, Annulus(1.0, 2.0)).value
    assert a == pytest.approx(b / 2.0 / 0.25, rel=1e-12)


def test_r1_divergence_names_condition():
    with pytest.raises(DivergenceError, match="at infinity"):
        remainder_integral_R1(ModelSpec(3), ScalingTriple(0.5, 0, -5), Annulus(1.0, math.inf))


def test_midpoint_order_two():
    f = lambda s: np.exp(s)
    exact = math.e - 1
    seq = midpoint_sequence(f, 0.0, 1.0, 6)
    errs = np.abs(np.array(seq) - exact)
    slopes = np.log(errs[:-1] / errs[1:]) / math.log(3)
    assert np.all(np.abs(slopes[2:] - 2) < 0.05)


def test_catalog_strong_2d():
    p = predicted_exponents("schrodinger", 2, -2, -5, "strong-field")
    t = p.single_term
    assert (t.mu_power, t.h_power) == (-2.0, -4.0)
    assert p.citation


def test_catalog_pauli_two_terms():
    p = predicted_exponents("pauli", 2, -0.5, -1.5, "standard")
    pairs = sorted((t.mu_power, t.h_power) for t in p.N_exponents)
    assert pairs == [(0, -2), (1, -1)]
    with pytest.raises(ValueError):
        p.single_term


def test_catalog_strong_3d():
    t = predicted_exponents("schrodinger", 3, -2, -5, "strong-field").single_term
    assert t.mu_power == -3.0 and t.h_power == -6.0


def test_unknown_regime_lists_rows():
    with pytest.raises(UnknownRegime) as info:
        predicted_exponents("pauli", 3, -2, -5, "strong-field")
    assert isinstance(info.value.nearest, tuple)
    with pytest.raises(UnknownRegime) as info:
        predicted_exponents("schrodinger", 2, -2, -4, "strong-field")
    assert info.value.nearest


def test_catalog_independent_of_gamma_coefficient():
    # the catalog is keyed on exponents only; scaling triples never enter
    a = predicted_exponents("schrodinger", 2, -2, -5, "strong-field")
    ScalingTriple(0.1, -2, -5)
    b = predicted_exponents("schrodinger", 2, -2, -5, "strong-field")
    assert a == b


def test_gamma_gradient_bound():
    pts = np.random.default_rng(0).uniform(-5, 5, (200, 3))
    for base in ("abs", "bracket"):
        assert ScalingTriple(0.5, -1, -2, base).grad_gamma_bound(pts) <= 0.5 + 1e-8
    with pytest.raises(ValueError):
        ScalingTriple(0.7, 0, 0)


def test_spec_invariants():
    with pytest.raises(ValueError):
        ModelSpec(2, mu=-1.0)
    with pytest.raises(ValueError):
        ModelSpec(2, kind="dirac", M=-1.0)
    spec = ModelSpec(2, metric=Metric(2, "constant", ((2.0, 0.5), (0.5, 1.0))))
    assert spec.metric.check_elliptic(np.zeros((3, 2)), 0.5, 3.0)
    assert not spec.metric.check_elliptic(np.zeros((3, 2)), 1.0, 3.0)


def test_model_json_round_trip():
    doc = {"dimension": 2, "kind": "pauli", "mu": 2.0, "h": 0.5,
           "potential": {"kind": "power-law", "coef": -1, "exponent": -2, "base": "bracket"},
           "vector_potential": {"kind": "landau", "B": 1.5},
           "scaling": {"gamma_eps": 0.5, "m": -1, "m1": -3}}
    spec = model_from_json(json.loads(json.dumps(doc)))
    assert spec.kind == "pauli" and spec.mu == 2.0
    assert spec.potential_at(np.zeros(2)) == pytest.approx(-1.0)
    assert spec.scalar_intensity_at(np.array([0.3, 0.4])) == pytest.approx(1.5)


def test_model_json_pointer():
    with pytest.raises(ConfigError) as info:
        model_from_json({"dimension": 2, "mu": -1})
    assert info.value.pointer == "/mu"
    with pytest.raises(ConfigError) as info:
        model_from_json({"dimension": 2, "potential": {"kind": "nope"}})
    assert info.value.pointer == "/potential/kind"


def test_powerlaw_center_domain():
    with pytest.raises(DomainError):
        PowerLaw(1.0, -2.0)(np.zeros(2))
