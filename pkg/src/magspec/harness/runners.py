"""One runner per CLI subcommand.

A runner takes a validated ``RunConfig``, the output directory, the seed
and the worker count, writes its CSV files and returns an ``Outcome`` with
named pass/fail checks.  Runners never look at the clock or the
environment, so reruns with the same inputs give identical bytes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .io import write_csv


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    bound: object = None

    def to_json(self):
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "value": self.value, "bound": self.bound}


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name, passed, value=None, bound=None):
        self.checks.append(Check(name, bool(passed), value, bound))


def ordered_map(fn, items, threads):
    """``map`` over a worker pool; results come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- gauge

def run_gauge_check(cfg, out: Path, seed: int, threads: int) -> Outcome:
    from ..gauge import sample_annulus, vector_potential_from_json, verify_intensity_formulas
    p = cfg.params
    d = cfg.raw["dimension"]
    vp = vector_potential_from_json(cfg.raw["vector_potential"], d, "/vector_potential")
    mode = p.get("mode", "finite-difference")
    tol = p.get("tol", 1e-6 if mode == "finite-difference" else 1e-9)
    r_min, r_max = p.get("r_min", 0.5), p.get("r_max", 2.0)
    if not r_min < r_max:
        raise ConfigError("r_min must be below r_max", "/params/r_min")
    pts = sample_annulus(np.random.default_rng(seed), p.get("points", 50), d, r_min, r_max)
    try:
        rep = verify_intensity_formulas(vp, pts, mode=mode, tol=tol, eta=p.get("eta"))
    except TypeError as exc:
        raise ConfigError(str(exc), "/vector_potential/kind") from None
    rep.write_csv(out / "intensities.csv")
    o = Outcome(artifacts=["intensities.csv"])
    o.results = {"max_rel_gap": rep.max_gap, "points": len(rep.rows), "mode": mode}
    o.check("intensity-gap", rep.passed, rep.max_gap, tol)
    return o


# ---------------------------------------------------------------- 1D

def run_oned_shallow(cfg, out, seed, threads):
    from ..oned import profile_from_json, shallow_well_check
    p = cfg.params
    prof = profile_from_json(p.get("profile", {"kind": "gaussian"}), "/params/profile")
    rep = shallow_well_check(prof, p["eps"], box_factor=p.get("box_factor", 30.0))
    o = Outcome(artifacts=[write_csv(out / "shallow.csv", rep.columns, rep.rows())])
    o.results = {"W": rep.W, "ratios": rep.ratios, "counts": rep.counts, "box": rep.box}
    if rep.W > 0:
        tol = p.get("ratio_tol", 0.05)
        i = int(np.argmin(rep.eps))
        o.check("one-negative-eigenvalue", np.all(rep.counts == 1), rep.counts.tolist(), 1)
        o.check("ratio-at-smallest-eps", rep.gaps[i] < tol, float(rep.ratios[i]), tol)
        o.check("gap-decreasing", rep.gaps_decreasing(), rep.gaps.tolist())
    else:
        o.check("no-negative-eigenvalue", np.all(rep.counts == 0), rep.counts.tolist(), 0)
    return o


def run_oned_slowdecay(cfg, out, seed, threads):
    from ..oned import slow_decay_check
    p = cfg.params
    kw = {k: p[k] for k in ("q", "c") if k in p}
    if "eps" in p:
        kw["eps_grid"] = p["eps"]
    rep = slow_decay_check(**kw)
    o = Outcome(artifacts=[write_csv(out / "slowdecay.csv", rep.columns, rep.rows())])
    o.results = {"mu": rep.mu, "mu_coarse": rep.mu_coarse, "slope": rep.fit.slope,
                 "r2": rep.fit.r2, "ratios": rep.ratios}
    i = int(np.argmin(rep.eps))
    stol, rtol = p.get("slope_tol", 0.05), p.get("ratio_tol", 0.1)
    o.check("mu-two-resolutions", abs(rep.mu - rep.mu_coarse) <= 1e-4 * abs(rep.mu),
            rep.mu_coarse, 1e-4)
    o.check("exponent", abs(rep.fit.slope - rep.exponent) <= stol, rep.fit.slope,
            [rep.exponent - stol, rep.exponent + stol])
    o.check("prefactor-ratio", abs(rep.ratios[i] - 1) <= rtol, float(rep.ratios[i]),
            [1 - rtol, 1 + rtol])
    return o


def run_oned_hardy(cfg, out, seed, threads):
    from ..oned import hardy_threshold_check
    p = cfg.params
    c = p["c"]
    default = [1e2, 1e3, 1e4] if c >= -0.25 else list(10.0 ** np.arange(2, 12.01, 0.5))
    rep = hardy_threshold_check(c, p.get("L", default))
    o = Outcome(artifacts=[write_csv(out / "hardy.csv", rep.columns, rep.rows())])
    o.results = {"counts": rep.counts, "slope": rep.fit.slope, "r2": rep.fit.r2,
                 "classification": rep.classification}
    if c > -0.25:
        o.check("bounded-count", rep.bounded, rep.counts.tolist())
    elif c < -0.25:
        r2min = p.get("r2_min", 0.99)
        o.check("log-growth-slope", rep.fit.slope > 0, rep.fit.slope, 0)
        o.check("log-growth-r2", rep.fit.r2 > r2min, rep.fit.r2, r2min)
    return o


# ---------------------------------------------------------------- lattice

def run_landau(cfg, out, seed, threads):
    from ..eigcount import landau_degeneracy_experiment
    p = cfg.params
    B, L, n = p.get("B", 1.0), p.get("L", 20.0), p.get("n", 256)
    bc = p.get("boundary", "dirichlet")
    rep = landau_degeneracy_experiment(B, L, n, p.get("levels", 1), bc, threads)
    o = Outcome(artifacts=[write_csv(out / "landau.csv", rep.columns, rep.rows())])
    o.results = {"counts": rep.counts, "expected": rep.expected, "ratios": rep.ratios}
    if bc == "periodic":
        flux = rep.expected
        o.check("torus-degeneracy", np.all(rep.counts == round(flux)), rep.counts.tolist(), flux)
        return o
    lo, hi = p.get("band", [0.85, 1.0])
    o.check("lowest-level-ratio", lo <= rep.ratios[0] <= hi, float(rep.ratios[0]), [lo, hi])
    if "compare" in p:
        c = p["compare"]
        rep2 = landau_degeneracy_experiment(B, c["L"], c["n"], 1, bc, threads)
        o.artifacts.append(write_csv(out / "landau_compare.csv", rep2.columns, rep2.rows()))
        o.results["compare_ratio"] = float(rep2.ratios[0])
        o.check("deficit-shrinks", abs(1 - rep2.ratios[0]) < abs(1 - rep.ratios[0]),
                float(rep2.ratios[0]), float(rep.ratios[0]))
    return o


def run_accumulate(cfg, out, seed, threads):
    from ..eigcount import accumulation_experiment
    p = cfg.params
    kw = {k: p[k] for k in ("B", "c", "m", "L", "n") if k in p}
    if "eta" in p:
        kw["eta_grid"] = p["eta"]
    rep = accumulation_experiment(threads=threads, **kw)
    o = Outcome(artifacts=[write_csv(out / "accumulate.csv", rep.columns, rep.rows())])
    o.results = {"counts": rep.counts, "formula": rep.formula, "ratios": rep.ratios}
    lo, hi = p.get("band", [0.8, 1.2])
    for eta, cnt, f, r in zip(rep.eta, rep.counts, rep.formula, rep.ratios):
        name = f"ratio-eta={eta:.6g}"
        if f > 0:
            o.check(name, lo <= r <= hi, float(r), [lo, hi])
        else:
            o.check(name, cnt == 0, int(cnt), 0)
    return o


# ---------------------------------------------------------------- counting formulas

def run_eta_count(cfg, out, seed, threads):
    from ..weyl import eta_count_landau, eta_count_pauli
    p = cfg.params
    spec = cfg.model()
    etas = list(p["eta"])
    kw = {k: p[k] for k in ("r_max", "n_angles") if k in p}
    if p["method"] == "landau":
        if "f_inf" not in p:
            raise ConfigError("the Landau eta-count needs f_inf", "/params/f_inf")
        W = [tuple(w) for w in p.get("W", [[1]])]
        fn = lambda e: eta_count_landau(spec, W, e, p["f_inf"], p.get("sign", -1), **kw)
    else:
        fn = lambda e: eta_count_pauli(spec, p.get("p", 1), e, **kw)
    vals = ordered_map(fn, etas, threads)
    o = Outcome(artifacts=[write_csv(out / "eta_count.csv", ("eta", "count"), zip(etas, vals))])
    o.results = {"counts": vals}
    order = np.argsort(etas)
    v = np.asarray(vals)[order]
    o.check("nonincreasing-in-eta", bool(np.all(np.diff(v) <= 1e-12 * np.max(np.abs(v) + 1e-300))),
            vals)
    return o


def run_exponent_fit(cfg, out, seed, threads):
    from ..model import predicted_exponents, strong_field_window
    from ..weyl import radial_magnetic_count
    from .fitting import exponent_fit
    p = cfg.params
    d, m, m1 = p["d"], p["m"], p["m1"]
    kind = p.get("kind", "schrodinger")
    regime = p.get("regime", "strong-field")
    pred = predicted_exponents(kind, d, m, m1, regime, p.get("location"))
    r_min = p.get("r_min", 1.0)
    schro = p.get("schrodinger_levels", True)
    pairs = [(mh / h, h) for h in p["h"] for mh in p["mu_h"]]

    def value(pair):
        mu, h = pair
        return radial_magnetic_count(lambda r: -r ** (2.0 * m), lambda r: r ** float(m1), d,
                                     mu, h, r_min, kind=kind if d == 2 else "schrodinger",
                                     schrodinger=schro)

    vals = ordered_map(value, pairs, threads)
    mu = np.array([a for a, _ in pairs])
    h = np.array([b for _, b in pairs])
    fit = exponent_fit(mu, h, vals, pred, p.get("band", 0.1))
    o = Outcome(artifacts=[write_csv(out / "exponent_samples.csv", ("mu", "h", "N"),
                                     zip(mu, h, vals))])
    o.results = {"fit": fit.to_json(), "row": pred.row, "citation": pred.citation}
    o.check("mu-exponent", fit.deviations[0] <= fit.band, fit.slopes[0], fit.predicted[0])
    o.check("h-exponent", fit.deviations[1] <= fit.band, fit.slopes[1], fit.predicted[1])
    if regime == "strong-field":
        inside = all(strong_field_window(m, m1, hh)[0] <= mm <= strong_field_window(m, m1, hh)[1]
                     for mm, hh in pairs)
        o.check("inside-strong-field-window", inside)
    return o


def run_reduce3d(cfg, out, seed, threads):
    from ..oned import reduced_lambda_field
    p = cfg.params
    spec = cfg.model()
    if spec.dimension != 3:
        raise ConfigError("reduce3d needs a 3D model", "/model/dimension")
    kw = {k: p[k] for k in ("axis", "L") if k in p}
    rf = reduced_lambda_field(spec, p["grid"], p["f_inf"], threads=threads, **kw)
    etas = list(p["eta"])
    counts = [rf.count(e) for e in etas]
    sur = [rf.surrogate_count(e) for e in etas]
    o = Outcome(artifacts=[write_csv(out / "lambda_field.csv", rf.columns, rf.rows()),
                           write_csv(out / "reduced_counts.csv", ("eta", "count", "surrogate"),
                                     zip(etas, counts, sur))])
    o.results = {"counts": counts, "surrogate": sur, "flagged_points": int(rf.flagged.sum())}
    order = np.argsort(etas)
    o.check("nonincreasing-in-eta", bool(np.all(np.diff(np.asarray(counts)[order]) <= 0)), counts)
    return o


RUNNERS = {
    "gauge-check": run_gauge_check,
    "oned-shallow": run_oned_shallow,
    "oned-slowdecay": run_oned_slowdecay,
    "oned-hardy": run_oned_hardy,
    "landau": run_landau,
    "accumulate": run_accumulate,
    "eta-count": run_eta_count,
    "exponent-fit": run_exponent_fit,
    "reduce3d": run_reduce3d,
}
