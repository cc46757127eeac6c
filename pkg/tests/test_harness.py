import json
import subprocess
import sys

import numpy as np
import pytest

from magspec.errors import ConfigError, DomainError
from magspec.harness.cli import run
from magspec.harness.config import parse_config
from magspec.harness.fitting import exponent_fit
from magspec.harness.io import fmt, write_csv
from magspec.model import predicted_exponents

GAUGE = {"dimension": 2, "vector_potential": {"kind": "rotational-even", "profile": {"m": -1}},
         "params": {"points": 20, "mode": "analytic"}}


def _write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return path


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_gauge_check_passes(tmp_path):
    out = tmp_path / "out"
    assert run("gauge-check", _write(tmp_path, GAUGE), out) == 0
    rep = _report(out)
    assert rep["status"] == "pass" and rep["schema_version"] == "1.0"
    assert rep["results"]["max_rel_gap"] < 1e-9
    header = (out / "intensities.csv").read_text().splitlines()[0]
    assert header == "point,f_closed,f_numeric,rel_gap"


def test_failed_check_exits_one(tmp_path):
    doc = {"params": {"eps": [0.2, 0.1], "ratio_tol": 1e-6}}
    out = tmp_path / "out"
    assert run("oned-shallow", _write(tmp_path, doc), out) == 1
    rep = _report(out)
    assert rep["status"] == "fail"
    assert {c["name"]: c["status"] for c in rep["checks"]}["ratio-at-smallest-eps"] == "fail"


def test_config_error_pointer(tmp_path, capsys):
    out = tmp_path / "out"
    assert run("oned-hardy", _write(tmp_path, {"params": {"c": "x"}}), out) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["pointer"] == "/params/c"
    assert _report(out)["pointer"] == "/params/c"


def test_malformed_json_exits_two(tmp_path):
    assert run("oned-hardy", _write(tmp_path, "{bad"), tmp_path / "out") == 2


@pytest.mark.parametrize("doc,pointer", [
    ({"params": {"c": -1, "extra": 1}}, "/params/extra"),
    ({"params": {}}, "/params/c"),
    ({"params": {"c": -1, "L": [100, 10, 1000]}}, "/params/L"),
])
def test_pointer_variants(doc, pointer):
    with pytest.raises(ConfigError) as info:
        parse_config(doc, "oned-hardy")
    assert info.value.pointer == pointer


def test_model_pointer():
    doc = {"model": {"dimension": 2, "mu": -1}, "params": {"method": "pauli", "eta": [0.1]}}
    with pytest.raises(ConfigError) as info:
        parse_config(doc, "eta-count")
    assert info.value.pointer == "/model/mu"


def test_resource_cap_exits_three(tmp_path):
    out = tmp_path / "out"
    assert run("landau", _write(tmp_path, {"params": {"L": 20, "n": 300}}), out) == 3
    assert _report(out)["status"] == "resource-cap"


def test_resolution_warning_recorded(tmp_path):
    doc = {"params": {"B": 5.0, "L": 10.0, "n": 20}}
    out = tmp_path / "out"
    run("landau", _write(tmp_path, doc), out)
    rep = _report(out)
    assert any("under-resolves" in w for w in rep["warnings"])
    assert (out / "landau.csv").exists()


def test_byte_identical_reruns(tmp_path):
    cfg = _write(tmp_path, GAUGE)
    run("gauge-check", cfg, tmp_path / "a", seed=7, threads=1)
    run("gauge-check", cfg, tmp_path / "b", seed=7, threads=3)
    for name in ("report.json", "intensities.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_samples(tmp_path):
    cfg = _write(tmp_path, GAUGE)
    run("gauge-check", cfg, tmp_path / "a", seed=1)
    run("gauge-check", cfg, tmp_path / "b", seed=2)
    assert (tmp_path / "a" / "intensities.csv").read_bytes() != (tmp_path / "b" / "intensities.csv").read_bytes()


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MAGSPEC_THREADS", "nope")
    assert run("gauge-check", _write(tmp_path, GAUGE), tmp_path / "out") == 2
    monkeypatch.setenv("MAGSPEC_THREADS", "2")
    assert run("gauge-check", _write(tmp_path, GAUGE), tmp_path / "out") == 0


def test_console_entry_point(tmp_path):
    cfg = _write(tmp_path, GAUGE)
    proc = subprocess.run([sys.executable, "-m", "magspec", "gauge-check", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS intensity-gap" in proc.stdout


def test_csv_number_format(tmp_path):
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(np.int64(3)) == "3"
    write_csv(tmp_path / "x.csv", ("a", "b"), [(1.0 / 3, 2)])
    assert (tmp_path / "x.csv").read_text() == "a,b\n0.33333333333333331,2\n"


# ------------------------------------------------------------ exponent fits

def _ladder():
    mu, h = np.meshgrid([1.0, 2.0, 4.0, 8.0], [0.1, 0.05, 0.025, 0.0125])
    return mu.ravel(), h.ravel()


def test_fit_synthetic_pass():
    mu, h = _ladder()
    noise = 1 + 0.01 * np.random.default_rng(0).uniform(-1, 1, mu.size)
    fit = exponent_fit(mu, h, mu ** -2.0 * h ** -4.0 * noise, (-2, -4))
    assert fit.verdict == "pass"
    assert 0 <= fit.r2 <= 1


def test_fit_against_catalog_row():
    mu, h = _ladder()
    pred = predicted_exponents("schrodinger", 2, -2, -5, "strong-field")
    assert exponent_fit(mu, h, mu ** -2.0 * h ** -4.0, pred).verdict == "pass"
    assert exponent_fit(mu, h, mu ** -1.0 * h ** -4.0, pred).verdict == "fail"


def test_fit_scale_invariant():
    mu, h = _ladder()
    v = mu ** -1.3 * h ** -2.2 * np.exp(np.sin(mu * h))
    a, b = exponent_fit(mu, h, v), exponent_fit(mu, h, 17.0 * v)
    assert abs(a.slopes[0] - b.slopes[0]) < 1e-12 and abs(a.slopes[1] - b.slopes[1]) < 1e-12
    assert b.intercept == pytest.approx(a.intercept + np.log(17.0))


def test_fit_degenerate_ladder():
    h = np.array([0.1, 0.05, 0.025, 0.0125])
    with pytest.raises(DomainError):
        exponent_fit(np.ones(4), h, h ** -2)
    with pytest.raises(DomainError):
        exponent_fit(h * 10, h, h ** -2)  # collinear in log space


def test_fit_rejects_nonpositive():
    mu, h = _ladder()
    v = mu * h
    v[3] = 0.0
    with pytest.raises(DomainError):
        exponent_fit(mu, h, v)
