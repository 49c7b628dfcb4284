import json
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from displab.experiments import (REGISTRY, ConfigError, ExperimentSpec, run_experiment,
                                 list_experiments)
from displab.experiments.base import Experiment, Param, register, RunContext
from displab.experiments.fitting import fit_power_law, SlopeFit
from displab.experiments.output import (RunManifest, read_series, write_series, MANIFEST,
                                        sha256_file)

NAMES = ["loc_ratio", "bo_instability", "burgers_instability", "bona_smith",
         "nls_decoherence_torus", "residual_scaling", "kato_ponce_survey", "strichartz_survey",
         "energy_estimate_check"]


# ----------------------------------------------------------------------------- fitting

def test_fit_exact_power_law():
    x = [1, 2, 4, 8, 16]
    f = fit_power_law(x, [3 * v ** -1.25 for v in x], -1.25)
    assert f.slope == pytest.approx(-1.25, abs=1e-13)
    assert f.intercept == pytest.approx(np.log(3), abs=1e-13)
    assert f.residual_rms < 1e-13 and f.passed


def test_fit_constant_has_zero_slope():
    f = fit_power_law([1, 2, 4, 8], [5.0] * 4)
    assert abs(f.slope) < 1e-14 and f.passed is None


def test_fit_modes():
    x = [1, 2, 4, 8]
    f = fit_power_law(x, [v ** -2 for v in x])
    assert f.with_prediction(-1.9, 0.0, "upper").passed
    assert not f.with_prediction(-2.1, 0.0, "upper").passed
    assert f.with_prediction(-2.1, 0.0, "lower").passed
    assert not f.with_prediction(-1.5, 0.2).passed
    with pytest.raises(ValueError):
        f.with_prediction(-2, 0.2, "sideways").passed


@pytest.mark.parametrize("xs,ys", [([1, 2], [1, 2]), ([1, 2, 3], [1, -2, 3]), ([1, 2, 3], [1, 2])])
def test_fit_rejects_bad_input(xs, ys):
    with pytest.raises(ValueError):
        fit_power_law(xs, ys)


def test_fit_recovers_slope_under_seeded_noise():
    rng = np.random.default_rng(7)
    x = 2.0 ** np.arange(3, 10)
    y = x ** -0.75 * np.exp(rng.normal(0, 0.01, x.size))
    f = fit_power_law(x, y, -0.75, 0.02)
    assert f.passed and f.stderr < 0.01


@settings(max_examples=50, deadline=None)
@given(st.floats(-4, 4), st.floats(-5, 5))
def test_fit_recovers_any_exact_slope(p, c):
    x = 2.0 ** np.arange(5)
    f = fit_power_law(x, np.exp(c) * x ** p)
    assert f.slope == pytest.approx(p, abs=1e-10)


# ----------------------------------------------------------------------------- output

@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_series_round_trip_is_exact(vals):
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "a.csv"
        write_series(p, {"x": vals, "n": list(range(len(vals)))})
        back = read_series(p)
    assert back["x"].tolist() == [float(v) for v in vals]


def test_series_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_series(tmp_path / "a.csv", {"a": [1, 2], "b": [1]})


def test_manifest_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        RunManifest.load(tmp_path)
    (tmp_path / MANIFEST).write_text("{not json")
    with pytest.raises(ValueError):
        RunManifest.load(tmp_path)


# ----------------------------------------------------------------------------- registry and params

def test_registry_contents():
    assert sorted(REGISTRY) == sorted(NAMES)
    assert [e.name for e in list_experiments()] == sorted(NAMES)
    for e in REGISTRY.values():
        assert "quick" in e.presets


def test_duplicate_registration_rejected():
    with pytest.raises(ValueError):
        register(REGISTRY["loc_ratio"])


def test_param_coercion():
    assert Param(1.0).coerce("a", 2) == 2.0
    assert Param(1, "int").coerce("a", 3.0) == 3
    assert Param([1.0], "floats").coerce("a", [1, 2]) == [1.0, 2.0]
    for p, v in [(Param(1.0), True), (Param(1, "int"), 2.5), (Param(True, "bool"), 1),
                 (Param(1.0), float("nan")), (Param([1.0], "floats"), []),
                 (Param("a", "str", choices=("a", "b")), "c")]:
        with pytest.raises(ConfigError):
            p.coerce("a", v)


def test_unknown_parameter_and_preset():
    e = REGISTRY["loc_ratio"]
    with pytest.raises(ConfigError, match="params.bogus"):
        e.resolve(ExperimentSpec("loc_ratio", params={"bogus": 1}))
    with pytest.raises(ConfigError, match="preset"):
        e.resolve(ExperimentSpec("loc_ratio", preset="huge"))


def test_invalid_config_touches_no_disk(tmp_path):
    out = tmp_path / "o"
    with pytest.raises(ConfigError, match="params.delta"):
        run_experiment(ExperimentSpec("loc_ratio", params={"delta": 1.5}), out)
    assert not out.exists()
    with pytest.raises(ConfigError):
        run_experiment(ExperimentSpec("nope"), out)
    with pytest.raises(ConfigError):
        run_experiment(ExperimentSpec("loc_ratio", seed=-1), out)


def test_context_rng_is_seeded_and_tagged(tmp_path):
    spec = ExperimentSpec("loc_ratio", seed=5)
    ctx = RunContext(spec, {}, tmp_path, RunManifest(spec={}))
    a = ctx.rng("x").random(3)
    assert np.array_equal(a, ctx.rng("x").random(3))
    assert not np.array_equal(a, ctx.rng("y").random(3))


def test_context_map_keeps_order(tmp_path):
    spec = ExperimentSpec("loc_ratio", workers=3)
    ctx = RunContext(spec, {}, tmp_path, RunManifest(spec={}))
    assert ctx.map(lambda v: v * v, range(10)) == [v * v for v in range(10)]


def test_failed_and_cancelled_runs_are_marked(tmp_path):
    def boom(ctx, p):
        raise RuntimeError("bad")

    def stop(ctx, p):
        raise KeyboardInterrupt

    for name, fn, exc, status in (("t_boom", boom, RuntimeError, "failed"),
                                  ("t_stop", stop, KeyboardInterrupt, "cancelled")):
        REGISTRY[name] = Experiment(name, "test", {"a": Param(1.0)}, fn)
        try:
            with pytest.raises(exc):
                run_experiment(ExperimentSpec(name), tmp_path / name)
            assert RunManifest.load(tmp_path / name).status == status
        finally:
            del REGISTRY[name]


# ----------------------------------------------------------------------------- quick presets

@pytest.mark.parametrize("name", NAMES)
def test_quick_preset_completes(name, tmp_path):
    man = run_experiment(ExperimentSpec(name, preset="quick"), tmp_path)
    assert man.status == "complete"
    on_disk = RunManifest.load(tmp_path)
    assert on_disk.status == "complete" and on_disk.checksums
    for rel, digest in on_disk.checksums.items():
        assert sha256_file(tmp_path / rel) == digest
    for f in (tmp_path / "fits").glob("*.json"):
        assert "slope" in json.loads(f.read_text())


def test_quick_preset_is_deterministic(tmp_path):
    a = run_experiment(ExperimentSpec("kato_ponce_survey", preset="quick", seed=3), tmp_path / "a")
    b = run_experiment(ExperimentSpec("kato_ponce_survey", preset="quick", seed=3), tmp_path / "b")
    csv = sorted(k for k in a.checksums if k.endswith(".csv"))
    assert csv and all(a.checksums[k] == b.checksums[k] for k in csv)
    c = run_experiment(ExperimentSpec("kato_ponce_survey", preset="quick", seed=4), tmp_path / "c")
    assert any(a.checksums[k] != c.checksums[k] for k in csv)
