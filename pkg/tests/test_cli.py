import io

import pytest

from displab import cli
from displab.experiments import ExperimentSpec, run_experiment
from displab.experiments.output import RunManifest


def write(p, text):
    p.write_text(text)
    return str(p)


def test_list_prints_every_experiment(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("loc_ratio", "bo_instability", "energy_estimate_check"):
        assert f"{name}:" in out
    assert "    delta = 0.6" in out


def test_list_empty_registry():
    assert cli.cmd_list({}) == ""


def test_run_quick_and_report(tmp_path, capsys):
    out = tmp_path / "loc"
    assert cli.main(["run", "loc_ratio", "--preset", "quick", "--out", str(out)]) == 0
    assert RunManifest.load(out).status == "complete"
    assert (out / "summary.txt").is_file()
    first = {p.name: p.read_bytes() for p in (out / "plots").glob("*.svg")}
    assert first
    assert cli.main(["report", str(out)]) == 0
    again = {p.name: p.read_bytes() for p in (out / "plots").glob("*.svg")}
    assert first == again
    assert "check PASS limit_within_tol" in capsys.readouterr().out


def test_invalid_parameter_exits_2_without_output(tmp_path, capsys):
    cfg = write(tmp_path / "c.toml", 'name = "loc_ratio"\n[params]\ndelta = 1.5\n')
    out = tmp_path / "o"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 2
    assert "params.delta" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("text", ['bogus = 1\n', 'seed = "x"\n', 'params = 3\n', 'name = [\n'])
def test_bad_config_files(tmp_path, text):
    cfg = write(tmp_path / "c.toml", text)
    assert cli.main(["run", "loc_ratio", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_config_name_conflict(tmp_path):
    cfg = write(tmp_path / "c.toml", 'name = "bona_smith"\n')
    assert cli.main(["run", "loc_ratio", "--config", cfg]) == 2


def test_unknown_experiment_and_missing_name():
    assert cli.main(["run", "nope"]) == 2
    assert cli.main(["run"]) == 2


def test_argparse_errors_exit_2():
    assert cli.main(["run", "loc_ratio", "--seed", "-1"]) == 2
    assert cli.main(["run", "loc_ratio", "--budget-mib", "0"]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_strict_failure_exits_3(tmp_path):
    cfg = write(tmp_path / "c.toml", '[params]\nrel_tol = 1e-12\n')
    out = str(tmp_path / "o")
    assert cli.main(["run", "loc_ratio", "--preset", "quick", "--config", cfg, "--out", out]) == 0
    assert cli.main(["run", "loc_ratio", "--preset", "quick", "--config", cfg, "--out", out,
                     "--strict"]) == 3


def test_report_missing_or_corrupt_dir(tmp_path):
    assert cli.main(["report", str(tmp_path / "missing")]) == 2
    (tmp_path / "manifest.json").write_text("[")
    assert cli.main(["report", str(tmp_path)]) == 2


def test_out_root_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("DISPLAB_OUT", str(tmp_path / "env"))
    spec = cli.build_spec("loc_ratio")
    assert spec.out_dir == str(tmp_path / "env" / "loc_ratio")
    cfg = write(tmp_path / "c.toml", f'out_dir = "{tmp_path / "cfg"}"\nseed = 9\n')
    spec = cli.build_spec("loc_ratio", config=cfg)
    assert spec.out_dir == str(tmp_path / "cfg") and spec.seed == 9
    spec = cli.build_spec("loc_ratio", config=cfg, out=str(tmp_path / "cli"), seed=2)
    assert spec.out_dir == str(tmp_path / "cli") and spec.seed == 2
    monkeypatch.delenv("DISPLAB_OUT")
    assert cli.build_spec("loc_ratio").out_dir.endswith("displab-out/loc_ratio")


def test_guard_trip_exits_3(tmp_path, monkeypatch):
    from displab.evolvers import ResolutionError

    def trip(*a, **k):
        raise ResolutionError("tail")

    monkeypatch.setattr(cli, "run_experiment", trip)
    assert cli.cmd_run("loc_ratio", out=str(tmp_path), stream=io.StringIO()) == 3


def test_cancel_exits_130(tmp_path, monkeypatch):
    def stop(*a, **k):
        raise KeyboardInterrupt

    monkeypatch.setattr(cli, "run_experiment", stop)
    assert cli.cmd_run("loc_ratio", out=str(tmp_path), stream=io.StringIO()) == 130
