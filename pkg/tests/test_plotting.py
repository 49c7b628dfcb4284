from displab import plotting
from displab.experiments.fitting import fit_power_law
from displab.experiments.output import RunManifest, write_series, write_fit, prepare_out_dir


def make_run(root, with_data=True):
    prepare_out_dir(root)
    man = RunManifest(spec={"name": "demo", "preset": "default"}, status="complete")
    if with_data:
        write_series(root / "series" / "s.csv", {"lam": [1, 2, 4, 8], "err": [1, 0.5, 0.25, 0.125],
                                                 "reference": [1, 1, 1, 1]})
        f = fit_power_law([1, 2, 4, 8], [1, 0.5, 0.25, 0.125], -1.0)
        write_fit(root / "fits" / "err.json", f)
        man.fits["err"] = f.passed
        man.checks["ok"] = True
    man.plots.append(dict(file="p.svg", series="s", x="lam", ys=["err", "reference"],
                          kind="loglog", title="t", fit="err"))
    man.write(root)
    return man


def test_render_and_summary(tmp_path):
    make_run(tmp_path)
    status = plotting.render_all(tmp_path)
    assert status == {"p.svg": "ok"}
    svg = (tmp_path / "plots" / "p.svg").read_text()
    assert svg.startswith("<?xml") and "<path" in svg
    text = plotting.summary_text(tmp_path, status)
    assert "check PASS ok" in text
    assert "fit   PASS err: slope -1 (predicted -1, match tol 0.2)" in text
    assert "plots/p.svg (ok)" in text


def test_render_is_byte_identical(tmp_path):
    make_run(tmp_path)
    plotting.render_all(tmp_path)
    a = (tmp_path / "plots" / "p.svg").read_bytes()
    plotting.render_all(tmp_path)
    assert (tmp_path / "plots" / "p.svg").read_bytes() == a


def test_missing_series_renders_no_data(tmp_path):
    make_run(tmp_path, with_data=False)
    status = plotting.render_all(tmp_path)
    assert status == {"p.svg": "no data"}
    assert (tmp_path / "plots" / "p.svg").is_file()
    assert "plots/p.svg (no data)" in plotting.summary_text(tmp_path, status)


def test_empty_manifest_summary(tmp_path):
    prepare_out_dir(tmp_path)
    RunManifest(spec={"name": "demo"}).write(tmp_path)
    assert plotting.render_all(tmp_path) == {}
    assert "no data" in plotting.summary_text(tmp_path)
