import json
import math
import os

import pytest

from finehull import cli
from finehull.cantor import spec_from_json


def run(argv, capsys):
    rc = cli.main(argv)
    return rc, capsys.readouterr().out


def test_spec_build_writes_spec_and_summary(tmp_path, capsys):
    out = tmp_path / "cantor"
    rc, stdout = run(["spec-build", "--rule", "affine", "--slope", "5",
                      "--offset", "0", "--depth", "4",
                      "--out", str(out)], capsys)
    assert rc == 0
    spec = spec_from_json((out / "spec.json").read_text())
    assert spec.max_index == 4
    assert spec.gap(1).log_length == -5.0
    build = json.loads((out / "build.json").read_text())
    assert build["condition_sum"]["satisfied"] is True
    assert build["gap_log_lengths"] == [-5.0, -20.0, -45.0, -80.0]
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"spec.json", "build.json"}
    # stdout lists the artifact paths
    assert "spec.json" in stdout


def _spec_path(tmp_path, capsys, depth=8):
    out = tmp_path / "spec"
    rc, _ = run(["spec-build", "--rule", "affine", "--slope", "5",
                 "--offset", "0", "--depth", str(depth),
                 "--out", str(out)], capsys)
    assert rc == 0
    return str(out / "spec.json")


def test_eval_product(tmp_path, capsys):
    spec = _spec_path(tmp_path, capsys)
    out = tmp_path / "eval"
    rc, _ = run(["eval", "--spec", spec, "--at", "2,0",
                 "--out", str(out)], capsys)
    assert rc == 0
    header, row = (out / "eval.csv").read_text().splitlines()
    vals = dict(zip(header.split(","), row.split(",")))
    assert math.exp(float(vals["log_mag"])) == \
        pytest.approx(0.5022510389541788, rel=1e-10)
    assert float(vals["err"]) <= 1e-12


def test_eval_pole_maps_to_exit_code_one(tmp_path, capsys):
    spec = _spec_path(tmp_path, capsys)
    rc, stdout = run(["eval", "--spec", spec, "--at", "0,0",
                      "--out", str(tmp_path / "pole")], capsys)
    assert rc == 1
    payload = json.loads(stdout.strip().splitlines()[-1])
    assert payload["error"] == "pole_hit"


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text('{"depht": 4}')
    rc, stdout = run(["spec-build", "--config", str(cfgfile),
                      "--out", str(tmp_path / "x")], capsys)
    assert rc == 1
    assert "depht" in stdout


def test_env_overrides_defaults_and_flags_override_env(tmp_path, capsys,
                                                       monkeypatch):
    monkeypatch.setenv("FINEHULL_DEPTH", "3")
    spec = _spec_path(tmp_path, capsys, depth=5)  # flag wins
    assert spec_from_json(open(spec).read()).max_index == 5
    out = tmp_path / "envonly"
    rc, _ = run(["spec-build", "--rule", "affine", "--slope", "5",
                 "--offset", "0", "--out", str(out)], capsys)
    assert rc == 0
    assert spec_from_json((out / "spec.json").read_text()).max_index == 3


def test_threads_and_out_never_reach_the_manifest(tmp_path, capsys):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out, threads in ((a, "1"), (b, "7")):
        rc, _ = run(["spec-build", "--rule", "factorial", "--depth", "6",
                     "--threads", threads, "--out", str(out)], capsys)
        assert rc == 0
    assert (a / "manifest.json").read_bytes() == \
        (b / "manifest.json").read_bytes()
    assert (a / "spec.json").read_bytes() == (b / "spec.json").read_bytes()


def test_capacity_fine_sets(tmp_path, capsys):
    spec = _spec_path(tmp_path, capsys)
    setfile = tmp_path / "set.json"
    setfile.write_text(json.dumps(
        {"spec": json.loads(open(spec).read()), "N": 2}))
    out = tmp_path / "cap"
    rc, _ = run(["capacity", "--set", str(setfile), "--out", str(out)],
                capsys)
    assert rc == 0
    cap = json.loads((out / "capacity.json").read_text())
    assert cap["chain_closes"] is True
    assert cap["fn_bound"] < cap["cap_ambient_floor"]


def test_green_on_shapes(tmp_path, capsys):
    setfile = tmp_path / "shapes.json"
    setfile.write_text(json.dumps(
        {"shapes": [{"kind": "interval", "a": 0.0, "b": 1.0}]}))
    out = tmp_path / "green"
    rc, _ = run(["green", "--set", str(setfile), "--at", "3,0",
                 "--n", "64", "--out", str(out)], capsys)
    assert rc == 0
    g = json.loads((out / "green.json").read_text())
    assert g["value"] > 0.0
    assert abs(g["cap_estimate"] - 0.25) / 0.25 < 0.05
    rows = (out / "leja.csv").read_text().splitlines()
    assert len(rows) == 65  # header plus one row per point


def test_sample_e(tmp_path, capsys):
    spec = _spec_path(tmp_path, capsys)
    out = tmp_path / "esample"
    rc, _ = run(["sample-e", "--spec", spec, "--depth", "6",
                 "--out", str(out)], capsys)
    assert rc == 0
    rows = (out / "esample.csv").read_text().splitlines()[1:]
    assert len(rows) == 10
    flags = [r.split(",")[2] for r in rows]
    assert flags.count("1") == 5


def test_hull_scan(tmp_path, capsys):
    out = tmp_path / "spec"
    run(["spec-build", "--rule", "factorial", "--depth", "12",
         "--out", str(out)], capsys)
    scan = tmp_path / "scan"
    rc, _ = run(["hull-scan", "--spec", str(out / "spec.json"),
                 "--z", "2,0", "--wrect=-1.5,1.5,-1.5,1.5", "--res", "64",
                 "--sq", "--depth", "6", "--out", str(scan)], capsys)
    assert rc == 0
    report = json.loads((scan / "dips.json").read_text())
    assert len(report["dips"]) == 2
    grid_lines = (scan / "grid.csv").read_text().splitlines()
    assert len(grid_lines) == 64 * 64 + 1


def test_blaschke_command(tmp_path, capsys):
    setfile = tmp_path / "disk.json"
    setfile.write_text(json.dumps({
        "alpha": 0.0, "beta": 1.5707963267948966,
        "c_rule": {"kind": "affine", "slope": 5.0, "offset": 0.0},
        "N": 12,
    }))
    out = tmp_path / "disk"
    rc, _ = run(["blaschke", "--spec", str(setfile), "--at", "0.3,0.2",
                 "--sheets=-3,3", "--sample-depth", "1", "--samples", "8",
                 "--out", str(out)], capsys)
    assert rc == 0
    sheets = json.loads((out / "sheets.json").read_text())
    assert len(sheets["sheets"]) == 7
    rows = (out / "bsample.csv").read_text().splitlines()[1:]
    assert len(rows) == 8


def test_outputs_are_deterministic(tmp_path, capsys):
    digests = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc, _ = run(["spec-build", "--rule", "affine", "--slope", "2",
                     "--offset", "1", "--depth", "10", "--out", str(out)],
                    capsys)
        assert rc == 0
        digests.append((out / "manifest.json").read_bytes())
    assert digests[0] == digests[1]
