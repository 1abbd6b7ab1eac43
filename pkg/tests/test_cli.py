"""CSV/SVG export and command line interface tests."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from eqf import export
from eqf.cli import main
from eqf.sim import FilterTrack, RunRecord, SimConfig, run_experiment

CFG_TOML = (
    'duration_s = 0.5\n'
    'seed = 3\n'
)


def small_record():
    return run_experiment(SimConfig(duration_s=0.5, seed=3), 0)


def test_csv_roundtrip(tmp_path):
    rec = small_record()
    path = tmp_path / "run.csv"
    export.write_csv(path, [rec])
    data = export.read_csv(path)
    n = len(rec.t)
    assert len(data["t"]) == 3 * n
    assert set(data["filter"]) == {"eqf", "eqf-noreset", "ekf"}
    sel = data["filter"] == "eqf"
    # %.17g round-trips doubles exactly
    assert np.array_equal(data["t"][sel], rec.t)
    assert np.array_equal(data["px"][sel], rec.tracks["eqf"].p_est[:, 0])
    assert np.array_equal(data["vz"][sel], rec.tracks["eqf"].v_est[:, 2])
    assert np.array_equal(data["pos_err"][sel], rec.tracks["eqf"].pos_err)
    assert np.array_equal(data["energy"][sel], rec.tracks["eqf"].energy)
    assert np.array_equal(np.unique(data["run"]), [0])


def test_csv_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    export.write_csv(a, [small_record()])
    export.write_csv(b, [small_record()])
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_csv_drops_rows_after_divergence(tmp_path):
    t = np.arange(4) * 0.1
    full = np.ones(4)
    cut = np.array([1.0, 1.0, np.nan, np.nan])
    track = FilterTrack("eqf", np.ones((4, 3)), np.ones((4, 3)),
                        cut, full, full, diverged_at=0.2)
    rec = RunRecord(0, t, {"eqf": track})
    path = tmp_path / "d.csv"
    export.write_csv(path, [rec])
    data = export.read_csv(path)
    assert len(data["t"]) == 2
    assert data["t"].max() == 0.1


def test_csv_rejects_unexpected_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("run,t,filter,px\n", encoding="utf-8")
    with pytest.raises(ValueError, match="header"):
        export.read_csv(path)


def test_svg_well_formed(tmp_path):
    rec = small_record()
    path = tmp_path / "run.svg"
    export.write_svg(path, rec.t, export.run_curves(rec), title="smoke <run>")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    body = path.read_text(encoding="utf-8")
    # one polyline per filter per panel, fixed colors, dashed unit reference
    assert body.count("<polyline") == 9
    for color in ("#000000", "#8a2be2", "#d62728"):
        assert body.count(color) >= 3
    assert "stroke-dasharray" in body
    assert "smoke &lt;run&gt;" in body


def test_svg_tolerates_empty_curves(tmp_path):
    t = np.arange(5) * 0.1
    nanarr = np.full(5, np.nan)
    curves = {"eqf": {"pos_err": nanarr, "vel_err": nanarr, "energy": nanarr}}
    path = tmp_path / "empty.svg"
    export.write_svg(path, t, curves)
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")


def test_cli_simulate(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(CFG_TOML)
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "final pos err" in captured
    data = export.read_csv(out / "run.csv")
    assert set(data["filter"]) == {"eqf", "eqf-noreset", "ekf"}
    ET.parse(out / "run.svg")


def test_cli_simulate_seed_override_is_reproducible(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(CFG_TOML)
    outs = []
    for sub, seed in (("a", "9"), ("b", "9"), ("c", "10")):
        out = tmp_path / sub
        assert main(["simulate", "--config", str(cfg), "--seed", seed,
                     "--out", str(out)]) == 0
        outs.append((out / "run.csv").read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_cli_compare(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(CFG_TOML)
    out = tmp_path / "out"
    rc = main(["compare", "--runs", "2", "--filters", "eqf,ekf",
               "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "settled pos err" in captured
    data = export.read_csv(out / "compare.csv")
    assert set(data["filter"]) == {"eqf", "ekf"}
    assert np.array_equal(np.unique(data["run"]), [0, 1])
    ET.parse(out / "compare.svg")


def test_cli_check(capsys):
    rc = main(["check"])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "checks passed" in captured


def test_cli_rejects_unknown_filter(tmp_path, capsys):
    rc = main(["compare", "--runs", "1", "--filters", "eqf,bogus",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_missing_config(tmp_path, capsys):
    rc = main(["simulate", "--config", str(tmp_path / "nope.toml"),
               "--out", str(tmp_path)])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_cli_reports_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("duration = 1.0\n")
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 2
    assert "duration" in capsys.readouterr().err
