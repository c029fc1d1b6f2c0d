import csv
import json

import pytest

from fracflow.cli import EXIT_BLOWUP, EXIT_OK, EXIT_USAGE, main
from fracflow.config import DEFAULTS, initial_field, parse_config, read_config_file
from fracflow.torus import GridSpec


def test_defaults(tmp_path):
    cfg = parse_config(overrides={"out_dir": str(tmp_path)})
    assert (cfg.grid.dim, cfg.grid.points_per_axis) == (1, 256)
    assert cfg.holder_metadata == (0.5, 0.6, 0.9)
    assert cfg.scheme.lattice_cells == 4 and not cfg.nonconforming
    assert DEFAULTS["seed"] == cfg.seed


def test_rejections():
    with pytest.raises(ValueError, match="order out of range"):
        parse_config(overrides={"alpha": 1.2})
    with pytest.raises(ValueError):
        parse_config(overrides={"grid": 33})
    with pytest.raises(ValueError):
        parse_config(overrides={"bogus": 1})


def test_nonconforming_is_flagged_not_blocked():
    cfg = parse_config(overrides={"beta": 0.3})
    assert cfg.nonconforming


def test_config_file_and_resolved_round_trip(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\nalpha = 0.25\ngrid = 64\nu0 = 0.1 2:0.05\n")
    cfg = parse_config(f, {"out_dir": str(tmp_path / "out")})
    assert cfg.params.alpha == 0.25 and cfg.grid.points_per_axis == 64
    path = cfg.write_resolved()
    again = parse_config(path)
    assert again.resolved_lines() == cfg.resolved_lines()
    assert read_config_file(path)["quadrature.lattice_cells"] == "4"


def test_initial_field_specs(tmp_path):
    g = GridSpec(2, 16)
    u = initial_field("0.5 1,0:0.1 0,2:0.2:0.3", g, 0)
    assert u.values.mean() == pytest.approx(0.5)
    assert initial_field("random:0.1", g, 3).values.shape == g.shape
    with pytest.raises(ValueError):
        initial_field("1:0.1", g, 0)
    with pytest.raises(ValueError):
        initial_field("9,0:0.1", g, 0)


def test_symbol_both(tmp_path, capsys):
    assert main(["symbol", "--band", "6", "--out-dir", str(tmp_path)]) == EXIT_OK
    rows = list(csv.reader(open(tmp_path / "symbol.csv")))
    assert rows[0] == ["k0", "m_direct", "m_polar"] and len(rows) == 7
    for r in rows[1:]:
        assert float(r[1]) == pytest.approx(float(r[2]), rel=1e-8)
    assert (tmp_path / "config.resolved").exists()
    assert open(tmp_path / "symbol.csv").read().endswith("\n")


def test_curvature(tmp_path):
    assert main(["curvature", "--grid", "32", "--u0", "1:0.2", "--out-dir", str(tmp_path)]) == EXIT_OK
    summary = json.loads((tmp_path / "curvature.json").read_text())
    assert summary["max_form_difference"] < 1e-8


def test_simulate_completed(tmp_path):
    code = main(["simulate", "--grid", "32", "--u0", "0.5 2:0.01", "--dt", "1e-3", "--t-end", "0.2",
                 "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    rows = list(csv.reader(open(tmp_path / "trace.csv")))
    assert rows[0] == ["t", "sup_u", "sup_du_dx0", "sup_du_dt", "mean"] and len(rows) == 202
    assert list(tmp_path.glob("snapshot_*.txt"))


def test_simulate_blowup(tmp_path):
    code = main(["simulate", "--grid", "32", "--u0", "1:50", "--scheme", "explicit_rk2", "--dt", "0.05",
                 "--t-end", "5", "--out-dir", str(tmp_path)])
    assert code == EXIT_BLOWUP


def test_usage_errors(tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["simulate", "--alpha", "1.2", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    assert main(["verify", "--suite", "nope", "--out-dir", str(tmp_path)]) == EXIT_USAGE


def test_verify_single_check(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "homogeneity", "--json", str(out), "--out-dir", str(tmp_path)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data[0]["name"] == "homogeneity" and data[0]["status"] == "pass"


def test_threads_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACFLOW_THREADS", "2")
    assert main(["symbol", "--band", "2", "--threads", "1", "--out-dir", str(tmp_path)]) == EXIT_OK
