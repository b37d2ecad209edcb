import csv
import math

import numpy as np
import pytest
import yaml

from hgmimo.cli import main, optimize_report, parse_length, parse_pair
from hgmimo.errors import ConfigError
from hgmimo.linkmetrics import read_grid

DESK = {
    "distance_m": 2.0,
    "tx_array": {"nx": 8, "ny": 8},
    "rx_array": {"nx": 8, "ny": 8},
    "modes": {"l_max": 2, "m_max": 2},
    "sweep_tilts_deg": [[0, 0], [15, 0]],
    "grid": {"points": 41},
}


@pytest.fixture
def desk(tmp_path):
    p = tmp_path / "desk.yaml"
    p.write_text(yaml.safe_dump(DESK))
    return p


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_optimize_output(capsys):
    code, out, _ = _run(capsys, "optimize", "1mm", "20m")
    assert code == 0
    fields = {line.split()[0]: float(line.split()[1]) for line in out.splitlines()}
    assert fields["w0_opt"] == pytest.approx(0.0564, abs=5e-4)
    assert fields["w_edge"] == pytest.approx(0.0798, abs=5e-4)
    assert fields["rayleigh_dist"] == pytest.approx(10.0)
    assert fields["half_size_36"] == pytest.approx(0.1756, abs=5e-4)


def test_optimize_square_root_law():
    a = optimize_report(1e-3, 20.0)
    b = optimize_report(4e-3, 20.0)
    assert b["w0_m"] == pytest.approx(2 * a["w0_m"], rel=1e-12)
    assert 2 * a["half_size_m"] == pytest.approx(0.35, abs=0.005)


@pytest.mark.parametrize("text, value", [("1mm", 1e-3), ("20m", 20.0), ("0.35", 0.35), ("2.5 cm", 0.025),
                                         ("1e-3m", 1e-3), ("3um", 3e-6)])
def test_parse_length(text, value):
    assert parse_length(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["1 furlong", "mm", "-1mm", "0m", "abc"])
def test_parse_length_rejects(text):
    with pytest.raises(ConfigError):
        parse_length(text)


def test_parse_pair():
    assert parse_pair("30,-15") == [30.0, -15.0]
    with pytest.raises(ConfigError):
        parse_pair("30")


def test_optimize_bad_input(capsys):
    code, _, err = _run(capsys, "optimize", "0mm", "20m")
    assert code != 0 and err.startswith("ConfigError: length:")


def test_simulate_writes_layout(desk, tmp_path, capsys):
    out = tmp_path / "run"
    code, stdout, _ = _run(capsys, "simulate", "--config", desk, "--out", out)
    assert code == 0
    assert {p.name for p in out.iterdir()} >= {"summary.txt", "streams.csv", "config.yaml"}
    rows = list(csv.DictReader((out / "streams.csv").open()))
    assert len(rows) == 2 * 9 and {r["scheme"] for r in rows} == {"hg-direct", "svd"}
    assert "svd - hg-direct" in (out / "summary.txt").read_text()
    assert "bps/Hz" in stdout


def test_simulate_deterministic_and_config_round_trip(desk, tmp_path, capsys):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    _run(capsys, "simulate", "--config", desk, "--out", a, "--tilt", "10,5")
    _run(capsys, "simulate", "--config", desk, "--out", b, "--tilt", "10,5")
    assert (a / "streams.csv").read_bytes() == (b / "streams.csv").read_bytes()
    assert (a / "summary.txt").read_bytes() == (b / "summary.txt").read_bytes()
    echoed = yaml.safe_load((a / "config.yaml").read_text())
    assert echoed["tilt_deg"] == [10.0, 5.0]
    echoed["output_dir"] = str(c)
    (tmp_path / "echo.yaml").write_text(yaml.safe_dump(echoed))
    _run(capsys, "simulate", "--config", tmp_path / "echo.yaml")
    assert (c / "streams.csv").read_bytes() == (a / "streams.csv").read_bytes()


def test_simulate_single_mode_capped(tmp_path, capsys):
    cfg = dict(DESK, modes={"explicit": [[0, 0]]}, tx_power_dbm=40.0)
    p = tmp_path / "one.yaml"
    p.write_text(yaml.safe_dump(cfg))
    code, _, _ = _run(capsys, "simulate", "--config", p, "--out", tmp_path / "o", "--scheme", "hg")
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "o" / "streams.csv").open()))
    assert len(rows) == 1 and float(rows[0]["se"]) == pytest.approx(5.5547)


def test_simulate_cross_pol(desk, tmp_path, capsys):
    code, _, _ = _run(capsys, "simulate", "--config", desk, "--pol", "cross", "--scheme", "svd",
                      "--out", tmp_path / "x")
    rows = list(csv.DictReader((tmp_path / "x" / "streams.csv").open()))
    assert code == 0 and len(rows) == 18 and {r["polarization"] for r in rows} == {"+", "-"}


def test_steer_sweep_matches_simulate(desk, tmp_path, capsys):
    _run(capsys, "simulate", "--config", desk, "--out", tmp_path / "s")
    code, _, _ = _run(capsys, "steer-sweep", "--config", desk, "--out", tmp_path / "w")
    assert code == 0
    sweep = list(csv.DictReader((tmp_path / "w" / "sweep.csv").open()))
    assert len(sweep) == 2 * 2 * 2  # tilts x polarizations x schemes
    streams = list(csv.DictReader((tmp_path / "s" / "streams.csv").open()))
    for scheme in ("hg-direct", "svd"):
        total = math.fsum(float(r["se"]) for r in streams if r["scheme"] == scheme)
        row = next(r for r in sweep if r["scheme"] == scheme and r["polarization"] == "unidirectional"
                   and float(r["theta_x_deg"]) == 0 and float(r["theta_y_deg"]) == 0)
        assert float(row["total_se"]) == pytest.approx(total, abs=1e-9)
        assert float(row["throughput_bps"]) == pytest.approx(float(row["total_se"]) * 2e9, rel=1e-9)


def test_steer_sweep_tilt_override(desk, tmp_path, capsys):
    code, _, _ = _run(capsys, "steer-sweep", "--config", desk, "--out", tmp_path / "w", "--pol", "uni",
                      "--scheme", "hg", "--tilts", "0,0", "5,5", "20,0")
    sweep = list(csv.DictReader((tmp_path / "w" / "sweep.csv").open()))
    assert code == 0 and [(r["theta_x_deg"], r["theta_y_deg"]) for r in sweep] == [("0", "0"), ("5", "5"), ("20", "0")]


def test_profile_tx_nodal_line(desk, tmp_path, capsys):
    code, _, _ = _run(capsys, "profile", "--config", desk, "--out", tmp_path / "p", "--mode", "1,0")
    assert code == 0
    g = read_grid(tmp_path / "p" / "grids" / "tx_profile.grid")
    x, _ = g.axes()
    assert g.values[np.argmin(np.abs(x))].max() < 1e-6 * g.values.max()
    assert g.shape == (41, 41) and g.units == "w"


def test_profile_rx_plane(desk, tmp_path, capsys):
    code, _, _ = _run(capsys, "profile", "--config", desk, "--out", tmp_path / "p", "--plane", "rx",
                      "--mode", "2,2")
    assert code == 0
    s = read_grid(tmp_path / "p" / "grids" / "rx_sampled.grid")
    a = read_grid(tmp_path / "p" / "grids" / "rx_analytic.grid")
    assert s.shape == a.shape == (17, 17) and s.units == "m"
    # smoke bound: the 17 x 17 desk array spans only +-1.6 w, so (2, 2) is clipped
    corr = np.corrcoef(s.values.ravel(), a.values.ravel())[0, 1]
    assert corr > 0.8


def test_capture_sweep_command(desk, tmp_path, capsys):
    code, _, _ = _run(capsys, "capture-sweep", "--config", desk, "--out", tmp_path / "c", "--s-min", "1",
                      "--s-max", "2.2", "--s-step", "0.6")
    rows = list(csv.DictReader((tmp_path / "c" / "capture.csv").open()))
    assert code == 0 and len(rows) == 6 * 3
    first = next(r for r in rows if r["l"] == "0" and float(r["s_over_w"]) == 1.0)
    assert float(first["efficiency"]) == pytest.approx(0.911, abs=1e-3)


def test_invalid_config_reports_field(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("distance_m: -3\n")
    code, _, err = _run(capsys, "simulate", "--config", p, "--out", tmp_path / "o")
    assert code == 2
    assert err.strip().startswith("ConfigError: distance_m:")


def test_config_and_preset_conflict(desk, capsys):
    code, _, err = _run(capsys, "simulate", "--config", desk, "--preset", "table1")
    assert code == 2 and "ConfigError" in err


def test_backside_tilt_warns(desk, tmp_path, capsys):
    code, _, err = _run(capsys, "profile", "--config", desk, "--out", tmp_path / "p", "--tilt", "95,0",
                        "--mode", "0,0")
    assert code == 0 and "warning" in err


def test_argparse_rejects_unknown_scheme(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scheme", "zf"])
    assert exc.value.code != 0
