import json

import numpy as np
import pytest

from twrn_rd import BadInputFile, binary_symmetric_broadcast, dsbs_source, entropy
from twrn_rd.cli import run
from twrn_rd.io import csv_text, format_value, load_config, load_source, read_csv, save_source, write_json


@pytest.fixture
def files(tmp_path):
    src = tmp_path / "dsbs25.json"
    save_source(src, dsbs_source(0.25))
    ch = tmp_path / "bc.json"
    write_json(ch, binary_symmetric_broadcast(0.1, 0.1, 1.0).to_json_dict())
    return src, ch


def test_format_value():
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(True) == "true"
    assert format_value(float("nan")) == ""
    assert csv_text(["a", "b"], [[1, 0.5]]) == "a,b\n1,0.5\n"


def test_source_round_trip(files):
    s = load_source(files[0])
    assert entropy(s.q_xy) == pytest.approx(entropy(dsbs_source(0.25).q_xy))


def test_bad_json_line_number(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"q_xy": [[0.5, 0.5],\n  oops]}')
    with pytest.raises(BadInputFile, match="line 2"):
        load_source(p)


def test_bad_field(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"q_xy": [[0.5, 0.5], [0, 0]]}))
    with pytest.raises(BadInputFile, match="delta1"):
        load_source(p)


def test_config_precedence(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"tol": 1e-6, "seed": 3}))
    c = load_config(p, {"seed": 4}, env={})
    assert (c.tol, c.seed) == (1e-6, 4)
    c = load_config(p, {"seed": 4}, env={"TWRN_RD_SEED": "9"})
    assert c.seed == 9


def test_help_exit_zero(capsys):
    assert run(["rd", "--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_unknown_command():
    assert run(["frobnicate"]) == 2


def test_invalid_input_exit_two(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert run(["cr", "--source", str(p), "--d1", "0.1", "--d2", "0.1"]) == 2


def test_bounds_row(files, tmp_path):
    out = tmp_path / "b.csv"
    assert run(["bounds", "--source", str(files[0]), "--d1", "0.1", "--d2", "0.1", "--out", str(out)]) == 0
    head, rows = read_csv(out)
    assert head == ["d1", "d2", "r_l", "r_u_dstar", "r_u_star", "r_u", "c_gap", "ordering_ok"]
    assert rows[0][-1] == "true"
    assert (tmp_path / "b.csv.manifest.json").exists()


def test_cr_byte_identical(files, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["cr", "--source", str(files[0]), "--d1", "0.1", "--d1", "0.3", "--d2", "0.1", "--d2", "0.3", "--seed", "5"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_dsbs_figures(tmp_path):
    out = tmp_path / "figs"
    assert run(["dsbs-figures", "--rho", "0.15", "--rho", "0.30", "--rho", "0.40", "--out", str(out) + "/"]) == 0
    assert sorted(p.name for p in out.glob("*.csv")) == ["dsbs_rho_0.15.csv", "dsbs_rho_0.3.csv", "dsbs_rho_0.4.csv"]
    head, rows = read_csv(out / "dsbs_rho_0.3.csv")
    assert head == ["d", "r", "cr_upper", "is_past_dstar"]
    assert len(rows) == 101


def test_rd_and_gaussian(files, capsys):
    assert run(["rd", "--source", str(files[0]), "--solver", "conditional", "--d1", "0.1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "solver,which,d1,d2,rate,converged"
    assert float(out[1].split(",")[4]) == pytest.approx(0.342282, abs=1e-6)
    assert run(["gaussian", "--rho", "0.5", "--d1", "0.25", "--d2", "0.75"]) == 0
    assert float(capsys.readouterr().out.splitlines()[1].split(",")[-1]) == pytest.approx(0.792481, abs=1e-6)


def test_jscc_json(files, tmp_path):
    out = tmp_path / "j.json"
    assert run(["jscc", "--source", str(files[0]), "--channel", str(files[1]), "--d1", "0.1", "--d2", "0.1",
                "--check", "cr", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data[0]["cr_achievable"]["status"] == "feasible"
    assert len(data[0]["cr_achievable"]["witness_pw"]) == 2


def test_oracle_cli(files, tmp_path):
    out = tmp_path / "o.json"
    assert run(["oracle", "--source", str(files[0]), "--objective", "marginal", "--d1", "0.1", "--grid-k", "50",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data[0]["value"] >= 0.531004 - 1e-9


def test_verify_subset(capsys):
    assert run(["verify", "--only", "wyner_identity", "--only", "gaussian"]) == 0
    assert "2/2 checks passed" in capsys.readouterr().out
