import json
import subprocess
import sys

import pytest

from lpnorm.cli import main, parse_grid, to_json
from lpnorm.errors import ParameterError
from lpnorm.linear_normal_form import MU_C0


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_stability_example(capsys):
    code, out, _ = run(capsys, "stability", "--mu", "0.01")
    data = json.loads(out)
    assert code == 0
    assert data["mu_crit"] == 0.0385208965045513718
    assert data["stable"] is True
    assert "0.038520896504551372" in out


def test_stability_unstable_has_null_frequencies(capsys):
    code, out, _ = run(capsys, "stability", "--mu", "0.1")
    data = json.loads(out)
    assert code == 0 and data["stable"] is False and data["omega1"] is None


def test_sweep_example(capsys, monkeypatch):
    monkeypatch.setenv("LPNORM_THREADS", "4")
    code, out, _ = run(capsys, "sweep", "--mu-grid", "0.001:0.05:50", "--A2", "0.001")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 51
    assert lines[0] == "mu,epsilon,A2,W1,mu_crit,D,stable,margin"
    rows = [line.split(",") for line in lines[1:]]
    mus = [float(r[0]) for r in rows]
    assert mus == sorted(mus)
    for r in rows:
        assert float(r[4]) - MU_C0 == pytest.approx(2.1038871010983331e-3, abs=1e-17)


def test_sweep_order_independent_of_threads(capsys, monkeypatch):
    outs = []
    for n in ("1", "8"):
        monkeypatch.setenv("LPNORM_THREADS", n)
        outs.append(run(capsys, "sweep", "--mu-grid", "0.001:0.04:20", "--A2-grid", "0:0.01:3")[1])
    assert outs[0] == outs[1]
    assert len(outs[0].splitlines()) == 61


def test_sweep_bad_threads(capsys, monkeypatch):
    monkeypatch.setenv("LPNORM_THREADS", "zero")
    assert run(capsys, "sweep", "--mu-grid", "0.01:0.02:2")[0] == 2


def test_parse_grid():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("0.2:0.4:1") == [0.2]
    for bad in ("0:1", "a:b:c", "0:1:0"):
        with pytest.raises(ParameterError):
            parse_grid(bad)


def test_equilibria(capsys):
    code, out, _ = run(capsys, "equilibria", "--mu", "0.1", "--branch", "L5", "--method", "series")
    data = json.loads(out)
    assert code == 0 and data["branch"] == "L5" and data["y"] < 0
    assert set(data) == {"branch", "method", "x", "y", "residual_Ux", "residual_Uy"}


def test_invalid_parameter_exit_2(capsys):
    code, _, err = run(capsys, "stability", "--mu", "0.7")
    assert code == 2 and "mu" in err


def test_missing_mu_exit_2(capsys):
    assert run(capsys, "stability")[0] == 2


def test_library_error_exit_1(capsys):
    # above the critical mass the normal form does not exist
    assert run(capsys, "normal-form", "--mu", "0.1")[0] == 1


def test_config_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mu": 0.02, "A2": 0.01}))
    data = json.loads(run(capsys, "stability", "--config", str(cfg), "--A2", "0")[1])
    assert data["mu"] == 0.02 and data["A2"] == 0.0


def test_bad_config_exit_2(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("[1, 2]")
    assert run(capsys, "stability", "--config", str(cfg))[0] == 2
    assert run(capsys, "stability", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_output_file(capsys, tmp_path):
    path = tmp_path / "s.json"
    code, out, _ = run(capsys, "stability", "--mu", "0.01", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["stable"] is True


def test_expand(capsys):
    data = json.loads(run(capsys, "expand", "--mu", "0.01")[1])
    assert {"E", "F", "G", "T1", "T2", "T3", "T4", "T5_coeffs", "oracle", "max_rel_diff"} <= set(data)
    assert data["oracle"]["E"] == pytest.approx(0.125, abs=1e-8)


def test_normal_form(capsys):
    data = json.loads(run(capsys, "normal-form", "--mu", "0.01")[1])
    assert data["residual"] <= 1e-10
    assert data["moser"]["satisfied"] is True and data["moser"]["witness"] == [1, -3]


def test_birkhoff_routes_and_dump(capsys, tmp_path):
    closed = json.loads(run(capsys, "birkhoff", "--mu", "0.01", "--route", "closed")[1])
    assert len(closed["r"]) == 10 and closed["discrepancies"] == []
    both = json.loads(run(capsys, "birkhoff", "--mu", "0.01", "--dump-series", str(tmp_path))[1])
    assert len(both["discrepancies"]) == 20
    assert both["h3"]["relative"] == 0.0
    assert (tmp_path / "B2_x_generic.txt").read_text().count("\n") == 10


def test_simulate(capsys, tmp_path):
    path = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "simulate", "--mu", "0.01", "--x0", "0.4901", "--t-end", "200",
                     "--dt-out", "0.1", "--output", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,y,vx,vy" and len(lines) == 2002
    spectrum = json.loads((tmp_path / "traj.csv.spectrum.json").read_text())
    assert sorted(v["frequency"] for v in spectrum["x"]) == pytest.approx([0.26835, 0.96332], abs=2e-3)


def test_to_json_formatting():
    assert to_json({"a": 0.1, "b": [1, None, True], "c": float("nan")}) == (
        '{"a": 0.10000000000000001, "b": [1, null, true], "c": null}'
    )


def test_deterministic_output(capsys):
    a = run(capsys, "birkhoff", "--mu", "0.02")[1]
    b = run(capsys, "birkhoff", "--mu", "0.02")[1]
    assert a == b


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "lpnorm.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("equilibria", "stability", "sweep", "expand", "normal-form", "birkhoff", "simulate", "verify"):
        assert sub in res.stdout


@pytest.mark.xfail(strict=True, reason="criterion 8 closed-vs-generic fails at the classical point; see ledger")
def test_verify_classical_exit_zero(capsys):
    assert run(capsys, "verify", "--suite", "classical")[0] == 0
