import csv
import io
import json

import numpy as np
import pytest

from pmcsurf.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_cylinder_roulette_column_constant(capsys):
    code, out, err = _run(capsys, "roulette", "--a", "-0.5", "--tmax", "6.28", "--n", "100")
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 100
    assert {r["x"] for r in rows} == {"0.5"}
    record = json.loads(err)
    assert record["schema"] == "pmcsurf.run/1"
    assert record["seed"] == 42
    assert "numpy" in record["versions"] and "elliptic_backend" in record["versions"]


def test_degeneracy_csv(capsys):
    from pmcsurf.degeneracy import find_T0
    from pmcsurf.delaunay import make_param
    code, out, _ = _run(capsys, "degeneracy", "--a", "0.3", "--Tmax", "5")
    assert code == 0
    rows = _rows(out)
    tau = make_param(0.3).tau
    zeros = [r for r in rows if r["j"] == "0"]
    halves = [r for r in rows if r["j"] == "1"]
    assert zeros and halves
    for r in zeros:
        k = int(r["k"])
        T = float(r["T"])
        assert T == find_T0(0.3, k)
        assert float(r["bracket_lo"]) == pytest.approx(k * tau) and float(r["bracket_hi"]) == pytest.approx((k + .5) * tau)
        assert float(r["bracket_lo"]) < T < float(r["bracket_hi"])
    for r in halves:
        assert float(r["T"]) == pytest.approx((int(r["k"]) + 0.5) * tau, abs=1e-12)
        assert float(r["residual"]) < 1e-9


def test_unknown_flag_exits_64(capsys):
    code, _, err = _run(capsys, "roulette", "--a", "-0.5", "--tmax", "1", "--bogus")
    assert code == 64
    assert "usage:" in err


def test_missing_subcommand_exits_64(capsys):
    assert _run(capsys)[0] == 64
    assert _run(capsys, "frobnicate")[0] == 64


def test_domain_error_exits_1(capsys):
    code, _, err = _run(capsys, "roulette", "--a", "-1.5", "--tmax", "1")
    assert code == 1
    assert "domain error" in err


def test_obstruction_exits_1_with_diagnostic(capsys):
    code, _, err = _run(capsys, "solve", "--a", "-0.5", "--T0-index", "0", "--field", "1 + eps", "--eps", "1e-3",
                        "--mode", "nondegenerate", "--n-t", "64", "--n-theta", "8")
    assert code == 1
    diag = json.loads(err)
    assert diag["error"] == "obstruction"
    assert diag["obstruction"] == pytest.approx(-np.pi, abs=1e-6)


def test_bad_field_exits_1(capsys):
    code, _, err = _run(capsys, "solve", "--a", "-0.3", "--T", "1", "--field", "1 + eps*(x", "--eps", "1e-3")
    assert code == 1
    assert "position" in err


def test_solve_json_and_mesh(tmp_path, capsys):
    out, mesh = tmp_path / "sol.json", tmp_path / "sol.obj"
    code, _, _ = _run(capsys, "solve", "--a", "-0.5", "--T", "1.0", "--field", "1 + eps*cos(z)", "--eps", "1e-3",
                      "--n-t", "64", "--n-theta", "8", "--out", str(out), "--mesh-out", str(mesh))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["schema"] == "pmcsurf.solution/1"
    (sol,) = data["solutions"]
    assert sol["mode"] == "nondegenerate" and sol["residual_inf"] < 1e-10
    assert mesh.exists()
    prov = json.loads((tmp_path / "sol.json.provenance.json").read_text())
    assert prov["tolerances"]["newton_tol"] == 1e-10


def test_eps_sweep_sorted(capsys):
    code, out, _ = _run(capsys, "solve", "--a", "-0.5", "--T", "1.0", "--field", "1 + eps*cos(z)",
                        "--eps-list", "1e-3,1e-4", "--n-t", "64", "--n-theta", "8")
    assert code == 0
    assert [s["eps"] for s in json.loads(out)["solutions"]] == [1e-4, 1e-3]


def test_auto_mode_picks_lyapunov_schmidt(capsys):
    code, out, _ = _run(capsys, "solve", "--a", "0.3", "--T1-index", "0", "--field", "1 + eps*(x^2 + y^2)",
                        "--eps", "1e-3", "--p", "0.3", "--n-t", "128", "--n-theta", "16")
    assert code == 0
    assert json.loads(out)["solutions"][0]["mode"] == "lyapunov-schmidt"


def test_outputs_are_bit_identical(tmp_path, capsys):
    args = ["melnikov", "--a", "0.3", "--T1-index", "0", "--field", "1 + eps*(x^2 + y^2)",
            "--p-range=-0.2,0.2,3", "--q-range=-0.2,0.2,3"]
    texts = []
    for k in range(2):
        out = tmp_path / f"m{k}.csv"
        assert run(args + ["--out", str(out)]) == 0
        texts.append((out.read_bytes(), (tmp_path / f"m{k}.csv.provenance.json").read_text()))
    assert texts[0][0] == texts[1][0]
    # output paths are kept out of the provenance inputs, so the records match exactly
    assert texts[0][1] == texts[1][1]
    prov = [json.loads(texts[0][1])]
    crit = prov[0]["outputs"]["critical_points"]
    assert any(abs(c["p"]) < 1e-8 and abs(c["q"]) < 1e-8 for c in crit)


def test_workers_do_not_change_output(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "2"):
        monkeypatch.setenv("PMC_THREADS", threads)
        out = tmp_path / f"d{threads}.csv"
        assert run(["degeneracy", "--a-list=0.3,-0.2,1.0", "--Tmax", "4", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    a_col = [line.split(b",")[0] for line in outs[0].splitlines()[1:]]
    assert a_col == sorted(a_col, key=float)


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 5, "tmax": 2.0}))
    code, out, _ = _run(capsys, "roulette", "--a", "-0.5", "--tmax", "1", "--n", "50", "--config", str(cfg))
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 5 and rows[-1]["t"] == "2.0"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert _run(capsys, "roulette", "--a", "-0.5", "--tmax", "1", "--config", str(cfg))[0] == 64


def test_monte_carlo_seed_recorded(tmp_path, capsys):
    prov = tmp_path / "p.json"
    code, _, _ = _run(capsys, "melnikov", "--a", "-0.3", "--T", "1.0", "--field", "1 + eps",
                      "--p-range=0,0,1", "--q-range=0,0,1", "--volume-oracle", "--seed", "7",
                      "--provenance", str(prov))
    assert code == 0
    record = json.loads(prov.read_text())
    assert record["seed"] == 7
    assert record["outputs"]["monte_carlo_volume"]["seed"] == 7


def test_mesh_subcommand(tmp_path, capsys):
    out = tmp_path / "x.obj"
    assert _run(capsys, "mesh", "--a", "0.5", "--T", "1", "--n-t", "8", "--n-theta", "8", "--out", str(out))[0] == 0
    assert out.read_text().count("\nf ") == 128
    assert _run(capsys, "mesh", "--a", "0.5", "--T", "1")[0] == 64


def test_verify_subset(capsys):
    code, out, _ = _run(capsys, "verify", "--only", "1,11")
    assert code == 0
    assert out.count("[PASS]") == 2
    assert "2/2 criteria passed" in out
