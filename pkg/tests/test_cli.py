import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from tscomplex.cli import derive_seed, main
from tscomplex.core import StateVector, ghz_state, w_state
from tscomplex.gf2 import BitMatrix
from tscomplex.mbqc import dense_project, x_basis, MeasurementStep
from tscomplex.tree import build_ghz, evaluate, parse_tree, serialize_tree


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return rc, out


def run_json(capsys, *argv):
    rc, out = run(capsys, *argv)
    assert rc == 0, out
    return json.loads(out)


@pytest.fixture
def files(tmp_path):
    w = tmp_path / "w3.json"
    w_state(3).save(w)
    g = tmp_path / "ghz3.json"
    ghz_state(3).save(g)
    m = tmp_path / "a.txt"
    BitMatrix.from_text("1010\n0101").save(m)
    t = tmp_path / "ghz3.tree"
    t.write_text(serialize_tree(build_ghz(3)))
    return {"w": w, "ghz": g, "matrix": m, "tree": t, "dir": tmp_path}


def test_derive_seed_stable():
    assert derive_seed(0, "raz", 0) == derive_seed(0, "raz", 0)
    assert derive_seed(0, "raz", 0) != derive_seed(0, "raz", 1)
    assert 0 <= derive_seed(7, "x", 3) < 2**63


def test_ts_fewqubit(capsys, files):
    out = run_json(capsys, "ts-fewqubit", "--state", files["w"])
    assert out["class"] == "W" and out["ts"] == 8
    assert out["provenance"]["config"]["command"] == "ts-fewqubit"
    out = run_json(capsys, "ts-fewqubit", "--state", files["ghz"], "--fit")
    assert out["ts"] == 6 and out["fit"]["residual"] < 1e-8 and out["fit"]["size"] == 6


def test_ts_fewqubit_wrong_size(capsys, tmp_path):
    p = tmp_path / "s.json"
    ghz_state(4).save(p)
    rc, out = run(capsys, "ts-fewqubit", "--state", p)
    assert rc == 1 and json.loads(out)["error"] == "CliError"


def test_tree_commands(capsys, files):
    out = run_json(capsys, "tree", "size", "--file", files["tree"])
    assert out["size"] == 6
    out = run_json(capsys, "tree", "eval", "--text", "(x [q1 1 0] [q2 0 1])")
    assert StateVector.from_json(out["state"]).allclose(StateVector.basis("01"))
    out = run_json(capsys, "tree", "parse", "--text", "(+ [q1 1 0] [q1 0 1])")
    assert parse_tree(out["tree"]) is not None and out["size"] == 2
    out = run_json(capsys, "tree", "build", "--family", "dicke", "--n", 4, "--k", 2)
    assert out["size"] <= 2 * 4 + 2 * 4
    out = run_json(capsys, "tree", "build", "--family", "permanent", "--m", 2)
    assert out["size"] == 16
    out = run_json(capsys, "tree", "build", "--family", "cluster1d", "--n", 4)
    assert evaluate(parse_tree(out["tree"]), 4).norm_squared() > 0


def test_tree_syntax_error(capsys):
    rc, out = run(capsys, "tree", "parse", "--text", "(x [q1 1 0]")
    assert rc == 1 and "error" in json.loads(out)


def test_raz_modes(capsys, files):
    out = run_json(capsys, "raz-estimate", "--mode", "subgroup", "--matrix", files["matrix"], "--samples", 500)
    assert out["samples"] == 500 and 0.5 < out["p_hat"] < 0.85
    out = run_json(capsys, "raz-estimate", "--mode", "balanced", "--n", 2, 4, "--samples", 200)
    assert [r["metadata"]["n"] for r in out["reports"]] == [2, 4]
    assert out["reports"][0]["p_hat"] == 0
    out = run_json(capsys, "raz-estimate", "--mode", "subgroup", "--q", 11, "--samples", 300)
    assert out["metadata"]["n"] == 22


def test_raz_state_and_csv(capsys, files):
    p = files["dir"] / "g4.json"
    ghz_state(4).save(p)
    out = run_json(capsys, "raz-estimate", "--mode", "state", "--state", p, "--samples", 50)
    assert out["p_hat"] == 0
    rc, text = run(capsys, "raz-estimate", "--mode", "state", "--n", 8, "--samples", 50, "--csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rc == 0 and rows[0]["n"] == "8"


def test_raz_missing_input(capsys):
    rc, out = run(capsys, "raz-estimate", "--mode", "balanced")
    assert rc == 1 and json.loads(out)["error"] == "CliError"


def test_subgroup_and_witness(capsys, files):
    out = run_json(capsys, "subgroup", "--matrix", files["matrix"])
    assert out["generators"] == ["+ZIZI", "+IZIZ", "+XIXI", "+IXIX"]
    out = run_json(capsys, "subgroup", "--matrix", files["matrix"], "--emit", "witness")
    assert out["witness_stabilizer"] == pytest.approx(-1)
    out = run_json(capsys, "subgroup", "--matrix", files["matrix"], "--emit", "state")
    assert StateVector.from_json(out["state"]).n_qubits == 4
    target = files["dir"] / "t.json"
    StateVector.from_json(out["state"]).save(target)
    out = run_json(capsys, "witness", "--matrix", files["matrix"], "--state", target, "--shots", 64, "--seed", 3)
    assert out["overlap2"] == pytest.approx(1)
    assert out["witness_exact"] == pytest.approx(-0.5)
    assert out["sampled"]["value"] == pytest.approx(-1)


def test_states_command(capsys):
    out = run_json(capsys, "states", "--family", "pz", "--n", 4, "--p", 3)
    amps = np.array(out["state"]["amplitudes"])[:, 0]
    assert np.flatnonzero(amps).tolist() == [0, 3, 6, 9, 12, 15]
    out = run_json(capsys, "states", "--family", "shor", "--n", 4, "--s", 2, "--N", 15, "--postselect")
    assert out["state"]["n_qubits"] == 4
    out = run_json(capsys, "states", "--family", "dj", "--n", 4, "--seed", 1)
    amps = np.array(out["state"]["amplitudes"])[:, 0]
    assert amps.sum() == pytest.approx(0)
    out = run_json(capsys, "states", "--family", "dj", "--n", 3, "--constant", 1)
    assert np.allclose(np.array(out["state"]["amplitudes"])[:, 0], -(8**-0.5))
    out = run_json(capsys, "states", "--family", "determinant", "--m", 2)
    assert out["state"]["n_qubits"] == 4


def test_states_immanant_coeffs(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"0,1": [1, 0], "1,0": [1, 0]}))
    a = run_json(capsys, "states", "--family", "immanant", "--m", 2, "--coeffs", p)
    b = run_json(capsys, "states", "--family", "permanent", "--m", 2)
    assert a["state"] == b["state"]


def test_mbqc_sim(capsys, files):
    pat = files["dir"] / "p.json"
    pat.write_text(json.dumps({"steps": [{"qubit": 1, "basis": "X"}, {"qubit": 2, "basis": "X"}, {"qubit": 3, "basis": "X"}]}))
    out = run_json(capsys, "mbqc-sim", "--tree", files["tree"], "--pattern", pat, "--runs", 2000, "--seed", 1)
    # GHZ3 in the X basis: only even-parity outcomes occur
    assert all(k.count("1") % 2 == 0 for k in out["histogram"])
    assert sum(out["histogram"].values()) == 2000
    out = run_json(capsys, "mbqc-sim", "--tree", files["tree"], "--pattern", pat, "--seed", 1)
    assert len(out["outcomes"]) == 3 and out["tree"]
    post = files["dir"] / "post.json"
    post.write_text(json.dumps([{"qubit": 1, "basis": "X", "outcome": 0}]))
    out = run_json(capsys, "mbqc-sim", "--tree", files["tree"], "--pattern", post, "--postselect")
    dense = dense_project(evaluate(build_ghz(3), 3), MeasurementStep(1, x_basis()), 0)
    assert np.allclose(evaluate(parse_tree(out["tree"]), 3).amplitudes, dense.amplitudes)


def test_figure_jacobsthal_error_row(capsys):
    rc, text = run(capsys, "figure-jacobsthal", "--q", 3, 5, "--samples", 200)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rc == 0 and [r["q"] for r in rows] == ["3", "5"]
    assert rows[0]["error"] == "" and float(rows[0]["p_hat"]) >= 0
    assert "3 mod 8" in rows[1]["error"] and rows[1]["p_hat"] == ""


def test_figure_probe2(capsys):
    rc, text = run(capsys, "figure-probe2", "--n", 2, 4, "--samples", 100)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rc == 0 and rows[0]["p_hat"] == "0.0"


def test_byte_identical_reruns(capsys, files, tmp_path):
    argv = ["raz-estimate", "--mode", "subgroup", "--n", 12, "--samples", 300, "--seed", 5]
    _, a = run(capsys, *argv)
    _, b = run(capsys, *argv)
    assert a == b
    out = tmp_path / "o.json"
    assert main(["--out", str(out)] + [str(x) for x in argv]) == 0
    assert out.read_text() == a


def test_timing_flag(capsys):
    out = run_json(capsys, "--timing", "tree", "size", "--text", "[q1 1 0]")
    assert out["provenance"]["wall_time_s"] >= 0


def test_bad_arguments(capsys):
    rc, out = run(capsys, "raz-estimate", "--mode", "nope")
    assert rc == 1 and json.loads(out)["error"] == "CliError"
    rc, out = run(capsys, "subgroup", "--matrix", "/nonexistent/a.txt")
    assert rc == 1 and json.loads(out)["error"] in ("FileNotFoundError", "OSError")


def test_module_entry_point(files):
    r = subprocess.run(
        [sys.executable, "-m", "tscomplex", "tree", "size", "--file", str(files["tree"])],
        capture_output=True, text=True, check=False,
    )
    assert r.returncode == 0 and json.loads(r.stdout)["size"] == 6
