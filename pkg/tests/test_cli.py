import json
from fractions import Fraction

import pytest

from swprg import bp, generators, hsg
from swprg.cli import EXIT_CAP, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main
from swprg.paca import build_c1, paca_to_json


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(tmp_path, command, config, extra=()):
    cfg = write_config(tmp_path, config)
    out = tmp_path / "out"
    code = main([command, "--config", cfg, "--out", str(out), *extra])
    return code, out


def test_gen_command(tmp_path):
    g = generators.base_exhaustive(3)
    code, out = run(tmp_path, "gen", {"generator": g.to_json(), "dump": True})
    assert code == EXIT_PASS
    payload = json.loads((out / "generator.json").read_text())
    assert payload["seed_bits"] == 3
    assert payload["expansion"] == list(range(8))
    assert "config_hash" in payload
    assert "timestamp" in payload["metadata"]


def test_gen_cap_refusal(tmp_path):
    g = generators.base_exhaustive(12)
    code, _ = run(
        tmp_path, "gen", {"generator": g.to_json(), "dump": True},
        extra=["--cap-seeds", "8"],
    )
    assert code == EXIT_CAP


def test_verify_fool_exhaustive_passes(tmp_path):
    g = generators.base_exhaustive(4)
    config = {
        "generator": g.to_json(),
        "family": {"n": 4, "t": 2, "budget_bits": 6},
        "eps_budget": "0",
    }
    code, out = run(tmp_path, "verify-fool", config, extra=["--jobs", "2"])
    assert code == EXIT_PASS
    payload = json.loads((out / "fooling.json").read_text())
    assert payload["worst_error"] == "0"
    assert (out / "fooling.csv").exists()


def test_verify_fool_budget_violation(tmp_path):
    g = generators.base_nisan(4, 2, Fraction(1, 4))
    config = {
        "generator": g.to_json(),
        "family": {"n": 4, "t": 2, "budget_bits": 8},
        "eps_budget": "0",
    }
    code, _ = run(tmp_path, "verify-fool", config)
    assert code == EXIT_FAIL


def test_verify_hit(tmp_path):
    h = hsg.build_swbp_hsg(8, 2, 4, hsg.hsg_exhaustive(2))
    config = {"hsg": h.to_json(), "family": {"n": 8, "t": 2, "budget_bits": 5}}
    code, out = run(tmp_path, "verify-hit", config)
    assert code == EXIT_PASS
    assert json.loads((out / "hitting.json").read_text())["passed"]


def test_window_check_certificate_and_violation(tmp_path):
    p, _ = bp.canonical_debruijn_swbp(6, 2, bp.all_accepting_labeler)
    prog_path = tmp_path / "prog.json"
    prog_path.write_text(json.dumps(bp.program_to_json(p)))
    code, out = run(tmp_path, "window-check", {"program": str(prog_path), "t": 2})
    assert code == EXIT_PASS
    assert json.loads((out / "window.json").read_text())["result"] == "certificate"

    tables = [list(map(list, layer)) for layer in p.trans]
    tables[3][0][0] = 3
    bad = bp.LayeredProgram(
        p.n, p.w, p.q0,
        tuple(tuple(tuple(e) for e in layer) for layer in tables), p.acc,
    )
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bp.program_to_json(bad)))
    code, out = run(tmp_path, "window-check", {"program": str(bad_path), "t": 2})
    assert code == EXIT_FAIL


def test_paca_exact_c1(tmp_path):
    code, out = run(tmp_path, "paca", {"mode": "exact", "paca": "c1", "input": [0, 1]})
    assert code == EXIT_PASS
    payload = json.loads((out / "paca.json").read_text())
    assert payload["probability"] == "1/4"


def test_paca_exact_from_file(tmp_path):
    c = build_c1()
    paca_path = tmp_path / "paca.json"
    paca_path.write_text(json.dumps(paca_to_json(c)))
    code, out = run(
        tmp_path, "paca", {"mode": "exact", "paca": str(paca_path), "input": [0]}
    )
    assert code == EXIT_PASS


def test_paca_sim_deterministic(tmp_path):
    config = {"mode": "sim", "paca": "c1", "input": [0, 0], "matrix_seed": 7}
    code1, out1 = run(tmp_path, "paca", config)
    payload1 = json.loads((out1 / "paca.json").read_text())
    code2, out2 = run(tmp_path, "paca", config)
    payload2 = json.loads((out2 / "paca.json").read_text())
    assert payload1["accept"] == payload2["accept"]
    assert payload1["diagram"] == payload2["diagram"]
    assert payload1["config_hash"] == payload2["config_hash"]


def test_bad_config_exit_code(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert main(["gen", "--config", missing]) == EXIT_CONFIG
    cfg = write_config(tmp_path, {"wrong": 1})
    assert main(["gen", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
