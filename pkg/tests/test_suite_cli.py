import csv
import json

import numpy as np
import pytest

from eigenratio import suite
from eigenratio.classify import classify
from eigenratio.cli import build_parser, main
from eigenratio.coefficients import DomainError, Step


def test_generate_constant():
    insts = suite.generate_family("constant", 123, 3)
    assert len(insts) == 3
    assert all(classify(i.density).kind == "constant" for i in insts)


def test_generate_single_well_step():
    (inst,) = suite.generate_family("single-well-step", 7, 1)
    assert isinstance(inst.density, Step)
    v = np.array(inst.density.values)
    k = int(np.argmin(v))
    assert np.all(np.diff(v[:k + 1]) < 0) and np.all(np.diff(v[k:]) > 0)
    assert classify(inst.density).is_single_well


def test_generate_symmetric_barrier():
    (inst,) = suite.generate_family("symmetric-single-barrier", 1, 1)
    rho = inst.density
    x = np.linspace(0, 1, 401)
    np.testing.assert_allclose(rho(x[1:-1]), rho(1 - x[1:-1]), rtol=1e-13)
    left = rho(np.linspace(0, 0.5, 200))
    assert np.all(np.diff(left) >= 0)


@pytest.mark.parametrize("name", sorted(suite.FAMILY_KINDS))
def test_generate_deterministic_and_classified(name):
    a = suite.generate_family(name, 5, 2)
    b = suite.generate_family(name, 5, 2)
    assert [i.spec for i in a] == [i.spec for i in b]
    assert a[0].provenance["seed"] == 5
    kinds = suite.FAMILY_KINDS[name]
    for inst in a:
        if kinds is not None:
            assert classify(inst.density).kind in kinds
        else:
            assert inst.problem is not None


def test_generate_unknown():
    with pytest.raises(DomainError):
        suite.generate_family("wiggly", 0, 1)


def test_config_validation_and_overrides():
    with pytest.raises(DomainError):
        suite.SuiteConfig(n_max=1)
    cfg = suite.SuiteConfig.from_dict({"families": [{"name": "constant", "seed": 1, "count": 2}]},
                                      seed=9, n_max=4, mesh=None)
    assert cfg.families[0]["seed"] == 9 and cfg.n_max == 4 and cfg.mesh == 8192
    assert cfg.tolerances["bound"] == 1e-6


def test_slacks_formula():
    sl = suite.slacks([1.0, 4.0, 9.0])
    assert sl == {"2,1": 0.0, "3,1": 0.0, "3,2": pytest.approx(0.0)}


SMALL = {"families": [{"name": "constant", "count": 2, "seed": 0},
                      {"name": "single-well-step", "count": 2, "seed": 3},
                      {"name": "symmetric-single-barrier", "count": 1, "seed": 1}],
         "n_max": 4, "mesh": 2048}


def test_run_suite_rows_and_report(tmp_path):
    rep = suite.run_suite(SMALL)
    assert rep.summary["count"] == 5 and rep.summary["quarantined"] == 0
    assert [r["index"] for r in rep.rows] == list(range(5))
    for r in rep.rows:
        assert r["provenance"]["family"] == r["family"]
        assert r["oracle_deviation"] <= 1e-6
    assert rep.rows[0]["asserted"] == "equality" and rep.rows[0]["passed"]
    assert rep.rows[4]["asserted"].startswith("lambda2/lambda1")
    paths = rep.write(tmp_path)
    header = next(csv.reader(open(paths["csv"])))
    assert header == suite.ROW_COLUMNS + [f"lambda_{k}" for k in range(1, 5)]
    data = json.loads(open(paths["json"]).read())
    assert data["header"]["config"]["n_max"] == 4
    assert len(list(csv.reader(open(paths["long"])))) > 5


def test_quarantine():
    inst = suite.Instance(0, "constant", 0, {}, density=Step((0.5,), (1.0, 2.0)))
    cfg = suite.SuiteConfig(n_max=4, mesh=16)   # mesh too coarse for the oracle
    row = suite._run_one((inst, cfg))
    assert row["status"] == "quarantined" and "SolverError" in row["error"]


def _write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_cli_parser_has_subcommands():
    ap = build_parser()
    for cmd in ("solve", "verify-bound", "prop1", "transform", "explore-barrier"):
        args = ap.parse_args([cmd, "c.json", "--seed", "3", "--nmax", "4", "--mesh", "1024"])
        assert args.command == cmd and args.seed == 3 and args.out == "out"


def test_cli_solve(tmp_path):
    cfg = _write(tmp_path, "s.json", {"density": {"type": "step", "breaks": [0.5], "values": [4, 1]},
                                      "n_max": 3, "mesh": 2048})
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 0
    res = json.loads((tmp_path / "o" / "solve.json").read_text())
    assert res["deviation_exact"] < 1e-10
    assert res["bound_slack"]["2,1"] > 0   # heavy left end pushes the ratio above 4
    assert (tmp_path / "o" / "eigenfunctions.csv").exists()


def test_cli_solve_problem(tmp_path):
    cfg = _write(tmp_path, "p.json", {"problem": {
        "p": {"type": "family", "name": "linear", "params": {"a": 1, "b": 1}},
        "q": {"type": "family", "name": "sine", "params": {"a": 0, "b": 2}},
        "rho": {"type": "family", "name": "constant", "params": {"c": 1}}}, "n_max": 3, "mesh": 2048})
    assert main(["solve", cfg, "--out", str(tmp_path / "o")]) == 0


def test_cli_verify_deterministic(tmp_path):
    cfg = _write(tmp_path, "v.json", SMALL)
    # the asymmetric single-well steps of this config break the bound, so exit code 1
    codes = [main(["verify-bound", cfg, "--out", str(tmp_path / d)]) for d in ("a", "b")]
    assert codes == [1, 1]
    for f in ("report.csv", "report_long.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    ja = json.loads((tmp_path / "a" / "report.json").read_text())
    jb = json.loads((tmp_path / "b" / "report.json").read_text())
    ja["header"].pop("generated")
    jb["header"].pop("generated")
    assert ja == jb


def test_cli_verify_exit_codes(tmp_path):
    cfg = {"families": [{"name": "constant", "count": 2, "seed": 0}], "n_max": 3, "mesh": 2048}
    assert main(["verify-bound", _write(tmp_path, "c.json", cfg), "--out", str(tmp_path / "o")]) == 0
    cfg["tolerances"] = {"equality": -1.0}
    assert main(["verify-bound", _write(tmp_path, "d.json", cfg), "--out", str(tmp_path / "p")]) == 1


def test_cli_prop1_and_transform(tmp_path):
    cfg = _write(tmp_path, "p1.json", {"density": {"type": "family", "name": "linear",
                                                    "params": {"a": 2, "b": -1}},
                                       "n_max": 2, "tau_points": 5})
    assert main(["prop1", cfg, "--out", str(tmp_path / "o")]) == 0
    res = json.loads((tmp_path / "o" / "prop1.json").read_text())
    assert res["results"][0]["endpoint_gap"] <= 0
    assert (tmp_path / "o" / "sweep_density_n2.csv").exists()
    cfg = _write(tmp_path, "t.json", {"problem": {
        "q": {"type": "family", "name": "tent", "params": {"x0": 0.5, "a": 0, "b": 0.5}}},
        "n_max": 4, "mesh": 2048})
    assert main(["transform", cfg, "--out", str(tmp_path / "t")]) == 0


def test_cli_explore_barrier(tmp_path):
    cfg = _write(tmp_path, "b.json", {"families": [{"name": "symmetric-single-barrier", "count": 2,
                                                     "seed": 4},
                                                    {"name": "constant", "count": 1, "seed": 0}],
                                      "n_max": 3, "mesh": 2048, "prop1_nmax": 2})
    assert main(["explore-barrier", cfg, "--out", str(tmp_path / "o")]) == 0
    data = json.loads((tmp_path / "o" / "barrier.json").read_text())
    rows = data["rows"]
    assert all(r["lambdas"][1] / r["lambdas"][0] >= 4 - 1e-8 for r in rows[:2])
    assert rows[2]["prop1"][0]["direction"] == "equal"
    assert abs(rows[2]["worst_slack"]) < 1e-10
