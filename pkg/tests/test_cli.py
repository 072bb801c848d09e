import json

import pytest

from qdeform import cli
from qdeform.ncalg import builtin_system
from qdeform.poisson import builtin
from qdeform.serialize import loads_structure


def run(args, tmp_path, name="report.json"):
    path = tmp_path / name
    code = cli.main(args + ["--report", str(path)])
    return code, json.loads(path.read_text()) if path.exists() else None


def test_report_schema(tmp_path):
    code, rep = run(["verify-jacobi", "--structure", "lattice", "--beta", "symbolic"], tmp_path)
    assert code == 0
    assert set(rep) == {"command", "params", "seed", "checks", "max_error", "verdict", "results"}
    assert {c["name"] for c in rep["checks"]} == {"jacobi", "casimir0"}
    assert all(set(c) == {"name", "value", "tol", "pass"} for c in rep["checks"])


def test_dump_roundtrip(tmp_path):
    dump = tmp_path / "suqn.json"
    code, _ = run(["verify-jacobi", "--structure", "suqn", "--n", "2", "--beta", "3/2", "--dump", str(dump)], tmp_path)
    assert code == 0
    P = loads_structure(dump.read_text())
    assert P.bivector == builtin("suqn", "3/2", 2).bivector
    code, _ = run(["verify-jacobi", "--structure", str(dump)], tmp_path, "again.json")
    assert code == 0


def test_lattice_flow_with_start(tmp_path):
    out = tmp_path / "lattice.csv"
    code, rep = run(["flow", "--structure", "lattice", "--beta", "1", "--H", "p* * p",
                     "--start", "x=0.3,p=0.5+0.2i", "--t", "10", "--out", str(out)], tmp_path)
    assert code == 0
    assert rep["params"]["start"]["p*"] == [0.5, -0.2]
    assert json.loads((tmp_path / "lattice.json").read_text())["meta"]["structure"] == "lattice"


def test_kahler_outputs(tmp_path):
    csv = tmp_path / "grid.csv"
    code, rep = run(["kahler", "--beta", "2", "--radii", "0.1,0.5", "--out", str(csv)], tmp_path)
    assert code == 0
    assert csv.read_text().splitlines()[0].startswith("r,u,metric")
    code, rep = run(["kahler", "--n", "2", "--beta", "-1", "--point", "0.3+0.2i,-0.1i"], tmp_path, "pt.json")
    assert code == 0 and len(rep["results"]["metric_diag"]) == 2


def test_ncalg_verdicts(tmp_path):
    assert run(["ncalg", "check", "--system", "eq5"], tmp_path)[0] == 0
    code, rep = run(["ncalg", "check", "--system", "eq5-wrong"], tmp_path, "wrong.json")
    assert code == 1 and rep["verdict"] == "fail"
    rules = tmp_path / "rules.json"
    rules.write_text(builtin_system("canonical").to_json())
    assert run(["ncalg", "check", "--rules", str(rules)], tmp_path, "rules_report.json")[0] == 0


def test_fock_commands(tmp_path):
    assert run(["fock", "residuals", "--algebra", "suqn", "--modes", "2", "--trunc", "10"], tmp_path)[0] == 0
    code, _ = run(["fock", "residuals", "--algebra", "suqn", "--dressing", "none"], tmp_path, "bad.json")
    assert code == 1
    table = tmp_path / "limit.csv"
    code, rep = run(["fock", "limit", "--beta", "1", "--action", "1", "--steps", "8", "--out", str(table)],
                    tmp_path, "limit.json")
    assert code == 0 and len(table.read_text().splitlines()) == 9


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["flow", "--bogus"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        cli.main([])
    assert err.value.code == 2
    assert cli.main(["verify-jacobi", "--structure", "nowhere"]) == 2
    assert cli.main(["flow", "--structure", "qosc1", "--H", "b^", "--b0", "1", "--t", "1"]) == 2
    assert "line 1, column 3" in capsys.readouterr().err
    assert cli.main(["flow", "--structure", "qosc1", "--H", "b* * b", "--t", "1"]) == 2


def test_seeded_runs_are_identical(tmp_path):
    args = ["dirac", "verify", "--structure", "qparticle", "--beta", "2", "--samples", "4", "--seed", "11",
            "--method", "quadrature"]
    cli.main(args + ["--report", str(tmp_path / "a.json")])
    cli.main(args + ["--report", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    other = args[:-3] + ["12", "--method", "quadrature", "--report", str(tmp_path / "c.json")]
    cli.main(other)
    assert (tmp_path / "a.json").read_bytes() != (tmp_path / "c.json").read_bytes()
