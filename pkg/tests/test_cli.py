import json
import math
from importlib import resources

import jsonschema
import pytest

from fracgreen import cli


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("fracgreen").joinpath("schemas/output.schema.json").read_text())


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_values():
    assert cli.parse_values("pi") == [math.pi]
    assert cli.parse_values("3*pi/4") == [0.75 * math.pi]
    assert cli.parse_values("0:1:3") == [0.0, 0.5, 1.0]
    assert cli.parse_values("0:pi:2") == [0.0, math.pi]
    for bad in ("1:2", "a", "0:1:x", "0:1:0", "__import__('os')"):
        with pytest.raises(Exception):
            cli.parse_values(bad)


def test_eval_closed_form(capsys):
    code, out, _ = run(capsys, "eval", "--alpha", "2", "--c", "1", "--x", "1.5707963")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "alpha,c,x,value,error_bound,method,rigorous"
    fields = row.split(",")
    assert fields[5] == "ClosedForm2" and fields[6] == "true"
    assert float(fields[3]) == pytest.approx(0.1086343, abs=1e-7)


def test_eval_errors(capsys):
    code, _, err = run(capsys, "eval", "--alpha", "0.5", "--c", "1", "--x", "0")
    assert code == 2 and "Divergent: G(0) undefined for alpha <= 1" in err
    code, _, err = run(capsys, "eval", "--alpha", "3", "--c", "1", "--method", "ml", "--x", "1")
    assert code == 2 and "OutOfDomain" in err and "--alpha" in err
    code, _, err = run(capsys, "eval", "--alpha", "0.5", "--c", "1", "--x", "1e-7", "--method", "series", "--tol", "1e-14")
    assert code == 3


def test_eval_json_validates(capsys, schema):
    code, out, _ = run(capsys, "eval", "--alpha", "1.5", "--c", "1", "--x", "0:pi:5", "--x", "1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert len(data) == 6 and data[0]["x"] == 0.0


def test_verify(capsys, tmp_path, schema):
    out = tmp_path / "r.json"
    code, _, err = run(capsys, "verify", "--alpha", "1", "--c", "1", "--suite", "all", "--seed", "42", "--grid-points", "20", "--out", str(out))
    assert code == 0, err
    reports = json.loads(out.read_text())
    jsonschema.validate(reports, schema)
    assert {r["property"] for r in reports} >= {"CompleteMonotonicity(6)", "HFactorization", "Normalization"}
    code, _, _ = run(capsys, "verify", "--alpha", "1.5", "--c", "4", "--suite", "cm", "--p-max", "6", "--grid-points", "20")
    assert code == 0
    code, _, err = run(capsys, "verify", "--alpha", "2.5", "--c", "1", "--suite", "cm")
    assert code == 2


def test_verify_failure_exit_code(capsys, monkeypatch):
    from fracgreen import analysis

    real = analysis.check_boundary_derivative

    def failing(params, *a, **k):
        rep = real(params, *a, **k)
        rep.passed = False
        return rep

    monkeypatch.setattr(analysis, "check_boundary_derivative", failing)
    code, _, err = run(capsys, "verify", "--alpha", "1", "--c", "1", "--suite", "boundary")
    assert code == 1 and "BoundaryDerivativeZero" in err and "FAIL" in err


def test_mc(capsys, schema):
    code, out, _ = run(capsys, "mc", "--alpha", "2", "--c", "1", "--x", "1", "--estimator", "jtp", "--n", "100000", "--seed", "7")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert abs(data["standardized_deviation"]) < 4
    args = ["mc", "--alpha", "0.5", "--c", "1", "--x", "2", "--estimator", "poisson", "--seed", "7"]
    first = run(capsys, *args)[1]
    second = run(capsys, *args, "--parallel", "3")[1]
    assert first == second
    code, _, _ = run(capsys, "mc", "--alpha", "1.5", "--c", "1", "--x", "1", "--estimator", "poisson")
    assert code == 2


def test_zeros(capsys, schema):
    code, out, _ = run(capsys, "zeros", "--alpha", "2", "--c", "1")
    data = json.loads(out)
    jsonschema.validate(data, schema)
    assert code == 0 and data["sign_changes"] == 0
    code, out, _ = run(capsys, "zeros", "--alpha", "3", "--c", "4", "--resolution", "300")
    assert json.loads(out)["sign_changes"] == 1
    code, _, _ = run(capsys, "zeros", "--alpha", "1.5", "--c", "1")
    assert code == 2


def test_table_determinism(capsys, tmp_path):
    paths = []
    for n in ("1", "8"):
        p = tmp_path / f"t{n}.csv"
        code, _, _ = run(capsys, "table", "--alpha", "0.5:1.5:3", "--c", "0.25", "--c", "1", "--c", "4", "--x", "0.3:3:10", "--out", str(p), "--parallel", n)
        assert code == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]
    lines = paths[0].decode().splitlines()
    assert len(lines) == 91
    keys = [tuple(map(float, ln.split(",")[:3])) for ln in lines[1:]]
    assert keys == sorted(keys)


def test_table_closed_form_row(capsys):
    code, out, _ = run(capsys, "table", "--alpha", "2", "--c", "1", "--x", "pi")
    row = out.splitlines()[1].split(",")
    assert float(row[3]) == pytest.approx(0.04329476876502347, abs=1e-7)


def test_table_partial_failure(capsys, schema):
    code, out, _ = run(capsys, "table", "--alpha", "0.5", "--alpha", "1.5", "--c", "1", "--x", "0", "--x", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].endswith(",error")
    assert "Divergent" in lines[1]
    code, out, _ = run(capsys, "table", "--alpha", "0.5", "--c", "1", "--x", "0", "--format", "json")
    assert code == 1
    jsonschema.validate(json.loads(out), schema)


def test_env_threads_and_config(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "fg.cfg"
    cfg.write_text("format = json\ntol = 1e-10\n")
    code, out, _ = run(capsys, "--config", str(cfg), "eval", "--alpha", "1.5", "--c", "1", "--x", "1")
    assert code == 0 and json.loads(out)[0]["error_bound"] <= 1e-10
    monkeypatch.setenv("FRACGREEN_THREADS", "4")
    a = run(capsys, "table", "--alpha", "1", "--c", "1", "--x", "0.5:3:6")[1]
    monkeypatch.setenv("FRACGREEN_THREADS", "1")
    b = run(capsys, "table", "--alpha", "1", "--c", "1", "--x", "0.5:3:6")[1]
    assert a == b


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "fracgreen", "eval", "--alpha", "2", "--c", "1", "--x", "pi"], capture_output=True, text=True)
    assert res.returncode == 0 and "ClosedForm2" in res.stdout
