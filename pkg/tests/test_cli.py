import json

import jsonschema
import numpy as np
import pytest

from funcint.cli import main
from funcint.kernelalg import DiscreteKernel, FieldVector, QuadratureGrid, to_csv, to_json

NUMBER = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}, {"type": "null"}]}
REPORT_SCHEMA = {
    "type": "object",
    "required": ["case", "dsl", "closed_form", "assumptions", "residual_tags", "rows", "config"],
    "properties": {
        "case": {"type": "string"},
        "dsl": {"type": "string"},
        "closed_form": {"type": ["string", "null"]},
        "assumptions": {"type": "array", "items": {"type": "string"}},
        "residual_tags": {"type": "array", "items": {"type": "string"}},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["dim", "engine", "analytic", "mc", "mc_stderr", "rel_err", "pass"],
                "properties": {
                    "dim": {"type": "integer"},
                    "engine": NUMBER,
                    "analytic": NUMBER,
                    "mc": NUMBER,
                    "mc_stderr": {"type": ["number", "null"]},
                    "rel_err": {"type": ["number", "null"]},
                    "pass": {"type": "boolean"},
                },
            },
        },
        "config": {
            "type": "object",
            "required": ["seed", "samples", "tol", "generator_id"],
        },
    },
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_examples(capsys):
    code, out, _ = run(capsys, "eval", "int exp(-q.q) D[q]")
    assert code == 0
    assert out.splitlines()[0] == "pi^(Omega/2)"
    code, out, _ = run(capsys, "eval", "int exp(-2*a'.a) D[a]")
    assert out.splitlines()[0] == "pi^(Omega)"


def test_eval_exit_codes(capsys):
    code, _, err = run(capsys, "eval", "int exp(-q.q.q) D[q]")
    assert code == 3 and "NotGaussian" in err
    code, _, err = run(capsys, "eval", "int exp(-q.q")
    assert code == 2 and "line 1" in err


def test_eval_with_bindings(capsys, tmp_path):
    g = QuadratureGrid([1.0, 2.0])
    (tmp_path / "K.json").write_text(to_json(DiscreteKernel(g, np.diag([2.0, 1.0]))))
    (tmp_path / "f.json").write_text(to_json(FieldVector(g, [0.0, 0.0])))
    code, out, _ = run(
        capsys, "eval", "int exp(-q.K.q + q.f) D[q]", "--dim", "2", "--format", "json",
        "--bind", f"K={tmp_path / 'K.json'}", "--bind", f"f={tmp_path / 'f.json'}",
    )
    assert code == 0
    data = json.loads(out)
    # det of the diamond operator diag(2*1, 1*2) = 4
    assert data["value"] == pytest.approx(np.pi / 2)
    bad = tmp_path / "bad.csv"
    bad.write_text(to_csv(DiscreteKernel(QuadratureGrid.uniform(2), np.diag([1.0, -1.0]))))
    code, _, err = run(capsys, "eval", "int exp(-q.K.q) D[q]", "--dim", "2", "--bind", f"K={bad}")
    assert code == 3 and "positive_definite" in err


def test_verify_all_passes_and_validates(capsys):
    code, out, _ = run(capsys, "verify", "--case", "all", "--dims", "1,2,4", "--tol", "1e-8", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [r["case"] for r in data] == list("ABCDEFGHIJ")
    for r in data:
        jsonschema.validate(r, REPORT_SCHEMA)


def test_verify_with_mc(capsys):
    code, out, _ = run(capsys, "verify", "--case", "C", "--dims", "8", "--mc-samples", "100000", "--seed", "7", "--format", "json")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data["rows"][0]["mc"] is not None and data["config"]["seed"] == 7


def test_verify_text_and_json_agree(capsys):
    _, text, _ = run(capsys, "verify", "--case", "D", "--dims", "2")
    _, js, _ = run(capsys, "verify", "--case", "D", "--dims", "2", "--format", "json")
    row = json.loads(js)["rows"][0]
    assert repr(row["engine"]) in text and repr(row["rel_err"]) in text


def test_verify_bogus_case(capsys):
    code, _, err = run(capsys, "verify", "--case", "bogus")
    assert code == 2 and "unknown case" in err


def test_verify_failing_row_exits_one(capsys, tmp_path):
    k = tmp_path / "K.csv"
    k.write_text("1,0\n0,-1\n")
    code, out, _ = run(capsys, "verify", "--case", "C", "--bind", f"K={k}")
    assert code == 1 and "FAIL" in out


def test_verify_custom_file(capsys, tmp_path):
    path = tmp_path / "shift.txt"
    path.write_text("int exp(-q.q + q.f - 1/4*f.f) D[q]\n")
    code, out, _ = run(capsys, "verify", "--case", str(path), "--format", "json")
    assert code == 0
    assert json.loads(out)["closed_form"] == "pi^(Omega/2)"


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("FUNCINT_SEED", "5")
    _, out, _ = run(capsys, "verify", "--case", "A", "--seed", "1", "--format", "json")
    assert json.loads(out)["config"]["seed"] == 5


def test_global_flags_before_subcommand(capsys):
    code, out, _ = run(capsys, "--format", "json", "pairings", "--n", "8")
    assert code == 0 and json.loads(out)["count"] == 105


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--order", "4")
    assert code == 0
    assert "(2*pi*Lambda)^(Omega/2) * Lambda^2" in out
    assert len([l for l in out.splitlines() if l.startswith("  1(")]) == 3
    code, _, _ = run(capsys, "moments", "--order", "14")
    assert code == 2


def test_pairings(capsys):
    code, out, _ = run(capsys, "pairings", "--n", "8")
    assert (code, out.strip()) == (0, "105")
    code, out, _ = run(capsys, "pairings", "--n", "4", "--list")
    assert out.splitlines()[1:] == ["{(1,2),(3,4)}", "{(1,3),(2,4)}", "{(1,4),(2,3)}"]
    code, _, _ = run(capsys, "pairings", "--n", "14", "--list")
    assert code == 2


def test_carleman(capsys):
    code, out, _ = run(capsys, "carleman", "--norm", "1", "--nmax", "1000", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["termwise_ok"] is True
    assert data["partial_sum"] > data["bound_sum"]
    code, _, _ = run(capsys, "carleman", "--norm", "1", "--nmax", str(10**8))
    assert code == 2


def test_output_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "verify", "--case", "B", "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    jsonschema.validate(json.loads(out.read_text()), REPORT_SCHEMA)
