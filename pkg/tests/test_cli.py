import json
import subprocess
import sys

import pytest

from submoebius.cli import builtin_line_space, builtin_negative_structure, builtin_perturbed_model, main
from submoebius.cross_ratio import table_to_json
from submoebius.hyperbolic import binary_tree, model_to_json, tree_to_json
from submoebius.semimetric import line_space, metric_inversion, space_to_json


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv) + ["--format", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def test_validate(tmp_path, capsys):
    path = write(tmp_path, "s.json", space_to_json(builtin_line_space()))
    code, report = run(capsys, "validate", "--input", path)
    assert code == 0 and report["valid"] and report["schema_version"] == 1
    bad = {"points": ["a", "b"], "matrix": [["0", "1"], ["2", "0"]]}
    code, report = run(capsys, "validate", "--input", write(tmp_path, "b.json", bad))
    assert code == 1 and report["violations"][0]["kind"] == "symmetry"


def test_malformed_input_exit_2(tmp_path, capsys):
    assert main(["validate", "--input", write(tmp_path, "x.json", "{nope")]) == 2
    assert main(["validate", "--input", str(tmp_path / "missing.json")]) == 2
    assert main(["validate", "--input", write(tmp_path, "y.json", {"points": ["a"]})]) == 2
    err = capsys.readouterr().err
    assert "matrix" in err


def test_precondition_exit_3(tmp_path, capsys):
    bad = {"points": ["a", "b"], "matrix": [["0", "1"], ["2", "0"]]}
    assert main(["moebius", "--input", write(tmp_path, "b.json", bad)]) == 3
    path = write(tmp_path, "s.json", space_to_json(builtin_line_space()))
    assert main(["reconstruct", "--input", path, "--scale", "0,0,w"]) == 3
    assert main(["reconstruct", "--input", path, "--scale", "0,1,zz"]) == 2


def test_moebius_and_submoebius_check(tmp_path, capsys):
    path = write(tmp_path, "s.json", space_to_json(line_space([0, 1, 3, 7])))
    code, report = run(capsys, "moebius", "--input", path)
    assert code == 0 and report["axioms"]["ok"]
    table = write(tmp_path, "t.json", report["table"])
    code, report = run(capsys, "submoebius-check", "--input", table)
    assert code == 0 and report["axioms"]["checked_tuples"] == 204


def test_is_moebius_on_frozen_negative_table(tmp_path, capsys):
    path = write(tmp_path, "neg.json", table_to_json(builtin_negative_structure()))
    code, report = run(capsys, "is-moebius", "--input", path)
    assert code == 1 and not report["is_moebius"]
    w = report["witness"]
    assert w["five_tuple"] == ["l3", "l4", "l0", "l1", "l2"] and w["left"] != w["right"]


def test_reconstruct_roundtrip(tmp_path, capsys):
    space = builtin_line_space()
    path = write(tmp_path, "s.json", space_to_json(space))
    code, report = run(capsys, "reconstruct", "--input", path, "--scale", "0,1,w")
    assert code == 0 and report["space"] == space_to_json(space)


def test_equivalent(tmp_path, capsys):
    space = builtin_line_space()
    a = write(tmp_path, "a.json", space_to_json(space))
    b = write(tmp_path, "b.json", space_to_json(metric_inversion(space, 1, 3)))
    code, report = run(capsys, "equivalent", "--input", a, "--input", b)
    assert code == 0 and report["equivalent"]
    other = space_to_json(space)
    other["matrix"][1][2] = other["matrix"][2][1] = "3"
    code, report = run(capsys, "equivalent", "--input", a, "--input", write(tmp_path, "c.json", other))
    assert code == 1 and report["witness"]["left"] != report["witness"]["right"]


def test_hyperbolic_pipeline(tmp_path, capsys):
    tree = write(tmp_path, "tree.json", tree_to_json(binary_tree(2)))
    code, report = run(capsys, "hyperbolic", "build", "--input", tree)
    assert code == 0 and report["model"]["h"] == "0"
    model = write(tmp_path, "model.json", model_to_json(builtin_perturbed_model()))
    code, report = run(capsys, "hyperbolic", "perturb", "--input", model, "--seed", "7")
    assert code == 0
    raw = write(tmp_path, "raw.json", report["table"])
    code, report = run(capsys, "hyperbolic", "symmetrize", "--input", raw)
    assert code == 0 and report["axioms"]["ok"]
    assert report["table"] == table_to_json(builtin_negative_structure())
    sym = write(tmp_path, "sym.json", report["table"])
    code, report = run(capsys, "hyperbolic", "deviation", "--input", model, "--table", sym)
    assert code == 0 and report["bound_sqrt96_h"]
    code, report = run(capsys, "hyperbolic", "deviation", "--input", model, "--seed", "7")
    assert code == 0 and report["bound_10h"]


def test_hyperbolic_build_from_metric(tmp_path, capsys):
    path = write(tmp_path, "s.json", space_to_json(line_space([0, 1, 3, 7])))
    code, report = run(capsys, "hyperbolic", "build", "--input", path, "--basepoint", "0")
    assert code == 0 and report["model"]["boundary"] == ["1", "3", "7"]
    assert report["model"]["gp"][0][1] == "1"


def test_topology_commands(tmp_path, capsys):
    model = write(tmp_path, "model.json", model_to_json(builtin_perturbed_model()))
    code, report = run(capsys, "topology", "sandwich", "--input", model, "--scale", "l0,l1,l2")
    assert code == 0 and report["ok"] and report["checked"] > 0
    space = write(tmp_path, "s.json", space_to_json(builtin_line_space()))
    code, report = run(capsys, "topology", "compare", "--input", space)
    assert code == 0 and report["same_topology"]


def test_text_format(tmp_path, capsys):
    path = write(tmp_path, "s.json", space_to_json(builtin_line_space()))
    assert main(["validate", "--input", path]) == 0
    assert capsys.readouterr().out.startswith("validate: PASS")


def test_demo_deterministic(capsys):
    assert main(["demo", "--format", "json"]) == 0
    first = capsys.readouterr().out
    assert main(["demo", "--format", "json", "--jobs", "3"]) == 0
    assert capsys.readouterr().out == first
    report = json.loads(first)
    assert report["ok"] and all(s["pass"] for s in report["suites"])


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "submoebius.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("submoebius")


@pytest.mark.parametrize("argv", [["hyperbolic", "bogus"], ["frobnicate"], []])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
