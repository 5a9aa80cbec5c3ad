import json

import pytest

from workbench.cli import main
from workbench.lattice import lattice_to_json, powerset_lattice
from workbench.serialize import InputError, load_lattice, orbit_cat, parse_element, parse_w, sub_seed


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_verify_m3_reports_triple(capsys):
    code, out = run(capsys, "lattice", "verify", "M3", "--format", "json")
    assert code == 1
    data = json.loads(out.out)
    assert data["failed"] == "distributivity" and len(data["witness"]) == 3


def test_verify_file(tmp_path, capsys):
    p = tmp_path / "powerset2.json"
    p.write_text(json.dumps(lattice_to_json(powerset_lattice(2))))
    code, out = run(capsys, "lattice", "verify", str(p))
    assert code == 0 and "all laws hold" in out.out


def test_decompose(capsys):
    code, out = run(capsys, "lattice", "decompose", "P3", "--element", "1,2", "--format", "json")
    assert code == 0
    data = json.loads(out.out)
    assert data["sizes"] == [8, 4, 2] and data["complement"] == [3]


def test_faces_and_excisable(capsys):
    code, out = run(capsys, "lattice", "faces", "P3", "--element", "1")
    assert code == 0 and out.out.startswith("faces of type {1}: 4")
    code, _ = run(capsys, "lattice", "excisable", "P3", "--sigma", "size:1")
    assert code == 0
    code, out = run(capsys, "lattice", "excisable", "P2", "--sigma", "1,2")
    assert code == 1 and "downward closure" in out.out


def test_input_errors(capsys):
    assert run(capsys, "lattice", "verify", "missing.json")[0] == 2
    assert run(capsys, "lattice", "decompose", "P2", "--element", "7")[0] == 2
    assert run(capsys, "cube", "build", "--group", "Q8x")[0] == 2
    assert run(capsys, "suite", "run", "--group", "C5")[0] == 2
    assert run(capsys, "suite", "run", "--only", "nonsense")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_cube_commands(capsys):
    code, out = run(capsys, "cube", "build", "--group", "C2", "--w", "free", "--format", "json")
    assert code == 0 and json.loads(out.out)["fibres"] == {"C2/e": 4, "pt": 2}
    code, out = run(capsys, "cube", "points", "--group", "C2", "--w", "free")
    assert out.out.strip() == "global points: ∅, 𝟙"
    code, out = run(capsys, "cube", "singletons", "--group", "C2", "--format", "json")
    levels = json.loads(out.out)["levels"]
    assert levels["C2/e"]["sections"] == 2 and levels["pt"]["sections"] == 0
    code, out = run(capsys, "cube", "basechange", "--group", "C4", "--w", "free")
    assert code == 0 and "NOT" not in out.out


def test_suite_is_deterministic_and_replayable(tmp_path, capsys):
    args = ["suite", "run", "--group", "C2", "--seed", "7", "--only", "faithfulness-probe,lattice-laws",
            "--format", "json"]
    assert main(args + ["--out", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.json")]) == 0
    a = (tmp_path / "a.json").read_bytes()
    assert a == (tmp_path / "b.json").read_bytes()
    report = json.loads(a)
    assert report["config"]["seed"] == 7
    wfile = report["properties"]["faithfulness-probe"]["details"]["C2_witness_file"]
    code, out = run(capsys, "suite", "replay", str(tmp_path / wfile))
    assert code == 1 and out.out.startswith("reproduced")


def test_suite_degenerate(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, out = run(capsys, "suite", "run", "--max-cube-dim", "0")
    assert code == 0 and "ALL PASS" in out.out


def test_norm_predictions_count_as_pass(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, out = run(capsys, "suite", "run", "--only", "norm", "--group", "C2", "--format", "json")
    assert code == 0
    norm = json.loads(out.out)["properties"]["norm"]
    assert norm["status"] == "pass" and norm["predicted"]


def test_parsers():
    L = load_lattice("powerset:3")
    assert parse_element(L, "1,3") == frozenset({1, 3})
    assert parse_element(L, "∅") == frozenset()
    with pytest.raises(InputError):
        parse_element(L, "4")
    O = orbit_cat("S3")
    assert parse_w(O, "free+pt").source.size == 7
    with pytest.raises(InputError):
        parse_w(O, "orbit:9")
    assert sub_seed(0, "norm") != sub_seed(1, "norm")


def test_orbit_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("WORKBENCH_CACHE", str(tmp_path))
    O = orbit_cat("C4")
    assert list(tmp_path.glob("orbitcat-C4-*.pickle"))
    assert len(orbit_cat("C4")) == len(O) == 3
