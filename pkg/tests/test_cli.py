import json
from importlib import resources

import pytest

from foliation_moduli.cli import main
from foliation_moduli.divisor import from_json, to_json, two_point_chain

CUSP = "2*y*dy - 3*x^2*dx"


def _scenario(name):
    return str(resources.files("foliation_moduli").joinpath(f"data/scenarios/{name}.json"))


def run(tmp_path, *argv):
    return main([*argv[:1], *argv[1:], "--out-dir", str(tmp_path)] if argv[0] != "corpus"
                else [*argv, "--out-dir", str(tmp_path)])


def test_reduce_cusp_writes_artifacts(tmp_path, capsys):
    assert run(tmp_path, "reduce", "--form", CUSP, "--name", "cusp") == 0
    d = from_json((tmp_path / "cusp.divisor.json").read_bytes())
    assert d.status == "COMPLETE" and d.blowups == 3
    dot = (tmp_path / "cusp.dot").read_text()
    assert dot.count('[label="E') == 3 and dot.count(" -- ") == 2
    report = (tmp_path / "cusp.report.txt").read_text()
    assert "E3: self-intersection -1" in report
    assert report == capsys.readouterr().out


def test_reduce_from_file_and_formats(tmp_path):
    src = tmp_path / "form.txt"
    src.write_text(CUSP + "\n")
    assert run(tmp_path, "reduce", "--input", str(src), "--formats", "json") == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["form.divisor.json", "form.txt"]


@pytest.mark.parametrize("argv, code", [
    (["reduce", "--form", "2*y*dy - 3*x^2*"], 1),
    (["reduce", "--form", "x*dx + y*dy +"], 1),
    (["reduce", "--form", "x*dy"], 1),
    (["moduli", "--form", "x*y*dx + x^2*dy"], 1),
    (["reduce", "--form", "(3*x^2)*dx - 6*y^2*dy"], 2),
    (["reduce", "--form", CUSP, "--max-depth", "1"], 3),
    (["reduce", "--form", CUSP, "--max-depth", "0"], 1),
    (["reduce"], 1),
    (["moduli", "--form", "x^2*dy - y*dx"], 5),
    (["jetlab", "--scenario", "/nonexistent.json"], 1),
])
def test_exit_codes(tmp_path, argv, code):
    assert run(tmp_path, *argv) == code


def test_moduli_cusp(tmp_path, capsys):
    assert run(tmp_path, "moduli", "--form", CUSP, "--name", "cusp") == 0
    data = json.loads((tmp_path / "cusp.moduli.json").read_text())
    assert data["tau"] == 0
    out = capsys.readouterr().out
    assert "tau" in out


def test_moduli_inconsistent_annotation(tmp_path):
    ann = tmp_path / "ann.json"
    ann.write_text(json.dumps({"active": ["E1-E3"]}))
    assert run(tmp_path, "moduli", "--form", CUSP, "--annotations", str(ann)) == 4


def test_moduli_bad_annotation(tmp_path):
    ann = tmp_path / "ann.json"
    ann.write_text(json.dumps({"vertices": {"E7": 1}}))
    assert run(tmp_path, "moduli", "--form", CUSP, "--annotations", str(ann)) == 1


def test_moduli_from_divisor_reports_chain(tmp_path, capsys):
    src = tmp_path / "chain.divisor.json"
    src.write_bytes(to_json(two_point_chain(4)))
    assert run(tmp_path, "moduli", "--divisor", str(src), "--name", "chain") == 0
    assert "E1 - E2 - E3 - E4" in capsys.readouterr().out


def test_moduli_rejects_broken_divisor(tmp_path):
    src = tmp_path / "bad.json"
    src.write_text('{"format": ')
    assert run(tmp_path, "moduli", "--divisor", str(src)) == 1


@pytest.mark.parametrize("name, code", [("euler-single-edge", 0), ("flipped-sign", 6), ("empty", 0)])
def test_jetlab_shipped(tmp_path, name, code):
    assert run(tmp_path, "jetlab", "--scenario", _scenario(name)) == code
    data = json.loads((tmp_path / f"{name}.jetlab.json").read_text())
    assert data["all_match"] == (code == 0)
    assert (tmp_path / f"{name}.jetlab.txt").exists()


def test_jetlab_order_too_low(tmp_path, capsys):
    assert run(tmp_path, "jetlab", "--scenario", _scenario("flipped-sign"), "--order", "2") == 1
    assert "order" in capsys.readouterr().err


def test_corpus_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["corpus", "--out-dir", str(a)]) == 0
    assert main(["corpus", "--out-dir", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert "corpus.json" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n
