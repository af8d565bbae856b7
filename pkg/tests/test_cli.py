import json
import subprocess
import sys

import pytest

from slitkit import fixtures
from slitkit.cells import ModuliIndex
from slitkit.classes import c_rep, d_rep
from slitkit.cli import main
from slitkit.fixtures import FixtureTable
from slitkit.homology import Ring


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_homology_json(capsys):
    code, out, _ = run(capsys, "homology", "--g", "1", "--n", "1", "--m", "0", "--coeff", "z", "--json")
    assert code == 0
    data = json.loads(out)
    assert [(h["betti"], h["torsion"]) for h in data["homology"][:3]] == [(1, []), (1, []), (0, [])]
    assert data["cells_per_degree"] == [0, 0, 0, 0, 2, 4, 2]


def test_homology_text(capsys):
    code, out, _ = run(capsys, "homology", "--g", "1", "--m", "1")
    assert code == 0
    assert "M_{1,1}^1" in out and "Z_2" in out


def test_orientation_exit_code(capsys):
    code, _, err = run(capsys, "homology", "--g", "0", "--m", "2", "--coeff", "z")
    assert code == 2 and "unsupported orientation" in err


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "homology", "--g", "2", "--m", "1", "--coeff", "f2", "--max-h", "4")
    assert code == 3 and "budget" in err


def test_bad_arguments(capsys):
    code, _, _ = run(capsys, "homology", "--coeff", "z")
    assert code == 2
    code, _, err = run(capsys, "homology", "--g", "1", "--coeff", "f4")
    assert code == 2 and "not prime" in err


def test_enumerate(capsys, tmp_path):
    out_file = tmp_path / "cells.txt"
    code, out, _ = run(capsys, "enumerate", "--g", "1", "--json", "--out", str(out_file))
    assert code == 0
    data = json.loads(out)
    assert data["cells"] == 8 and data["h"] == 2
    assert {(b["q"], tuple(b["p"])): b["count"] for b in data["bidegrees"]}[(2, (4,))] == 2
    assert out_file.read_text().startswith("slitkit-cells v1 g=1 n=1 m=0 h=2")


def test_point(capsys):
    code, out, _ = run(capsys, "enumerate", "--g", "0", "--json")
    assert code == 0 and json.loads(out)["cells"] == 1


def test_warm_cache_is_byte_identical(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SLITKIT_CACHE", str(tmp_path))
    args = ("homology", "--g", "1", "--m", "1", "--coeff", "z", "--json")
    code1, cold, _ = run(capsys, *args)
    assert any(tmp_path.iterdir())
    code2, warm, _ = run(capsys, *args)
    assert code1 == code2 == 0 and cold == warm


def test_verify_small(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SLITKIT_CACHE", str(tmp_path))
    code, out, _ = run(capsys, "verify", "--suite", "paper-tables", "--max-h", "3", "--json")
    data = json.loads(out)
    assert code == 0 and data["failures"] == 0
    status = {(r["table"], r["index"]): r["status"] for r in data["results"]}
    assert status[("tab:g1", "M_{1,1}^1")] == "pass"
    assert status[("tab:g2", "M_{2,1}^0")] == "skipped"
    assert any(r.get("mode") == "mod-2 reduction" for r in data["results"])
    assert any(tmp_path.iterdir())  # successful runs populate the cache


def test_verify_failure_leaves_cache_alone(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SLITKIT_CACHE", str(tmp_path))
    wrong = FixtureTable("tab:g1", ModuliIndex(1, 1, 0), Ring(0), ((1, ()), (0, (2,))))
    monkeypatch.setattr(fixtures, "ALL_TABLES", (wrong,))
    code, out, _ = run(capsys, "verify", "--max-h", "2")
    assert code == 1
    assert "FAIL" in out and "expected Z_2, computed Z" in out
    assert not any(tmp_path.iterdir())


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == 2


def test_product(capsys, tmp_path):
    left, right = tmp_path / "c.json", tmp_path / "d.json"
    left.write_text(c_rep().to_json())
    right.write_text(d_rep().to_json())
    code, out, _ = run(capsys, "product", "--left", str(left), "--right", str(right))
    assert code == 0
    data = json.loads(out)
    assert data["g"] == 2 and data["degree"] == 11
    assert data["cocycle"] is True and data["class_order"] == 10


def test_product_mod2(capsys, tmp_path):
    path = tmp_path / "d.json"
    path.write_text(d_rep().to_json())
    code, out, _ = run(capsys, "product", "--left", str(path), "--right", str(path), "--coeff", "f2")
    data = json.loads(out)
    assert code == 0 and data["coefficients"] == "F2" and data["nonzero_class"] is True


def test_product_not_cocycle(capsys, tmp_path):
    from slitkit.classes import Cochain, complex_for

    cx = complex_for(ModuliIndex(1, 1, 0))
    bad = Cochain.dual(cx.index, cx.basis(4)[0])
    path = tmp_path / "bad.json"
    path.write_text(bad.to_json())
    code, _, err = run(capsys, "product", "--left", str(path), "--right", str(path))
    assert code == 2 and "not a cocycle" in err


def test_columns(capsys):
    code, out, _ = run(capsys, "columns", "--g", "1", "--m", "1", "--json")
    data = json.loads(out)
    assert code == 0 and data["concentrated"] is True
    assert all(c["concentrated"] for c in data["columns"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "slitkit", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "homology" in proc.stdout
