import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from tropmeasure import measure as ms
from tropmeasure.cli import main, parse_scenario, scenario_to_dict
from tropmeasure.lattice import BilinearForm, Lattice


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def elliptic(tmp_path, capsys):
    path = tmp_path / "ell.json"
    code, _, _ = run(capsys, "gen-delaunay", "--lattice", "1", "--form", "3", "--shift", "1/10007", "--k", "2", "--out", str(path))
    assert code == 0
    return path


def test_validate_elliptic(elliptic, capsys):
    code, out, _ = run(capsys, "validate", "--scenario", str(elliptic))
    assert code == 0
    assert "covering: ok (1 = 1)" in out and "face-to-face: ok" in out


def test_measure_elliptic(elliptic, capsys, tmp_path):
    csv_path = tmp_path / "m.csv"
    code, out, _ = run(capsys, "measure", "--scenario", str(elliptic), "--csv", str(csv_path))
    assert code == 0 and "total mass: 3" in out
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "stratum,dim,density,support"
    assert len(rows) == 3 and all(r.split(",")[2] == "3" for r in rows[1:])


def test_reports_are_deterministic(elliptic, capsys):
    first = run(capsys, "pushforward", "--scenario", str(elliptic))
    second = run(capsys, "pushforward", "--scenario", str(elliptic))
    assert first == second and first[0] == 0


def test_limit_table(elliptic, capsys):
    doc = json.loads(elliptic.read_text())
    sid = next(s["id"] for s in doc["skeleton"]["strata"] if len(s["vertices"]) == 2)
    code, out, _ = run(capsys, "limit", "--scenario", str(elliptic), "--stratum", sid, "--omega", "1/10;3/10", "--m-list", "1,2,4")
    assert code == 0 and "empirical C" in out
    assert out.splitlines()[2].split()[:3] == ["m", "mu_m", "mu"]


def test_gen_product_matches_pushforward(tmp_path, capsys):
    path = tmp_path / "prod.json"
    code, out, _ = run(capsys, "gen-product", "--b", "1", "--n", "1", "--m", "1", "--deg", "2", "--out", str(path))
    assert code == 0
    closed = {line.split()[1] for line in out.splitlines()[4:] if line.strip()}
    code, out2, _ = run(capsys, "pushforward", "--scenario", str(path))
    pushed = {line.split()[1] for line in out2.splitlines()[3:] if line[:1].isdigit()}
    assert code == 0 and pushed == closed


def test_round_trip():
    scn = ms.haar_scenario(Lattice([(2, 1), (0, 1)]), BilinearForm([[2, 1], [1, 2]]), 1, k=2)
    doc = scenario_to_dict(scn)
    again, _ = parse_scenario(json.loads(json.dumps(doc)))
    assert scenario_to_dict(again) == doc
    assert ms.canonical_measure(again).total_mass() == ms.canonical_measure(scn).total_mass()


def test_symbolic_offsets_round_trip(tmp_path, capsys):
    scn = ms.haar_scenario(Lattice.standard(1), BilinearForm([[1]]), 0, k=2)
    doc = scenario_to_dict(scn)
    doc["symbols"] = {"t": "0.2718281828"}
    doc["model_function"] = {
        "form": 0,
        "z0": ["1/2"],
        "cells": [{"vertices": [["-1/2"], ["1/2"]], "slope": ["0"], "offset": "t"}],
    }
    path = tmp_path / "sym.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", "--scenario", str(path))
    assert code == 0, out
    code, out, _ = run(capsys, "dualize", "--scenario", str(path))
    assert code == 0 and "(0);(1)" in out


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "measure", "--scenario", str(bad))[0] == 2
    assert run(capsys, "measure", "--scenario", str(tmp_path / "missing.json"))[0] == 2
    scn = ms.haar_scenario(Lattice.standard(1), BilinearForm([[1]]), 0, k=2)
    doc = scenario_to_dict(scn)
    doc["tropical_map"][next(iter(doc["tropical_map"]))]["offset"] = ["1/3"]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", "--scenario", str(broken))
    assert code == 1 and "FAIL" in out


def test_plurisimplex_command(tmp_path, capsys):
    path = tmp_path / "block.json"
    path.write_text(json.dumps({"plurisimplex": {"levels": [[{"size": 1, "const": "1"}, {"size": 1, "const": "1"}]]}}))
    code, out, _ = run(capsys, "plurisimplex", "--scenario", str(path))
    assert code == 0 and "strata by codimension: 0:4, 1:4, 2:1" in out


def test_timing_goes_to_stderr(elliptic, capsys):
    code, out, err = run(capsys, "strata", "--scenario", str(elliptic), "--timing")
    assert code == 0 and "elapsed" in err and "elapsed" not in out


def test_module_entry_point(elliptic):
    proc = subprocess.run(
        [sys.executable, "-m", "tropmeasure", "measure", "--scenario", str(elliptic)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and "density" in proc.stdout
    assert F(proc.stdout.split("total mass: ")[1].split()[0]) == 3
