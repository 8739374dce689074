import csv
import json

import pytest

from aperiodic.cli import main
from aperiodic.cutproject import fibonacci_scheme


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_gen_writes_points_and_manifest(tmp_path):
    assert run(tmp_path, "gen", "--scheme", "fibonacci", "--region", "0:100", "--gamma", "1/3,2/7") == 0
    pts = rows(tmp_path / "points.csv")
    assert abs(len(pts) - 100 * fibonacci_scheme().density) <= 2
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "gen" and man["seed"] == 0
    assert set(man["versions"]) >= {"numpy", "python"}
    assert "points.csv" in man["outputs"] and (tmp_path / "points.svg").exists()


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["sample", "--ensemble", "dart-rhombus", "--torus", "3x3", "--steps", "500", "--seed", "4", "--out", str(d)]) == 0
    assert (a / "tiles.csv").read_bytes() == (b / "tiles.csv").read_bytes()
    assert (a / "tiles.svg").read_text().count("<polygon") == 2 * 27


def test_diffract_central_peak(tmp_path):
    assert run(tmp_path, "diffract", "--scheme", "fibonacci", "--kmax", "3") == 0
    spec = rows(tmp_path / "spectrum.csv")
    d = fibonacci_scheme().density
    centre = [r for r in spec if float(r["k0"]) == 0.0]
    assert len(centre) == 1 and float(centre[0]["intensity"]) == pytest.approx(d * d, rel=1e-9)


def test_complexity_table(tmp_path):
    assert run(tmp_path, "complexity", "--rule", "fibonacci", "--nmax", "10") == 0
    assert all(int(r["count"]) == int(r["n"]) + 1 for r in rows(tmp_path / "complexity.csv"))


def test_count_and_density(tmp_path):
    assert run(tmp_path, "count", "--torus", "2x2", "3x3") == 0
    assert [int(r["count"]) for r in rows(tmp_path / "counts.csv")] == [32, 1024]
    assert run(tmp_path, "count", "--torus", "2x2", "--density", "dart=0", "--prefix", "d_") == 0
    assert int(rows(tmp_path / "d_counts.csv")[0]["count"]) > 0


def test_inflate_symbolic(tmp_path):
    assert run(tmp_path, "inflate", "--rule", "fibonacci", "--depth", "6", "--seed-tile", "a") == 0
    a, b = "a", "ab"
    for _ in range(5):
        a, b = b, b + a
    assert (tmp_path / "word.txt").read_text().strip() == b


def test_compare_li(tmp_path):
    assert run(tmp_path, "compare-li", "--gamma-a", "1/3,2/7", "--gamma-b", "5/11,1/13", "--radius", "6", "--region", "0:1500") == 0
    assert json.loads((tmp_path / "compare.json").read_text())["equivalent"] is True


def test_validation_exit_code(tmp_path, capsys):
    assert run(tmp_path, "gen", "--scheme", "nope") == 2
    assert "error" in capsys.readouterr().err
    assert run(tmp_path, "gen", "--gamma", "1/2") == 2
    assert main(["no-such-command"]) == 2


def test_bad_descriptor(tmp_path):
    bad = tmp_path / "d.json"
    bad.write_text(json.dumps({"name": "x", "colour": "red"}))
    assert run(tmp_path, "gen", "--descriptor", str(bad)) == 2


def test_computation_failure_exit_code(tmp_path, capsys):
    assert run(tmp_path, "count", "--torus", "5x5") == 1
    assert "computation failed" in capsys.readouterr().err
    assert not (tmp_path / "manifest.json").exists()
