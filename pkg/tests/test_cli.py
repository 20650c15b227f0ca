import csv
import json
import math

import pytest

from Torus.Cli import main, parse_angle, parse_grid
from Torus.Errors import EXIT_VALIDATION, InvalidArgument
from Torus.Mesh import load_mesh, validate_triangulation


@pytest.mark.parametrize("text, expected", [
    ("pi/3", math.pi / 3), ("2pi/3", 2 * math.pi / 3), ("2*pi/3", 2 * math.pi / 3),
    ("pi", math.pi), ("-pi/4", -math.pi / 4), ("0.5", 0.5), ("0", 0.0),
])
def test_parse_angle(text, expected):
    assert parse_angle(text) == pytest.approx(expected, abs=1e-15)


def test_parse_angle_rejects_garbage():
    with pytest.raises(InvalidArgument):
        parse_angle("tau/2")


def test_parse_grid():
    xs, ys = parse_grid("-1:1:3,0:2:5")
    assert list(xs) == [-1.0, 0.0, 1.0]
    assert len(ys) == 5


def test_mesh_gen(tmp_path):
    out = tmp_path / "mesh.json"
    assert main(["mesh-gen", "--p", "3", "--q", "5", "--out", str(out)]) == 0
    mesh = load_mesh(str(out))
    assert mesh.n_faces == 30
    assert validate_triangulation(mesh).passed


def test_solve_writes_pattern(tmp_path):
    out = tmp_path / "pattern.json"
    assert main(["solve", "--p", "4", "--q", "4", "--theta", "pi/3,pi/3,pi/3", "--A", "0.5,0.2",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["residuals"]["radius"] <= 1e-12
    assert doc["A"] == [0.5, 0.2]


def test_solve_from_mesh_file(tmp_path):
    mesh_path = tmp_path / "mesh.json"
    main(["mesh-gen", "--p", "3", "--q", "3", "--out", str(mesh_path)])
    out = tmp_path / "pattern.json"
    assert main(["solve", "--mesh", str(mesh_path), "--A=-0.4,0.3", "--out", str(out)]) == 0
    assert json.loads(out.read_text(encoding="utf-8"))["holonomy_kind"] == "affine"


def test_bad_angle_sum_exits_with_validation_code(capsys):
    status = main(["solve", "--theta", "1,1,1"])
    assert status == EXIT_VALIDATION
    assert "INVALID_ANGLES" in capsys.readouterr().err


def test_bad_tolerance_exits_with_validation_code(capsys):
    assert main(["solve", "--tol", "-1"]) == EXIT_VALIDATION
    assert "INVALID_ARGUMENT" in capsys.readouterr().err


def test_develop_writes_svg(tmp_path):
    svg = tmp_path / "layout.svg"
    assert main(["develop", "--A", "0.5,0.2", "--svg", str(svg), "--tile", "2",
                 "--out", str(tmp_path / "pattern.json")]) == 0
    assert svg.read_text(encoding="utf-8").count("<circle") == 4 * 32


def test_periodmap_report(tmp_path):
    out = tmp_path / "hx.json"
    assert main(["periodmap", "--A", "0.5,0.2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert abs(doc["trace"]) <= 1e-10
    assert doc["lam"] > 0
    assert doc["min_energy_margin"] > 0


def test_symplectic_grid_csv(tmp_path):
    out = tmp_path / "grid.csv"
    assert main(["symplectic", "--grid=-1:1:3,-1:1:3", "--out", str(out)]) == 0
    with open(out, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert all(float(r["lam"]) > 1e-6 for r in rows)


def test_winding_prints_degree(capsys):
    assert main(["winding", "--R", "10", "--samples", "64"]) == 0
    assert "winding=1" in capsys.readouterr().out


@pytest.mark.slow
def test_winding_default_resolution(capsys):
    assert main(["winding", "--R", "10"]) == 0
    assert "winding=1" in capsys.readouterr().out


def test_crosscheck_report(tmp_path):
    out = tmp_path / "crosscheck.json"
    assert main(["crosscheck", "--A", "0.5,0.2", "--step", "1e-4", "--out", str(out)]) == 0
    rows = json.loads(out.read_text(encoding="utf-8"))["rows"]
    assert len(rows) == 1
    assert rows[0]["relerr"] <= 1e-4


def test_tri_example(tmp_path):
    out = tmp_path / "tri.json"
    assert main(["tri-example", "--p", "4", "--q", "4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["pullback"][0][1] == pytest.approx(-16.0, abs=1e-9)


def test_outputs_are_deterministic(tmp_path):
    first, second = tmp_path / "one.json", tmp_path / "two.json"
    main(["solve", "--A", "0.5,0.2", "--out", str(first)])
    main(["solve", "--A", "0.5,0.2", "--out", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_non_finite_stretch_exits_with_validation_code(capsys):
    assert main(["solve", "--A", "nan,0.2"]) == EXIT_VALIDATION
    assert "INVALID_ARGUMENT" in capsys.readouterr().err


@pytest.mark.parametrize("flag", ["--mesh", "--theta-file"])
def test_missing_input_file(tmp_path, capsys, flag):
    assert main(["solve", flag, str(tmp_path / "missing.json")]) == EXIT_VALIDATION
    assert "INVALID_ARGUMENT" in capsys.readouterr().err


@pytest.mark.parametrize("flag", ["--mesh", "--theta-file"])
def test_malformed_json_input(tmp_path, capsys, flag):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["solve", flag, str(path)]) == EXIT_VALIDATION
    assert "INVALID_ARGUMENT" in capsys.readouterr().err


def test_mesh_document_missing_fields(tmp_path, capsys):
    path = tmp_path / "mesh.json"
    path.write_text(json.dumps({"faces": []}), encoding="utf-8")
    assert main(["solve", "--mesh", str(path)]) == EXIT_VALIDATION
    assert "INVALID_MESH" in capsys.readouterr().err


@pytest.mark.parametrize("document", [{"angles": [1.0]}, {"theta": [1.0, 2.0]}, {"theta": "pi/3"}, [1.0]])
def test_bad_theta_document(tmp_path, capsys, document):
    path = tmp_path / "theta.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    assert main(["solve", "--theta-file", str(path)]) == EXIT_VALIDATION
    assert "INVALID_ANGLES" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    assert main(["solve", "--out", str(blocker / "pattern.json")]) == EXIT_VALIDATION
    assert "INVALID_ARGUMENT" in capsys.readouterr().err


def test_tri_example_reads_mesh_file(tmp_path):
    mesh_path = tmp_path / "mesh.json"
    main(["mesh-gen", "--p", "3", "--q", "5", "--out", str(mesh_path)])
    out = tmp_path / "tri.json"
    assert main(["tri-example", "--mesh", str(mesh_path), "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["pullback"][0][1] == pytest.approx(-15.0, abs=1e-9)


def test_tri_example_needs_edge_classes(tmp_path, capsys):
    mesh_path = tmp_path / "mesh.json"
    main(["mesh-gen", "--p", "4", "--q", "4", "--out", str(mesh_path)])
    doc = json.loads(mesh_path.read_text(encoding="utf-8"))
    del doc["edge_class"]
    mesh_path.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["tri-example", "--mesh", str(mesh_path)]) == EXIT_VALIDATION
    assert "INVALID_ANGLES" in capsys.readouterr().err
