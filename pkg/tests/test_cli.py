import json

import numpy as np
import pytest

from curvemetrics import io
from curvemetrics.cli import main
from curvemetrics.curve import scalar_times
from curvemetrics.shapes import circle, ellipse


@pytest.fixture
def files(tmp_path):
    c = circle(256)
    io.write_curve(tmp_path / "circle.json", c)
    io.write_curve(tmp_path / "ellipse.json", ellipse(128))
    io.write_field(tmp_path / "ex.csv", np.tile([1.0, 0.0], (256, 1)))
    io.write_field(tmp_path / "normal.csv", c.normal)
    io.write_field(tmp_path / "cosn.csv", scalar_times(np.cos(c.theta), c.normal))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- project ----------------------------------------------------------------


def test_project_tan_nor_parts_sum_to_input(files, capsys):
    code, out, _ = run(capsys, "project", "--curve", files / "circle.json",
                       "--field", files / "ex.csv", "--out", files / "proj")
    assert code == 0
    assert json.loads(out)["splitting"] == "tan_nor"
    tan = io.read_field(files / "proj" / "tan.csv", 256)
    nor = io.read_field(files / "proj" / "nor.csv", 256)
    assert np.max(np.abs(tan + nor - io.read_field(files / "ex.csv"))) < 1e-12


def test_project_arc0_on_circle(files, capsys):
    code, _, _ = run(capsys, "project", "--curve", files / "circle.json", "--splitting", "arc0",
                     "--field", files / "cosn.csv", "--out", files / "proj")
    assert code == 0
    c = circle(256)
    arc = io.read_field(files / "proj" / "arc0.csv", 256)
    expected = scalar_times(np.cos(c.theta), c.normal) + scalar_times(np.sin(c.theta), c.tangent)
    assert np.max(np.abs(arc - expected)) < 1e-3


def test_malformed_json_gives_one_line_diagnostic(files, capsys):
    (files / "bad.json").write_text('{"points": [[1, 0], ')
    code, out, err = run(capsys, "project", "--curve", files / "bad.json",
                         "--field", files / "ex.csv")
    assert code == 2
    assert out == ""
    assert len(err.strip().splitlines()) == 1 and "malformed JSON" in err


def test_missing_file_is_a_usage_error(files, capsys):
    code, _, err = run(capsys, "metric", "--curve", files / "nope.json", "--field", files / "ex.csv")
    assert code == 2 and err.startswith("curvemetrics: error:")


def test_degenerate_curve_exit_code(files, capsys):
    pts = circle(16).points.copy()
    pts[5] = pts[4]
    (files / "pinched.json").write_text(json.dumps({"points": pts.tolist()}))
    code, _, _ = run(capsys, "verify", "--curve", files / "pinched.json")
    assert code == 4


# -- metric -----------------------------------------------------------------


def test_metric_l2_normal_on_circle(files, capsys):
    code, out, _ = run(capsys, "metric", "--curve", files / "circle.json",
                       "--field", files / "normal.csv")
    assert code == 0
    assert abs(float(out) - 2 * np.pi) < 1e-3
    # twelve significant digits
    assert out.strip() == f"{float(out):.12g}"


def test_metric_prescribed_arc0(files, capsys):
    code, out, _ = run(capsys, "metric", "--curve", files / "circle.json",
                       "--recipe", "prescribed(arc0,l2)",
                       "--field", files / "normal.csv", "--field2", files / "normal.csv")
    assert code == 0
    assert abs(float(out) - 2 * np.pi) < 1e-2


def test_metric_invalid_recipe(files, capsys):
    code, out, err = run(capsys, "metric", "--curve", files / "circle.json",
                         "--recipe", "sobolev(-1,[1])", "--field", files / "normal.csv")
    assert code == 2 and out == ""
    assert "InvalidCoefficients" in err or "InvalidRecipe" in err


def test_metric_field_grid_mismatch(files, capsys):
    io.write_field(files / "short.csv", np.zeros((8, 2)))
    code, _, _ = run(capsys, "metric", "--curve", files / "circle.json", "--field", files / "short.csv")
    assert code == 2


# -- verify -----------------------------------------------------------------


def test_verify_prescribed_sobolev_passes(files, capsys):
    code, out, _ = run(capsys, "verify", "--curve", files / "ellipse.json",
                       "--recipe", "prescribed(tan_nor,sobolev(1,[1,1]))")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_verify_l2_against_arc0_fails(files, capsys, caplog):
    code, out, _ = run(capsys, "verify", "--curve", files / "ellipse.json",
                         "--recipe", "l2", "--splitting", "arc0")
    assert code == 1
    assert json.loads(out)["pass"] is False
    assert "resampling" in caplog.text


def test_verify_almost_local_passes(files, capsys):
    code, _, _ = run(capsys, "verify", "--curve", files / "ellipse.json",
                     "--recipe", "almost_local(1+kappa^2)")
    assert code == 0


def test_verify_strict_refuses_to_resample(files, capsys):
    code, out, err = run(capsys, "verify", "--curve", files / "ellipse.json",
                         "--splitting", "arc0", "--strict")
    assert code == 3 and out == ""
    assert "NotConstantSpeed" in err


def test_verify_is_deterministic_and_csv(files, capsys):
    argv = ("verify", "--curve", files / "ellipse.json", "--format", "csv", "--seed", "3")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
    lines = first[1].strip().splitlines()
    assert lines[0] == "key,value"
    assert any(line.startswith("pass,") for line in lines)


def test_tolerance_flag_must_be_positive(files, capsys):
    code, _, _ = run(capsys, "verify", "--curve", files / "ellipse.json",
                     "--tol.orthogonality", "-1")
    assert code == 2


def test_config_file_and_flag_precedence(files, capsys, monkeypatch):
    cfg = files / "cfg.json"
    cfg.write_text(json.dumps({"recipe": "l2", "splitting": "arc0"}))
    monkeypatch.setenv("CURVEMETRICS_CONFIG", str(cfg))
    code, _, _ = run(capsys, "verify", "--curve", files / "ellipse.json")
    assert code == 1
    code, _, _ = run(capsys, "verify", "--curve", files / "ellipse.json", "--splitting", "tan_nor")
    assert code == 0
    cfg.write_text(json.dumps({"n": 64}))
    code, _, _ = run(capsys, "verify", "--curve", files / "ellipse.json")
    assert code == 2
    cfg.write_text(json.dumps({"colour": "red"}))
    code, _, err = run(capsys, "verify", "--curve", files / "ellipse.json")
    assert code == 2 and "unknown config keys" in err


# -- geodesic ---------------------------------------------------------------


def test_geodesic_identical_endpoints(files, capsys):
    code, out, _ = run(capsys, "geodesic", "--curve", files / "ellipse.json",
                       "--curve2", files / "ellipse.json", "--m", 4, "--out", files / "geo")
    assert code == 0
    assert json.loads(out)["energy"] == 0.0
    path = io.read_path(files / "geo" / "path.json")
    assert all(np.array_equal(c.points, ellipse(128).points) for c in path.curves)


def test_geodesic_concentric_circles(files, capsys):
    io.write_curve(files / "c0.json", circle(64))
    io.write_curve(files / "c1.json", circle(64, 1.2))
    code, out, _ = run(capsys, "geodesic", "--curve", files / "c0.json", "--curve2", files / "c1.json",
                       "--m", 6, "--out", files / "geo")
    assert code == 0
    rows = io.read_diagnostics(files / "geo" / "diagnostics.csv")
    energies = [r["energy"] for r in rows]
    assert len(energies) >= 2
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    assert io.read_path(files / "geo" / "path.json").m == 6
    assert json.loads(out)["converged"] is True


def test_geodesic_needs_three_curves(files, capsys):
    code, _, err = run(capsys, "geodesic", "--curve", files / "circle.json",
                       "--curve2", files / "circle.json", "--m", 2)
    assert code == 2 and "--m" in err


def test_geodesic_non_convergence_still_writes(files, capsys):
    io.write_curve(files / "c0.json", circle(32))
    io.write_curve(files / "c1.json", ellipse(32, 1.3, 0.9))
    code, out, _ = run(capsys, "geodesic", "--curve", files / "c0.json", "--curve2", files / "c1.json",
                       "--m", 4, "--max-iters", 1, "--tol.geodesic", 1e-15, "--out", files / "geo")
    assert code == 5
    assert json.loads(out)["converged"] is False
    assert (files / "geo" / "path.json").exists()
