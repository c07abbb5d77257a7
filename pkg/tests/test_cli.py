import json
import os

from click.testing import CliRunner
import pytest

from pyspl.cli import EXIT_NUMERICAL, EXIT_VALIDATION, cli


def _run(tmp_path, *args):
    runner = CliRunner()
    return runner.invoke(cli, ["--out-dir", str(tmp_path)] + list(args))


def _json(result) -> dict:
    assert result.exit_code == 0, result.output
    return json.loads(result.output.strip().splitlines()[-1])


def test_rect_gamma(tmp_path):
    out = _json(_run(tmp_path, "rect-gamma", "--alpha", "1.5"))
    assert out["gamma1"] == pytest.approx(2.08, abs=0.01)
    assert out["sigma"] > 0
    for name in ("rect_gamma.csv", "rect_gamma_profile.csv", "rect_gamma_signs.svg", "manifest.json"):
        assert os.path.exists(os.path.join(str(tmp_path), name))


def test_rect_gamma_outside_window(tmp_path):
    result = _run(tmp_path, "rect-gamma", "--alpha", "1.0")
    assert result.exit_code == EXIT_NUMERICAL


def test_rect_spec(tmp_path):
    out = _json(_run(tmp_path, "rect-spec", "--alpha", "1.5"))
    assert out["position"] == 5
    assert out["deficiency"] == 1
    assert out["courant_sharp"] is False


def test_rect_spec_degenerate(tmp_path):
    out = _json(_run(tmp_path, "rect-spec", "--alpha-squared", "5/3"))
    assert out["alpha_squared"] == "5/3"
    assert out["courant_sharp"] is True
    assert out["degenerate_with"] == [[3, 1]]
    with open(os.path.join(str(tmp_path), "rect_spec.json")) as stream:
        assert json.load(stream)["multiplicity"] == 2


def test_rect_spec_bad_fraction(tmp_path):
    result = _run(tmp_path, "rect-spec", "--alpha-squared", "1/0")
    assert result.exit_code == EXIT_VALIDATION


def test_disk_radial(tmp_path):
    out = _json(_run(tmp_path, "disk-radial", "--k", "6", "--spectrum"))
    assert out["deficiency"] >= 1
    assert out["negative_form"] < 0
    assert os.path.exists(os.path.join(str(tmp_path), "disk_radial_spectrum.csv"))


def test_plap_eig(tmp_path, cfg_dir):
    out = _json(_run(tmp_path, "plap-eig", "-c", os.path.join(cfg_dir, "square_cross.yaml"), "--n", "12",
                     "--nodal", "4"))
    assert out["positions"][3] == 4
    assert out["values"][3] == pytest.approx(8.0, abs=1e-6)
    assert out["domain_count"] == 4
    with open(os.path.join(str(tmp_path), "manifest.json")) as stream:
        manifest = json.load(stream)
    assert manifest["outputs"] == ["spectrum.csv", "plap_nodal.csv", "plap_nodal.svg", "manifest.json"]


def test_bad_config(tmp_path):
    path = os.path.join(str(tmp_path), "bad.yaml")
    with open(path, "w") as stream:
        stream.write("version: 1\ncolour: red\n")
    result = _run(tmp_path, "plap-eig", "-c", path)
    assert result.exit_code == EXIT_VALIDATION


def test_hessian_index_not_critical(tmp_path, cfg_dir):
    result = _run(tmp_path, "hessian-index", "-c", os.path.join(cfg_dir, "staggered_cross.yaml"), "--n", "10",
                  "--basis", "2")
    assert result.exit_code == EXIT_NUMERICAL


def test_had_check(tmp_path):
    out = _json(_run(tmp_path, "had-check", "--family", "rect-width", "--n", "12"))
    assert out["relative_difference"] < 1e-5
    assert out["steps"] == [1e-3, 5e-4]


def test_unknown_command(tmp_path):
    result = _run(tmp_path, "no-such-command")
    assert result.exit_code == 2


def test_hessian_index_degenerate_cross(tmp_path, cfg_dir):
    out = _json(_run(tmp_path, "hessian-index", "-c", os.path.join(cfg_dir, "rect_cross_degenerate.yaml"),
                     "--n", "10", "--basis", "2"))
    assert out["basis_size"] == 8
    assert isinstance(out["zero"], int)
    assert out["zero"] >= 0
    assert out["negative"] + out["zero"] <= out["basis_size"]
    assert out["degenerate_with_22"] == [[3, 1]]
    assert os.path.exists(os.path.join(str(tmp_path), "dtn_gram.csv"))
