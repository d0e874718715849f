"""
Tests for the bmv command line.
"""

import json

import numpy as np
import pytest

from bmv.cli import build_parser, main


@pytest.fixture
def swap_files(write_matrix):
    return (
        write_matrix("a.json", [[0.0, 1.0], [1.0, 0.0]]),
        write_matrix("b.json", np.diag([1.0, 2.0])),
    )


def test_parser_commands():
    parser = build_parser()
    args = parser.parse_args(["density", "--random", "n=3", "--seed", "7", "--tol", "quad=1e-8"])
    assert args.command == "density"
    assert args.random == 3
    assert args.seed == 7
    assert args.tol == ["quad=1e-8"]
    with pytest.raises(SystemExit):
        parser.parse_args(["poly"])


def test_no_command_prints_help(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().out


@pytest.mark.integration
def test_density_writes_csv(swap_files, temp_dir, capsys):
    a, b = swap_files
    out_dir = temp_dir / "out"
    assert main(["density", "--matrix-a", a, "--matrix-b", b, "--out-dir", str(out_dir)]) == 0
    density = (out_dir / "density.csv").read_text().splitlines()
    assert density[0].startswith("# config: ")
    rows = [line for line in density if not line.startswith("#")]
    assert rows[0] == "s,w"
    assert len(rows) == 21
    assert (out_dir / "atoms.csv").exists()
    assert "Atoms" in capsys.readouterr().out


@pytest.mark.integration
def test_density_dump_contour(swap_files, temp_dir):
    a, b = swap_files
    path = temp_dir / "branches.csv"
    args = ["density", "--matrix-a", a, "--matrix-b", b, "--out-dir", str(temp_dir)]
    assert main(args + ["--dump-contour", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "k,re_zeta,im_zeta,re_lambda_1,im_lambda_1,re_lambda_2,im_lambda_2"
    assert len(lines) >= 257


@pytest.mark.integration
def test_density_json_original_coordinates(swap_files, temp_dir):
    a, b = swap_files
    out = temp_dir / "measure.json"
    assert main(["density", "--matrix-a", a, "--matrix-b", b, "--original", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["coordinates"] == "original"
    assert [atom["s"] for atom in data["atoms"]] == pytest.approx([1.0, 2.0])


def test_malformed_matrix_file(temp_dir, write_matrix, capsys):
    bad = temp_dir / "bad.json"
    bad.write_text('{"n": 2,\n "re": [[1, 0],\n [0, 1]\n')
    b = write_matrix("b.json", np.eye(2))
    assert main(["atoms", "--matrix-a", str(bad), "--matrix-b", b]) == 2
    assert "bad.json" in capsys.readouterr().err


def test_non_hermitian_input(write_matrix, capsys):
    a = write_matrix("a.json", [[0.0, 1.0], [0.0, 0.0]])
    b = write_matrix("b.json", np.eye(2))
    assert main(["atoms", "--matrix-a", a, "--matrix-b", b]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_inputs():
    assert main(["atoms"]) == 2
    assert main(["atoms", "--random", "2", "--matrix-a", "a.json"]) == 2


def test_unknown_tolerance():
    assert main(["atoms", "--random", "2", "--tol", "tau_nothing=1"]) == 2


def test_atoms_prints_weights(write_matrix, capsys):
    a = write_matrix("a.json", np.diag([1.0, 0.0]))
    b = write_matrix("b.json", np.diag([1.0, 2.0]))
    assert main(["atoms", "--matrix-a", a, "--matrix-b", b, "--original"]) == 0
    out = capsys.readouterr().out
    assert "Atoms" in out
    assert "2.7182818284590" in out


@pytest.mark.integration
def test_verify_diagonal_passes(write_matrix, temp_dir):
    a = write_matrix("a.json", np.diag([0.3, -0.4]))
    b = write_matrix("b.json", np.diag([1.0, 2.5]))
    assert main(["verify", "--matrix-a", a, "--matrix-b", b, "--json", "--out-dir", str(temp_dir)]) == 0
    data = json.loads((temp_dir / "report.json").read_text())
    assert data["all_passed"] is True
    assert len(data["monotonicity"]) == 5


@pytest.mark.integration
def test_verify_random_is_deterministic(temp_dir):
    first, second = temp_dir / "first.json", temp_dir / "second.json"
    assert main(["verify", "--random", "n=3", "--seed", "7", "--out", str(first)]) == 0
    assert main(["verify", "--random", "n=3", "--seed", "7", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.integration
def test_node_ceiling_is_numeric_failure(swap_files, capsys):
    a, b = swap_files
    code = main(["density", "--matrix-a", a, "--matrix-b", b, "--nodes", "256", "--max-nodes", "256"])
    assert code == 3
    assert "error" in capsys.readouterr().err


def test_poly_example(write_matrix, capsys):
    a = write_matrix("a.json", np.zeros((2, 2)))
    b = write_matrix("b.json", np.eye(2))
    assert main(["poly", "--matrix-a", a, "--matrix-b", b, "--p", "3"]) == 0
    assert capsys.readouterr().out.strip() == "0 0 0 2"


def test_poly_json_to_out_dir(write_matrix, temp_dir):
    a = write_matrix("a.json", np.zeros((2, 2)))
    b = write_matrix("b.json", np.eye(2))
    args = ["poly", "--matrix-a", a, "--matrix-b", b, "--p", "3", "--json"]
    assert main(args + ["--out-dir", str(temp_dir)]) == 0
    data = json.loads((temp_dir / "coefficients.json").read_text())
    assert data["p"] == 3
    assert data["coefficients"] == pytest.approx([0.0, 0.0, 0.0, 2.0])
    assert data["nonnegative"] is True


def test_poly_rejects_indefinite_b(write_matrix):
    a = write_matrix("a.json", np.eye(2))
    b = write_matrix("b.json", np.diag([1.0, -1.0]))
    assert main(["poly", "--matrix-a", a, "--matrix-b", b, "--p", "2"]) == 2


def test_poly_random_psd(temp_dir):
    out = temp_dir / "coefficients.csv"
    assert main(["poly", "--random", "3", "--psd", "--seed", "4", "--p", "4", "--out", str(out)]) == 0
    rows = [line for line in out.read_text().splitlines() if not line.startswith("#")]
    assert rows[0] == "k,coefficient"
    assert len(rows) == 6


def test_config_show_and_write(temp_dir, capsys):
    assert main(["config", "--points", "8", "--tol", "laplace=1e-7"]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["points_per_interval"] == 8
    assert shown["tau_laplace"] == 1e-7

    path = temp_dir / "bmv.json"
    assert main(["config", "--seed", "3", "--write", str(path)]) == 0
    assert json.loads(path.read_text())["seed"] == 3


def test_config_file_from_environment(temp_dir, capsys, monkeypatch):
    path = temp_dir / "bmv.json"
    path.write_text(json.dumps({"t_count": 9}))
    monkeypatch.setenv("BMV_CONFIG", str(path))
    assert main(["config"]) == 0
    assert json.loads(capsys.readouterr().out)["t_count"] == 9


def test_unwritable_output(swap_files, temp_dir, mocker, capsys):
    mocker.patch(
        "bmv.exporters.json_exporter.open", create=True, side_effect=OSError(13, "Permission denied")
    )
    a, b = swap_files
    assert main(["atoms", "--matrix-a", a, "--matrix-b", b, "--out", str(temp_dir / "m.json")]) == 2
    assert "Permission denied" in capsys.readouterr().err
