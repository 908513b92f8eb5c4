import json

import pytest

from curved_two_body.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, SWEEP_HEADER, main
from curved_two_body.integrator import TRAJECTORY_HEADER


def _records(capsys) -> list[dict]:
    return [json.loads(line) for line in capsys.readouterr().out.splitlines()]


def test_find_re_l2(capsys):
    assert main(["find-re", "--geometry", "l2", "--mu", "0.5", "--q", "1.0"]) == EXIT_OK
    records = _records(capsys)
    assert [r["family"] for r in records] == ["elliptic_l2", "hyperbolic_l2"]
    assert all(r["residual"] < 1e-10 for r in records)


def test_find_re_without_solution(capsys):
    assert main(["find-re", "--geometry", "s2", "--mu", "0.5", "--q", "1.5707963"]) == EXIT_OK
    (record,) = _records(capsys)
    assert "no_solution" in record


def test_find_re_family(capsys):
    assert main(["find-re", "--geometry", "s2", "--mu", "1", "--family", "right_angled", "--theta", "0.7"]) == EXIT_OK
    (record,) = _records(capsys)
    assert record["family"] == "right_angled"
    assert record["q"] == pytest.approx(1.5707963267948966)


def test_family_on_wrong_geometry(capsys):
    assert main(["find-re", "--geometry", "l2", "--family", "acute", "--q", "1.0"]) == EXIT_VALIDATION


def test_simulate_to_stdout(capsys):
    argv = ["simulate", "--geometry", "s2", "--mu", "0.5", "--m-z", "1.0", "--q", "1.0", "--t-end", "0"]
    assert main(argv) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(TRAJECTORY_HEADER)
    assert len(lines) == 2
    assert lines[1].startswith("0,0,0,1,1,0,")


def test_simulate_to_file(capsys, tmp_path):
    argv = ["simulate", "--geometry", "l2", "--m-z", "1.5", "--q", "1.0", "--t-end", "1", "-n", "11", "-o", str(tmp_path)]
    assert main(argv) == EXIT_OK
    (record,) = _records(capsys)
    assert record["samples"] == 11
    assert record["energy_drift"] < 1e-8
    assert (tmp_path / "trajectory.csv").is_file()


def test_stability(capsys):
    assert main(["stability", "--geometry", "s2", "--mu", "1", "--q", "1.0471975511965976"]) == EXIT_OK
    (record,) = _records(capsys)
    assert record["geometry"] == "s2"
    assert record["verdict"] in ("elliptic", "linearly_unstable", "definite_stable", "degenerate")


def test_kam(capsys):
    assert main(["kam", "--geometry", "s2", "--mu", "0.3", "--q", "0.5"]) == EXIT_OK
    (record,) = _records(capsys)
    assert record["kam"] == "nonlinearly_stable"


def test_kam_on_unstable_re(capsys):
    assert main(["kam", "--geometry", "l2", "--mu", "1", "--family", "elliptic_l2", "--q", "2.0"]) == EXIT_NUMERICAL


def test_sweep(capsys, tmp_path):
    argv = ["sweep", "--geometry", "l2", "--mu", "0.5", "--grid-points", "5", "-o", str(tmp_path)]
    assert main(argv) == EXIT_OK
    (record,) = _records(capsys)
    assert record["rows"] == 10
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert len(lines) == 11


def test_diagram(capsys, tmp_path):
    argv = [
        "diagram", "--geometry", "l2", "--mu", "0.5", "--grid-points", "100",
        "--scatter", "20", "--svg", "-o", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    (record,) = _records(capsys)
    for name in ("branches.csv", "region.csv", "scatter.csv", "energy_momentum.svg", "region.svg"):
        assert (tmp_path / name).is_file()
    assert record["singular"]["hyperbolic_l2"] == []


def test_reconstruct(capsys, tmp_path):
    argv = [
        "reconstruct", "--geometry", "s2", "--mu", "1", "--family", "isosceles", "--q", "1.0",
        "--t-end", "1", "-n", "101", "-o", str(tmp_path),
    ]
    assert main(argv) == EXIT_OK
    (record,) = _records(capsys)
    assert record["chart"] == "sphere"
    assert record["group_drift"] < 1e-9
    assert "angular_velocity_residual" in record
    assert (tmp_path / "ambient.csv").is_file()


def test_fig10_needs_sphere(capsys, tmp_path):
    assert main(["fig10", "--geometry", "l2", "-o", str(tmp_path)]) == EXIT_VALIDATION


@pytest.mark.parametrize("argv", [
    ["find-re", "--mu", "-1"],
    ["find-re", "--mu", "0.5", "--mu1", "1", "--mu2", "2"],
    ["simulate", "--tol", "1e-20"],
    ["simulate", "--geometry", "s2", "--q", "4.0"],
])
def test_validation_exit_code(argv, capsys):
    assert main(argv) == EXIT_VALIDATION


def test_missing_config_file(tmp_path, capsys):
    assert main(["find-re", "--config", str(tmp_path / "absent.env")]) == EXIT_VALIDATION
    assert "not found" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.env"
    path.write_text("GEOMETRY=l2\nMU=0.5\nQ=1.0\n")
    assert main(["find-re", "--config", str(path)]) == EXIT_OK
    assert len(_records(capsys)) == 2


def test_unknown_log_level(capsys):
    assert main(["find-re", "--geometry", "l2", "--q", "1.0", "--log-level", "LOUD"]) == EXIT_VALIDATION
    assert "LOUD" in capsys.readouterr().err


def test_unknown_log_level_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("CURVED_TWO_BODY_LOG_LEVEL", "chatty")
    assert main(["find-re", "--geometry", "l2", "--q", "1.0"]) == EXIT_VALIDATION
