import json

import pytest

from adaptive_planner import io
from adaptive_planner.cli import EXIT_CONFIG, EXIT_OK, main


def test_gen_world_is_deterministic(tmp_path):
    a, b = tmp_path / "a.geojson", tmp_path / "b.geojson"
    assert main(["gen-world", "--dist", "uniform", "--n", "60", "--seed", "1", "--out", str(a)]) == EXIT_OK
    assert main(["gen-world", "--dist", "uniform", "--n", "60", "--seed", "1", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(io.load_world(a)) == 60


def test_gen_world_empty(tmp_path):
    out = tmp_path / "w.geojson"
    assert main(["gen-world", "--dist", "clustered", "--n", "0", "--out", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["type"] == "FeatureCollection" and data["features"] == []


def test_gen_world_negative_count(tmp_path):
    assert main(["gen-world", "--dist", "uniform", "--n", "-1", "--out", str(tmp_path / "w")]) == EXIT_CONFIG


OUTPUTS = ("mission_log.csv", "map.geojson", "paths.geojson", "metrics.csv")


@pytest.mark.parametrize(
    "flags",
    [
        ["--planner", "adaptive", "--h-cov", "36", "--c-accept", "0.8", "--c-reject", "0.05"],
        ["--planner", "coverage", "--h-cov", "12"],
    ],
)
def test_run_writes_result_set(tmp_path, flags, capsys):
    out = tmp_path / "run"
    assert main(["run", *flags, "--n", "30", "--seed", "2", "--out", str(out)]) == EXIT_OK
    for name in OUTPUTS:
        assert (out / name).is_file()
    metrics = io.read_csv(out / "metrics.csv")[0]
    assert metrics["planner"] == flags[1] and float(metrics["r_diff"]) > 0
    assert (out / "metrics.csv").read_text().startswith("# config: ")
    assert "F1" in capsys.readouterr().out


def test_run_with_missing_field_writes_nothing(tmp_path):
    out = tmp_path / "run"
    code = main(["run", "--field", str(tmp_path / "absent.geojson"), "--out", str(out)])
    assert code == EXIT_CONFIG
    assert not out.exists()


def test_run_reads_world_and_config(tmp_path):
    world = tmp_path / "w.geojson"
    main(["gen-world", "--dist", "clustered", "--n", "20", "--seed", "5", "--out", str(world)])
    cfg = tmp_path / "c.yaml"
    cfg.write_text(f"world: {world}\nplanner: {{h_cov: 24}}\nlevel: good\n")
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    row = io.read_csv(out / "metrics.csv")[0]
    assert row["n_objects"] == "20" and row["level"] == "good" and float(row["h_cov"]) == 24.0


def test_experiment_density_small(tmp_path, capsys):
    out = tmp_path / "d"
    code = main(["experiment", "density", "--seeds", "1", "--max", "40", "--step", "20",
                 "--dist", "uniform", "--svg", "--out", str(out)])
    assert code == EXIT_OK
    summary = io.read_csv(out / "density_summary.csv")
    assert len(summary) == 3 * 2
    assert (out / "density_uniform.svg").is_file()
    assert "uniform" in capsys.readouterr().out


def test_experiment_localization_layout(tmp_path):
    out = tmp_path / "l"
    assert main(["experiment", "localization", "--seeds", "1", "--dist", "uniform", "--n", "20",
                 "--out", str(out)]) == EXIT_OK
    summary = io.read_csv(out / "localization_summary.csv")
    assert len(summary) == 5 * 4 * 2


def test_experiment_rejects_zero_seeds(tmp_path):
    assert main(["experiment", "sweep", "--seeds", "0", "--out", str(tmp_path / "s")]) == EXIT_CONFIG


def test_calibrate_check(capsys):
    assert main(["calibrate", "--check", "--trials", "200"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and "target 0.83" in lines[0]
