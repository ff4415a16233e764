import json
from pathlib import Path

import numpy as np
import pytest

from helpers import make_anchorage, make_corridor, points_to_csv
from sealanes.cli import main

HEADER = "MMSI,BaseDateTime,LAT,LON,SOG,COG\n"


@pytest.fixture(scope="module")
def training_csv(tmp_path_factory):
    rng = np.random.default_rng(100)
    vessels = {
        "100000001": make_corridor(rng, 200, 38.0, -74.0, 45.0, 0.3),
        "100000002": make_corridor(rng, 200, 38.6, -74.4, 270.0, 0.3),
        "100000003": make_anchorage(rng, 150, 38.9, -74.9, spread=0.015),
    }
    path = tmp_path_factory.mktemp("data") / "train.csv"
    path.write_text(points_to_csv(vessels))
    return path


@pytest.fixture(scope="module")
def calibration_csv(tmp_path_factory):
    rng = np.random.default_rng(200)
    vessels = {
        "200000001": make_corridor(rng, 150, 38.0, -74.0, 45.0, 0.3),
        "200000002": make_corridor(rng, 150, 38.6, -74.4, 270.0, 0.3),
        "200000003": make_anchorage(rng, 120, 38.9, -74.9, spread=0.015),
    }
    path = tmp_path_factory.mktemp("data") / "cal.csv"
    path.write_text(points_to_csv(vessels))
    return path


@pytest.fixture(scope="module")
def scoring_csv(tmp_path_factory):
    rng = np.random.default_rng(300)
    vessels = {
        "300000001": make_corridor(rng, 80, 38.0, -74.0, 45.0, 0.3),  # in-family
        "300000002": make_corridor(rng, 80, 38.05, -73.95, 225.0, 0.2),  # opposed course
    }
    path = tmp_path_factory.mktemp("data") / "new.csv"
    path.write_text(points_to_csv(vessels))
    return path


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, training_csv, calibration_csv, scoring_csv):
    out = tmp_path_factory.mktemp("out")
    assert main(["cluster", "--input", str(training_csv), "--output-dir", str(out)]) == 0
    assert (
        main(
            [
                "patterns",
                "--clusters",
                str(out / "clusters.json"),
                "--output-dir",
                str(out),
                "--seed",
                "7",
            ]
        )
        == 0
    )
    assert (
        main(
            [
                "calibrate",
                "--model",
                str(out / "patterns.json"),
                "--input",
                str(calibration_csv),
                "--output-dir",
                str(out),
            ]
        )
        == 0
    )
    assert (
        main(
            [
                "score",
                "--model",
                str(out / "patterns.json"),
                "--calibration",
                str(out / "calibration.json"),
                "--input",
                str(scoring_csv),
                "--output-dir",
                str(out),
                "--threads",
                "2",
            ]
        )
        == 0
    )
    return out


class TestClusterCommand:
    def test_artifacts_and_defaults(self, pipeline):
        raw = json.loads((pipeline / "clusters.json").read_text())
        params = raw["moving"]["clustering"]["params"]
        assert params == {
            "eps_dist": 0.02,
            "eps_crs": 90.0,
            "eps_spd": 2.5,
            "n_min": 5,
            "course_mode": "circular",
        }
        assert raw["moving"]["clustering"]["clusters"]
        assert raw["stationary"]["clustering"]["clusters"]
        assert raw["header"]["tool"] == "sealanes"
        assert raw["header"]["input_digests"]

    def test_geojson_layers(self, pipeline):
        geo = json.loads((pipeline / "clusters.geojson").read_text())
        assert geo["type"] == "FeatureCollection"
        kinds = {(f["properties"]["motion"], f["properties"]["noise"]) for f in geo["features"]}
        assert ("moving", False) in kinds
        assert ("stationary", False) in kinds
        coords = geo["features"][0]["geometry"]["coordinates"]
        # GeoJSON is (lon, lat)
        assert -75.0 < coords[0][0] < -73.0
        assert 37.5 < coords[0][1] < 39.5

    def test_empty_csv_fails_cleanly(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text(HEADER)
        code = main(["cluster", "--input", str(empty), "--output-dir", str(tmp_path / "o")])
        assert code != 0
        err = json.loads(capsys.readouterr().err)
        assert "empty dataset" in err["detail"]

    def test_bad_column_mapping_names_column(self, tmp_path, capsys, training_csv):
        code = main(
            [
                "cluster",
                "--input",
                str(training_csv),
                "--output-dir",
                str(tmp_path / "o"),
                "--col-lat",
                "Latitude",
            ]
        )
        assert code != 0
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "SchemaError"
        assert "Latitude" in err["detail"]


class TestPatternsCommand:
    def test_model_has_both_summaries(self, pipeline):
        raw = json.loads((pipeline / "patterns.json").read_text())
        assert raw["version"] == 1
        assert raw["gravity_vectors"]
        assert raw["sampling_points"]
        assert raw["build_params"]["seed"] == 7
        assert raw["build_params"]["delta"] == 0.02

    def test_seed_required(self, pipeline, capsys):
        with pytest.raises(SystemExit):
            main(["patterns", "--clusters", str(pipeline / "clusters.json"), "--output-dir", "x"])


class TestCalibrateCommand:
    def test_calibration_contents(self, pipeline):
        raw = json.loads((pipeline / "calibration.json").read_text())
        assert raw["version"] == 1
        assert len(raw["add_samples"]) > 0
        assert len(raw["rdd_samples"]) == len(raw["cdd_samples"]) > 0
        assert raw["add_samples"] == sorted(raw["add_samples"])
        assert raw["add_threshold"] is not None


class TestScoreCommand:
    def test_summary_sorted_most_anomalous_first(self, pipeline):
        lines = [
            line
            for line in (pipeline / "scores_summary.csv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        header = lines[0].split(",")
        assert header[:5] == ["id", "m_st", "m_mv", "threshold_score", "rank_zscore"]
        rows = [line.split(",") for line in lines[1:]]
        zcol = header.index("rank_zscore")
        zs = [float(r[zcol]) for r in rows if r[zcol]]
        assert zs == sorted(zs)
        # the opposed-course track must rank first (most anomalous)
        assert rows[0][0] == "300000002"
        assert zs[0] < -5.0

    def test_diagnostics_deviations_csv(self, pipeline, tmp_path, scoring_csv):
        out = tmp_path / "diag"
        code = main(
            [
                "score",
                "--model",
                str(pipeline / "patterns.json"),
                "--calibration",
                str(pipeline / "calibration.json"),
                "--input",
                str(scoring_csv),
                "--output-dir",
                str(out),
                "--diagnostics",
            ]
        )
        assert code == 0
        lines = [
            line
            for line in (out / "deviations.csv").read_text().splitlines()
            if line and not line.startswith("#")
        ]
        header = lines[0].split(",")
        assert header == [
            "id", "point", "motion", "add", "rdd", "cdd", "cdd_best_match",
            "nearest_cluster", "nearest_band",
        ]
        assert len(lines) == 1 + 160  # one row per point of both tracks
        moving = [row.split(",") for row in lines[1:] if ",moving," in row]
        i_cdd, i_best = header.index("cdd"), header.index("cdd_best_match")
        assert all(float(r[i_best]) >= float(r[i_cdd]) - 1e-12 for r in moving)
        # the opposed-course track demonstrates the location blindness:
        # best-match stays high while the nearest-lane value is negative
        cross = [r for r in moving if r[0] == "300000002"]
        assert any(float(r[i_cdd]) < 0 < float(r[i_best]) for r in cross)

    def test_scores_json_fields(self, pipeline):
        raw = json.loads((pipeline / "scores.json").read_text())
        assert {s["trajectory_id"] for s in raw["scores"]} == {"300000001", "300000002"}
        for s in raw["scores"]:
            assert len(s["per_point"]) == s["m_st"] + s["m_mv"]

    def test_version_mismatch_refused(self, pipeline, tmp_path, capsys, scoring_csv):
        cal = json.loads((pipeline / "calibration.json").read_text())
        cal["version"] = 99
        bad = tmp_path / "calibration.json"
        bad.write_text(json.dumps(cal))
        code = main(
            [
                "score",
                "--model",
                str(pipeline / "patterns.json"),
                "--calibration",
                str(bad),
                "--input",
                str(scoring_csv),
                "--output-dir",
                str(tmp_path / "o"),
            ]
        )
        assert code != 0
        detail = json.loads(capsys.readouterr().err)["detail"]
        assert "1" in detail and "99" in detail

    def test_unscorable_trajectory_gets_error_row(self, pipeline, tmp_path, capsys):
        # a stationary-only vessel cannot be scored against a model whose
        # calibration has ADD samples but whose track is fine -- instead,
        # craft a calibration with no ADD branch at all
        cal = json.loads((pipeline / "calibration.json").read_text())
        cal["add_samples"] = []
        cal["add_threshold"] = None
        crippled = tmp_path / "calibration.json"
        crippled.write_text(json.dumps(cal))

        rng = np.random.default_rng(9)
        vessels = {
            "400000001": make_anchorage(rng, 30, 38.9, -74.9, spread=0.001),
            "400000002": make_corridor(rng, 30, 38.0, -74.0, 45.0, 0.2),
        }
        csv_path = tmp_path / "mixed.csv"
        csv_path.write_text(points_to_csv(vessels))
        out = tmp_path / "o"
        code = main(
            [
                "score",
                "--model",
                str(pipeline / "patterns.json"),
                "--calibration",
                str(crippled),
                "--input",
                str(csv_path),
                "--output-dir",
                str(out),
            ]
        )
        assert code == 0  # run continues past the failing trajectory
        raw = json.loads((out / "scores.json").read_text())
        assert [s["trajectory_id"] for s in raw["scores"]] == ["400000002"]
        assert raw["errors"][0]["trajectory_id"] == "400000001"
        text = (out / "scores_summary.csv").read_text()
        assert "400000001" in text


class TestSimulateCommand:
    def test_t2_outputs(self, tmp_path):
        out = tmp_path / "sim"
        code = main(
            [
                "simulate",
                "--output-dir",
                str(out),
                "--seed",
                "3",
                "--preset",
                "fig8",
                "--replications",
                "50",
                "--threads",
                "2",
            ]
        )
        assert code == 0
        assert (out / "t2_samples.csv").exists()
        assert (out / "qq_pairs.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["statistic"] == "t2"
        assert summary["summary"]["replications"] == 50
        assert summary["header"]["run_config"]["preset"] == "fig8"

    def test_t1_outputs(self, tmp_path):
        out = tmp_path / "sim"
        code = main(
            [
                "simulate",
                "--output-dir",
                str(out),
                "--seed",
                "3",
                "--statistic",
                "t1",
                "--replications",
                "40",
                "--r-st",
                "200",
                "--m-st",
                "30",
                "--m-mv",
                "0",
                "--r-mv",
                "0",
                "--dist-v",
                "uniform(0,1)",
            ]
        )
        assert code == 0
        assert (out / "t1_samples.csv").exists()
        assert not (out / "qq_pairs.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["summary"]["expected_mean"] == 0.05

    def test_zero_replications_config_error(self, tmp_path, capsys):
        code = main(
            [
                "simulate",
                "--output-dir",
                str(tmp_path / "o"),
                "--seed",
                "3",
                "--preset",
                "fig8",
                "--replications",
                "0",
            ]
        )
        assert code != 0
        assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"

    def test_unknown_preset_lists_choices(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["simulate", "--output-dir", str(tmp_path), "--seed", "1", "--preset", "fig99"])
        assert "fig8" in capsys.readouterr().err


class TestDeterminism:
    def test_rerun_pipeline_byte_identical(
        self, tmp_path, monkeypatch, training_csv, calibration_csv, scoring_csv
    ):
        # identical invocations: relative output paths, distinct work dirs
        outs = []
        for name in ("a", "b"):
            workdir = tmp_path / name
            workdir.mkdir()
            monkeypatch.chdir(workdir)
            out = Path("out")
            main(["cluster", "--input", str(training_csv), "--output-dir", str(out)])
            main(
                ["patterns", "--clusters", str(out / "clusters.json"), "--output-dir", str(out), "--seed", "7"]
            )
            main(
                [
                    "calibrate",
                    "--model",
                    str(out / "patterns.json"),
                    "--input",
                    str(calibration_csv),
                    "--output-dir",
                    str(out),
                ]
            )
            main(
                [
                    "score",
                    "--model",
                    str(out / "patterns.json"),
                    "--calibration",
                    str(out / "calibration.json"),
                    "--input",
                    str(scoring_csv),
                    "--output-dir",
                    str(out),
                    "--threads",
                    "2",
                ]
            )
            main(
                [
                    "simulate",
                    "--output-dir",
                    str(out),
                    "--seed",
                    "11",
                    "--preset",
                    "fig8",
                    "--replications",
                    "30",
                ]
            )
            outs.append(workdir / "out")
        a, b = outs
        files_a = sorted(p.name for p in a.iterdir())
        files_b = sorted(p.name for p in b.iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_score_results_independent_of_thread_count(self, pipeline, tmp_path, scoring_csv):
        payloads = []
        for threads in ("1", "4"):
            out = tmp_path / f"threads{threads}"
            main(
                [
                    "score",
                    "--model",
                    str(pipeline / "patterns.json"),
                    "--calibration",
                    str(pipeline / "calibration.json"),
                    "--input",
                    str(scoring_csv),
                    "--output-dir",
                    str(out),
                    "--threads",
                    threads,
                ]
            )
            raw = json.loads((out / "scores.json").read_text())
            payloads.append((raw["scores"], raw["errors"]))
        assert payloads[0] == payloads[1]
