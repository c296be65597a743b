"""
Integration tests for the command line: every subcommand end to end,
exit codes and reproducibility of the written output.
"""
import json

import numpy as np
import pandas as pd
import pytest

from src.cli.commands import CommandResult
from src.cli.commands import weights as weights_command
from src.cli.main import build_parser
from src.core import EXIT_COMPUTATION, EXIT_CONFIG, EXIT_IO, config


@pytest.mark.integration
class TestWeightsCommand:
    """Test `weights`."""

    def test_edges_to_row_normalized_list(self, run_cli, worked_files, tmp_path):
        # Arrange
        out = tmp_path / "W.csv"

        # Act
        result = run_cli("weights", "--edges", worked_files["edges"], "--symmetrize", "--normalize", "row", "--out", out)

        # Assert
        assert result.code == 0
        assert result.payload["n"] == 5
        assert result.payload["nnz"] == 12
        assert result.payload["normalization"] == "row"
        assert result.payload["islands"]["count"] == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "src,dst,weight"
        assert lines[1] == "1,2,0.5"
        assert len(lines) == 13

    def test_units_file_reports_islands(self, run_cli, worked_files, write_csv, tmp_path):
        # Arrange
        units = write_csv("units.csv", pd.DataFrame({"id": ["1", "2", "3", "4", "5", "6"]}))

        # Act
        result = run_cli(
            "weights", "--edges", worked_files["edges"], "--symmetrize", "--units", units,
            "--out", tmp_path / "W.csv",
        )

        # Assert
        assert result.code == 0
        assert result.payload["islands"]["island_ids"] == ["6"]

    def test_knn_from_coordinates(self, run_cli, write_csv, tmp_path):
        # Arrange
        coords = write_csv("coords.csv", pd.DataFrame({"id": ["a", "b", "c", "d"], "x": [0, 1, 2, 3], "y": [0, 0, 0, 0]}))

        # Act
        result = run_cli("weights", "--coords", coords, "--knn", "1", "--out", tmp_path / "W.csv")

        # Assert
        assert result.code == 0
        assert (tmp_path / "W.csv").read_text().splitlines()[1:] == ["a,b,1.0", "b,a,1.0", "c,b,1.0", "d,c,1.0"]

    def test_invalid_k_is_a_computation_error(self, run_cli, write_csv, tmp_path):
        # Arrange
        coords = write_csv("coords.csv", pd.DataFrame({"id": ["a", "b"], "x": [0, 1], "y": [0, 0]}))

        # Act
        result = run_cli("weights", "--coords", coords, "--knn", "0", "--out", tmp_path / "W.csv")

        # Assert
        assert result.code == EXIT_COMPUTATION
        assert result.error["error_code"] == "INVALID_K"

    def test_out_is_required(self, run_cli, worked_files):
        # Act
        result = run_cli("weights", "--edges", worked_files["edges"])

        # Assert
        assert result.code == EXIT_CONFIG
        assert result.error["error_code"] == "CONFIG_ERROR"

    def test_missing_edge_file(self, run_cli, tmp_path):
        # Act
        result = run_cli("weights", "--edges", tmp_path / "absent.csv", "--out", tmp_path / "W.csv")

        # Assert
        assert result.code == EXIT_IO
        assert result.error["error_code"] == "IO_ERROR"


@pytest.mark.integration
class TestFitCommand:
    """Test `fit`."""

    def test_single_model(self, run_cli, fit_args):
        # Act
        result = run_cli(*fit_args("--model", "sar"))

        # Assert
        assert result.code == 0
        payload = result.payload
        assert payload["n"] == 400
        assert payload["normalization"] == "row"
        (model,) = payload["models"]
        assert model["spec"]["kind"] == "SAR"
        assert model["rho"] == pytest.approx(0.5, abs=0.15)
        assert model["lr_vs_ols"]["df"] == 1
        assert model["lr_vs_ols"]["p_value"] < 0.01
        assert [row["name"] for row in model["coefficients"]] == ["(Intercept)", "x1", "x2", "rho", "sigma2"]

    def test_all_models_in_fixed_order(self, run_cli, fit_args):
        # Act
        result = run_cli(*fit_args("--model", "all"))

        # Assert
        assert result.code == 0
        models = result.payload["models"]
        assert [m["spec"]["kind"] for m in models] == ["OLS", "SAR", "SEM", "SLX", "SDM", "SDEM"]
        assert models[0]["lr_vs_ols"] is None
        assert models[4]["lr_spatial"]["restricted_model"] == "SLX"
        aic = {m["spec"]["kind"]: m["aic"] for m in models}
        assert aic["SAR"] < aic["OLS"]

    def test_output_is_byte_identical_across_runs_and_threads(self, run_cli, fit_args):
        # Act
        first = run_cli(*fit_args("--model", "all", "--threads", "1"))
        second = run_cli(*fit_args("--model", "all", "--threads", "1"))
        parallel = run_cli(*fit_args("--model", "all", "--threads", "8"))

        # Assert
        assert first.code == second.code == parallel.code == 0
        assert first.stdout == second.stdout
        assert first.stdout == parallel.stdout

    def test_text_table(self, run_cli, fit_args):
        # Act
        result = run_cli(*fit_args("--model", "sem", "--format", "text"))

        # Assert
        assert result.code == 0
        header = result.stdout.splitlines()[0]
        assert header.split() == ["term", "SEM"]
        assert "lambda" in result.stdout
        assert "LR vs OLS" in result.stdout

    def test_standardize_and_lag_subset(self, run_cli, fit_args):
        # Act
        result = run_cli(*fit_args("--model", "slx", "--standardize", "--lag-covariates", "x2"))

        # Assert
        assert result.code == 0
        model = result.payload["models"][0]
        assert result.payload["standardized"] is True
        assert model["lagged_names"] == ["x2"]
        assert "W x1" not in model["param_names"]

    def test_absent_outcome_column(self, run_cli, sar_files):
        # Act
        result = run_cli("fit", "--data", sar_files["data"], "--outcome", "price", "--covariates", "x1", "--model", "ols")

        # Assert
        assert result.code == EXIT_CONFIG
        assert result.error["details"]["missing"] == ["price"]

    def test_spatial_model_needs_weights(self, run_cli, sar_files):
        # Act
        result = run_cli("fit", "--data", sar_files["data"], "--outcome", "y", "--covariates", "x1", "--model", "sar")

        # Assert
        assert result.code == EXIT_CONFIG

    def test_raw_weights_rejected(self, run_cli, sar_files, write_csv, lattice_row):
        # Arrange
        binary = pd.DataFrame([(src, dst) for src, dst, _ in lattice_row.to_edges()], columns=["src", "dst"])
        weights = write_csv("binary.csv", binary)

        # Act
        result = run_cli(
            "fit", "--data", sar_files["data"], "--outcome", "y", "--covariates", "x1,x2",
            "--id-column", "id", "--weights", weights, "--model", "sar",
        )

        # Assert
        assert result.code == EXIT_COMPUTATION
        assert result.error["error_code"] == "REQUIRES_NORMALIZED_W"

    def test_raw_weights_normalized_on_request(self, run_cli, sar_files, write_csv, lattice_row):
        # Arrange
        binary = pd.DataFrame([(src, dst) for src, dst, _ in lattice_row.to_edges()], columns=["src", "dst"])
        weights = write_csv("binary.csv", binary)

        # Act
        result = run_cli(
            "fit", "--data", sar_files["data"], "--outcome", "y", "--covariates", "x1,x2",
            "--id-column", "id", "--weights", weights, "--model", "sar", "--normalize", "row",
        )

        # Assert
        assert result.code == 0

    def test_unknown_unit_in_weights(self, run_cli, sar_files, write_csv):
        # Arrange
        weights = write_csv("stray.csv", pd.DataFrame({"src": ["0", "9999"], "dst": ["1", "0"]}))

        # Act
        result = run_cli(
            "fit", "--data", sar_files["data"], "--outcome", "y", "--covariates", "x1",
            "--id-column", "id", "--weights", weights, "--model", "slx",
        )

        # Assert
        assert result.code == EXIT_CONFIG
        assert result.error["error_code"] == "ID_MISMATCH"

    def test_bad_rho_bounds(self, run_cli, fit_args):
        result = run_cli(*fit_args("--model", "sar", "--rho-bounds", "0.5"))
        assert result.code == EXIT_CONFIG


@pytest.mark.integration
class TestDiagnoseCommand:
    """Test `diagnose`."""

    def test_checkerboard_variable(self, run_cli, worked_files):
        # Act
        result = run_cli(
            "diagnose", "--data", worked_files["data"], "--id-column", "id", "--weights", worked_files["edges"],
            "--variable", "y", "--permutations", "99", "--seed", "4", "--normalize", "row",
        )

        # Assert
        assert result.code == 0
        (record,) = result.payload["moran"]
        assert record["target"] == "y"
        assert record["I"] == pytest.approx(-1.0)
        assert record["n_permutations"] == 99
        assert record["seed"] == 4

    def test_permutation_result_independent_of_threads(self, run_cli, sar_files):
        # Arrange
        args = [
            "diagnose", "--data", sar_files["data"], "--id-column", "id", "--weights", sar_files["weights"],
            "--variable", "y", "--permutations", "999", "--seed", "17",
        ]

        # Act
        serial = run_cli(*args, "--threads", "1")
        parallel = run_cli(*args, "--threads", "8")

        # Assert
        assert serial.code == parallel.code == 0
        assert serial.stdout == parallel.stdout
        assert serial.payload["moran"][0]["p_value"] == pytest.approx(1 / 1000)

    def test_lm_selection(self, run_cli, sar_files):
        # Act
        result = run_cli(
            "diagnose", "--data", sar_files["data"], "--id-column", "id", "--weights", sar_files["weights"],
            "--lm", "--outcome", "y", "--covariates", "x1,x2",
        )

        # Assert
        assert result.code == 0
        assert result.payload["selection"]["model"] == "SAR"
        assert set(result.payload["lm"]) == {"lm_lag", "lm_err", "robust_lm_lag", "robust_lm_err", "sarma"}

    def test_residuals_of_saved_fits(self, run_cli, fit_args, sar_files, tmp_path):
        # Arrange
        fits = tmp_path / "fits.json"
        assert run_cli(*fit_args("--model", "all", "--out", fits)).code == 0

        # Act
        result = run_cli(
            "diagnose", "--weights", sar_files["weights"], "--residuals-of", fits,
            "--permutations", "199", "--format", "text",
        )

        # Assert
        assert result.code == 0
        lines = [line for line in result.stdout.splitlines() if line.startswith("Moran's I")]
        assert len(lines) == 6
        assert "OLS residuals" in lines[0]

    def test_nothing_to_do(self, run_cli, sar_files):
        result = run_cli("diagnose", "--weights", sar_files["weights"])
        assert result.code == EXIT_CONFIG


@pytest.mark.integration
class TestImpactsCommand:
    """Test `impacts` on fits written by `fit`."""

    @pytest.fixture
    def fits_file(self, run_cli, fit_args, tmp_path):
        path = tmp_path / "fits.json"
        assert run_cli(*fit_args("--model", "all", "--out", path)).code == 0
        return path

    def test_point_impacts_of_every_model(self, run_cli, fits_file, sar_files):
        # Act
        result = run_cli("impacts", "--fit", fits_file, "--weights", sar_files["weights"])

        # Assert
        assert result.code == 0
        results = {r["model"]: r for r in result.payload["results"]}
        assert results["OLS"]["impact_type"] == "none"
        assert results["SLX"]["impact_type"] == "local"
        sar = results["SAR"]
        fits = json.loads(fits_file.read_text())["models"]
        beta = fits[1]["beta"][0]
        assert sar["impacts"][0]["total"] == pytest.approx(beta / (1 - sar["rho"]), rel=1e-8)

    def test_simulated_dispersion_is_reproducible(self, run_cli, fits_file, sar_files):
        # Arrange
        args = ["impacts", "--fit", fits_file, "--weights", sar_files["weights"], "--model", "sdm",
                "--draws", "300", "--seed", "5"]

        # Act
        first = run_cli(*args, "--threads", "1")
        second = run_cli(*args, "--threads", "8")

        # Assert
        assert first.code == 0
        assert first.stdout == second.stdout
        row = first.payload["results"][0]["impacts"][0]
        assert row["sd_direct"] > 0
        assert row["q025_total"] < row["total"] < row["q975_total"]

    def test_unit_breakdown(self, run_cli, fits_file, sar_files):
        # Act
        result = run_cli(
            "impacts", "--fit", fits_file, "--weights", sar_files["weights"], "--model", "sar",
            "--unit-impacts", "x1",
        )

        # Assert
        assert result.code == 0
        units = result.payload["results"][0]["units"]
        assert len(units["own"]) == 400
        assert set(units) == {"covariate", "ids", "own", "on", "from"}

    def test_sar_needs_weights(self, run_cli, fits_file):
        result = run_cli("impacts", "--fit", fits_file, "--model", "sar")
        assert result.code == EXIT_CONFIG

    def test_local_models_without_weights(self, run_cli, fits_file):
        # Act
        result = run_cli("impacts", "--fit", fits_file, "--model", "slx", "--format", "text")

        # Assert
        assert result.code == 0
        assert result.stdout.startswith("SLX (local spillovers)")

    def test_too_few_draws(self, run_cli, fits_file, sar_files):
        result = run_cli("impacts", "--fit", fits_file, "--weights", sar_files["weights"], "--draws", "10")
        assert result.code == EXIT_COMPUTATION

    def test_fit_with_dropped_islands_round_trips(self, run_cli, write_csv, tmp_path):
        """Units dropped as islands at fit time are dropped again when the weights are reloaded."""
        # Arrange
        rng = np.random.default_rng(8)
        ids = [str(i) for i in range(1, 10)]
        chain = [(str(i), str(i + 1)) for i in range(1, 7)]
        edges = pd.DataFrame(chain + [(b, a) for a, b in chain] + [("7", "8")], columns=["src", "dst"])
        data = pd.DataFrame({"id": ids, "y": rng.standard_normal(9), "x": rng.standard_normal(9)})
        weights_path = write_csv("chain.csv", edges)
        fits_path = tmp_path / "fits.json"
        fit_result = run_cli(
            "fit", "--data", write_csv("chain_data.csv", data), "--id-column", "id", "--outcome", "y",
            "--covariates", "x", "--weights", weights_path, "--model", "all", "--drop-islands",
            "--normalize", "row", "--out", fits_path,
        )
        saved = {record["spec"]["kind"]: record for record in json.loads(fits_path.read_text())["models"]}

        # Act
        impacts = run_cli("impacts", "--fit", fits_path, "--weights", weights_path, "--unit-impacts", "x")
        residuals = run_cli("diagnose", "--weights", weights_path, "--residuals-of", fits_path, "--model", "ols",
                            "--permutations", "99")
        explicit = run_cli("diagnose", "--weights", weights_path, "--residuals-of", fits_path, "--model", "ols",
                           "--permutations", "99", "--normalize", "row")

        # Assert
        assert fit_result.code == 0
        assert saved["OLS"]["ids"] == ids[:7]
        assert impacts.code == 0
        assert residuals.code == 0
        assert residuals.payload["moran"][0]["I"] == pytest.approx(explicit.payload["moran"][0]["I"], abs=1e-12)
        results = {record["model"]: record for record in impacts.payload["results"]}
        assert results["SAR"]["units"]["ids"] == ids[:7]
        sar_total = results["SAR"]["impacts"][0]["total"]
        assert sar_total == pytest.approx(saved["SAR"]["beta"][0] / (1 - saved["SAR"]["rho"]), rel=1e-8)
        assert results["SLX"]["impacts"][0]["indirect"] == pytest.approx(saved["SLX"]["theta"][0], rel=1e-10)

    def test_reloaded_weights_must_only_add_islands(self, run_cli, fits_file, sar_files, write_csv):
        # Arrange
        edges = pd.read_csv(sar_files["weights"], dtype={"src": str, "dst": str})
        extra = pd.DataFrame({"src": ["ghost", "0"], "dst": ["0", "ghost"], "weight": [1.0, 1.0]})
        widened = write_csv("widened.csv", pd.concat([edges, extra], ignore_index=True))

        # Act
        result = run_cli("impacts", "--fit", fits_file, "--weights", widened, "--model", "sar")

        # Assert
        assert result.code == EXIT_CONFIG
        assert result.error["error_code"] == "ID_MISMATCH"


@pytest.mark.integration
class TestSimulateCommand:
    """Test `simulate`."""

    def test_writes_datasets_and_manifest(self, run_cli, tmp_path):
        # Arrange
        out = tmp_path / "sim"

        # Act
        result = run_cli(
            "simulate", "--model", "sar", "--rho", "0.5", "--beta", "1,-1", "--lattice", "6x6",
            "--replications", "2", "--seed", "3", "--out", out,
        )

        # Assert
        assert result.code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["datasets"] == ["data_0000.csv", "data_0001.csv"]
        assert manifest["n"] == 36
        assert manifest["spec"]["seed"] == 3
        frame = pd.read_csv(out / "data_0000.csv")
        assert list(frame.columns) == ["id", "y", "x1", "x2"]
        assert len(frame) == 36

    def test_simulated_files_feed_fit(self, run_cli, tmp_path):
        # Arrange
        out = tmp_path / "sim"
        run_cli("simulate", "--model", "sem", "--lambda", "0.4", "--beta", "1", "--lattice", "8x8", "--out", out)

        # Act
        result = run_cli(
            "fit", "--data", out / "data_0000.csv", "--outcome", "y", "--covariates", "x1",
            "--id-column", "id", "--weights", out / "weights.csv", "--model", "sem",
        )

        # Assert
        assert result.code == 0
        assert result.payload["normalization"] == "row"

    def test_same_seed_same_files(self, run_cli, tmp_path):
        # Act
        for name in ("a", "b"):
            run_cli("simulate", "--model", "sdm", "--rho", "0.3", "--beta", "1", "--theta", "0.5",
                    "--lattice", "5x5", "--seed", "9", "--out", tmp_path / name)

        # Assert
        assert (tmp_path / "a" / "data_0000.csv").read_bytes() == (tmp_path / "b" / "data_0000.csv").read_bytes()

    def test_recovery_report(self, run_cli):
        # Act
        result = run_cli(
            "simulate", "--model", "sar", "--rho", "0.4", "--beta", "1", "--lattice", "6x6",
            "--replications", "4", "--recovery",
        )

        # Assert
        assert result.code == 0
        assert result.payload["model"] == "SAR"
        assert [p["name"] for p in result.payload["parameters"]] == ["(Intercept)", "x1", "rho", "sigma2"]

    def test_bias_experiment_text(self, run_cli):
        # Act
        result = run_cli(
            "simulate", "--model", "sar", "--rho", "0.5", "--beta", "1,-1", "--lattice", "6x6",
            "--replications", "3", "--bias-experiment", "--format", "text",
        )

        # Assert
        assert result.code == 0
        assert result.stdout.startswith("OLS on SAR data: rho = 0.5")

    @pytest.mark.parametrize("extra", [
        ["--model", "tobit", "--beta", "1"],
        ["--model", "ols", "--rho", "0.5", "--beta", "1"],
        ["--model", "sar", "--beta", "one"],
        ["--model", "sar", "--beta", "1", "--lattice", "big"],
    ])
    def test_invalid_processes(self, run_cli, tmp_path, extra):
        result = run_cli("simulate", *extra, "--out", tmp_path / "sim")
        assert result.code == EXIT_CONFIG

    def test_dataset_mode_needs_out(self, run_cli):
        result = run_cli("simulate", "--model", "ols", "--beta", "1")
        assert result.code == EXIT_CONFIG


@pytest.mark.integration
class TestEntryPoint:
    """Test the dispatcher itself."""

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_metrics_file(self, run_cli, worked_files, tmp_path):
        # Arrange
        metrics_file = tmp_path / "metrics.prom"

        # Act
        run_cli("weights", "--edges", worked_files["edges"], "--out", tmp_path / "W.csv",
                "--metrics-file", metrics_file)

        # Assert
        assert "spatialecon_operations_total" in metrics_file.read_text()

    def test_error_json_has_the_exception_shape(self, run_cli, tmp_path):
        # Act
        result = run_cli("impacts", "--fit", tmp_path / "missing.json")

        # Assert
        assert result.code == EXIT_IO
        assert set(result.error) >= {"error", "error_code", "message", "details"}

    def test_threads_option_is_capped_by_configuration(self, run_cli, worked_files, tmp_path, monkeypatch):
        """--threads can lower the worker count for one run but never raise it above the cap."""
        # Arrange
        seen = []

        def record_threads(args, manager):
            seen.append(config.threads)
            return CommandResult(payload={})

        monkeypatch.setattr(config, "threads", 2)
        monkeypatch.setattr(weights_command, "handle", record_threads)
        argv = ["weights", "--edges", worked_files["edges"], "--out", tmp_path / "W.csv"]

        # Act
        results = [run_cli(*argv, "--threads", 8), run_cli(*argv, "--threads", 1), run_cli(*argv)]

        # Assert
        assert [result.code for result in results] == [0, 0, 0]
        assert seen == [2, 1, 2]
        assert config.threads == 2
