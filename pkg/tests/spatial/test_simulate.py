"""
Test cases for synthetic data generation and the Monte Carlo experiments.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.core import (
    DgpSpec,
    InvalidParameter,
    ModelKind,
    RequiresNormalizedW,
    SingularMultiplier,
    WrongModel,
    config,
)
from src.spatial.estimators import INTERCEPT, fit_model
from src.spatial.simulate import (
    draw_components,
    generate,
    ols_bias_experiment,
    recovery_experiment,
    true_parameters,
)
from src.spatial.weights import eigen_normalize, lattice_weights, spatial_lag


@pytest.mark.unit
class TestDgpSpec:
    """Test validation of data generating processes."""

    @pytest.mark.parametrize("params", [
        {"kind": "SAR", "rho": 1.0},
        {"kind": "SEM", "lambda_": -1.2},
        {"kind": "OLS", "rho": 0.3},
        {"kind": "SAR", "lambda_": 0.3},
        {"kind": "SDM", "rho": 0.3},
        {"kind": "SAR", "rho": 0.3, "theta": [0.5, 0.5]},
        {"kind": "SAR", "beta": []},
        {"kind": "SAR", "sigma": -1.0},
    ])
    def test_rejects_inconsistent_parameters(self, params):
        params.setdefault("beta", [1.0, -1.0])
        with pytest.raises(ValidationError):
            DgpSpec(**params)

    def test_lower_case_kind_and_lambda_alias(self):
        # Act
        spec = DgpSpec.model_validate({"kind": "sem", "lambda": 0.4, "beta": [1.0]})

        # Assert
        assert spec.kind == ModelKind.SEM
        assert spec.lambda_ == 0.4
        assert spec.k == 1


@pytest.mark.unit
class TestGenerate:
    """Test single draws from each process."""

    def test_reproducible_for_seed_and_replication(self, lattice_row):
        # Arrange
        spec = DgpSpec(kind="SAR", rho=0.5, beta=[1.0, -1.0], seed=9)

        # Act
        first = generate(spec, lattice_row, replication=3)
        second = generate(spec, lattice_row, replication=3)
        other = generate(spec, lattice_row, replication=4)

        # Assert
        np.testing.assert_array_equal(first.y, second.y)
        np.testing.assert_array_equal(first.X, second.X)
        assert not np.array_equal(first.y, other.y)

    def test_sar_with_zero_rho_equals_ols(self, lattice_row):
        """The same seed gives identical draws when the spatial parameter is zero."""
        # Act
        sar = generate(DgpSpec(kind="SAR", rho=0.0, beta=[1.0, -1.0], seed=5), lattice_row)
        ols = generate(DgpSpec(kind="OLS", beta=[1.0, -1.0], seed=5), lattice_row)

        # Assert
        np.testing.assert_array_equal(sar.y, ols.y)
        np.testing.assert_array_equal(sar.X, ols.X)

    def test_sar_solves_the_structural_equation(self, lattice_row):
        # Arrange
        spec = DgpSpec(kind="SAR", rho=0.5, alpha=0.3, beta=[1.0, -1.0], seed=2)
        X, noise = draw_components(spec, lattice_row.n)

        # Act
        data = generate(spec, lattice_row)

        # Assert
        residual = data.y - 0.5 * spatial_lag(lattice_row, data.y) - 0.3 - X @ np.array([1.0, -1.0])
        np.testing.assert_allclose(residual, noise, atol=1e-10)

    def test_sem_errors_follow_the_autoregression(self, lattice_row):
        # Arrange
        spec = DgpSpec(kind="SEM", lambda_=0.8, beta=[1.0], seed=4)
        X, noise = draw_components(spec, lattice_row.n)

        # Act
        data = generate(spec, lattice_row)

        # Assert
        u = data.y - X[:, 0]
        np.testing.assert_allclose(u - 0.8 * spatial_lag(lattice_row, u), noise, atol=1e-10)

    def test_slx_adds_lagged_covariates(self, lattice_row):
        # Arrange
        spec = DgpSpec(kind="SLX", beta=[0.5], theta=[0.3], seed=6)
        X, noise = draw_components(spec, lattice_row.n)

        # Act
        data = generate(spec, lattice_row)

        # Assert
        expected = 0.5 * X[:, 0] + 0.3 * spatial_lag(lattice_row, X)[:, 0] + noise
        np.testing.assert_allclose(data.y, expected, atol=1e-12)

    def test_units_follow_the_weights(self, lattice_row):
        # Act
        data = generate(DgpSpec(kind="SDEM", lambda_=0.5, beta=[1.0], theta=[0.5]), lattice_row)

        # Assert
        assert data.ids == lattice_row.ids
        assert data.names == ["x1"]
        assert data.n == 400

    def test_ols_without_weights(self):
        # Act
        data = generate(DgpSpec(kind="OLS", beta=[2.0]), n=30)

        # Assert
        assert data.n == 30
        assert data.ids[0] == "0"

    def test_spatial_process_needs_weights(self):
        with pytest.raises(InvalidParameter):
            generate(DgpSpec(kind="SAR", rho=0.2, beta=[1.0]), n=30)

    def test_raw_weights_rejected(self):
        with pytest.raises(RequiresNormalizedW):
            generate(DgpSpec(kind="SAR", rho=0.5, beta=[1.0]), lattice_weights(5, 5))

    def test_raw_weights_allowed_for_slx(self):
        # Act
        data = generate(DgpSpec(kind="SLX", beta=[1.0], theta=[0.2]), lattice_weights(5, 5))

        # Assert
        assert data.n == 25

    def test_eigen_weights_allow_strong_dependence(self):
        """Eigen-normalized weights need |ρ| below one over a spectral radius of one."""
        # Arrange
        W = eigen_normalize(lattice_weights(5, 5))

        # Act
        data = generate(DgpSpec(kind="SAR", rho=0.95, beta=[1.0]), W)

        # Assert
        assert np.all(np.isfinite(data.y))

    def test_non_stationary_parameter(self, lattice_row):
        # Arrange
        spec = DgpSpec.model_construct(kind=ModelKind.SAR, rho=1.0, lambda_=0.0, alpha=0.0,
                                       beta=[1.0], theta=[], sigma=1.0, seed=0)

        # Act / Assert
        with pytest.raises(SingularMultiplier):
            generate(spec, lattice_row)


@pytest.mark.unit
class TestExperiments:
    """Quick checks of the experiment drivers."""

    def test_bias_experiment_requires_sar(self, small_lattice_row):
        with pytest.raises(WrongModel):
            ols_bias_experiment(DgpSpec(kind="SEM", lambda_=0.5, beta=[1.0]), small_lattice_row, 10)

    def test_too_few_replications(self, small_lattice_row):
        with pytest.raises(InvalidParameter):
            recovery_experiment(DgpSpec(kind="SAR", rho=0.5, beta=[1.0]), small_lattice_row, n_reps=1)

    def test_true_parameters_fill_absent_terms_with_zero(self):
        # Act
        truth = true_parameters(DgpSpec(kind="SAR", rho=0.5, beta=[1.0, -1.0]), ModelKind.SDM, ["x1", "x2"])

        # Assert
        assert truth["rho"] == 0.5
        assert truth["W x1"] == 0.0
        assert truth["lambda"] == 0.0
        assert truth["sigma2"] == 1.0

    def test_recovery_independent_of_thread_count(self, small_lattice_row, monkeypatch):
        # Arrange
        spec = DgpSpec(kind="SAR", rho=0.4, beta=[1.0], seed=8)

        # Act
        monkeypatch.setattr(config, "threads", 1)
        serial = recovery_experiment(spec, small_lattice_row, n_reps=6)
        monkeypatch.setattr(config, "threads", 4)
        parallel = recovery_experiment(spec, small_lattice_row, n_reps=6)

        # Assert
        assert serial.model_dump() == parallel.model_dump()

    def test_bias_report_shape(self, small_lattice_row):
        # Act
        report = ols_bias_experiment(DgpSpec(kind="SAR", rho=0.5, beta=[1.0, -1.0], seed=1), small_lattice_row, 5)

        # Assert
        assert [c.name for c in report.covariates] == ["x1", "x2"]
        assert report.n == 100 and report.n_reps == 5
        assert report.sar_rho_mean is not None
        assert report.naive_rho_bias is not None


@pytest.mark.slow
class TestMonteCarlo:
    """Recovery and bias properties over many replications on the 20x20 lattice."""

    def test_ols_bias_has_the_predicted_sign(self, lattice_row):
        """OLS on SAR data is biased in the direction of ρ·Cov(x, Wy)."""
        # Arrange
        spec = DgpSpec(kind="SAR", rho=0.6, beta=[1.0, -1.0], seed=17)

        # Act
        report = ols_bias_experiment(spec, lattice_row, 100)

        # Assert
        for covariate in report.covariates:
            assert covariate.sign_agrees
            assert covariate.significant
            assert abs(covariate.sar_mean_bias) < abs(covariate.mean_bias)

    def test_lag_regression_by_least_squares_overstates_rho(self, lattice_row):
        """Wy is correlated with the disturbance, so least squares on [ι, Wy, X] drifts upward; ML does not."""
        # Arrange
        spec = DgpSpec(kind="SAR", rho=0.5, beta=[1.0, -1.0], seed=31)

        # Act
        report = ols_bias_experiment(spec, lattice_row, 500)

        # Assert
        assert report.n == 400
        assert report.naive_rho_bias > 0.02
        assert abs(report.sar_rho_mean - spec.rho) < 0.01

    @pytest.mark.parametrize("params,tolerance", [
        ({"kind": "SAR", "rho": 0.5}, 0.05),
        ({"kind": "SEM", "lambda_": 0.8}, 0.07),
        ({"kind": "SLX", "theta": [0.3, 0.3]}, 0.07),
        ({"kind": "SDM", "rho": 0.4, "theta": [0.5, 0.5]}, 0.07),
        ({"kind": "SDEM", "lambda_": 0.5, "theta": [0.5, 0.5]}, 0.07),
    ])
    def test_parameter_recovery(self, lattice_row, params, tolerance):
        # Arrange
        spec = DgpSpec(beta=[1.0, -1.0], seed=2024, **params)

        # Act
        report = recovery_experiment(spec, lattice_row, n_reps=100)

        # Assert
        for parameter in report.parameters:
            if parameter.name == "sigma2":
                continue
            assert abs(parameter.bias) <= tolerance, parameter.name
        for parameter in report.parameters:
            if parameter.name in ("sigma2", INTERCEPT):
                continue
            assert parameter.coverage >= 0.88, parameter.name

    def test_sar_data_prefers_sar_by_aic(self, lattice_row):
        # Arrange
        spec = DgpSpec(kind="SAR", rho=0.5, beta=[1.0, -1.0], seed=77)
        kinds = [ModelKind.OLS, ModelKind.SAR, ModelKind.SEM, ModelKind.SLX, ModelKind.SDM, ModelKind.SDEM]
        reps = 50

        # Act
        wins = 0
        for rep in range(reps):
            data = generate(spec, lattice_row, rep)
            aic = {kind: fit_model(kind, data, lattice_row).aic for kind in kinds}
            wins += min(aic, key=aic.get) == ModelKind.SAR

        # Assert
        assert wins >= 0.8 * reps
