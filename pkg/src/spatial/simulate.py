# src/spatial/simulate.py
"""
Synthetic data from spatial data generating processes and Monte Carlo experiments.

Replication r of a spec with root seed s always draws (X, ε) from
substream(s, "generate", r): X first, then the noise. Replications can
therefore run on any number of threads and aggregate identically.
"""
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from scipy import sparse, stats
from scipy.sparse import linalg as sparse_linalg

from src.core.exceptions import InvalidParameter, RequiresNormalizedW, SingularMultiplier, WrongModel
from src.core.metrics import OperationMetrics, metrics
from src.core.models import (
    BiasReport,
    CovariateBias,
    Dataset,
    DgpSpec,
    FitResult,
    ModelKind,
    Normalization,
    ParameterRecovery,
    RecoveryReport,
)
from src.core.utils import ordered_map, substream
from src.spatial.estimators import INTERCEPT, fit_model, fit_naive_lag, fit_ols, fit_sar
from src.spatial.weights import SpatialWeights, spatial_lag

logger = structlog.get_logger(__name__)


def covariate_names(k: int) -> List[str]:
    return [f"x{i + 1}" for i in range(k)]


def draw_components(spec: DgpSpec, n: int, replication: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded covariates and noise for one replication.

    Returns:
        Tuple[np.ndarray, np.ndarray]: X (n×k standard normal) and ε (n, N(0, σ²))
    """
    rng = substream(spec.seed, "generate", replication)
    X = rng.standard_normal((n, spec.k))
    noise = spec.sigma * rng.standard_normal(n)
    return X, noise


def _solve_multiplier(parameter: float, W: SpatialWeights, rhs: np.ndarray) -> np.ndarray:
    """x solving (I − parameter·W)x = rhs"""
    if abs(parameter) * W.spectral_radius >= 1.0:
        raise SingularMultiplier(parameter, "|parameter| times the spectral radius of W must be below 1")
    system = (sparse.identity(W.n, format="csc") - parameter * W.matrix).tocsc()
    try:
        return sparse_linalg.splu(system).solve(rhs)
    except RuntimeError as e:
        raise SingularMultiplier(parameter, str(e))


def generate(
    spec: DgpSpec,
    W: Optional[SpatialWeights] = None,
    replication: int = 0,
    n: Optional[int] = None
) -> Dataset:
    """
    Draw one dataset from the structural equation of spec.kind.

    SAR/SDM solve the reduced form y = (I − ρW)⁻¹(αι + Xβ [+ WXθ] + ε),
    SEM/SDEM add u = (I − λW)⁻¹ε, SLX and OLS use the direct formula.
    A zero spatial parameter skips the solve, so SAR with ρ = 0 reproduces OLS
    bit for bit.

    Args:
        spec: Data generating process
        W: Weights (optional for OLS, which then needs n)
        replication: Replication counter selecting the random substream
        n: Number of units when W is omitted

    Raises:
        RequiresNormalizedW: Spatially dependent DGP on raw weights
        SingularMultiplier: Spatial parameter outside the stationary region
    """
    kind = spec.kind
    if W is None:
        if kind != ModelKind.OLS or n is None:
            raise InvalidParameter("W", None, f"{kind.value} data need spatial weights")
        units, ids = n, [str(i) for i in range(n)]
    else:
        units, ids = W.n, W.ids
        if (kind.has_rho or kind.has_lambda) and W.normalization == Normalization.RAW:
            raise RequiresNormalizedW(W.normalization.value, f"{kind.value} data generation")

    X, noise = draw_components(spec, units, replication)
    mean = spec.alpha + X @ np.asarray(spec.beta)
    if kind.has_theta:
        mean = mean + spatial_lag(W, X) @ np.asarray(spec.theta)

    if kind.has_rho and spec.rho != 0:
        y = _solve_multiplier(spec.rho, W, mean + noise)
    elif kind.has_lambda and spec.lambda_ != 0:
        y = mean + _solve_multiplier(spec.lambda_, W, noise)
    else:
        y = mean + noise
    return Dataset(y=y, X=X, names=covariate_names(spec.k), ids=ids, outcome="y")


# =============================================
# EXPERIMENTS
# =============================================

def ols_bias_experiment(
    spec: DgpSpec,
    W: SpatialWeights,
    n_reps: int,
    include_ml: bool = True,
    threads: Optional[int] = None
) -> BiasReport:
    """
    Omitted-variable bias of non-spatial OLS on SAR data.

    Each replication fits OLS of y on [ι, X] and records β̂ together with the
    sample Cov(x_k, Wy). The report compares the sign of the mean bias with
    the sign of ρ·mean Cov(x_k, Wy). With include_ml the SAR estimator and the
    naive regression of y on [ι, Wy, X] are fitted to the same draws.

    Raises:
        WrongModel: spec.kind is not SAR
    """
    if spec.kind != ModelKind.SAR:
        raise WrongModel("SAR", spec.kind.value)
    if n_reps < 2:
        raise InvalidParameter("n_reps", n_reps, "at least two replications are needed")

    def replicate(rep: int) -> Dict[str, np.ndarray]:
        data = generate(spec, W, rep)
        ols = fit_ols(data)
        wy = spatial_lag(W, data.y)
        record = {
            "ols": np.asarray(ols.beta),
            "cov": np.array([np.cov(data.X[:, j], wy, ddof=1)[0, 1] for j in range(data.k)]),
        }
        if include_ml:
            sar_fit = fit_sar(data, W)
            record["sar"] = np.asarray(sar_fit.beta)
            record["sar_rho"] = np.asarray([sar_fit.rho])
            record["naive_rho"] = np.asarray([fit_naive_lag(data, W).beta[0]])
        return record

    with OperationMetrics("ols_bias_experiment", "SAR"):
        records = ordered_map(replicate, list(range(n_reps)), threads)
        metrics.record_draws("replication", n_reps)

    beta = np.asarray(spec.beta)
    ols = np.vstack([r["ols"] for r in records])
    cov = np.vstack([r["cov"] for r in records])
    mean_estimate = ols.mean(axis=0)
    mean_bias = mean_estimate - beta
    mc_se = ols.std(axis=0, ddof=1) / np.sqrt(n_reps)
    mean_cov = cov.mean(axis=0)
    sar = np.vstack([r["sar"] for r in records]) if include_ml else None

    covariates = []
    for j, name in enumerate(covariate_names(spec.k)):
        expected = int(np.sign(spec.rho * mean_cov[j]))
        observed = int(np.sign(mean_bias[j]))
        covariates.append(CovariateBias(
            name=name,
            true_beta=float(beta[j]),
            mean_estimate=float(mean_estimate[j]),
            mean_bias=float(mean_bias[j]),
            mc_se=float(mc_se[j]),
            mean_cov_x_wy=float(mean_cov[j]),
            expected_sign=expected,
            observed_sign=observed,
            sign_agrees=expected == observed,
            significant=bool(abs(mean_bias[j]) > 2.0 * mc_se[j]),
            sar_mean_bias=float(sar[:, j].mean() - beta[j]) if sar is not None else None,
            sar_mc_se=float(sar[:, j].std(ddof=1) / np.sqrt(n_reps)) if sar is not None else None,
        ))

    report = BiasReport(rho=spec.rho, n=W.n, n_reps=n_reps, seed=spec.seed, covariates=covariates)
    if include_ml:
        naive = np.concatenate([r["naive_rho"] for r in records])
        report.naive_rho_mean = float(naive.mean())
        report.naive_rho_bias = float(naive.mean() - spec.rho)
        report.sar_rho_mean = float(np.concatenate([r["sar_rho"] for r in records]).mean())
    logger.info("ols_bias_experiment", rho=spec.rho, reps=n_reps,
                bias=[round(c.mean_bias, 6) for c in covariates])
    return report


def true_parameters(spec: DgpSpec, model: ModelKind, names: List[str]) -> Dict[str, float]:
    """Population values of a fit's parameters under spec; terms absent from the DGP are 0"""
    values: Dict[str, float] = {INTERCEPT: spec.alpha, "sigma2": spec.sigma ** 2}
    for j, name in enumerate(names):
        values[name] = spec.beta[j]
        values[f"W {name}"] = spec.theta[j] if spec.kind.has_theta else 0.0
    values["rho"] = spec.rho if spec.kind.has_rho else 0.0
    values["lambda"] = spec.lambda_ if spec.kind.has_lambda else 0.0
    return values


def recovery_experiment(
    spec: DgpSpec,
    W: SpatialWeights,
    model: Optional[Union[str, ModelKind]] = None,
    n_reps: int = 100,
    level: float = 0.95,
    threads: Optional[int] = None
) -> RecoveryReport:
    """
    Monte Carlo recovery: mean estimate, bias, RMSE and Wald-interval coverage per parameter.

    Args:
        spec: Data generating process
        W: Weights used both to generate and to fit
        model: Fitted specification (defaults to spec.kind)
        n_reps: Replications
        level: Wald interval level
        threads: Worker threads (capped by config)
    """
    kind = ModelKind.parse(model) if model is not None else spec.kind
    if n_reps < 2:
        raise InvalidParameter("n_reps", n_reps, "at least two replications are needed")
    if not 0 < level < 1:
        raise InvalidParameter("level", level, "must lie in (0, 1)")
    z = float(stats.norm.ppf(0.5 + level / 2.0))

    def replicate(rep: int) -> FitResult:
        return fit_model(kind, generate(spec, W, rep), W)

    with OperationMetrics("recovery_experiment", kind.value):
        fits = ordered_map(replicate, list(range(n_reps)), threads)
        metrics.record_draws("replication", n_reps)

    names = fits[0].param_names
    truth = true_parameters(spec, kind, covariate_names(spec.k))
    estimates = np.vstack([fit.estimates for fit in fits])
    errors = np.vstack([fit.std_errors for fit in fits])

    parameters = []
    for j, name in enumerate(names):
        true_value = float(truth[name])
        column = estimates[:, j]
        covered = np.abs(column - true_value) <= z * errors[:, j]
        parameters.append(ParameterRecovery(
            name=name,
            true_value=true_value,
            mean_estimate=float(column.mean()),
            bias=float(column.mean() - true_value),
            rmse=float(np.sqrt(np.mean((column - true_value) ** 2))),
            coverage=float(np.mean(covered)),
        ))
    logger.info("recovery_experiment", model=kind.value, reps=n_reps)
    return RecoveryReport(model=kind, n=W.n, n_reps=n_reps, seed=spec.seed, parameters=parameters)
