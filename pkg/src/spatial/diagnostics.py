# src/spatial/diagnostics.py
"""
Spatial autocorrelation and specification tests.

Moran's I uses permutation inference with counter-based random substreams:
chunk c of the permutations always draws from substream(seed, "moran", c), so
the result does not depend on how many threads evaluate the chunks.
"""
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy import stats

from src.core.config import config
from src.core.exceptions import (
    InsufficientData,
    InvalidParameter,
    NoConnectivity,
    ShapeError,
    WrongModel,
    ZeroVariance,
)
from src.core.metrics import OperationMetrics, metrics
from src.core.models import (
    Dataset,
    FitResult,
    LmStatistic,
    LmTestResult,
    ModelKind,
    MoranResult,
    SpecificationDecision,
)
from src.core.utils import chunk_sizes, ordered_map, substream
from src.spatial.weights import SpatialWeights, spatial_lag

logger = structlog.get_logger(__name__)

ALTERNATIVES = ("two-sided", "greater", "less")


def _centered(y: np.ndarray, what: str) -> Tuple[np.ndarray, float]:
    values = np.asarray(y, dtype=float).reshape(-1)
    z = values - values.mean()
    denominator = float(z @ z)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    if np.ptp(values) == 0 or denominator <= values.size * (np.finfo(float).eps * scale) ** 2:
        raise ZeroVariance(what)
    return z, denominator


def _normal_moments(W: SpatialWeights) -> Tuple[float, float]:
    """Expectation and variance of I under the normality assumption"""
    n = W.n
    s0 = W.s0
    symmetric = W.matrix + W.matrix.T
    s1 = 0.5 * float(symmetric.multiply(symmetric).sum())
    s2 = float(np.sum((W.row_sums + np.asarray(W.matrix.sum(axis=0)).ravel()) ** 2))
    expectation = -1.0 / (n - 1)
    variance = (n * n * s1 - n * s2 + 3.0 * s0 * s0) / ((n * n - 1.0) * s0 * s0) - expectation ** 2
    return expectation, variance


def _tail_p(z: float, alternative: str) -> float:
    if alternative == "greater":
        return float(stats.norm.sf(z))
    if alternative == "less":
        return float(stats.norm.cdf(z))
    return float(2.0 * stats.norm.sf(abs(z)))


def morans_i(
    W: SpatialWeights,
    y: np.ndarray,
    n_permutations: Optional[int] = None,
    seed: Optional[int] = None,
    alternative: str = "two-sided",
    what: str = "variable"
) -> MoranResult:
    """
    Global Moran's I with a permutation p-value.

    I = (n/S0)·Σ_ij w_ij z_i z_j / Σ_i z_i², z = y − ȳ. The p-value is
    (1 + #{extreme draws})/(1 + n_permutations) where "extreme" means
    |I*| ≥ |I| (two-sided), I* ≥ I (greater) or I* ≤ I (less).

    Args:
        W: Spatial weights
        y: Variable of length n
        n_permutations: Random relabelings of y (defaults to config)
        seed: Root seed for the permutation substreams
        alternative: "two-sided", "greater" or "less"
        what: Label used in ZeroVariance messages

    Raises:
        InsufficientData: n < 3
        ZeroVariance: y is constant
        NoConnectivity: W has no nonzero entry
    """
    if alternative not in ALTERNATIVES:
        raise InvalidParameter("alternative", alternative, f"expected one of {ALTERNATIVES}")
    draws = config.diagnostics.default_permutations if n_permutations is None else int(n_permutations)
    if draws < 0:
        raise InvalidParameter("n_permutations", draws, "must be non-negative")
    values = np.asarray(y, dtype=float).reshape(-1)
    n = values.size
    if n < 3:
        raise InsufficientData(n, 3, "Moran's I")
    if W.n != n:
        raise ShapeError(W.n, n, "Moran's I variable")
    if W.nnz == 0:
        raise NoConnectivity("Moran's I")

    with OperationMetrics("morans_i"):
        z, denominator = _centered(values, what)
        s0 = W.s0
        scale = n / s0
        statistic = scale * float(z @ spatial_lag(W, z)) / denominator

        def permutation_chunk(job: Tuple[int, int]) -> np.ndarray:
            chunk, size = job
            rng = substream(seed, "moran", chunk)
            shuffled = rng.permuted(np.tile(z, (size, 1)), axis=1)
            lagged = spatial_lag(W, shuffled.T).T
            return scale * np.einsum("ij,ij->i", shuffled, lagged) / denominator

        jobs = list(enumerate(chunk_sizes(draws, config.diagnostics.permutation_chunk_size)))
        reference = np.concatenate(ordered_map(permutation_chunk, jobs)) if jobs else np.empty(0)
        metrics.record_draws("moran_permutation", draws)

        slack = 1e-12 * max(1.0, abs(statistic))
        if alternative == "greater":
            extreme = int(np.sum(reference >= statistic - slack))
        elif alternative == "less":
            extreme = int(np.sum(reference <= statistic + slack))
        else:
            extreme = int(np.sum(np.abs(reference) >= abs(statistic) - slack))
        p_value = (1.0 + extreme) / (1.0 + draws)

        expectation, variance = _normal_moments(W)
        z_normal = (statistic - expectation) / np.sqrt(variance) if variance > 0 else None

    logger.debug("morans_i", statistic=statistic, p_value=p_value, permutations=draws)
    return MoranResult(
        statistic=statistic,
        expectation=expectation,
        p_value=p_value,
        n_permutations=draws,
        seed=seed,
        alternative=alternative,
        s0=s0,
        n=n,
        variance_normal=variance,
        z_normal=z_normal,
        p_normal=_tail_p(z_normal, alternative) if z_normal is not None else None,
    )


def morans_i_residuals(
    fit: FitResult,
    W: SpatialWeights,
    n_permutations: Optional[int] = None,
    seed: Optional[int] = None,
    alternative: str = "two-sided"
) -> MoranResult:
    """Moran's I of a fit's residuals"""
    return morans_i(W, np.asarray(fit.residuals), n_permutations, seed, alternative, what="residual vector")


def _lm(statistic: float, df: int = 1) -> LmStatistic:
    value = max(0.0, float(statistic))
    return LmStatistic(statistic=value, df=df, p_value=float(stats.chi2.sf(value, df)))


def lm_tests(ols_fit: FitResult, W: SpatialWeights, data: Optional[Dataset] = None) -> LmTestResult:
    """
    LM-lag, LM-error, their robust forms and the joint SARMA test on OLS residuals.

    With e the OLS residuals, σ² = e'e/n, T = tr(W'W + WW):
        d_lag = e'Wy/σ², d_err = e'We/σ²
        J = [(WXβ)'M(WXβ) + Tσ²]/σ²
        LM_err = d_err²/T, LM_lag = d_lag²/J
        RLM_lag = (d_lag − d_err)²/(J − T)
        RLM_err = (d_err − (T/J)·d_lag)²/(T − T²/J)
        SARMA = RLM_lag + LM_err (2 df)

    Args:
        ols_fit: Fit from fit_ols
        W: Weights used for the alternatives
        data: Dataset of the fit, needed only when the fit was read from disk

    Raises:
        WrongModel: ols_fit is not an OLS fit
        NoConnectivity: W has no nonzero entry
    """
    if ols_fit.kind != ModelKind.OLS:
        raise WrongModel("OLS", ols_fit.kind.value)
    if W.nnz == 0:
        raise NoConnectivity("LM tests")
    if W.n != ols_fit.n:
        raise ShapeError(ols_fit.n, W.n, "weights dimension")

    Z = ols_fit.design
    if Z is None:
        if data is None:
            raise InvalidParameter("data", None, "the design matrix is needed for a fit loaded from disk")
        Z = np.column_stack([np.ones(data.n), data.X])

    with OperationMetrics("lm_tests", "OLS"):
        e = np.asarray(ols_fit.residuals, dtype=float)
        if ols_fit.fitted:
            fitted = np.asarray(ols_fit.fitted, dtype=float)
        else:
            fitted = Z @ ols_fit.estimates[:Z.shape[1]]
        y = fitted + e
        n = e.size
        sigma2 = float(e @ e) / n

        A = W.matrix
        T = float(A.multiply(A).sum() + A.multiply(A.T).sum())
        d_lag = float(e @ spatial_lag(W, y)) / sigma2
        d_err = float(e @ spatial_lag(W, e)) / sigma2

        WZb = spatial_lag(W, fitted)
        projected = WZb - Z @ np.linalg.lstsq(Z, WZb, rcond=None)[0]
        J = (float(projected @ projected) + T * sigma2) / sigma2

        lm_err = d_err ** 2 / T
        lm_lag = d_lag ** 2 / J
        tiny = 1e-12 * max(1.0, T)
        if J - T > tiny:
            rlm_lag = (d_lag - d_err) ** 2 / (J - T)
        else:
            logger.warning("robust_lm_lag_undefined", reason="WXβ lies in the column space of X")
            rlm_lag = 0.0
        denominator = T - T * T / J
        rlm_err = (d_err - (T / J) * d_lag) ** 2 / denominator if denominator > tiny else 0.0

    result = LmTestResult(
        lm_lag=_lm(lm_lag),
        lm_err=_lm(lm_err),
        robust_lm_lag=_lm(rlm_lag),
        robust_lm_err=_lm(rlm_err),
        sarma=_lm(rlm_lag + lm_err, df=2),
    )
    logger.debug("lm_tests", lm_lag=lm_lag, lm_err=lm_err, robust_lm_lag=rlm_lag, robust_lm_err=rlm_err)
    return result


def select_specification(lm_result: LmTestResult, alpha: float = 0.05) -> SpecificationDecision:
    """
    Specific-to-general choice between OLS, SAR and SEM.

    OLS when neither simple test rejects, the single rejecting alternative
    when only one does, otherwise the alternative with the larger robust
    statistic.
    """
    if not 0 < alpha < 1:
        raise InvalidParameter("alpha", alpha, "significance level must lie in (0, 1)")
    lag = lm_result.lm_lag.p_value < alpha
    err = lm_result.lm_err.p_value < alpha
    caveat = " Spillovers in X (SLX-type) can inflate both tests; compare against SLX, SDM and SDEM."

    if not lag and not err:
        return SpecificationDecision(
            model=ModelKind.OLS, alpha=alpha,
            reason="Neither LM-lag nor LM-error rejects." + caveat
        )
    if lag and not err:
        return SpecificationDecision(model=ModelKind.SAR, alpha=alpha, reason="Only LM-lag rejects." + caveat)
    if err and not lag:
        return SpecificationDecision(model=ModelKind.SEM, alpha=alpha, reason="Only LM-error rejects." + caveat)

    robust_lag, robust_err = lm_result.robust_lm_lag, lm_result.robust_lm_err
    if robust_lag.statistic >= robust_err.statistic:
        model = ModelKind.SAR
        reason = (f"Both simple tests reject; robust LM-lag ({robust_lag.statistic:.3f}) "
                  f"exceeds robust LM-error ({robust_err.statistic:.3f}).")
    else:
        model = ModelKind.SEM
        reason = (f"Both simple tests reject; robust LM-error ({robust_err.statistic:.3f}) "
                  f"exceeds robust LM-lag ({robust_lag.statistic:.3f}).")
    return SpecificationDecision(model=model, alpha=alpha, reason=reason + caveat)
