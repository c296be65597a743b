# src/spatial/impacts.py
"""
Spatial multiplier, partial-effect matrices and impact summaries.

For a covariate k the partial-effects matrix is
    SAR:       S·β_k                 S = (I − ρW)⁻¹
    SDM:       S·(β_k·I + θ_k·W)
    SLX/SDEM:  β_k·I + θ_k·W
    OLS/SEM:   β_k·I
Direct impact is the mean diagonal, total impact the mean row sum and the
indirect impact their difference. Individual cells of these matrices are
available but should not be read as stand-alone effects; the summaries are
the quantities meant for interpretation.
"""
import threading
from typing import List, Optional, Tuple, Union

import numpy as np
import structlog
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from src.core.config import config
from src.core.exceptions import (
    BadCovariance,
    IdMismatch,
    InvalidParameter,
    SeriesNotConverged,
    SingularMultiplier,
    TooLargeForDense,
)
from src.core.metrics import OperationMetrics, metrics
from src.core.models import (
    FitResult,
    ImpactEstimate,
    ImpactInference,
    ImpactsSummary,
    ImpactType,
    ModelKind,
    Normalization,
    UnitImpacts,
)
from src.core.utils import chunk_sizes, ordered_map, substream
from src.spatial.weights import SpatialWeights

logger = structlog.get_logger(__name__)


class MultiplierMatrix:
    """Dense spatial multiplier S = (I − ρW)⁻¹"""

    def __init__(self, values: np.ndarray, rho: float, weights: SpatialWeights):
        self.values = values
        self.rho = rho
        self.weights = weights

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1)

    @property
    def column_sums(self) -> np.ndarray:
        return self.values.sum(axis=0)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def _check_dense(n: int) -> None:
    limit = config.impacts.dense_limit
    if n > limit:
        raise TooLargeForDense(n, limit)


def _check_stationary(rho: float, W: SpatialWeights) -> None:
    if abs(rho) * W.spectral_radius >= 1.0:
        raise SingularMultiplier(rho, "|rho| times the spectral radius of W must be below 1")


def multiplier_matrix(rho: float, W: SpatialWeights) -> MultiplierMatrix:
    """
    Exact dense inverse of I − ρW.

    Raises:
        TooLargeForDense: n above the dense limit
        SingularMultiplier: |ρ|·spectral radius ≥ 1 or I − ρW singular
    """
    _check_dense(W.n)
    if rho == 0:
        return MultiplierMatrix(np.eye(W.n), rho, W)
    _check_stationary(rho, W)
    system = np.eye(W.n) - rho * W.to_dense()
    try:
        values = np.linalg.solve(system, np.eye(W.n))
    except np.linalg.LinAlgError as e:
        raise SingularMultiplier(rho, str(e))
    return MultiplierMatrix(values, rho, W)


def power_series_multiplier(
    rho: float,
    W: SpatialWeights,
    tol: Optional[float] = None,
    max_terms: Optional[int] = None
) -> MultiplierMatrix:
    """
    Truncated series I + ρW + ρ²W² + … stopped once (|ρ|·r)^h < tol, r the spectral radius.
    """
    _check_dense(W.n)
    _check_stationary(rho, W)
    tol = config.impacts.series_tol if tol is None else tol
    max_terms = config.impacts.max_series_terms if max_terms is None else max_terms
    decay = abs(rho) * W.spectral_radius

    term = np.eye(W.n)
    total = term.copy()
    bound = 1.0
    for h in range(1, max_terms + 1):
        term = rho * (W.matrix @ term)
        total += term
        bound *= decay
        if bound < tol:
            break
    else:
        logger.warning("power_series_truncated", terms=max_terms, bound=bound)
    return MultiplierMatrix(total, rho, W)


def _check_alignment(fit: FitResult, W: SpatialWeights) -> None:
    if fit.n != W.n:
        raise IdMismatch(f"fit has {fit.n} units but weights have {W.n}")
    if fit.ids and fit.ids != W.ids:
        missing = sorted(set(fit.ids) - set(W.ids))
        extra = sorted(set(W.ids) - set(fit.ids))
        raise IdMismatch("fit and weights list units in a different order or set", missing=missing, extra=extra)


def partial_effects(fit: FitResult, W: SpatialWeights, covariate: Union[int, str]) -> np.ndarray:
    """
    N×N matrix of ∂y_i/∂x_jk for one covariate.

    Row i holds the impacts on unit i, column j the impacts from unit j.

    Raises:
        BadIndex: Unknown covariate
        TooLargeForDense: n above the dense limit
    """
    idx = fit.covariate_index(covariate)
    _check_alignment(fit, W)
    _check_dense(W.n)
    beta = fit.beta[idx]
    theta = fit.theta_for(idx)
    kind = fit.kind

    if kind == ModelKind.SAR:
        return beta * multiplier_matrix(fit.rho, W).values
    if kind == ModelKind.SDM:
        inner = beta * np.eye(W.n) + theta * W.to_dense()
        return multiplier_matrix(fit.rho, W).values @ inner
    if kind in (ModelKind.SLX, ModelKind.SDEM):
        return beta * np.eye(W.n) + theta * W.to_dense()
    return beta * np.eye(W.n)


def unit_impacts(fit: FitResult, W: SpatialWeights, covariate: Union[int, str]) -> UnitImpacts:
    """Per-unit own effects (diagonal), impacts on each unit (row sums) and from each unit (column sums)"""
    effects = partial_effects(fit, W, covariate)
    return UnitImpacts(
        covariate=fit.covariate_names[fit.covariate_index(covariate)],
        ids=W.ids,
        own=np.diag(effects).tolist(),
        on=effects.sum(axis=1).tolist(),
        from_=effects.sum(axis=0).tolist(),
    )


class MultiplierMoments:
    """
    Averages of S and SW needed for impact summaries at any ρ.

    mean diag(S) = mean(1/(1 − ρλ_i)), mean diag(SW) = mean(λ_i/(1 − ρλ_i)) from the
    spectrum of W. Beyond the eigenvalue limit they are power series in the
    traces tr(W^h), extended until (|ρ|·r)^h < series_tol. Row-sum averages are
    1/(1 − ρ) for row-normalized W without islands, otherwise they come from
    sparse solves of (I − ρW)x = 1 and (I − ρW)x = W1.
    """

    def __init__(self, W: SpatialWeights):
        self.W = W
        self.n = W.n
        self._row_stochastic = W.normalization == Normalization.ROW and not W.has_islands
        self._eigenvalues: Optional[np.ndarray] = None
        self._traces: List[float] = [float(self.n)]
        self._power: Optional[sparse.csr_matrix] = None
        self._lock = threading.Lock()
        if self.n <= config.estimation.eigen_logdet_limit:
            self._eigenvalues = W.eigenvalues

    @property
    def method(self) -> str:
        return "eigen" if self._eigenvalues is not None else "traces"

    def terms_needed(self, rho: float) -> int:
        """Smallest h with (|ρ|·r)^h below the series tolerance"""
        decay = abs(rho) * self.W.spectral_radius
        if decay == 0:
            return 1
        return max(1, int(np.ceil(np.log(config.impacts.series_tol) / np.log(decay))))

    def _power_traces(self, count: int) -> np.ndarray:
        """tr(W^h) for h = 0..count-1, extending the cached sparse powers as needed"""
        with self._lock:
            if len(self._traces) < count:
                while len(self._traces) < count:
                    self._power = self.W.matrix.copy() if self._power is None else self._power @ self.W.matrix
                    self._traces.append(float(self._power.diagonal().sum()))
                logger.debug("power_traces_computed", terms=count)
            return np.asarray(self._traces[:count])

    def diagonal_means(self, rho: float) -> Tuple[float, float]:
        """
        Raises:
            SeriesNotConverged: More than max_series_terms needed at this ρ
        """
        if self._eigenvalues is not None:
            lam = self._eigenvalues
            denom = 1.0 - rho * lam
            return float(np.mean(1.0 / denom).real), float(np.mean(lam / denom).real)
        terms = self.terms_needed(rho)
        max_terms = config.impacts.max_series_terms
        if terms > max_terms:
            raise SeriesNotConverged(rho, terms, max_terms)
        traces = self._power_traces(terms + 2)
        powers = rho ** np.arange(terms + 1)
        return (
            float(powers @ traces[:-1]) / self.n,
            float(powers @ traces[1:]) / self.n,
        )

    def total_means(self, rho: float) -> Tuple[float, float]:
        if self._row_stochastic:
            value = 1.0 / (1.0 - rho)
            return value, value
        system = (sparse.identity(self.n, format="csc") - rho * self.W.matrix).tocsc()
        lu = sparse_linalg.splu(system)
        ones = np.ones(self.n)
        return float(lu.solve(ones).mean()), float(lu.solve(self.W.row_sums).mean())

    def __call__(self, rho: float) -> Tuple[float, float, float, float]:
        diag_s, diag_sw = self.diagonal_means(rho)
        total_s, total_sw = self.total_means(rho)
        return diag_s, diag_sw, total_s, total_sw


def _mean_row_sum(fit: FitResult, W: Optional[SpatialWeights]) -> float:
    if W is None:
        if fit.normalization == Normalization.ROW:
            return 1.0
        raise InvalidParameter("W", None, "weights are required for local impacts of a non row-normalized fit")
    if W.normalization == Normalization.ROW and not W.has_islands:
        return 1.0
    return float(W.row_sums.mean())


def _point_impacts(
    fit: FitResult,
    W: Optional[SpatialWeights],
    moments: Optional[MultiplierMoments]
) -> List[Tuple[float, float, float]]:
    """(direct, indirect, total) per covariate at the point estimates"""
    kind = fit.kind
    rows = []
    if kind.impact_type == ImpactType.GLOBAL:
        diag_s, diag_sw, total_s, total_sw = moments(fit.rho)
    elif kind.impact_type == ImpactType.LOCAL:
        mean_row = _mean_row_sum(fit, W)
    for idx in range(fit.k):
        beta = fit.beta[idx]
        theta = fit.theta_for(idx)
        if kind.impact_type == ImpactType.GLOBAL:
            direct = beta * diag_s + theta * diag_sw
            total = beta * total_s + theta * total_sw
            indirect = total - direct
        elif kind.impact_type == ImpactType.LOCAL:
            direct = beta
            indirect = theta * mean_row
            total = direct + indirect
        else:
            direct, indirect, total = beta, 0.0, beta
        rows.append((direct, indirect, total))
    return rows


def impacts_summary(fit: FitResult, W: Optional[SpatialWeights] = None) -> ImpactsSummary:
    """
    Direct, indirect and total impacts per covariate.

    Args:
        fit: Any fit result
        W: Weights of the fit; required for SAR and SDM

    Raises:
        InvalidParameter: A global-spillover fit without weights
    """
    moments = None
    if fit.kind.impact_type == ImpactType.GLOBAL:
        if W is None:
            raise InvalidParameter("W", None, f"{fit.kind.value} impacts need the spatial weights")
        _check_alignment(fit, W)
        _check_stationary(fit.rho, W)
        moments = MultiplierMoments(W)
    elif W is not None:
        _check_alignment(fit, W)

    with OperationMetrics("impacts_summary", fit.kind.value):
        impacts = [
            ImpactEstimate(covariate=name, direct=direct, indirect=indirect, total=total)
            for name, (direct, indirect, total) in zip(fit.covariate_names, _point_impacts(fit, W, moments))
        ]
    return ImpactsSummary(
        model=fit.kind,
        impact_type=fit.kind.impact_type,
        rho=fit.rho if fit.kind.has_rho else None,
        impacts=impacts,
    )


def _draw_factor(fit: FitResult) -> np.ndarray:
    """Factor L with L·Lᵀ equal to the clipped covariance"""
    vcov = fit.covariance
    if not np.all(np.isfinite(vcov)):
        raise BadCovariance("covariance contains non-finite entries")
    symmetric = 0.5 * (vcov + vcov.T)
    eigenvalues, eigenvectors = np.linalg.eigh(symmetric)
    smallest = float(eigenvalues.min()) if eigenvalues.size else 0.0
    scale = max(1.0, float(np.abs(eigenvalues).max())) if eigenvalues.size else 1.0
    if smallest < -1e-6 * scale:
        raise BadCovariance("covariance is not positive semi-definite", min_eigenvalue=smallest)
    if smallest < 0:
        logger.debug("covariance_clipped", min_eigenvalue=smallest)
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def impacts_inference(
    fit: FitResult,
    W: Optional[SpatialWeights] = None,
    n_draws: Optional[int] = None,
    seed: Optional[int] = None
) -> ImpactsSummary:
    """
    Impact summaries with simulation-based dispersion.

    Parameter vectors are drawn from N(estimates, vcov); draws with |ρ| ≥ 1
    are rejected and redrawn from the same substream. Draw chunk c uses
    substream(seed, "impacts", c), so results do not depend on thread count.

    Raises:
        InvalidParameter: n_draws below the configured minimum
        BadCovariance: vcov not positive semi-definite after symmetrizing
    """
    settings = config.impacts
    draws = settings.default_draws if n_draws is None else int(n_draws)
    if draws < settings.min_draws:
        raise InvalidParameter("n_draws", draws, f"at least {settings.min_draws} draws are required")

    summary = impacts_summary(fit, W)
    factor = _draw_factor(fit)
    center = fit.estimates
    p = center.size
    kind = fit.kind
    global_type = kind.impact_type == ImpactType.GLOBAL
    rho_index = fit.param_index("rho") if global_type else None
    beta_index = [fit.param_index(name) for name in fit.covariate_names]
    theta_index = [
        fit.param_index(f"W {name}") if name in fit.lagged_names else None for name in fit.covariate_names
    ]
    moments = MultiplierMoments(W) if global_type else None
    mean_row = _mean_row_sum(fit, W) if kind.impact_type == ImpactType.LOCAL else None

    def draw_chunk(job: Tuple[int, int]) -> np.ndarray:
        chunk, size = job
        rng = substream(seed, "impacts", chunk)
        accepted: List[np.ndarray] = []
        count = 0
        for _ in range(1000):
            block = center + rng.standard_normal((size - count, p)) @ factor.T
            if rho_index is not None:
                block = block[np.abs(block[:, rho_index]) < 1.0]
            accepted.append(block)
            count += block.shape[0]
            if count >= size:
                break
        else:
            raise BadCovariance("too many draws rejected for |rho| >= 1")

        params = np.vstack(accepted)[:size]
        out = np.empty((size, len(beta_index), 3))
        for d in range(size):
            if global_type:
                diag_s, diag_sw, total_s, total_sw = moments(params[d, rho_index])
            for k, (bi, ti) in enumerate(zip(beta_index, theta_index)):
                beta = params[d, bi]
                theta = params[d, ti] if ti is not None else 0.0
                if global_type:
                    direct = beta * diag_s + theta * diag_sw
                    total = beta * total_s + theta * total_sw
                elif mean_row is not None:
                    direct, total = beta, beta + theta * mean_row
                else:
                    direct, total = beta, beta
                out[d, k] = (direct, total - direct, total)
        return out

    with OperationMetrics("impacts_inference", kind.value):
        jobs = list(enumerate(chunk_sizes(draws, settings.draw_chunk_size)))
        simulated = np.concatenate(ordered_map(draw_chunk, jobs), axis=0)
        metrics.record_draws("impact_draws", draws)

    def describe(values: np.ndarray) -> ImpactInference:
        low, high = np.quantile(values, [0.025, 0.975])
        return ImpactInference(
            mean=float(values.mean()),
            sd=float(values.std(ddof=1)),
            q025=float(low),
            q975=float(high),
        )

    impacts = []
    for k, point in enumerate(summary.impacts):
        impacts.append(point.model_copy(update={
            "direct_inference": describe(simulated[:, k, 0]),
            "indirect_inference": describe(simulated[:, k, 1]),
            "total_inference": describe(simulated[:, k, 2]),
        }))
    logger.info("impacts_simulated", model=kind.value, draws=draws, seed=seed)
    return summary.model_copy(update={"impacts": impacts, "n_draws": draws, "seed": seed})
