# src/spatial/estimators.py
"""
Least-squares and maximum likelihood estimators for the spatial regression family.

OLS and SLX are fitted by least squares. SAR and SDM maximize the likelihood
concentrated in rho, SEM and SDEM the likelihood concentrated in lambda. The
concentrated objective is scanned on a grid and refined by golden-section
search; the covariance comes from a numerical Hessian of the full likelihood.
"""
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from scipy import sparse, stats
from scipy.optimize import golden, minimize_scalar
from scipy.sparse import linalg as sparse_linalg

from src.core.config import config
from src.core.exceptions import (
    BoundaryEstimate,
    InsufficientData,
    NotNested,
    RequiresNormalizedW,
    ShapeError,
    SingularDesign,
    SingularMultiplier,
)
from src.core.metrics import OperationMetrics, metrics
from src.core.models import (
    Dataset,
    EstimationOptions,
    FitResult,
    LrTestResult,
    ModelKind,
    ModelSpec,
    Normalization,
)
from src.spatial.weights import SpatialWeights, spatial_lag

logger = structlog.get_logger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
INTERCEPT = "(Intercept)"

# restricted kind -> unrestricted kinds it is nested in
NESTED_IN: Dict[ModelKind, Tuple[ModelKind, ...]] = {
    ModelKind.OLS: (ModelKind.SLX, ModelKind.SAR, ModelKind.SEM, ModelKind.SDM, ModelKind.SDEM),
    ModelKind.SAR: (ModelKind.SDM,),
    ModelKind.SEM: (ModelKind.SDEM,),
    ModelKind.SLX: (ModelKind.SDM, ModelKind.SDEM),
}


# =============================================
# LOG-DETERMINANT
# =============================================

class LogDetCalculator:
    """
    ln|I − ρW| for repeated evaluation at different ρ.

    The eigenvalues of W are computed once (cached on the weights object) and
    each evaluation is Σ ln|1 − ρλ_i|. If the eigen-solve fails, or W is
    beyond the eigenvalue limit, a dense LU (n ≤ dense limit) or a sparse LU
    factorization is used per evaluation.
    """

    SINGULAR_TOL = 1e-12

    def __init__(self, W: SpatialWeights, eigen_limit: Optional[int] = None, dense_limit: Optional[int] = None):
        settings = config.estimation
        self.W = W
        self.n = W.n
        self._eigenvalues: Optional[np.ndarray] = None
        self._dense: Optional[np.ndarray] = None
        eigen_limit = settings.eigen_logdet_limit if eigen_limit is None else eigen_limit
        dense_limit = settings.dense_lu_limit if dense_limit is None else dense_limit

        self.method = "sparse"
        if self.n <= eigen_limit:
            try:
                self._eigenvalues = W.eigenvalues
                self.method = "eigen"
            except np.linalg.LinAlgError as e:
                logger.warning("eigen_logdet_failed", error=str(e), n=self.n)
        if self.method != "eigen" and self.n <= dense_limit:
            self._dense = W.to_dense()
            self.method = "dense"
        logger.debug("logdet_method", method=self.method, n=self.n)

    def __call__(self, rho: float) -> float:
        if rho == 0:
            return 0.0
        if self.method == "eigen":
            moduli = np.abs(1.0 - rho * self._eigenvalues)
            if np.any(moduli <= self.SINGULAR_TOL):
                raise SingularMultiplier(rho, "1 - rho*lambda_i vanishes for an eigenvalue of W")
            return float(np.sum(np.log(moduli)))
        if self.method == "dense":
            sign, value = np.linalg.slogdet(np.eye(self.n) - rho * self._dense)
            if sign == 0 or not np.isfinite(value):
                raise SingularMultiplier(rho)
            return float(value)
        system = (sparse.identity(self.n, format="csc") - rho * self.W.matrix).tocsc()
        try:
            lu = sparse_linalg.splu(system)
        except RuntimeError as e:
            raise SingularMultiplier(rho, str(e))
        diagonal = np.abs(lu.U.diagonal())
        if np.any(diagonal <= self.SINGULAR_TOL):
            raise SingularMultiplier(rho)
        return float(np.sum(np.log(diagonal)))


def log_det(rho: float, W: SpatialWeights) -> float:
    """ln|I − ρW| by the eigenvalue method"""
    return LogDetCalculator(W)(rho)


def spatial_parameter_bounds(W: SpatialWeights, limit: Optional[float] = None) -> Tuple[float, float]:
    """
    Admissible interval for ρ or λ: (1/λ_min, 1/λ_max) of W's real spectrum
    intersected with (−limit, limit).
    """
    cap = config.estimation.parameter_limit if limit is None else limit
    lower_eig, upper_eig = W.real_eigenvalue_range()
    lower = max(1.0 / lower_eig, -cap) if lower_eig < 0 else -cap
    upper = min(1.0 / upper_eig, cap) if upper_eig > 0 else cap
    return lower, upper


# =============================================
# CONCENTRATED LIKELIHOODS
# =============================================

def _gaussian_loglik(n: int, sigma2: float) -> float:
    """Gaussian log-likelihood at the ML variance estimate"""
    if sigma2 <= 0:
        return np.inf
    return -0.5 * n * (LOG_2PI + np.log(sigma2) + 1.0)


def _lstsq(Z: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(Z, y, rcond=None)[0]


class LagProfile:
    """Likelihood of y = ρWy + Zβ + ε concentrated in ρ"""

    def __init__(self, y: np.ndarray, Z: np.ndarray, W: SpatialWeights, logdet: LogDetCalculator):
        self.n = y.shape[0]
        self.y = y
        self.Z = Z
        self.Wy = spatial_lag(W, y)
        self.logdet = logdet
        self.evaluations = 0
        self._b0 = _lstsq(Z, y)
        self._bd = _lstsq(Z, self.Wy)
        self._e0 = y - Z @ self._b0
        self._ed = self.Wy - Z @ self._bd

    def coefficients(self, rho: float) -> np.ndarray:
        return self._b0 - rho * self._bd

    def residuals(self, rho: float) -> np.ndarray:
        return self._e0 - rho * self._ed

    def sigma2(self, rho: float) -> float:
        e = self.residuals(rho)
        return float(e @ e) / self.n

    def loglik(self, rho: float) -> float:
        self.evaluations += 1
        return _gaussian_loglik(self.n, self.sigma2(rho)) + self.logdet(rho)

    def full_loglik(self, params: np.ndarray) -> float:
        """Log-likelihood at (β, ρ, σ²)"""
        beta, rho, sigma2 = params[:-2], params[-2], params[-1]
        if sigma2 <= 0:
            return -np.inf
        e = self.y - rho * self.Wy - self.Z @ beta
        return float(-0.5 * self.n * (LOG_2PI + np.log(sigma2)) - (e @ e) / (2.0 * sigma2) + self.logdet(rho))

    def fitted(self, rho: float) -> np.ndarray:
        return self.y - self.residuals(rho)


class ErrorProfile:
    """Likelihood of y = Zβ + u, u = λWu + ε concentrated in λ"""

    def __init__(self, y: np.ndarray, Z: np.ndarray, W: SpatialWeights, logdet: LogDetCalculator):
        self.n = y.shape[0]
        self.y = y
        self.Z = Z
        self.Wy = spatial_lag(W, y)
        self.WZ = spatial_lag(W, Z)
        self.logdet = logdet
        self.evaluations = 0

    def _filtered(self, lam: float) -> Tuple[np.ndarray, np.ndarray]:
        return self.y - lam * self.Wy, self.Z - lam * self.WZ

    def coefficients(self, lam: float) -> np.ndarray:
        ys, Zs = self._filtered(lam)
        return _lstsq(Zs, ys)

    def innovations(self, lam: float) -> np.ndarray:
        ys, Zs = self._filtered(lam)
        return ys - Zs @ _lstsq(Zs, ys)

    def sigma2(self, lam: float) -> float:
        e = self.innovations(lam)
        return float(e @ e) / self.n

    def loglik(self, lam: float) -> float:
        self.evaluations += 1
        return _gaussian_loglik(self.n, self.sigma2(lam)) + self.logdet(lam)

    def full_loglik(self, params: np.ndarray) -> float:
        """Log-likelihood at (β, λ, σ²)"""
        beta, lam, sigma2 = params[:-2], params[-2], params[-1]
        if sigma2 <= 0:
            return -np.inf
        e = (self.y - lam * self.Wy) - (self.Z - lam * self.WZ) @ beta
        return float(-0.5 * self.n * (LOG_2PI + np.log(sigma2)) - (e @ e) / (2.0 * sigma2) + self.logdet(lam))

    def fitted(self, lam: float) -> np.ndarray:
        return self.Z @ self.coefficients(lam)


# =============================================
# NUMERICAL HELPERS
# =============================================

def numerical_hessian(func: Callable[[np.ndarray], float], x: np.ndarray, rel_step: Optional[float] = None) -> np.ndarray:
    """
    Central-difference Hessian with step h_i = rel_step·max(1, |x_i|).

    Args:
        func: Scalar function of a parameter vector
        x: Evaluation point
        rel_step: Relative step (defaults to config.estimation.hessian_step)

    Returns:
        np.ndarray: Symmetric p×p Hessian
    """
    base = config.estimation.hessian_step if rel_step is None else rel_step
    x = np.asarray(x, dtype=float)
    p = x.size
    steps = base * np.maximum(1.0, np.abs(x))
    f0 = func(x)
    hessian = np.empty((p, p))

    def shifted(i: int, si: float, j: Optional[int] = None, sj: float = 0.0) -> float:
        point = x.copy()
        point[i] += si * steps[i]
        if j is not None:
            point[j] += sj * steps[j]
        return func(point)

    for i in range(p):
        hessian[i, i] = (shifted(i, 1.0) - 2.0 * f0 + shifted(i, -1.0)) / steps[i] ** 2
        for j in range(i):
            value = (
                shifted(i, 1.0, j, 1.0) - shifted(i, 1.0, j, -1.0)
                - shifted(i, -1.0, j, 1.0) + shifted(i, -1.0, j, -1.0)
            ) / (4.0 * steps[i] * steps[j])
            hessian[i, j] = hessian[j, i] = value
    return hessian


def _covariance_from_hessian(hessian: np.ndarray) -> np.ndarray:
    information = -hessian
    try:
        vcov = np.linalg.inv(information)
    except np.linalg.LinAlgError:
        logger.warning("information_matrix_singular", action="pseudo-inverse")
        vcov = np.linalg.pinv(information)
    return 0.5 * (vcov + vcov.T)


def _maximize(
    objective: Callable[[float], float],
    bounds: Tuple[float, float],
    grid_size: int,
    tol: float
) -> float:
    """
    Grid scan followed by golden-section refinement inside the best grid bracket.

    The returned point is never worse than the best grid point.
    """
    lower, upper = bounds

    def safe(value: float) -> float:
        try:
            result = objective(value)
        except SingularMultiplier:
            return -np.inf
        return result if np.isfinite(result) or result > 0 else -np.inf

    grid = np.linspace(lower, upper, grid_size)
    values = np.array([safe(r) for r in grid])
    best = int(np.argmax(values))
    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, grid_size - 1)]

    def negative(value: float) -> float:
        return -safe(value)

    candidate = None
    if 0 < best < grid_size - 1:
        try:
            candidate = float(golden(negative, brack=(left, grid[best], right), tol=tol))
        except (ValueError, RuntimeError):
            candidate = None
    if candidate is None or not (lower <= candidate <= upper):
        result = minimize_scalar(negative, bounds=(left, right), method="bounded", options={"xatol": tol})
        candidate = float(result.x)

    if safe(candidate) >= values[best]:
        return candidate
    return float(grid[best])


# =============================================
# DESIGN
# =============================================

def _build_design(
    data: Dataset, W: Optional[SpatialWeights], spec: ModelSpec
) -> Tuple[np.ndarray, List[str], List[str]]:
    """Design [ι, X(, WX)] with coefficient names"""
    lagged = spec.lagged_names(data.names)
    columns = [np.ones((data.n, 1)), data.X]
    names = [INTERCEPT, *data.names]
    if lagged:
        idx = [data.names.index(name) for name in lagged]
        columns.append(spatial_lag(W, data.X[:, idx]))
        names.extend(f"W {name}" for name in lagged)
    return np.hstack(columns), names, lagged


def _check_design(Z: np.ndarray, names: List[str], extra_params: int) -> None:
    n, p = Z.shape
    if n <= p + extra_params:
        raise InsufficientData(n, p + extra_params + 1, "model fit")
    rank = int(np.linalg.matrix_rank(Z))
    if rank < p:
        raise SingularDesign(rank, p, names)


def _check_weights(data: Dataset, W: SpatialWeights, kind: ModelKind, warnings: List[Dict]) -> None:
    if W.n != data.n:
        raise ShapeError(data.n, W.n, "weights dimension")
    if kind in (ModelKind.SAR, ModelKind.SEM, ModelKind.SDM, ModelKind.SDEM) and W.normalization == Normalization.RAW:
        raise RequiresNormalizedW(W.normalization.value, f"{kind.value} estimation")
    islands = W.islands
    if islands.size:
        logger.warning("islands_in_fit", model=kind.value, count=int(islands.size))
        warnings.append({
            "error_code": "ISLANDS",
            "message": f"{islands.size} units have no neighbours; their spatial lags are 0",
            "details": {"island_ids": [W.ids[i] for i in islands[:20]], "count": int(islands.size)},
        })


def _information_criteria(loglik: float, p: int, n: int) -> Tuple[float, float]:
    return 2.0 * p - 2.0 * loglik, p * np.log(n) - 2.0 * loglik


def _split(coefs: np.ndarray, k: int) -> Tuple[float, List[float], List[float]]:
    return float(coefs[0]), coefs[1:1 + k].tolist(), coefs[1 + k:].tolist()


# =============================================
# LEAST SQUARES
# =============================================

def _least_squares_fit(
    data: Dataset,
    Z: np.ndarray,
    names: List[str],
    spec: ModelSpec,
    lagged: List[str],
    covariate_names: List[str],
    normalization: Normalization,
    warnings: List[Dict]
) -> FitResult:
    _check_design(Z, names, 0)
    n, p = Z.shape
    y = data.y
    coefs = _lstsq(Z, y)
    fitted = Z @ coefs
    residuals = y - fitted
    sse = float(residuals @ residuals)
    dof = n - p
    s2 = sse / dof

    ZtZ_inv = np.linalg.inv(Z.T @ Z)
    vcov = np.zeros((p + 1, p + 1))
    vcov[:p, :p] = s2 * ZtZ_inv
    vcov[p, p] = 2.0 * s2 ** 2 / dof

    loglik = _gaussian_loglik(n, sse / n)
    param_names = [*names, "sigma2"]
    aic, bic = _information_criteria(loglik, len(param_names), n)

    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - sse / sst if sst > 0 else None
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof if r2 is not None else None

    alpha, beta, theta = _split(coefs, len(covariate_names))
    result = FitResult(
        spec=spec,
        outcome=data.outcome,
        covariate_names=covariate_names,
        lagged_names=lagged,
        alpha=alpha,
        beta=beta,
        theta=theta,
        sigma2=s2,
        param_names=param_names,
        vcov=vcov.tolist(),
        loglik=loglik,
        aic=aic,
        bic=bic,
        r2=r2,
        adj_r2=adj_r2,
        residuals=residuals.tolist(),
        fitted=fitted.tolist(),
        ids=list(data.ids),
        n=n,
        k=len(covariate_names),
        normalization=normalization,
        warnings=warnings,
    )
    return result.attach_design(Z)


def fit_ols(data: Dataset) -> FitResult:
    """
    Non-spatial least squares of y on [ι, X].

    Raises:
        SingularDesign: X is rank deficient after adding the intercept
    """
    spec = ModelSpec(kind=ModelKind.OLS)
    with OperationMetrics("fit", ModelKind.OLS.value):
        Z, names, lagged = _build_design(data, None, spec)
        result = _least_squares_fit(data, Z, names, spec, lagged, list(data.names), Normalization.RAW, [])
    logger.info("model_fitted", model="OLS", n=result.n, loglik=result.loglik, aic=result.aic)
    return result


def fit_slx(data: Dataset, W: SpatialWeights, spec: Optional[ModelSpec] = None) -> FitResult:
    """Least squares on [ι, X, WX]; θ reported separately from β"""
    spec = spec or ModelSpec(kind=ModelKind.SLX)
    warnings: List[Dict] = []
    with OperationMetrics("fit", ModelKind.SLX.value):
        _check_weights(data, W, ModelKind.SLX, warnings)
        Z, names, lagged = _build_design(data, W, spec)
        result = _least_squares_fit(data, Z, names, spec, lagged, list(data.names), W.normalization, warnings)
    logger.info("model_fitted", model="SLX", n=result.n, loglik=result.loglik, aic=result.aic)
    return result


def fit_naive_lag(data: Dataset, W: SpatialWeights) -> FitResult:
    """
    Least squares of y on [ι, Wy, X], ignoring the endogeneity of Wy.

    The Wy coefficient is the first entry of beta, named "W <outcome>".
    """
    if W.n != data.n:
        raise ShapeError(data.n, W.n, "weights dimension")
    lag_name = f"W {data.outcome}"
    augmented = Dataset(
        y=data.y,
        X=np.column_stack([spatial_lag(W, data.y), data.X]),
        names=[lag_name, *data.names],
        ids=list(data.ids),
        outcome=data.outcome,
    )
    spec = ModelSpec(kind=ModelKind.OLS)
    Z, names, lagged = _build_design(augmented, None, spec)
    warnings = [{
        "error_code": "NAIVE_LAG",
        "message": f"{lag_name} treated as exogenous; estimates suffer from simultaneity bias",
        "details": {},
    }]
    return _least_squares_fit(augmented, Z, names, spec, lagged, augmented.names, W.normalization, warnings)


# =============================================
# MAXIMUM LIKELIHOOD
# =============================================

def _fit_spatial(
    kind: ModelKind,
    data: Dataset,
    W: SpatialWeights,
    options: Optional[EstimationOptions],
    spec: Optional[ModelSpec]
) -> FitResult:
    settings = config.estimation
    options = options or EstimationOptions()
    spec = spec or ModelSpec(kind=kind)
    warnings: List[Dict] = []
    parameter = "rho" if kind.has_rho else "lambda"

    with OperationMetrics("fit", kind.value):
        _check_weights(data, W, kind, warnings)
        Z, names, lagged = _build_design(data, W, spec)
        _check_design(Z, names, 1)

        logdet = LogDetCalculator(W)
        profile = (LagProfile if kind.has_rho else ErrorProfile)(data.y, Z, W, logdet)
        bounds = options.rho_bounds or spatial_parameter_bounds(W)
        grid_size = options.grid_size or settings.grid_size
        tol = options.tol or settings.optimizer_tol

        estimate = _maximize(profile.loglik, bounds, grid_size, tol)
        if min(abs(estimate - bounds[0]), abs(estimate - bounds[1])) <= settings.boundary_tol:
            boundary = BoundaryEstimate(parameter, estimate, list(bounds))
            logger.warning("boundary_estimate", model=kind.value, value=estimate, bounds=list(bounds))
            warnings.append(boundary.to_dict())

        coefs = profile.coefficients(estimate)
        sigma2 = profile.sigma2(estimate)
        loglik = profile.loglik(estimate)
        params = np.concatenate([coefs, [estimate, sigma2]])
        if sigma2 > 0:
            vcov = _covariance_from_hessian(numerical_hessian(profile.full_loglik, params))
        else:
            vcov = np.zeros((params.size, params.size))
        metrics.record_likelihood_evaluations(kind.value, profile.evaluations)

        fitted = profile.fitted(estimate)
        residuals = data.y - fitted
        param_names = [*names, parameter, "sigma2"]
        aic, bic = _information_criteria(loglik, len(param_names), data.n)
        alpha, beta, theta = _split(coefs, data.k)

        fields = {"rho": estimate} if kind.has_rho else {"lambda_": estimate}
        result = FitResult(
            spec=spec,
            outcome=data.outcome,
            covariate_names=list(data.names),
            lagged_names=lagged,
            alpha=alpha,
            beta=beta,
            theta=theta,
            sigma2=sigma2,
            param_names=param_names,
            vcov=vcov.tolist(),
            loglik=loglik,
            aic=aic,
            bic=bic,
            residuals=residuals.tolist(),
            fitted=fitted.tolist(),
            ids=list(data.ids),
            n=data.n,
            k=data.k,
            normalization=W.normalization,
            n_evaluations=profile.evaluations,
            warnings=warnings,
            **fields,
        )

    logger.info(
        "model_fitted", model=kind.value, n=data.n, loglik=loglik, aic=aic,
        **{parameter: round(estimate, 6)}, evaluations=profile.evaluations
    )
    return result.attach_design(Z)


def fit_sar(data: Dataset, W: SpatialWeights, options: Optional[EstimationOptions] = None) -> FitResult:
    """
    Spatial lag model y = αι + ρWy + Xβ + ε by concentrated ML.

    Raises:
        RequiresNormalizedW: W is raw
        SingularDesign: [ι, X] is rank deficient
    """
    return _fit_spatial(ModelKind.SAR, data, W, options, None)


def fit_sem(data: Dataset, W: SpatialWeights, options: Optional[EstimationOptions] = None) -> FitResult:
    """Spatial error model y = αι + Xβ + u, u = λWu + ε by concentrated ML"""
    return _fit_spatial(ModelKind.SEM, data, W, options, None)


def fit_sdm(
    data: Dataset,
    W: SpatialWeights,
    options: Optional[EstimationOptions] = None,
    spec: Optional[ModelSpec] = None
) -> FitResult:
    """Spatial Durbin model: SAR on [ι, X, WX]"""
    return _fit_spatial(ModelKind.SDM, data, W, options, spec or ModelSpec(kind=ModelKind.SDM))


def fit_sdem(
    data: Dataset,
    W: SpatialWeights,
    options: Optional[EstimationOptions] = None,
    spec: Optional[ModelSpec] = None
) -> FitResult:
    """Spatial Durbin error model: SEM on [ι, X, WX]"""
    return _fit_spatial(ModelKind.SDEM, data, W, options, spec or ModelSpec(kind=ModelKind.SDEM))


def fit_model(
    kind: Union[str, ModelKind],
    data: Dataset,
    W: Optional[SpatialWeights] = None,
    options: Optional[EstimationOptions] = None,
    spec: Optional[ModelSpec] = None
) -> FitResult:
    """Fit any of the six specifications by name"""
    kind = ModelKind.parse(kind)
    if kind == ModelKind.OLS:
        return fit_ols(data)
    if W is None:
        raise ShapeError("spatial weights", None, f"{kind.value} weights")
    if kind == ModelKind.SLX:
        return fit_slx(data, W, spec)
    if kind == ModelKind.SAR:
        return fit_sar(data, W, options)
    if kind == ModelKind.SEM:
        return fit_sem(data, W, options)
    if kind == ModelKind.SDM:
        return fit_sdm(data, W, options, spec)
    return fit_sdem(data, W, options, spec)


# =============================================
# LIKELIHOOD RATIO TESTS
# =============================================

def is_nested(restricted: ModelKind, unrestricted: ModelKind) -> bool:
    return restricted == unrestricted or unrestricted in NESTED_IN.get(restricted, ())


def lr_test(restricted: FitResult, unrestricted: FitResult) -> LrTestResult:
    """
    Likelihood ratio test 2(ℓ_u − ℓ_r) against chi-square(df).

    Raises:
        NotNested: The pair is not nested or was fitted on different data
    """
    r_kind, u_kind = restricted.kind, unrestricted.kind
    if not is_nested(r_kind, u_kind):
        raise NotNested(r_kind.value, u_kind.value)
    if restricted.n != unrestricted.n or restricted.covariate_names != unrestricted.covariate_names:
        raise NotNested(r_kind.value, u_kind.value, "fits use different data")

    df = unrestricted.n_params - restricted.n_params
    if df < 0:
        raise NotNested(r_kind.value, u_kind.value, "unrestricted model has fewer parameters")

    statistic = 2.0 * (unrestricted.loglik - restricted.loglik)
    if statistic < 0:
        if statistic < -1e-6:
            logger.warning("negative_lr_statistic", restricted=r_kind.value, unrestricted=u_kind.value,
                           statistic=statistic)
        statistic = 0.0
    p_value = float(stats.chi2.sf(statistic, df)) if df > 0 else 1.0
    return LrTestResult(
        statistic=statistic,
        df=df,
        p_value=p_value,
        restricted_model=r_kind,
        unrestricted_model=u_kind,
    )
