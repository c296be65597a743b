"""
Centralized data models for the spatial econometrics toolkit.
All Pydantic BaseModel schemas are consolidated here so that every result
can be written to JSON and validated back:
1. Spatial weights reports
2. Model specifications and fit results
3. Diagnostics (Moran's I, LM tests)
4. Impact summaries
5. Simulation specs, datasets and experiment reports
6. CLI run configuration
"""
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator
from scipy import stats

from .exceptions import BadIndex, IoError, MissingData, ShapeError


# =============================================
# ENUMERATIONS
# =============================================

class Normalization(str, Enum):
    RAW = "raw"
    ROW = "row"
    EIGEN = "eigen"


class ImpactType(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"
    NONE = "none"


class ModelKind(str, Enum):
    OLS = "OLS"
    SLX = "SLX"
    SAR = "SAR"
    SEM = "SEM"
    SDM = "SDM"
    SDEM = "SDEM"

    @classmethod
    def parse(cls, value: Union[str, "ModelKind"]) -> "ModelKind":
        if isinstance(value, ModelKind):
            return value
        return cls(value.strip().upper())

    @property
    def has_rho(self) -> bool:
        return self in (ModelKind.SAR, ModelKind.SDM)

    @property
    def has_lambda(self) -> bool:
        return self in (ModelKind.SEM, ModelKind.SDEM)

    @property
    def has_theta(self) -> bool:
        return self in (ModelKind.SLX, ModelKind.SDM, ModelKind.SDEM)

    @property
    def impact_type(self) -> ImpactType:
        if self.has_rho:
            return ImpactType.GLOBAL
        if self.has_theta:
            return ImpactType.LOCAL
        return ImpactType.NONE


# Output order for multi-model runs
MODEL_ORDER: Tuple[ModelKind, ...] = (
    ModelKind.OLS, ModelKind.SAR, ModelKind.SEM, ModelKind.SLX, ModelKind.SDM, ModelKind.SDEM
)


# =============================================
# WEIGHTS MODELS
# =============================================

class IslandReport(BaseModel):
    """Units whose weights row is empty"""
    island_indices: List[int] = Field(default_factory=list, description="Zero out-degree row indices")
    island_ids: List[str] = Field(default_factory=list, description="Identifiers of the island units")
    count: int = Field(0, ge=0, description="Number of islands")
    n: int = Field(0, ge=0, description="Number of units")


# =============================================
# DATA MODELS
# =============================================

class Dataset(BaseModel):
    """Outcome vector, covariate matrix, covariate names and unit identifiers"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y: np.ndarray
    X: np.ndarray
    names: List[str]
    ids: List[str] = Field(default_factory=list)
    outcome: str = "y"

    @field_validator("y", mode="before")
    @classmethod
    def _as_vector(cls, v):
        return np.asarray(v, dtype=float).reshape(-1)

    @field_validator("X", mode="before")
    @classmethod
    def _as_matrix(cls, v):
        arr = np.asarray(v, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        return arr

    @model_validator(mode="after")
    def _check(self):
        n = self.y.shape[0]
        if self.X.ndim != 2 or self.X.shape[0] != n:
            raise ShapeError((n, len(self.names)), tuple(self.X.shape), "covariate matrix")
        if self.X.shape[1] != len(self.names):
            raise ShapeError(self.X.shape[1], len(self.names), "covariate names")
        if self.ids and len(self.ids) != n:
            raise ShapeError(n, len(self.ids), "unit identifiers")
        bad_rows = np.flatnonzero(~np.isfinite(self.y) | ~np.isfinite(self.X).all(axis=1))
        if bad_rows.size:
            columns = [self.outcome] if not np.isfinite(self.y).all() else []
            columns += [name for j, name in enumerate(self.names) if not np.isfinite(self.X[:, j]).all()]
            raise MissingData(columns, bad_rows.tolist())
        if not self.ids:
            object.__setattr__(self, "ids", [str(i) for i in range(n)])
        return self

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def k(self) -> int:
        return int(self.X.shape[1])

    def subset(self, indices: Union[List[int], np.ndarray]) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            y=self.y[idx], X=self.X[idx], names=list(self.names),
            ids=[self.ids[i] for i in idx], outcome=self.outcome
        )


# =============================================
# ESTIMATION MODELS
# =============================================

class ModelSpec(BaseModel):
    """Which spatial terms a model estimates"""
    kind: ModelKind = Field(..., description="Model family")
    lag_all_covariates: bool = Field(True, description="Every covariate enters WX")
    lagged_covariates: List[str] = Field(default_factory=list, description="WX subset when not lagging all")

    @field_validator("kind", mode="before")
    @classmethod
    def _parse_kind(cls, v):
        return ModelKind.parse(v)

    def lagged_names(self, covariates: List[str]) -> List[str]:
        """Covariates whose spatial lag enters the design"""
        if not self.kind.has_theta:
            return []
        if self.lag_all_covariates:
            return list(covariates)
        unknown = [name for name in self.lagged_covariates if name not in covariates]
        if unknown:
            raise BadIndex(unknown[0], list(covariates))
        return [name for name in covariates if name in self.lagged_covariates]


class EstimationOptions(BaseModel):
    """Options for the concentrated-likelihood estimators"""
    rho_bounds: Optional[Tuple[float, float]] = Field(None, description="Search interval for rho/lambda")
    tol: Optional[float] = Field(None, gt=0, description="Optimizer tolerance in the spatial parameter")
    grid_size: Optional[int] = Field(None, ge=3, description="Grid points before refinement")

    @field_validator("rho_bounds")
    @classmethod
    def _ordered(cls, v):
        if v is not None and not v[0] < v[1]:
            raise ValueError("rho_bounds must be increasing")
        return v


class CoefficientEstimate(BaseModel):
    """One row of a coefficient table"""
    name: str
    estimate: float
    std_error: Optional[float] = None
    z_value: Optional[float] = None
    p_value: Optional[float] = None


class FitResult(BaseModel):
    """Estimates and fit statistics for one model specification"""
    model_config = ConfigDict(populate_by_name=True)

    spec: ModelSpec
    outcome: str = "y"
    covariate_names: List[str]
    lagged_names: List[str] = Field(default_factory=list)
    alpha: float
    beta: List[float]
    theta: List[float] = Field(default_factory=list)
    rho: Optional[float] = None
    lambda_: Optional[float] = Field(None, alias="lambda")
    sigma2: float
    param_names: List[str]
    vcov: List[List[float]]
    loglik: float
    aic: float
    bic: float
    r2: Optional[float] = None
    adj_r2: Optional[float] = None
    residuals: List[float]
    fitted: List[float] = Field(default_factory=list)
    ids: List[str] = Field(default_factory=list)
    n: int
    k: int
    normalization: Normalization = Normalization.RAW
    n_evaluations: int = 0
    warnings: List[Dict[str, Any]] = Field(default_factory=list)

    _design: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check(self):
        if len(self.residuals) != self.n:
            raise ShapeError(self.n, len(self.residuals), "residuals")
        p = len(self.param_names)
        if len(self.vcov) != p or any(len(row) != p for row in self.vcov):
            raise ShapeError((p, p), (len(self.vcov), len(self.vcov[0]) if self.vcov else 0), "vcov")
        return self

    @property
    def kind(self) -> ModelKind:
        return self.spec.kind

    @property
    def n_params(self) -> int:
        """Estimated parameters including sigma2"""
        return len(self.param_names)

    @property
    def spatial_parameter(self) -> Optional[float]:
        return self.rho if self.kind.has_rho else self.lambda_

    @property
    def estimates(self) -> np.ndarray:
        """Parameter vector ordered as param_names"""
        values = [self.alpha, *self.beta, *self.theta]
        if self.kind.has_rho:
            values.append(self.rho)
        elif self.kind.has_lambda:
            values.append(self.lambda_)
        values.append(self.sigma2)
        return np.asarray(values, dtype=float)

    @property
    def covariance(self) -> np.ndarray:
        return np.asarray(self.vcov, dtype=float)

    @property
    def std_errors(self) -> np.ndarray:
        diag = np.diag(self.covariance)
        return np.sqrt(np.where(diag >= 0, diag, np.nan))

    def coefficients(self) -> List[CoefficientEstimate]:
        """Coefficient table with Wald z statistics"""
        rows = []
        for name, est, se in zip(self.param_names, self.estimates, self.std_errors):
            z = est / se if np.isfinite(se) and se > 0 else None
            rows.append(CoefficientEstimate(
                name=name,
                estimate=float(est),
                std_error=float(se) if np.isfinite(se) else None,
                z_value=float(z) if z is not None else None,
                p_value=float(2 * stats.norm.sf(abs(z))) if z is not None else None,
            ))
        return rows

    def covariate_index(self, covariate: Union[int, str]) -> int:
        """Resolve a covariate name or position"""
        if isinstance(covariate, str):
            if covariate not in self.covariate_names:
                raise BadIndex(covariate, self.covariate_names)
            return self.covariate_names.index(covariate)
        if isinstance(covariate, (int, np.integer)) and 0 <= covariate < len(self.covariate_names):
            return int(covariate)
        raise BadIndex(covariate, self.covariate_names)

    def theta_for(self, index: int) -> float:
        """Lag coefficient of a covariate, 0 when its lag is not in the model"""
        name = self.covariate_names[index]
        if name in self.lagged_names:
            return float(self.theta[self.lagged_names.index(name)])
        return 0.0

    def param_index(self, name: str) -> int:
        return self.param_names.index(name)

    @property
    def design(self) -> Optional[np.ndarray]:
        """Design matrix [1, X(, WX)] when the fit was produced in this process"""
        return self._design

    def attach_design(self, design: np.ndarray) -> "FitResult":
        self._design = design
        return self


class LrTestResult(BaseModel):
    """Likelihood ratio test between nested fits"""
    statistic: float = Field(..., ge=0)
    df: int = Field(..., ge=0)
    p_value: float
    restricted_model: ModelKind
    unrestricted_model: ModelKind


# =============================================
# DIAGNOSTICS MODELS
# =============================================

class MoranResult(BaseModel):
    """Global Moran's I with permutation inference"""
    statistic: float
    expectation: float
    p_value: float = Field(..., gt=0, le=1)
    n_permutations: int = Field(..., ge=0)
    seed: Optional[int] = None
    alternative: Literal["two-sided", "greater", "less"] = "two-sided"
    s0: float = Field(..., gt=0)
    n: int
    variance_normal: Optional[float] = None
    z_normal: Optional[float] = None
    p_normal: Optional[float] = None

    @property
    def I(self) -> float:  # noqa: E743
        return self.statistic


class LmStatistic(BaseModel):
    statistic: float = Field(..., ge=0)
    df: int = 1
    p_value: float


class LmTestResult(BaseModel):
    """Lagrange multiplier tests on OLS residuals"""
    lm_lag: LmStatistic
    lm_err: LmStatistic
    robust_lm_lag: LmStatistic
    robust_lm_err: LmStatistic
    sarma: LmStatistic


class SpecificationDecision(BaseModel):
    """Outcome of the specific-to-general selection rule"""
    model: ModelKind
    alpha: float
    reason: str


# =============================================
# IMPACT MODELS
# =============================================

class ImpactInference(BaseModel):
    mean: float
    sd: float
    q025: float
    q975: float


class ImpactEstimate(BaseModel):
    """Direct, indirect and total impact of one covariate"""
    covariate: str
    direct: float
    indirect: float
    total: float
    direct_inference: Optional[ImpactInference] = None
    indirect_inference: Optional[ImpactInference] = None
    total_inference: Optional[ImpactInference] = None

    def to_flat(self) -> Dict[str, Any]:
        """Flat record {covariate, direct, ..., sd_direct, q025_direct, q975_direct, ...}"""
        row: Dict[str, Any] = {
            "covariate": self.covariate,
            "direct": self.direct,
            "indirect": self.indirect,
            "total": self.total,
        }
        for part in ("direct", "indirect", "total"):
            inference = getattr(self, f"{part}_inference")
            if inference is not None:
                row[f"mean_{part}"] = inference.mean
                row[f"sd_{part}"] = inference.sd
                row[f"q025_{part}"] = inference.q025
                row[f"q975_{part}"] = inference.q975
        return row


class ImpactsSummary(BaseModel):
    """Per-covariate impact summary for one fit"""
    model: ModelKind
    impact_type: ImpactType
    rho: Optional[float] = None
    impacts: List[ImpactEstimate]
    n_draws: Optional[int] = None
    seed: Optional[int] = None


class UnitImpacts(BaseModel):
    """Per-unit breakdown of a partial-effects matrix"""
    model_config = ConfigDict(populate_by_name=True)

    covariate: str
    ids: List[str]
    own: List[float] = Field(..., description="Diagonal: effect of a unit's own change")
    on: List[float] = Field(..., description="Row sums: impacts on each unit")
    from_: List[float] = Field(..., alias="from", description="Column sums: impacts from each unit")


# =============================================
# SIMULATION MODELS
# =============================================

class DgpSpec(BaseModel):
    """Data generating process for synthetic datasets"""
    model_config = ConfigDict(populate_by_name=True)

    kind: ModelKind
    rho: float = 0.0
    lambda_: float = Field(0.0, alias="lambda")
    alpha: float = 0.0
    beta: List[float] = Field(..., min_length=1)
    theta: List[float] = Field(default_factory=list)
    sigma: float = Field(1.0, ge=0)
    x_distribution: Literal["standard_normal"] = "standard_normal"
    seed: int = 0

    @field_validator("kind", mode="before")
    @classmethod
    def _parse_kind(cls, v):
        return ModelKind.parse(v)

    @model_validator(mode="after")
    def _check(self):
        if abs(self.rho) >= 1 or abs(self.lambda_) >= 1:
            raise ValueError("rho and lambda must lie in (-1, 1)")
        if self.rho != 0 and not self.kind.has_rho:
            raise ValueError(f"{self.kind.value} has no rho parameter")
        if self.lambda_ != 0 and not self.kind.has_lambda:
            raise ValueError(f"{self.kind.value} has no lambda parameter")
        if self.kind.has_theta and len(self.theta) != len(self.beta):
            raise ValueError("theta must have one entry per covariate")
        if not self.kind.has_theta and self.theta:
            raise ValueError(f"{self.kind.value} has no theta parameters")
        return self

    @property
    def k(self) -> int:
        return len(self.beta)


class CovariateBias(BaseModel):
    name: str
    true_beta: float
    mean_estimate: float
    mean_bias: float
    mc_se: float
    mean_cov_x_wy: float
    expected_sign: int
    observed_sign: int
    sign_agrees: bool
    significant: bool
    sar_mean_bias: Optional[float] = None
    sar_mc_se: Optional[float] = None


class BiasReport(BaseModel):
    """Omitted-variable bias of non-spatial OLS under a SAR process"""
    rho: float
    n: int
    n_reps: int
    seed: int
    covariates: List[CovariateBias]
    naive_rho_mean: Optional[float] = None
    naive_rho_bias: Optional[float] = None
    sar_rho_mean: Optional[float] = None


class ParameterRecovery(BaseModel):
    name: str
    true_value: float
    mean_estimate: float
    bias: float
    rmse: float
    coverage: float


class RecoveryReport(BaseModel):
    """Monte Carlo parameter recovery for one model"""
    model: ModelKind
    n: int
    n_reps: int
    seed: int
    parameters: List[ParameterRecovery]

    def parameter(self, name: str) -> ParameterRecovery:
        for item in self.parameters:
            if item.name == name:
                return item
        raise BadIndex(name, [item.name for item in self.parameters])


# =============================================
# CLI MODELS
# =============================================

class RunConfig(BaseModel):
    """Validated command-line invocation"""
    subcommand: Literal["weights", "fit", "diagnose", "impacts", "simulate"]
    input_paths: Dict[str, Path] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict)
    normalize: Optional[Normalization] = None
    standardize: bool = False
    seed: Optional[int] = None
    out: Optional[Path] = None
    output_format: Literal["json", "text"] = "json"

    @model_validator(mode="after")
    def _inputs_exist(self):
        for role, path in self.input_paths.items():
            if not path.is_file():
                raise IoError(str(path), f"{role} file does not exist")
        return self
