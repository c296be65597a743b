# src/core/exceptions.py
from typing import Optional, Dict, Any, List

# Process exit codes
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_COMPUTATION = 4


class SpatialEconException(Exception):
    """Base exception for spatial econometrics operations"""

    exit_code: int = EXIT_COMPUTATION

    def __init__(
        self,
        message: str,
        error_code: str = "SPATIALECON_ERROR",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary format"""
        return {
            "error": True,
            "error_code": self.error_code,
            "message": self.message,
            "details": self.details
        }


# Configuration and I/O
class ConfigError(SpatialEconException):
    exit_code = EXIT_CONFIG

    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"Invalid configuration: {reason}", "CONFIG_ERROR", details)


class IoError(SpatialEconException):
    exit_code = EXIT_IO

    def __init__(self, path: str, reason: str):
        super().__init__(
            f"Cannot access '{path}': {reason}",
            "IO_ERROR",
            {"path": path, "reason": reason}
        )


class MissingData(SpatialEconException):
    exit_code = EXIT_CONFIG

    def __init__(self, columns: List[str], rows: List[int]):
        super().__init__(
            f"Missing values in columns {columns} at rows {rows[:20]}; "
            "drop or impute these units before building the weights",
            "MISSING_DATA",
            {"columns": columns, "rows": rows}
        )


class IdMismatch(SpatialEconException):
    exit_code = EXIT_CONFIG

    def __init__(self, reason: str, missing: Optional[List[str]] = None, extra: Optional[List[str]] = None):
        super().__init__(
            f"Unit identifiers do not match: {reason}",
            "ID_MISMATCH",
            {"missing": (missing or [])[:20], "extra": (extra or [])[:20]}
        )


class InvalidParameter(SpatialEconException):
    def __init__(self, name: str, value: Any, reason: str):
        super().__init__(
            f"Invalid value {value!r} for '{name}': {reason}",
            "INVALID_PARAMETER",
            {"name": name, "value": value, "reason": reason}
        )


class InsufficientData(SpatialEconException):
    def __init__(self, n: int, required: int, operation: str):
        super().__init__(
            f"{operation} needs at least {required} units, got {n}",
            "INSUFFICIENT_DATA",
            {"n": n, "required": required, "operation": operation}
        )


class ShapeError(SpatialEconException):
    def __init__(self, expected: Any, actual: Any, what: str = "array"):
        super().__init__(
            f"Shape mismatch for {what}: expected {expected}, got {actual}",
            "SHAPE_ERROR",
            {"expected": expected, "actual": actual, "what": what}
        )


# Weights construction
class WeightsException(SpatialEconException):
    def __init__(self, message: str, error_code: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code, details)


class InvalidWeight(WeightsException):
    def __init__(self, src: Any, dst: Any, weight: float, reason: str):
        super().__init__(
            f"Invalid weight {weight} on edge ({src}, {dst}): {reason}",
            "INVALID_WEIGHT",
            {"src": src, "dst": dst, "weight": weight, "reason": reason}
        )


class DuplicateEdge(WeightsException):
    def __init__(self, src: Any, dst: Any):
        super().__init__(
            f"Edge ({src}, {dst}) listed more than once",
            "DUPLICATE_EDGE",
            {"src": src, "dst": dst}
        )


class InvalidK(WeightsException):
    def __init__(self, k: int, n: int):
        super().__init__(
            f"k={k} neighbours requested for {n} units; need 1 <= k < n",
            "INVALID_K",
            {"k": k, "n": n}
        )


class ZeroDistance(WeightsException):
    def __init__(self, src: Any, dst: Any):
        super().__init__(
            f"Units {src} and {dst} share coordinates; inverse distance is undefined",
            "ZERO_DISTANCE",
            {"src": src, "dst": dst}
        )


class InvalidCoordinates(WeightsException):
    def __init__(self, rows: List[int]):
        super().__init__(
            f"Non-finite coordinates at rows {rows[:20]}",
            "INVALID_COORDINATES",
            {"rows": rows}
        )


class NoConnectivity(WeightsException):
    def __init__(self, operation: str):
        super().__init__(
            f"{operation} requires a weights matrix with at least one nonzero entry",
            "NO_CONNECTIVITY",
            {"operation": operation}
        )


class RequiresNormalizedW(WeightsException):
    def __init__(self, normalization: str, operation: str):
        super().__init__(
            f"{operation} requires row- or eigen-normalized weights, got '{normalization}'",
            "REQUIRES_NORMALIZED_W",
            {"normalization": normalization, "operation": operation}
        )


# Diagnostics
class ZeroVariance(SpatialEconException):
    def __init__(self, what: str = "variable"):
        super().__init__(
            f"The {what} has zero variance",
            "ZERO_VARIANCE",
            {"what": what}
        )


class WrongModel(SpatialEconException):
    def __init__(self, expected: str, actual: str):
        super().__init__(
            f"Expected a {expected} fit, got {actual}",
            "WRONG_MODEL",
            {"expected": expected, "actual": actual}
        )


# Estimation
class EstimationException(SpatialEconException):
    def __init__(self, message: str, error_code: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, error_code, details)


class SingularDesign(EstimationException):
    def __init__(self, rank: int, columns: int, names: Optional[List[str]] = None):
        super().__init__(
            f"Design matrix has rank {rank} < {columns} columns",
            "SINGULAR_DESIGN",
            {"rank": rank, "columns": columns, "names": names or []}
        )


class BoundaryEstimate(EstimationException):
    def __init__(self, parameter: str, value: float, bounds: List[float]):
        super().__init__(
            f"{parameter} estimate {value:.6f} lies on the search boundary {bounds}",
            "BOUNDARY_ESTIMATE",
            {"parameter": parameter, "value": value, "bounds": bounds}
        )


class SingularMultiplier(EstimationException):
    def __init__(self, rho: float, reason: str = "I - rho*W is singular"):
        super().__init__(
            f"Spatial multiplier undefined at {rho}: {reason}",
            "SINGULAR_MULTIPLIER",
            {"rho": rho, "reason": reason}
        )


class NotNested(EstimationException):
    def __init__(self, restricted: str, unrestricted: str, reason: str = "models are not nested"):
        super().__init__(
            f"Cannot compare {restricted} against {unrestricted}: {reason}",
            "NOT_NESTED",
            {"restricted": restricted, "unrestricted": unrestricted, "reason": reason}
        )


# Impacts
class TooLargeForDense(SpatialEconException):
    def __init__(self, n: int, limit: int):
        super().__init__(
            f"n={n} exceeds the dense matrix limit of {limit}",
            "TOO_LARGE_FOR_DENSE",
            {"n": n, "limit": limit}
        )


class SeriesNotConverged(SpatialEconException):
    def __init__(self, rho: float, terms_needed: int, max_terms: int):
        super().__init__(
            f"Power series at rho={rho} needs {terms_needed} terms, above the limit of {max_terms}",
            "SERIES_NOT_CONVERGED",
            {"rho": rho, "terms_needed": terms_needed, "max_terms": max_terms}
        )


class BadIndex(SpatialEconException):
    def __init__(self, covariate: Any, available: List[str]):
        super().__init__(
            f"Unknown covariate {covariate!r}; available: {available}",
            "BAD_INDEX",
            {"covariate": covariate, "available": available}
        )


class BadCovariance(SpatialEconException):
    def __init__(self, reason: str, min_eigenvalue: Optional[float] = None):
        super().__init__(
            f"Parameter covariance unusable for simulation: {reason}",
            "BAD_COVARIANCE",
            {"reason": reason, "min_eigenvalue": min_eigenvalue}
        )
