# src/core/__init__.py
"""
Core module for the spatial econometrics toolkit.

This module provides:
- Configuration management
- Exception handling
- Metrics collection
- Data models
- Utility functions
"""

from .config import (
    ApplicationConfig,
    WeightsConfig,
    EstimationConfig,
    DiagnosticsConfig,
    ImpactsConfig,
    config
)

from .exceptions import (
    EXIT_UNEXPECTED,
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_COMPUTATION,
    SpatialEconException,
    ConfigError,
    IoError,
    MissingData,
    IdMismatch,
    InvalidParameter,
    InsufficientData,
    ShapeError,
    WeightsException,
    InvalidWeight,
    DuplicateEdge,
    InvalidK,
    ZeroDistance,
    InvalidCoordinates,
    NoConnectivity,
    RequiresNormalizedW,
    ZeroVariance,
    WrongModel,
    EstimationException,
    SingularDesign,
    BoundaryEstimate,
    SingularMultiplier,
    NotNested,
    TooLargeForDense,
    SeriesNotConverged,
    BadIndex,
    BadCovariance
)

from .models import (
    Normalization,
    ImpactType,
    ModelKind,
    MODEL_ORDER,
    IslandReport,
    Dataset,
    ModelSpec,
    EstimationOptions,
    CoefficientEstimate,
    FitResult,
    LrTestResult,
    MoranResult,
    LmStatistic,
    LmTestResult,
    SpecificationDecision,
    ImpactInference,
    ImpactEstimate,
    ImpactsSummary,
    UnitImpacts,
    DgpSpec,
    CovariateBias,
    BiasReport,
    ParameterRecovery,
    RecoveryReport,
    RunConfig
)

from .metrics import (
    metrics,
    MetricsCollector,
    OperationMetrics
)

from .utils import (
    configure_logging,
    substream,
    resolve_threads,
    ordered_map,
    chunk_sizes,
    zscore,
    parse_float_list,
    parse_name_list,
    Timer
)

__all__ = [
    # Configuration
    'ApplicationConfig',
    'WeightsConfig',
    'EstimationConfig',
    'DiagnosticsConfig',
    'ImpactsConfig',
    'config',

    # Exceptions
    'EXIT_UNEXPECTED',
    'EXIT_CONFIG',
    'EXIT_IO',
    'EXIT_COMPUTATION',
    'SpatialEconException',
    'ConfigError',
    'IoError',
    'MissingData',
    'IdMismatch',
    'InvalidParameter',
    'InsufficientData',
    'ShapeError',
    'WeightsException',
    'InvalidWeight',
    'DuplicateEdge',
    'InvalidK',
    'ZeroDistance',
    'InvalidCoordinates',
    'NoConnectivity',
    'RequiresNormalizedW',
    'ZeroVariance',
    'WrongModel',
    'EstimationException',
    'SingularDesign',
    'BoundaryEstimate',
    'SingularMultiplier',
    'NotNested',
    'TooLargeForDense',
    'SeriesNotConverged',
    'BadIndex',
    'BadCovariance',

    # Models
    'Normalization',
    'ImpactType',
    'ModelKind',
    'MODEL_ORDER',
    'IslandReport',
    'Dataset',
    'ModelSpec',
    'EstimationOptions',
    'CoefficientEstimate',
    'FitResult',
    'LrTestResult',
    'MoranResult',
    'LmStatistic',
    'LmTestResult',
    'SpecificationDecision',
    'ImpactInference',
    'ImpactEstimate',
    'ImpactsSummary',
    'UnitImpacts',
    'DgpSpec',
    'CovariateBias',
    'BiasReport',
    'ParameterRecovery',
    'RecoveryReport',
    'RunConfig',

    # Metrics
    'metrics',
    'MetricsCollector',
    'OperationMetrics',

    # Utils
    'configure_logging',
    'substream',
    'resolve_threads',
    'ordered_map',
    'chunk_sizes',
    'zscore',
    'parse_float_list',
    'parse_name_list',
    'Timer'
]
