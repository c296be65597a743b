# src/spatial/__init__.py
"""
Spatial econometrics routines.

This package provides:
- Spatial weights construction and normalization
- Moran's I and LM specification tests
- OLS, SLX, SAR, SEM, SDM and SDEM estimators
- Spatial impact measures
- Data generating processes and Monte Carlo experiments
"""

from .weights import (
    SpatialWeights,
    from_edge_list,
    knn_weights,
    inverse_distance_weights,
    lattice_weights,
    row_normalize,
    eigen_normalize,
    normalize,
    spatial_lag,
    detect_islands
)

from .diagnostics import (
    morans_i,
    morans_i_residuals,
    lm_tests,
    select_specification
)

from .estimators import (
    LogDetCalculator,
    log_det,
    spatial_parameter_bounds,
    fit_ols,
    fit_slx,
    fit_sar,
    fit_sem,
    fit_sdm,
    fit_sdem,
    fit_naive_lag,
    fit_model,
    lr_test,
    is_nested
)

from .impacts import (
    MultiplierMatrix,
    multiplier_matrix,
    power_series_multiplier,
    partial_effects,
    unit_impacts,
    impacts_summary,
    impacts_inference
)

from .simulate import (
    draw_components,
    generate,
    ols_bias_experiment,
    recovery_experiment
)

__all__ = [
    # Weights
    'SpatialWeights',
    'from_edge_list',
    'knn_weights',
    'inverse_distance_weights',
    'lattice_weights',
    'row_normalize',
    'eigen_normalize',
    'normalize',
    'spatial_lag',
    'detect_islands',

    # Diagnostics
    'morans_i',
    'morans_i_residuals',
    'lm_tests',
    'select_specification',

    # Estimators
    'LogDetCalculator',
    'log_det',
    'spatial_parameter_bounds',
    'fit_ols',
    'fit_slx',
    'fit_sar',
    'fit_sem',
    'fit_sdm',
    'fit_sdem',
    'fit_naive_lag',
    'fit_model',
    'lr_test',
    'is_nested',

    # Impacts
    'MultiplierMatrix',
    'multiplier_matrix',
    'power_series_multiplier',
    'partial_effects',
    'unit_impacts',
    'impacts_summary',
    'impacts_inference',

    # Simulation
    'draw_components',
    'generate',
    'ols_bias_experiment',
    'recovery_experiment'
]
