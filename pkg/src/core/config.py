# src/core/config.py
import os
from pydantic_settings import BaseSettings
from dotenv import load_dotenv

load_dotenv()


def _default_threads() -> int:
    return int(os.getenv("SPATIALECON_THREADS", os.cpu_count() or 1))


class WeightsConfig(BaseSettings):
    """Spatial weights construction and normalization settings"""
    power_iteration_tol: float = 1e-10
    power_iteration_max_iter: int = 20000
    dense_eigen_limit: int = 500
    row_sum_tol: float = 1e-12
    eigen_tol: float = 1e-9

    # Row block size for brute-force nearest neighbour scans
    knn_block_size: int = 512

    class Config:
        env_prefix = "SPATIALECON_WEIGHTS_"


class EstimationConfig(BaseSettings):
    """Maximum likelihood estimation settings"""
    grid_size: int = 100
    optimizer_tol: float = 1e-8
    parameter_limit: float = 0.999
    hessian_step: float = 1e-5
    boundary_tol: float = 1e-6

    # Log-determinant strategy
    eigen_logdet_limit: int = 5000
    dense_lu_limit: int = 2000

    class Config:
        env_prefix = "SPATIALECON_ESTIMATION_"


class DiagnosticsConfig(BaseSettings):
    """Moran's I and LM test settings"""
    default_permutations: int = 999
    permutation_chunk_size: int = 256

    class Config:
        env_prefix = "SPATIALECON_DIAGNOSTICS_"


class ImpactsConfig(BaseSettings):
    """Impact measure settings"""
    dense_limit: int = 2000
    default_draws: int = 1000
    min_draws: int = 100
    series_tol: float = 1e-12
    max_series_terms: int = 500
    draw_chunk_size: int = 250

    class Config:
        env_prefix = "SPATIALECON_IMPACTS_"


class ApplicationConfig(BaseSettings):
    """Main application configuration"""

    # Environment
    environment: str = "development"
    debug: bool = False
    log_level: str = "INFO"
    log_format: str = "console"

    # Worker pools never exceed this many threads
    threads: int = _default_threads()
    # Seed used by the command line when --seed is omitted
    default_seed: int = 0

    weights: WeightsConfig = WeightsConfig()
    estimation: EstimationConfig = EstimationConfig()
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    impacts: ImpactsConfig = ImpactsConfig()

    class Config:
        env_prefix = "SPATIALECON_"
        case_sensitive = False


# Global configuration instance
config = ApplicationConfig()
