# src/core/metrics.py
from prometheus_client import Counter, Histogram, CollectorRegistry, write_to_textfile
from typing import Optional
import time

import structlog

# Dedicated registry so repeated imports in tests never collide with the default one
REGISTRY = CollectorRegistry()

OPERATIONS = Counter(
    'spatialecon_operations_total',
    'Total toolkit operations',
    ['operation', 'model', 'status'],
    registry=REGISTRY
)

OPERATION_DURATION = Histogram(
    'spatialecon_operation_duration_seconds',
    'Toolkit operation duration',
    ['operation', 'model'],
    buckets=[0.001, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0],
    registry=REGISTRY
)

LIKELIHOOD_EVALUATIONS = Histogram(
    'spatialecon_likelihood_evaluations',
    'Concentrated likelihood evaluations per fit',
    ['model'],
    buckets=[10, 50, 100, 200, 500, 1000, 5000],
    registry=REGISTRY
)

SIMULATION_DRAWS = Counter(
    'spatialecon_simulation_draws_total',
    'Random draws (permutations, parameter draws, replications)',
    ['kind'],
    registry=REGISTRY
)


class MetricsCollector:
    """Unified metrics collector for the toolkit"""

    def __init__(self):
        self.logger = structlog.get_logger(__name__)

    def record_operation(self, operation: str, model: str, status: str, duration: float):
        """Record an operation outcome and its duration"""
        OPERATIONS.labels(operation=operation, model=model, status=status).inc()
        OPERATION_DURATION.labels(operation=operation, model=model).observe(duration)

    def record_likelihood_evaluations(self, model: str, count: int):
        LIKELIHOOD_EVALUATIONS.labels(model=model).observe(count)

    def record_draws(self, kind: str, count: int):
        SIMULATION_DRAWS.labels(kind=kind).inc(count)

    def write(self, path: str):
        """Dump the registry in the Prometheus text format"""
        write_to_textfile(path, REGISTRY)
        self.logger.debug("metrics_written", path=path)


# Global metrics collector instance
metrics = MetricsCollector()


class OperationMetrics:
    """Context manager for automatic operation metrics"""

    def __init__(self, operation: str, model: Optional[str] = None):
        self.operation = operation
        self.model = model or "none"
        self.start_time = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time is not None:
            duration = time.perf_counter() - self.start_time
            status = "success" if exc_type is None else "error"
            metrics.record_operation(self.operation, self.model, status, duration)
