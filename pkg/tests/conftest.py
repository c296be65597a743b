"""
Pytest configuration and shared fixtures for the spatial econometrics tests.
"""
from pathlib import Path
from typing import Callable, List

import numpy as np
import pandas as pd
import pytest

from src.core import Dataset, DgpSpec, config
from src.spatial.simulate import generate
from src.spatial.weights import SpatialWeights, from_edge_list, lattice_weights, row_normalize


# Five units; 1, 3 and 5 each touch 2 and 4, so the graph is complete bipartite K(3,2)
WORKED_EDGES = [("1", "2"), ("1", "4"), ("2", "3"), ("2", "5"), ("3", "4"), ("4", "5")]


@pytest.fixture
def worked_edges() -> List[tuple]:
    return list(WORKED_EDGES)


@pytest.fixture
def worked_weights() -> SpatialWeights:
    """Raw binary contiguity of the five-unit example"""
    return from_edge_list(WORKED_EDGES, symmetrize=True)


@pytest.fixture
def worked_row(worked_weights) -> SpatialWeights:
    return row_normalize(worked_weights)


@pytest.fixture
def worked_dataset() -> Dataset:
    """Outcome and two covariates on the five example units"""
    return Dataset(
        y=[5.0, 3.0, 7.0, 2.0, 6.0],
        X=[[3, 120], [4, 140], [1, 200], [8, 70], [5, 250]],
        names=["x1", "x2"],
        ids=["1", "2", "3", "4", "5"],
    )


@pytest.fixture(scope="session")
def lattice_row() -> SpatialWeights:
    """Row-normalized rook contiguity on a 20x20 grid"""
    return row_normalize(lattice_weights(20, 20))


@pytest.fixture(scope="session")
def small_lattice_row() -> SpatialWeights:
    return row_normalize(lattice_weights(10, 10))


@pytest.fixture
def simulated(lattice_row) -> Callable[..., Dataset]:
    """Factory: one dataset drawn on the 20x20 lattice"""
    def _draw(kind: str = "SAR", replication: int = 0, **params) -> Dataset:
        params.setdefault("beta", [1.0, -1.0])
        params.setdefault("seed", 11)
        return generate(DgpSpec(kind=kind, **params), lattice_row, replication=replication)
    return _draw


@pytest.fixture
def write_csv(tmp_path) -> Callable[[str, pd.DataFrame], Path]:
    """Write a frame to a CSV file under tmp_path and return its path"""
    def _write(name: str, frame: pd.DataFrame) -> Path:
        path = tmp_path / name
        frame.to_csv(path, index=False, lineterminator="\n")
        return path
    return _write


@pytest.fixture
def sar_files(write_csv, lattice_row, simulated) -> dict:
    """Dataset and row-normalized edge list of a SAR draw with rho=0.5"""
    data = simulated("SAR", rho=0.5, beta=[1.0, -1.0], seed=3)
    frame = pd.DataFrame(data.X, columns=data.names)
    frame.insert(0, "y", data.y)
    frame.insert(0, "id", data.ids)
    edges = pd.DataFrame(lattice_row.to_edges(), columns=["src", "dst", "weight"])
    return {
        "data": write_csv("data.csv", frame),
        "weights": write_csv("weights.csv", edges),
        "dataset": data,
    }


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)


# Custom pytest markers
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "unit: mark test as a unit test"
    )
    config.addinivalue_line(
        "markers", "integration: mark test as an integration test"
    )
    config.addinivalue_line(
        "markers", "slow: mark test as slow running (Monte Carlo)"
    )


@pytest.fixture(autouse=True)
def setup_test_environment(monkeypatch):
    """Set up test environment variables."""
    monkeypatch.setenv("SPATIALECON_ENVIRONMENT", "test")
    monkeypatch.setenv("SPATIALECON_LOG_LEVEL", "WARNING")
    monkeypatch.setattr(config, "threads", max(1, config.threads))
