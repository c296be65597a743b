"""
Fixtures for driving the command line in-process.
"""
import json
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import pandas as pd
import pytest
import structlog

from src.cli.main import main


class CliRun(NamedTuple):
    code: int
    stdout: str
    stderr: str

    @property
    def payload(self) -> Any:
        return json.loads(self.stdout)

    @property
    def error(self) -> Optional[Dict[str, Any]]:
        """The JSON error object written on failure"""
        for line in reversed(self.stderr.splitlines()):
            if line.startswith("{") and '"error_code"' in line:
                return json.loads(line)
        return None


@pytest.fixture
def run_cli(capsys) -> Callable[..., CliRun]:
    def _run(*argv: Any) -> CliRun:
        capsys.readouterr()
        code = main([str(arg) for arg in argv] + ["--log-level", "WARNING"])
        captured = capsys.readouterr()
        return CliRun(code, captured.out, captured.err)
    yield _run
    # main() binds structlog to the capsys stream, which is closed after the test
    structlog.reset_defaults()


@pytest.fixture
def worked_files(write_csv, worked_edges) -> Dict[str, Any]:
    """Edge list and dataset of the five-unit example"""
    edges = pd.DataFrame(worked_edges, columns=["src", "dst"])
    data = pd.DataFrame({
        "id": ["1", "2", "3", "4", "5"],
        "y": [0.0, 1.0, 0.0, 1.0, 0.0],
        "x": [3.0, 4.0, 1.0, 8.0, 5.0],
    })
    return {"edges": write_csv("edges.csv", edges), "data": write_csv("worked.csv", data)}


@pytest.fixture
def fit_args(sar_files) -> Callable[..., List[Any]]:
    """Arguments of a `fit` run on the simulated SAR files"""
    def _args(*extra: Any) -> List[Any]:
        return [
            "fit", "--data", sar_files["data"], "--outcome", "y", "--covariates", "x1,x2",
            "--id-column", "id", "--weights", sar_files["weights"], *extra,
        ]
    return _args
