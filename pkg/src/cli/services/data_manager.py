# src/cli/services/data_manager.py
"""
Data Manager Service

Centralized loading and saving for the command-line front end.
Supports:
- Datasets from CSV with optional z-standardization
- Weights from edge lists aligned to a unit list
- Saved fit files
- Output rendering to stdout or files
"""
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from src.core import (
    ConfigError,
    Dataset,
    FitResult,
    IoError,
    Normalization,
    ZeroVariance,
    zscore,
)
from src.spatial.weights import SpatialWeights, detect_islands, from_edge_list, normalize
from src.storage import CsvTableStore, JsonStore

logger = structlog.get_logger(__name__)


class DataManager:
    """
    File-level operations shared by all subcommands:
    - Dataset loading and standardization
    - Weights loading, normalization and island handling
    - Fit file persistence
    - Output writing
    """

    def __init__(self, csv_store: Optional[CsvTableStore] = None, json_store: Optional[JsonStore] = None):
        self.csv = csv_store or CsvTableStore()
        self.json = json_store or JsonStore()

    # =============================================
    # DATASETS
    # =============================================

    def load_dataset(
        self,
        path: Path,
        outcome: str,
        covariates: Sequence[str],
        id_column: Optional[str] = None,
        standardize: bool = False
    ) -> Dataset:
        data = self.csv.read_dataset(path, outcome, covariates, id_column)
        logger.info("dataset_loaded", path=str(path), n=data.n, k=data.k, standardize=standardize)
        return self.standardize(data) if standardize else data

    @staticmethod
    def standardize(data: Dataset) -> Dataset:
        """z-score the outcome and every covariate with the n−1 standard deviation"""
        for name, column in [(data.outcome, data.y), *zip(data.names, data.X.T)]:
            if np.ptp(column) == 0:
                raise ZeroVariance(f"column '{name}'")
        return Dataset(
            y=zscore(data.y),
            X=zscore(data.X),
            names=list(data.names),
            ids=list(data.ids),
            outcome=data.outcome,
        )

    # =============================================
    # WEIGHTS
    # =============================================

    def load_weights(
        self,
        path: Path,
        ids: Optional[Sequence[str]] = None,
        how: Optional[Union[str, Normalization]] = None,
        symmetrize: bool = False
    ) -> SpatialWeights:
        """
        Weights from an edge-list file, indexed in the order of ids.

        Without an explicit normalization, a file whose non-island rows already
        sum to 1 is treated as row-normalized.

        Raises:
            IdMismatch: The file references units outside ids
        """
        W = self._weights_from_edges(self.csv.read_edges(path), ids, how, symmetrize)
        logger.info("weights_loaded", path=str(path), n=W.n, nnz=W.nnz, normalization=W.normalization.value)
        return W

    def load_fit_weights(
        self,
        path: Path,
        ids: Sequence[str],
        how: Optional[Union[str, Normalization]] = None
    ) -> SpatialWeights:
        """
        Weights of a saved fit, with the island drop of `fit --drop-islands` re-applied.

        Units the file references beyond ids must be islands of the full matrix;
        they are removed and the rest re-normalized exactly as at fit time.

        Raises:
            IdMismatch: The file references units that are not islands and not in the fit
        """
        edges = self.csv.read_edges(path)
        known = set(ids)
        dropped = sorted({unit for src, dst, _ in edges for unit in (src, dst)} - known)
        W = self._weights_from_edges(edges, [*ids, *dropped], how)
        if dropped:
            reduced, _ = W.drop_islands()
            W = reduced.reorder(ids)
            logger.info("fit_islands_reapplied", count=len(dropped), ids=dropped[:20])
        logger.info("weights_loaded", path=str(path), n=W.n, nnz=W.nnz, normalization=W.normalization.value)
        return W

    @staticmethod
    def _weights_from_edges(
        edges: Sequence[Tuple[str, str, float]],
        ids: Optional[Sequence[str]],
        how: Optional[Union[str, Normalization]],
        symmetrize: bool = False
    ) -> SpatialWeights:
        W = from_edge_list(edges, symmetrize=symmetrize, ids=ids)
        return normalize(W, how) if how else W.infer_normalization()

    def align(
        self,
        data: Dataset,
        W: SpatialWeights,
        drop_islands: bool = False
    ) -> Tuple[Dataset, SpatialWeights]:
        """Optionally drop island units from both the data and the weights"""
        if not drop_islands or not W.has_islands:
            return data, W
        report = detect_islands(W)
        reduced, keep = W.drop_islands()
        logger.info("dropping_islands", count=report.count, ids=report.island_ids[:20])
        return data.subset(keep), reduced

    # =============================================
    # FITS
    # =============================================

    def load_fits(self, path: Path, model: Optional[str] = None) -> List[FitResult]:
        fits = self.json.read_fits(path)
        if model is not None:
            wanted = model.strip().upper()
            fits = [fit for fit in fits if fit.kind.value == wanted]
            if not fits:
                raise ConfigError(f"no {wanted} fit in {path}")
        if not fits:
            raise ConfigError(f"{path} contains no fits")
        return fits

    # =============================================
    # OUTPUT
    # =============================================

    def emit(self, payload: Any, out: Optional[Path] = None, output_format: str = "json", text: Optional[str] = None):
        """Write the command result to a file or stdout"""
        rendered = text if output_format == "text" and text is not None else self.json.dumps(payload)
        if out is None:
            sys.stdout.write(rendered)
            sys.stdout.flush()
        else:
            if output_format == "text":
                try:
                    Path(out).parent.mkdir(parents=True, exist_ok=True)
                    Path(out).write_text(rendered, encoding="utf-8")
                except OSError as e:
                    raise IoError(str(out), str(e))
            else:
                self.json.write(payload, out)
            logger.info("output_written", path=str(out), format=output_format)
        return rendered
