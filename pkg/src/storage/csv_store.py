# src/storage/csv_store.py
"""
CSV tables: datasets, edge lists, coordinates and unit lists.

Every file has a header row. Identifier columns are read as strings.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from src.core.exceptions import ConfigError, IdMismatch, IoError, MissingData
from src.core.models import Dataset
from src.spatial.weights import SpatialWeights
from src.storage.interface import InterfaceStore

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


class CsvTableStore(InterfaceStore):
    """pandas-backed reader and writer for the toolkit's CSV formats"""

    def read(
        self,
        path: PathLike,
        dtype: Optional[Dict[str, type]] = None,
        allow_empty: bool = False
    ) -> pd.DataFrame:
        """
        Read a CSV file with a header row.

        Raises:
            IoError: File missing, unreadable or not valid CSV
        """
        path = Path(path)
        if not path.is_file():
            raise IoError(str(path), "file does not exist")
        try:
            frame = pd.read_csv(path, dtype=dtype, skipinitialspace=True)
        except pd.errors.EmptyDataError:
            if allow_empty:
                return pd.DataFrame()
            raise IoError(str(path), "file is empty")
        except (pd.errors.ParserError, UnicodeDecodeError, OSError) as e:
            raise IoError(str(path), str(e))
        frame.columns = [str(c).strip() for c in frame.columns]
        logger.debug("csv_read", path=str(path), rows=len(frame), columns=list(frame.columns))
        return frame

    def write(self, payload: pd.DataFrame, path: Optional[PathLike] = None, **kwargs) -> str:
        """Write a frame without its index; returns the CSV text"""
        text = payload.to_csv(index=False, lineterminator="\n")
        if path is not None:
            path = Path(path)
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text, encoding="utf-8")
            except OSError as e:
                raise IoError(str(path), str(e))
            logger.debug("csv_written", path=str(path), rows=len(payload))
        return text

    @staticmethod
    def _require(frame: pd.DataFrame, columns: Sequence[str], path: PathLike) -> None:
        absent = [c for c in columns if c not in frame.columns]
        if absent:
            raise ConfigError(
                f"column(s) {absent} not found in {path}",
                {"path": str(path), "missing": absent, "available": list(frame.columns)}
            )

    def read_dataset(
        self,
        path: PathLike,
        outcome: str,
        covariates: Sequence[str],
        id_column: Optional[str] = None
    ) -> Dataset:
        """
        Outcome and covariate columns as a Dataset.

        Raises:
            ConfigError: A requested column is absent or not numeric
            MissingData: Blank or NaN cells in the selected columns
            IdMismatch: Repeated unit identifiers
        """
        frame = self.read(path, dtype={id_column: str} if id_column else None)
        selected = [outcome, *covariates]
        self._require(frame, selected + ([id_column] if id_column else []), path)

        non_numeric = [c for c in selected if not pd.api.types.is_numeric_dtype(frame[c])]
        if non_numeric:
            raise ConfigError(f"column(s) {non_numeric} are not numeric", {"path": str(path)})

        missing = frame[selected].isna()
        if missing.any().any():
            rows = np.flatnonzero(missing.any(axis=1).to_numpy()).tolist()
            columns = [c for c in selected if missing[c].any()]
            raise MissingData(columns, rows)

        if id_column:
            ids = frame[id_column].astype(str).str.strip().tolist()
            if len(set(ids)) != len(ids):
                dupes = frame[id_column][frame[id_column].duplicated()].astype(str).tolist()
                raise IdMismatch(f"duplicate identifiers in column '{id_column}'", extra=dupes)
        else:
            ids = [str(i) for i in range(len(frame))]

        return Dataset(
            y=frame[outcome].to_numpy(dtype=float),
            X=frame[list(covariates)].to_numpy(dtype=float),
            names=list(covariates),
            ids=ids,
            outcome=outcome,
        )

    def read_edges(self, path: PathLike) -> List[Tuple[str, str, float]]:
        """Edges from a `src,dst[,weight]` file; blank weights mean 1"""
        frame = self.read(path, dtype={"src": str, "dst": str}, allow_empty=True)
        if frame.empty and not len(frame.columns):
            return []
        self._require(frame, ["src", "dst"], path)
        if frame[["src", "dst"]].isna().any().any():
            rows = np.flatnonzero(frame[["src", "dst"]].isna().any(axis=1).to_numpy()).tolist()
            raise MissingData(["src", "dst"], rows)
        weights = (
            pd.to_numeric(frame["weight"], errors="coerce").fillna(1.0).to_numpy(dtype=float)
            if "weight" in frame.columns else np.ones(len(frame))
        )
        src = frame["src"].astype(str).str.strip()
        dst = frame["dst"].astype(str).str.strip()
        return list(zip(src.tolist(), dst.tolist(), weights.tolist()))

    def read_coords(self, path: PathLike) -> Tuple[List[str], np.ndarray]:
        """Identifiers and planar coordinates from an `id,x,y` file"""
        frame = self.read(path, dtype={"id": str})
        self._require(frame, ["id", "x", "y"], path)
        ids = frame["id"].astype(str).str.strip().tolist()
        if len(set(ids)) != len(ids):
            raise IdMismatch("duplicate identifiers in coordinates file")
        coords = frame[["x", "y"]].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
        return ids, coords

    def read_units(self, path: PathLike, column: str = "id") -> List[str]:
        """Ordered unit list from a one-column file"""
        frame = self.read(path, dtype={column: str})
        self._require(frame, [column], path)
        return frame[column].astype(str).str.strip().tolist()

    def write_edges(self, W: SpatialWeights, path: Optional[PathLike] = None) -> str:
        """Canonical `src,dst,weight` edge list ordered by row then column"""
        frame = pd.DataFrame(W.to_edges(), columns=["src", "dst", "weight"])
        return self.write(frame, path)

    def write_dataset(self, data: Dataset, path: Optional[PathLike] = None, id_column: str = "id") -> str:
        frame = pd.DataFrame(data.X, columns=data.names)
        frame.insert(0, data.outcome, data.y)
        frame.insert(0, id_column, data.ids)
        return self.write(frame, path)
