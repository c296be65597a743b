# src/storage/json_store.py
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, ValidationError

from src.core.exceptions import ConfigError, IoError
from src.core.models import FitResult
from src.storage.interface import InterfaceStore

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


def _encode(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(by_alias=True)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class JsonStore(InterfaceStore):
    """Deterministic JSON reports: fixed key order, two-space indent, trailing newline"""

    def dumps(self, payload: Any) -> str:
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(by_alias=True)
        return json.dumps(payload, indent=2, default=_encode, allow_nan=True) + "\n"

    def write(self, payload: Any, path: Optional[PathLike] = None, **kwargs) -> str:
        text = self.dumps(payload)
        if path is not None:
            path = Path(path)
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text, encoding="utf-8")
            except OSError as e:
                raise IoError(str(path), str(e))
            logger.debug("json_written", path=str(path))
        return text

    def read(self, path: PathLike, **kwargs) -> Any:
        path = Path(path)
        if not path.is_file():
            raise IoError(str(path), "file does not exist")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError) as e:
            raise IoError(str(path), str(e))
        except json.JSONDecodeError as e:
            raise IoError(str(path), f"invalid JSON: {e}")

    def fits_payload(
        self,
        fits: List[FitResult],
        extra: Optional[List[Dict[str, Any]]] = None,
        header: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        """
        {header..., "models": [...]} where each entry is a FitResult plus optional extra keys.

        Args:
            fits: Fit results in output order
            extra: Per-fit additional fields (LR tests, coefficient tables)
            header: Top-level fields placed before "models"
        """
        models = []
        for i, fit in enumerate(fits):
            record = fit.model_dump(by_alias=True)
            if extra is not None:
                record.update(extra[i])
            models.append(record)
        return {**(header or {}), "models": models}

    def write_fits(
        self,
        fits: List[FitResult],
        path: Optional[PathLike] = None,
        extra: Optional[List[Dict[str, Any]]] = None,
        header: Optional[Dict[str, Any]] = None
    ) -> str:
        return self.write(self.fits_payload(fits, extra, header), path)

    def read_fits(self, path: PathLike) -> List[FitResult]:
        """
        Fit results from a file written by write_fits.

        Raises:
            ConfigError: The file does not hold a valid fit list
        """
        payload = self.read(path)
        if not isinstance(payload, dict) or not isinstance(payload.get("models"), list):
            raise ConfigError(f"{path} does not contain a 'models' list")
        try:
            return [FitResult.model_validate(record) for record in payload["models"]]
        except ValidationError as e:
            raise ConfigError(f"invalid fit record in {path}", {"errors": str(e)})
