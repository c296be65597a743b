from typing import Any, Optional
from abc import ABC, abstractmethod
from pathlib import Path


class InterfaceStore(ABC):
    '''Interface for file-backed stores'''

    @abstractmethod
    def read(self, path: Path, **kwargs) -> Any:
        ...

    @abstractmethod
    def write(self, payload: Any, path: Optional[Path] = None, **kwargs) -> Any:
        ...
