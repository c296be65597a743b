from .interface import InterfaceStore
from .csv_store import CsvTableStore
from .json_store import JsonStore

__all__ = ['InterfaceStore', 'CsvTableStore', 'JsonStore']
