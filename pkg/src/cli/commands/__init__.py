# src/cli/commands/__init__.py
"""
Subcommand modules. Each exposes add_parser(subparsers, parents) and
handle(args, manager) -> CommandResult.
"""
from pathlib import Path
from typing import Any, List, NamedTuple, Optional

from src.core import ConfigError, parse_float_list


class CommandResult(NamedTuple):
    """What a subcommand hands back to the dispatcher for output"""
    payload: Any
    text: Optional[str] = None
    out: Optional[Path] = None


def format_number(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def float_list(text: Optional[str], flag: str) -> List[float]:
    """Comma-separated floats from a command-line flag"""
    try:
        return parse_float_list(text)
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers", {"value": text})
