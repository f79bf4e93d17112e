"""
Utility functions shared by the simulator modules.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import yaml

from config import get_config

logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging once for command-line use.

    Args:
        level: Level name; defaults to the active LOG_LEVEL
    """
    settings = get_config()
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.WARNING),
        format=settings.LOG_FORMAT,
    )


def load_structured_file(file_path: Union[str, Path], missing_ok: bool = False) -> Dict[str, Any]:
    """
    Load a YAML or JSON mapping from disk.

    Args:
        file_path: Path to a .yaml, .yml or .json file
        missing_ok: Return an empty mapping instead of raising when absent

    Returns:
        Dictionary with the file contents
    """
    path = Path(file_path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        if missing_ok:
            logger.error(f"File not found: {path}")
            return {}
        raise
    if path.suffix == '.json':
        data = json.loads(text)
    else:
        data = yaml.safe_load(text)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a mapping at top level")
    return data


def safe_divide(numerator: float, denominator: float, default: float = 0.0) -> float:
    """
    Safely divide two numbers, returning a default value if denominator is zero.

    Args:
        numerator: The numerator
        denominator: The denominator
        default: Default value to return if division by zero

    Returns:
        Result of division or default value
    """
    try:
        return numerator / denominator
    except ZeroDivisionError:
        logger.debug(f"Division by zero attempted: {numerator}/{denominator}")
        return default


def parse_seed_range(text: str) -> List[int]:
    """
    Parse a seed range such as "1..1000" or a comma list "3,5,8".

    Args:
        text: Range or list expression

    Returns:
        Seeds in ascending order, duplicates removed
    """
    text = text.strip()
    if '..' in text:
        low, high = (int(part) for part in text.split('..', 1))
        seeds = list(range(low, high + 1))
    else:
        seeds = sorted({int(part) for part in text.split(',') if part.strip()})
    if not seeds:
        raise ValueError(f"empty seed range: {text!r}")
    return seeds


def format_labels(labels: Iterable[str]) -> str:
    """Render labels as a sorted brace set, e.g. {A, B}."""
    return '{' + ', '.join(sorted(labels)) + '}'
