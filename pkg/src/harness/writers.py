"""
Output writers for study tables and single-test documents.
"""
import json
import logging
import os
from typing import Any, Dict

import numpy as np

from .studies import StudyResult

logger = logging.getLogger("SVCT.Harness")

def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)

def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value

def write_csv(result: StudyResult, path: str) -> str:
    """Write the study table (header row, '.' decimals, UTF-8)"""
    _ensure_parent(path)
    result.to_frame().to_csv(path, index=False, encoding="utf-8")
    logger.info(f"Wrote {len(result.cells)} rows to {path}")
    return path

def write_json(document: Dict[str, Any], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_plain(document), f, indent=2)
    logger.info(f"Wrote {path}")
    return path

def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(_plain(document), indent=2)
