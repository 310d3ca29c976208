"""
CSV and JSON writers.

CSV floats carry 17 significant digits; JSON floats use Python's shortest
round-trip representation. Both read back to the identical double.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

logger: logging.Logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, (bool, int, str)):
        return str(value)
    return format_float(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    count: int = 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.info("Wrote %s (%d rows)", path, count)
    return path


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(data), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def matrix_header(prefix: str, n: int) -> list[str]:
    """Row-major entry names p11, p12, ..., pNN."""
    return [f"{prefix}{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
