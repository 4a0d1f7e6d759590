"""CSV output for experiment tables."""

from __future__ import annotations

import csv
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

from src.logging_setup import get_logger


log = get_logger(__name__)


def _cell(value: Any) -> Any:
    # str(float) is the shortest repr that parses back to the same double
    if isinstance(value, bool):
        return int(value)
    return value


def write_csv(path: str | Path, rows: Iterable[Mapping[str, Any]], *, fieldnames: Sequence[str]) -> Path:
    """Write ``rows`` under a header row; columns outside ``fieldnames`` are an error."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in row.items()})
            count += 1
    log.info("harness.csv.written", path=str(target), rows=count)
    return target


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
