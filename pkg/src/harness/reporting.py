"""
CSV output for trial records.

Columns follow TrialRecord field order; floats are written with repr()
(shortest round-trip decimal), booleans as true/false, missing values empty.
Quoting is minimal RFC-4180 style with CRLF line endings.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Union, get_type_hints

from ..utils.errors import HarnessIOError, InvalidInputError
from .experiment import TrialRecord

logger = logging.getLogger(__name__)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(records: Iterable[TrialRecord], path: Union[str, Path]) -> Path:
    """Write header plus one row per record"""
    path = Path(path)
    columns = TrialRecord.columns()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\r\n")
            writer.writerow(columns)
            for record in records:
                writer.writerow([_format(getattr(record, column)) for column in columns])
    except OSError as e:
        raise HarnessIOError(f"Cannot write CSV {path}: {e}") from e
    logger.info(f"CSV written: {path}")
    return path


def _parse(text: str, annotation):
    if annotation is bool:
        return text == "true"
    if annotation == Optional[bool]:
        return None if text == "" else text == "true"
    if annotation is int:
        return int(text)
    if annotation is float:
        return float(text)
    return text


def parse_csv(path: Union[str, Path]) -> List[TrialRecord]:
    """Read records written by emit_csv"""
    path = Path(path)
    hints = get_type_hints(TrialRecord)
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as e:
        raise HarnessIOError(f"Cannot read CSV {path}: {e}") from e

    records = []
    for row in rows:
        try:
            values = {name: _parse(row[name], hints[name]) for name in TrialRecord.columns()}
            records.append(TrialRecord(**values))
        except (KeyError, ValueError) as e:
            raise InvalidInputError(f"Malformed record in {path}: {e}") from e
    return records
