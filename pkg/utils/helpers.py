from __future__ import annotations

import csv
import json
import os
import uuid
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence


def _temporary(path: Path) -> Path:
    return path.with_name(f"{path.name}.{uuid.uuid4()}.tmp")


def save_json(path: str | Path, data: Any) -> Path:
    """Write `data` as sorted JSON and atomically move it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp = _temporary(path)
    with open(temp, "w", encoding="utf-8", newline="\n") as tmp:
        json.dump(data, tmp, indent=2, sort_keys=True, allow_nan=True)
        tmp.write("\n")

    # atomically move the file
    os.replace(temp, path)
    return path


def save_csv(
    path: str | Path, header: Sequence[str], rows: Iterable[Mapping[str, Any]]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp = _temporary(path)
    with open(temp, "w", encoding="utf-8", newline="") as tmp:
        writer = csv.DictWriter(tmp, fieldnames=list(header), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key, "")) for key in header})

    os.replace(temp, path)
    return path


def load_json(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as fp:
        return json.load(fp)


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value
