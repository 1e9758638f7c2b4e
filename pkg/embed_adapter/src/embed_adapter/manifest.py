"""Image manifest: photo_id -> image path."""

from __future__ import annotations

import csv
from pathlib import Path


def read_manifest(path: str | Path) -> list[tuple[str, Path]]:
    """Read a CSV manifest with columns photo_id,path.

    Relative image paths resolve against the manifest's directory.
    Duplicate photo_ids are an error; whether each path exists is checked
    at inference time (missing files are skipped and counted like any
    other undecodable image).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    base = path.parent
    rows: list[tuple[str, Path]] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for required in ("photo_id", "path"):
            if required not in fields:
                raise ValueError(f"manifest missing column: {required}")
        for row in reader:
            photo_id = (row["photo_id"] or "").strip()
            if not photo_id:
                raise ValueError(f"empty photo_id at line {reader.line_num}")
            if photo_id in seen:
                raise ValueError(f"duplicate photo_id in manifest: {photo_id}")
            seen.add(photo_id)
            image_path = Path(row["path"])
            if not image_path.is_absolute():
                image_path = base / image_path
            rows.append((photo_id, image_path))
    return rows
