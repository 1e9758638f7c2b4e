"""Parse, validate, and deduplicate photo metadata from delimited text files.

Input convention: UTF-8 CSV with a header row, comma-delimited, RFC-4180
quoting. Required columns (any order): photo_id, user_id, lat, lon,
timestamp. An optional url column is carried through.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Mapping

REQUIRED_COLUMNS = ("photo_id", "user_id", "lat", "lon", "timestamp")

EARLIEST_TIMESTAMP = datetime(1990, 1, 1, tzinfo=timezone.utc)


class MissingColumnError(ValueError):
    """The CSV header lacks a required column."""

    def __init__(self, name: str):
        super().__init__(f"missing required column: {name}")
        self.name = name


class MalformedRowError(ValueError):
    """A row failed validation while parsing in strict mode."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


@dataclass(frozen=True)
class PhotoRecord:
    """One geotagged, timestamped photo owned by a user."""

    photo_id: str
    user_id: str
    lat: float
    lon: float
    timestamp: datetime  # tz-aware UTC, whole seconds
    url: str | None = None


@dataclass
class Dataset:
    """Accepted records plus (raw line, reason) pairs for everything rejected."""

    records: list[PhotoRecord] = field(default_factory=list)
    rejected: list[tuple[str, str]] = field(default_factory=list)


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 string to a tz-aware UTC datetime, truncated to whole seconds.

    Inputs without a zone offset are treated as UTC.
    """
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def validate_record(raw: Mapping[str, str]) -> PhotoRecord | str:
    """Build a PhotoRecord from a field map, or return a rejection reason string.

    Rejection is a value, not an exception.
    """
    photo_id = (raw.get("photo_id") or "").strip()
    if not photo_id:
        return "empty photo_id"
    user_id = (raw.get("user_id") or "").strip()
    if not user_id:
        return "empty user_id"

    try:
        lat = float(raw.get("lat") or "")
    except ValueError:
        return "unparseable lat"
    if not -90.0 <= lat <= 90.0:  # also rejects NaN
        return "lat out of range"

    try:
        lon = float(raw.get("lon") or "")
    except ValueError:
        return "unparseable lon"
    if not -180.0 <= lon <= 180.0:
        return "lon out of range"

    try:
        ts = parse_timestamp(raw.get("timestamp") or "")
    except ValueError:
        return "unparseable timestamp"
    if ts < EARLIEST_TIMESTAMP:
        return "timestamp before 1990"

    url = (raw.get("url") or "").strip() or None
    return PhotoRecord(photo_id, user_id, lat, lon, ts, url)


def parse_photo_csv(path: str | Path, strict: bool = False) -> Dataset:
    """Parse a photo-metadata CSV into a Dataset.

    Every well-formed row becomes a PhotoRecord; malformed rows and duplicate
    photo_ids (first occurrence wins) are collected in Dataset.rejected. In
    strict mode the first rejection raises MalformedRowError instead.

    Raises FileNotFoundError for a missing file and MissingColumnError when
    the header lacks a required column.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))

    dataset = Dataset()
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumnError(REQUIRED_COLUMNS[0]) from None
        for name in REQUIRED_COLUMNS:
            if name not in header:
                raise MissingColumnError(name)

        for row in reader:
            if not row:  # csv.reader yields [] for blank lines
                continue
            raw = {name: (row[i] if i < len(row) else "") for i, name in enumerate(header)}
            line = ",".join(row)
            result = validate_record(raw)
            if isinstance(result, str):
                if strict:
                    raise MalformedRowError(reader.line_num, result)
                dataset.rejected.append((line, result))
                continue
            if result.photo_id in seen:
                if strict:
                    raise MalformedRowError(reader.line_num, "duplicate photo_id")
                dataset.rejected.append((line, "duplicate photo_id"))
                continue
            seen.add(result.photo_id)
            dataset.records.append(result)
    return dataset


def write_photo_csv(records: Iterable[PhotoRecord], dest: str | Path | IO[str]) -> None:
    """Serialize records in the same CSV convention parse_photo_csv reads."""
    if hasattr(dest, "write"):
        _write_photo_rows(records, dest)  # type: ignore[arg-type]
    else:
        with Path(dest).open("w", newline="", encoding="utf-8") as fh:
            _write_photo_rows(records, fh)


def _write_photo_rows(records: Iterable[PhotoRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["photo_id", "user_id", "lat", "lon", "timestamp", "url"])
    for r in records:
        writer.writerow(
            [r.photo_id, r.user_id, repr(r.lat), repr(r.lon), format_timestamp(r.timestamp), r.url or ""]
        )
