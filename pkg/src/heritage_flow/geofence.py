"""Site catalog and great-circle assignment of photos to geofenced sites.

A site is a circular geofence: a center point plus a buffer radius in km.
A photo belongs to the nearest site among all sites whose buffer contains
it; the catalog order breaks exact distance ties.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable

from .ingestion import Dataset, PhotoRecord, format_timestamp, parse_timestamp

EARTH_RADIUS_KM = 6371.0  # mean Earth radius


class TicketGroup(str, Enum):
    BTC1 = "BTC1"
    BTC2 = "BTC2"
    BTC3 = "BTC3"
    UNESCO = "UNESCO"
    NONE = "NONE"


@dataclass(frozen=True)
class Site:
    site_id: str
    name: str
    center_lat: float
    center_lon: float
    buffer_km: float
    ticket_group: TicketGroup = TicketGroup.NONE


@dataclass(frozen=True)
class SiteCatalog:
    sites: tuple[Site, ...]

    def __init__(self, sites: Iterable[Site]):
        object.__setattr__(self, "sites", tuple(sites))
        if not self.sites:
            raise ValueError("catalog must contain at least one site")
        seen: set[str] = set()
        for site in self.sites:
            if site.site_id in seen:
                raise ValueError(f"duplicate site_id: {site.site_id}")
            seen.add(site.site_id)
            if not site.buffer_km > 0:
                raise ValueError(f"site {site.site_id}: buffer_km must be > 0")
            if not -90.0 <= site.center_lat <= 90.0:
                raise ValueError(f"site {site.site_id}: center_lat out of range")
            if not -180.0 <= site.center_lon <= 180.0:
                raise ValueError(f"site {site.site_id}: center_lon out of range")

    def __iter__(self):
        return iter(self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    def site_ids(self) -> list[str]:
        return [s.site_id for s in self.sites]

    def get(self, site_id: str) -> Site:
        for site in self.sites:
            if site.site_id == site_id:
                return site
        raise KeyError(site_id)

    def group(self, ticket_group: TicketGroup | str) -> list[str]:
        ticket_group = TicketGroup(ticket_group)
        return [s.site_id for s in self.sites if s.ticket_group is ticket_group]

    @classmethod
    def from_json(cls, path: str | Path) -> "SiteCatalog":
        """Load a catalog from a JSON array of site objects."""
        with Path(path).open(encoding="utf-8") as fh:
            entries = json.load(fh)
        sites = [
            Site(
                site_id=e["site_id"],
                name=e["name"],
                center_lat=float(e["center_lat"]),
                center_lon=float(e["center_lon"]),
                buffer_km=float(e["buffer_km"]),
                ticket_group=TicketGroup(e.get("ticket_group", "NONE")),
            )
            for e in entries
        ]
        return cls(sites)


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) points in degrees."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def assign_site(photo: PhotoRecord, catalog: SiteCatalog) -> str | None:
    """Nearest site whose buffer contains the photo, or None.

    Exact distance ties go to the site listed earlier in the catalog.
    """
    best_id: str | None = None
    best_dist = math.inf
    for site in catalog:
        d = haversine_km((photo.lat, photo.lon), (site.center_lat, site.center_lon))
        if d <= site.buffer_km and d < best_dist:
            best_id = site.site_id
            best_dist = d
    return best_id


def filter_within_buffer(
    dataset: Dataset, catalog: SiteCatalog
) -> list[tuple[PhotoRecord, str]]:
    """Keep exactly the records inside some site's buffer, in input order."""
    out: list[tuple[PhotoRecord, str]] = []
    for record in dataset.records:
        site_id = assign_site(record, catalog)
        if site_id is not None:
            out.append((record, site_id))
    return out


ASSIGNED_COLUMNS = ("photo_id", "user_id", "lat", "lon", "timestamp", "url", "site_id")


def write_assigned_csv(
    assigned: Iterable[tuple[PhotoRecord, str]], dest: str | Path | IO[str]
) -> None:
    if hasattr(dest, "write"):
        _write_assigned_rows(assigned, dest)  # type: ignore[arg-type]
    else:
        with Path(dest).open("w", newline="", encoding="utf-8") as fh:
            _write_assigned_rows(assigned, fh)


def _write_assigned_rows(assigned: Iterable[tuple[PhotoRecord, str]], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ASSIGNED_COLUMNS)
    for record, site_id in assigned:
        writer.writerow(
            [
                record.photo_id,
                record.user_id,
                repr(record.lat),
                repr(record.lon),
                format_timestamp(record.timestamp),
                record.url or "",
                site_id,
            ]
        )


def read_assigned_csv(path: str | Path) -> list[tuple[PhotoRecord, str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    out: list[tuple[PhotoRecord, str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ASSIGNED_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"assigned CSV missing columns: {', '.join(missing)}")
        for row in reader:
            record = PhotoRecord(
                photo_id=row["photo_id"],
                user_id=row["user_id"],
                lat=float(row["lat"]),
                lon=float(row["lon"]),
                timestamp=parse_timestamp(row["timestamp"]),
                url=row["url"] or None,
            )
            out.append((record, row["site_id"]))
    return out
