"""Per-site popularity tables and per-user dwell times.

Covers the photos-per-site-per-year table, the popularity ranking by
unique visitors, and earliest-to-latest dwell durations per (user, site).
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Sequence

from .ingestion import PhotoRecord, format_timestamp

Assigned = Sequence[tuple[PhotoRecord, str]]


@dataclass
class SiteYearCounts:
    """Photo counts indexed by (site_id, calendar year); year range is data-driven."""

    counts: dict[str, dict[int, int]]

    def sites(self) -> list[str]:
        return sorted(self.counts)

    def years(self) -> list[int]:
        all_years = {y for per_site in self.counts.values() for y in per_site}
        return sorted(all_years)

    def get(self, site_id: str, year: int) -> int:
        return self.counts.get(site_id, {}).get(year, 0)

    def total(self) -> int:
        return sum(c for per_site in self.counts.values() for c in per_site.values())


@dataclass(frozen=True)
class PopularityRow:
    site_id: str
    n_photos: int
    n_unique_visitors: int
    rank: int


@dataclass(frozen=True)
class DwellRecord:
    user_id: str
    site_id: str
    first_ts: datetime
    last_ts: datetime
    duration_s: int


def photos_per_site_year(assigned: Assigned) -> SiteYearCounts:
    """Count assigned photos per (site, UTC calendar year)."""
    counts: dict[str, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for record, site_id in assigned:
        counts[site_id][record.timestamp.year] += 1
    return SiteYearCounts({s: dict(per.items()) for s, per in counts.items()})


def popularity_table(assigned: Assigned) -> list[PopularityRow]:
    """One row per observed site, ranked by unique visitors.

    Ties break by photo count descending, then site_id ascending; ranks are
    a permutation of 1..n_sites.
    """
    photos: dict[str, int] = defaultdict(int)
    visitors: dict[str, set[str]] = defaultdict(set)
    for record, site_id in assigned:
        photos[site_id] += 1
        visitors[site_id].add(record.user_id)
    ordered = sorted(photos, key=lambda s: (-len(visitors[s]), -photos[s], s))
    return [
        PopularityRow(site_id=s, n_photos=photos[s], n_unique_visitors=len(visitors[s]), rank=i + 1)
        for i, s in enumerate(ordered)
    ]


def dwell_times(assigned: Assigned, split_by_day: bool = False) -> list[DwellRecord]:
    """Earliest-to-latest dwell duration per (user, site).

    By default all of a user's photos at a site fold into one record even
    across days, which matches the headline definition but inflates long
    revisit gaps; split_by_day=True instead keys on the UTC calendar date.
    """
    first: dict[tuple, datetime] = {}
    last: dict[tuple, datetime] = {}
    for record, site_id in assigned:
        key: tuple = (record.user_id, site_id)
        if split_by_day:
            key = key + (record.timestamp.date(),)
        ts = record.timestamp
        if key not in first or ts < first[key]:
            first[key] = ts
        if key not in last or ts > last[key]:
            last[key] = ts
    records = [
        DwellRecord(
            user_id=key[0],
            site_id=key[1],
            first_ts=first[key],
            last_ts=last[key],
            duration_s=int((last[key] - first[key]).total_seconds()),
        )
        for key in first
    ]
    records.sort(key=lambda d: (d.user_id, d.site_id, d.first_ts))
    return records


def mean_dwell_per_site(dwells: Iterable[DwellRecord]) -> dict[str, float]:
    """Arithmetic mean dwell duration (seconds) per site with >= 1 record."""
    totals: dict[str, int] = defaultdict(int)
    counts: dict[str, int] = defaultdict(int)
    for d in dwells:
        totals[d.site_id] += d.duration_s
        counts[d.site_id] += 1
    return {s: totals[s] / counts[s] for s in totals}


def write_site_year_csv(
    counts: SiteYearCounts, dest: str | Path | IO[str], site_order: Sequence[str] | None = None
) -> None:
    """Emit the per-site-per-year table: year rows (descending), site columns, total."""
    sites = list(site_order) if site_order is not None else counts.sites()
    rows: list[list] = [["year", *sites, "total"]]
    for year in sorted(counts.years(), reverse=True):
        per_site = [counts.get(s, year) for s in sites]
        rows.append([year, *per_site, sum(per_site)])
    _write_rows(rows, dest)


def write_popularity_csv(table: Sequence[PopularityRow], dest: str | Path | IO[str]) -> None:
    rows: list[list] = [["site", "n_photos", "n_unique_visitors", "rank"]]
    for r in sorted(table, key=lambda r: r.rank):
        rows.append([r.site_id, r.n_photos, r.n_unique_visitors, r.rank])
    _write_rows(rows, dest)


def write_dwell_csv(dwells: Sequence[DwellRecord], dest: str | Path | IO[str]) -> None:
    rows: list[list] = [["user_id", "site_id", "first_ts", "last_ts", "duration_s"]]
    for d in dwells:
        rows.append(
            [d.user_id, d.site_id, format_timestamp(d.first_ts), format_timestamp(d.last_ts), d.duration_s]
        )
    _write_rows(rows, dest)


def write_mean_dwell_csv(means: dict[str, float], dest: str | Path | IO[str]) -> None:
    rows: list[list] = [["site", "mean_dwell_s"]]
    for site in sorted(means):
        rows.append([site, f"{means[site]:.1f}"])
    _write_rows(rows, dest)


def _write_rows(rows: Iterable[Iterable], dest: str | Path | IO[str]) -> None:
    if hasattr(dest, "write"):
        csv.writer(dest, lineterminator="\n").writerows(rows)  # type: ignore[arg-type]
    else:
        with Path(dest).open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
