"""Scene-label aggregation into the per-site representative-scene matrix.

Each photo contributes its top-1 scene label (argmax confidence). Per
site, the most frequent fraction of distinct labels is kept as
representative; matrix cells hold the site-relative frequency of each
representative label and are zero elsewhere. Filtering zeroes cells, it
never renormalizes.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

from .geofence import SiteCatalog
from .util import ceil_fraction


@dataclass(frozen=True)
class SceneLabel:
    photo_id: str
    label: str
    confidence: float

    def __post_init__(self):
        if not self.label:
            raise ValueError(f"empty label for {self.photo_id}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0, 1] for {self.photo_id}: {self.confidence}")


@dataclass
class SceneSiteMatrix:
    sites: list[str]
    labels: list[str]  # ordered most natural -> most artificial
    values: np.ndarray  # (n_sites, n_labels) relative frequencies

    def to_csv(self, dest: str | Path | IO[str]) -> None:
        rows: list[list] = [["site", *self.labels]]
        for i, site in enumerate(self.sites):
            rows.append([site, *(f"{v:.6f}" for v in self.values[i])])
        if hasattr(dest, "write"):
            csv.writer(dest, lineterminator="\n").writerows(rows)  # type: ignore[arg-type]
        else:
            with Path(dest).open("w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)


def read_scene_csv(path: str | Path) -> list[SceneLabel]:
    """Read photo_id,label,confidence rows."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    labels: list[SceneLabel] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = ("photo_id", "label", "confidence")
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"scene CSV missing columns: {', '.join(missing)}")
        for row in reader:
            labels.append(SceneLabel(row["photo_id"], row["label"], float(row["confidence"])))
    return labels


def write_scene_csv(labels: Iterable[SceneLabel], dest: str | Path | IO[str]) -> None:
    rows: list[list] = [["photo_id", "label", "confidence"]]
    for s in labels:
        rows.append([s.photo_id, s.label, f"{s.confidence:.6f}"])
    if hasattr(dest, "write"):
        csv.writer(dest, lineterminator="\n").writerows(rows)  # type: ignore[arg-type]
    else:
        with Path(dest).open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)


def top1_labels(labels: Iterable[SceneLabel]) -> dict[str, SceneLabel]:
    """Argmax-confidence label per photo; confidence ties take the smaller label."""
    best: dict[str, SceneLabel] = {}
    for s in labels:
        cur = best.get(s.photo_id)
        if (
            cur is None
            or s.confidence > cur.confidence
            or (s.confidence == cur.confidence and s.label < cur.label)
        ):
            best[s.photo_id] = s
    return best


def aggregate_scene_counts(
    labels: Iterable[SceneLabel], assigned: Mapping[str, str]
) -> tuple[dict[tuple[str, str], int], int]:
    """Count top-1 labels per (site, label).

    Labeled photos absent from the photo->site assignment are skipped;
    returns (counts, skipped).
    """
    counts: dict[tuple[str, str], int] = defaultdict(int)
    skipped = 0
    for photo_id, scene in top1_labels(labels).items():
        site = assigned.get(photo_id)
        if site is None:
            skipped += 1
            continue
        counts[(site, scene.label)] += 1
    return dict(counts), skipped


def representative_scenes(
    counts: Mapping[tuple[str, str], int], site: str, fraction: float = 0.1
) -> list[str]:
    """Most frequent fraction of distinct labels at a site (at least one).

    Count ties order alphabetically.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    site_counts = {label: c for (s, label), c in counts.items() if s == site}
    if not site_counts:
        return []
    order = sorted(site_counts, key=lambda label: (-site_counts[label], label))
    take = min(len(order), max(1, ceil_fraction(fraction, len(order))))
    return order[:take]


def read_ordering(path: str | Path) -> dict[str, int]:
    """Naturalness ranking file: a JSON object mapping label -> rank."""
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    return {str(label): int(rank) for label, rank in raw.items()}


def build_matrix(
    counts: Mapping[tuple[str, str], int],
    catalog: SiteCatalog,
    fraction: float = 0.1,
    ordering: Mapping[str, int] | None = None,
) -> SceneSiteMatrix:
    """Representative-scene occurrence matrix over the catalog's sites.

    Columns are the union of representative labels across sites, sorted by
    the supplied naturalness rank; labels missing from the ordering sort
    last, alphabetically. Cells are site-relative frequencies over ALL
    observed labels at the site, zeroed for non-representative labels.
    """
    ordering = ordering or {}
    sites = catalog.site_ids()
    reps = {site: set(representative_scenes(counts, site, fraction)) for site in sites}
    columns = sorted(
        {label for labels in reps.values() for label in labels},
        key=lambda label: (ordering.get(label, np.inf), label),
    )
    totals: dict[str, int] = defaultdict(int)
    for (site, _), c in counts.items():
        totals[site] += c

    values = np.zeros((len(sites), len(columns)))
    col_index = {label: j for j, label in enumerate(columns)}
    for (site, label), c in counts.items():
        if site in reps and label in reps[site]:
            values[sites.index(site), col_index[label]] = c / totals[site]
    return SceneSiteMatrix(sites=sites, labels=columns, values=values)
