"""Diversity/homogeneity diagnostics over the largest clusters.

Separation is the mean pairwise Euclidean distance between cluster
exemplars; compactness is the mean cluster diameter (max pairwise member
distance, 0 for singletons). Both are computed over the top fraction of
clusters by size (at least 2) so the pairwise separation is always
defined when the partition has two or more clusters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .apcluster import ClusterResult
from .util import ceil_fraction

# (exemplar photo_id, member photo_ids including the exemplar)
Cluster = tuple[str, list[str]]


class InsufficientClustersError(ValueError):
    """Separation needs at least two clusters."""


@dataclass(frozen=True)
class ClusterMetrics:
    site_id: str
    n_clusters: int
    separation: float | None
    compactness: float | None
    n_top_clusters_used: int

    @property
    def defined(self) -> bool:
        return self.separation is not None


def top_clusters(result: ClusterResult, fraction: float = 0.1) -> list[Cluster]:
    """Largest clusters by member count: max(2, ceil(fraction*K)), capped at K.

    Size ties order by exemplar id ascending.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0, 1]")
    clusters = result.clusters()
    order = sorted(clusters, key=lambda e: (-len(clusters[e]), e))
    take = min(len(order), max(2, ceil_fraction(fraction, len(order))))
    return [(e, clusters[e]) for e in order[:take]]


def separation(clusters: Sequence[Cluster], vectors: Mapping[str, np.ndarray]) -> float:
    """Mean Euclidean distance over all unordered exemplar pairs."""
    if len(clusters) < 2:
        raise InsufficientClustersError(f"got {len(clusters)} clusters, need >= 2")
    exemplar_points = [np.asarray(vectors[e], dtype=np.float64) for e, _ in clusters]
    dists = [float(np.linalg.norm(p - q)) for p, q in combinations(exemplar_points, 2)]
    return float(np.mean(dists))


def compactness(clusters: Sequence[Cluster], vectors: Mapping[str, np.ndarray]) -> float:
    """Mean cluster diameter; a singleton contributes 0."""
    if not clusters:
        raise ValueError("need at least one cluster")
    diameters = []
    for _, members in clusters:
        if len(members) < 2:
            diameters.append(0.0)
            continue
        pts = np.stack([np.asarray(vectors[m], dtype=np.float64) for m in members])
        diameters.append(float(pdist(pts).max()))
    return float(np.mean(diameters))


def site_metrics(
    site_id: str,
    result: ClusterResult,
    vectors: Mapping[str, np.ndarray],
    fraction: float = 0.1,
    all_clusters: bool = False,
) -> ClusterMetrics:
    """Metrics row for one site; flagged undefined when there are < 2 clusters."""
    k = result.n_clusters
    if k < 2:
        return ClusterMetrics(site_id, k, None, None, 0)
    if all_clusters:
        grouped = result.clusters()
        selected: list[Cluster] = [
            (e, grouped[e]) for e in sorted(grouped, key=lambda e: (-len(grouped[e]), e))
        ]
    else:
        selected = top_clusters(result, fraction)
    return ClusterMetrics(
        site_id=site_id,
        n_clusters=k,
        separation=separation(selected, vectors),
        compactness=compactness(selected, vectors),
        n_top_clusters_used=len(selected),
    )


def write_metrics_csv(metrics: Sequence[ClusterMetrics], dest: str | Path | IO[str]) -> None:
    rows: list[list] = [["site", "n_clusters", "separation", "compactness", "n_top_clusters_used"]]
    for m in metrics:
        rows.append(
            [
                m.site_id,
                m.n_clusters,
                "" if m.separation is None else f"{m.separation:.6f}",
                "" if m.compactness is None else f"{m.compactness:.6f}",
                m.n_top_clusters_used,
            ]
        )
    if hasattr(dest, "write"):
        csv.writer(dest, lineterminator="\n").writerows(rows)  # type: ignore[arg-type]
    else:
        with Path(dest).open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
