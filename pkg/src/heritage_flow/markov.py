"""Visit sequences and row-stochastic transition-matrix estimation.

A visit is a maximal run of one user's consecutive photos at a single
site; transitions are counted between adjacent visits, so the count
diagonal is identically zero. Rows with positive counts normalize to
probability 1; zero-count rows stay all-zero and are flagged rather than
smoothed.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from .geofence import SiteCatalog
from .ingestion import PhotoRecord

DEFAULT_PHASE_BOUNDARY = datetime(2008, 1, 1, tzinfo=timezone.utc)

ROW_SUM_TOL = 1e-9


class UnknownSiteError(KeyError):
    """A sequence mentions a site absent from the matrix index."""

    def __init__(self, site_id: str):
        super().__init__(site_id)
        self.site_id = site_id


@dataclass(frozen=True)
class Visit:
    user_id: str
    site_id: str
    first_ts: datetime
    last_ts: datetime
    n_photos: int


@dataclass(frozen=True)
class SiteSequence:
    user_id: str
    visits: tuple[Visit, ...]

    def site_ids(self) -> list[str]:
        return [v.site_id for v in self.visits]


@dataclass(frozen=True)
class TransitionMatrix:
    """Transition counts and the row-stochastic probabilities derived from them."""

    sites: tuple[str, ...]
    counts: np.ndarray  # (n, n) int64, zero diagonal
    probs: np.ndarray  # (n, n) float64; zero-count rows stay all-zero

    @classmethod
    def from_counts(cls, sites: Sequence[str], counts: np.ndarray) -> "TransitionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        n = len(sites)
        if counts.shape != (n, n):
            raise ValueError(f"counts shape {counts.shape} does not match {n} sites")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if np.any(np.diagonal(counts) != 0):
            raise ValueError("self-transitions are not representable (nonzero diagonal)")
        row_sums = counts.sum(axis=1)
        probs = np.zeros(counts.shape, dtype=np.float64)
        nz = row_sums > 0
        probs[nz] = counts[nz] / row_sums[nz, None]
        return cls(tuple(sites), counts, probs)

    @property
    def n(self) -> int:
        return len(self.sites)

    def index(self, site_id: str) -> int:
        try:
            return self.sites.index(site_id)
        except ValueError:
            raise UnknownSiteError(site_id) from None

    @property
    def zero_rows(self) -> list[str]:
        """Sites with no outgoing transitions (rows left all-zero)."""
        sums = self.counts.sum(axis=1)
        return [s for s, total in zip(self.sites, sums) if total == 0]

    def smoothed_probs(self, alpha: float) -> np.ndarray:
        """Add-alpha smoothed probabilities for simulation use.

        Off-diagonal cells gain alpha pseudo-counts; the diagonal stays zero.
        Counts and probs on the matrix itself are untouched.
        """
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.n < 2:
            return np.zeros_like(self.probs)
        pseudo = self.counts + alpha
        np.fill_diagonal(pseudo, 0.0)
        return pseudo / pseudo.sum(axis=1, keepdims=True)


def build_sequences(assigned: Sequence[tuple[PhotoRecord, str]]) -> list[SiteSequence]:
    """Collapse each user's photos (sorted by timestamp, then photo_id) into visits.

    Maximal runs of consecutive same-site photos become one Visit; every
    user with at least one assigned photo yields one SiteSequence. Output
    is ordered by user_id.
    """
    by_user: dict[str, list[tuple[PhotoRecord, str]]] = defaultdict(list)
    for record, site_id in assigned:
        by_user[record.user_id].append((record, site_id))

    sequences: list[SiteSequence] = []
    for user_id in sorted(by_user):
        photos = sorted(by_user[user_id], key=lambda p: (p[0].timestamp, p[0].photo_id))
        visits: list[Visit] = []
        for record, site_id in photos:
            if visits and visits[-1].site_id == site_id:
                prev = visits[-1]
                visits[-1] = Visit(
                    user_id=user_id,
                    site_id=site_id,
                    first_ts=prev.first_ts,
                    last_ts=max(prev.last_ts, record.timestamp),
                    n_photos=prev.n_photos + 1,
                )
            else:
                visits.append(
                    Visit(
                        user_id=user_id,
                        site_id=site_id,
                        first_ts=record.timestamp,
                        last_ts=record.timestamp,
                        n_photos=1,
                    )
                )
        sequences.append(SiteSequence(user_id=user_id, visits=tuple(visits)))
    return sequences


def _count_transitions(
    seqs: Iterable[SiteSequence],
    sites: Sequence[str],
    keep: Callable[[Visit, Visit], bool] | None = None,
) -> np.ndarray:
    index = {s: i for i, s in enumerate(sites)}
    counts = np.zeros((len(sites), len(sites)), dtype=np.int64)
    for seq in seqs:
        for a, b in zip(seq.visits, seq.visits[1:]):
            if a.site_id == b.site_id:
                raise ValueError(
                    f"user {seq.user_id}: consecutive visits share site {a.site_id}"
                )
            try:
                i = index[a.site_id]
                j = index[b.site_id]
            except KeyError as exc:
                raise UnknownSiteError(str(exc.args[0])) from None
            if keep is None or keep(a, b):
                counts[i, j] += 1
    return counts


def estimate(seqs: Sequence[SiteSequence], catalog: SiteCatalog) -> TransitionMatrix:
    """Count adjacent visit pairs across all sequences and normalize rows."""
    sites = catalog.site_ids()
    return TransitionMatrix.from_counts(sites, _count_transitions(seqs, sites))


def split_by_phase(
    seqs: Sequence[SiteSequence],
    catalog: SiteCatalog,
    boundary: datetime = DEFAULT_PHASE_BOUNDARY,
) -> tuple[TransitionMatrix, TransitionMatrix]:
    """Independent matrices for transitions arriving before/after the boundary.

    A transition belongs to the early phase when the arrival visit starts
    strictly before the boundary, so each transition lands in exactly one
    phase.
    """
    sites = catalog.site_ids()
    early = _count_transitions(seqs, sites, keep=lambda a, b: b.first_ts < boundary)
    late = _count_transitions(seqs, sites, keep=lambda a, b: b.first_ts >= boundary)
    return TransitionMatrix.from_counts(sites, early), TransitionMatrix.from_counts(sites, late)


def windowed(
    seqs: Sequence[SiteSequence],
    catalog: SiteCatalog,
    window: timedelta | None,
) -> TransitionMatrix:
    """Count only transitions whose inter-site gap fits in the window.

    The gap runs from the last photo at the origin site to the first photo
    at the destination. window=None means no limit and matches estimate().
    """
    sites = catalog.site_ids()
    if window is None:
        return TransitionMatrix.from_counts(sites, _count_transitions(seqs, sites))
    if window <= timedelta(0):
        raise ValueError("window must be > 0")
    keep = lambda a, b: (b.first_ts - a.last_ts) <= window
    return TransitionMatrix.from_counts(sites, _count_transitions(seqs, sites, keep=keep))


def top_transitions(
    m: TransitionMatrix, min_prob: float = 0.0, k: int | None = None
) -> list[tuple[str, str, float]]:
    """Entries with probability strictly above min_prob, highest first.

    Equal probabilities order by (from, to) site index; the list truncates
    to k entries when k is given.
    """
    if not 0.0 <= min_prob <= 1.0:
        raise ValueError("min_prob must be within [0, 1]")
    entries = [
        (i, j, m.probs[i, j])
        for i in range(m.n)
        for j in range(m.n)
        if m.probs[i, j] > min_prob
    ]
    entries.sort(key=lambda e: (-e[2], e[0], e[1]))
    if k is not None:
        entries = entries[:k]
    return [(m.sites[i], m.sites[j], float(p)) for i, j, p in entries]


def group_submatrix(m: TransitionMatrix, group: Sequence[str]) -> TransitionMatrix:
    """Restrict counts to group x group and re-derive probabilities."""
    idx = [m.index(s) for s in group]
    sub = m.counts[np.ix_(idx, idx)]
    return TransitionMatrix.from_counts(list(group), sub)


def write_matrix_csv(
    m: TransitionMatrix, dest: str | Path | IO[str], kind: str = "probs"
) -> None:
    """Matrix as CSV with a site_id header row and column.

    kind='probs' formats cells to 6 decimal places; kind='counts' writes
    the raw integers.
    """
    if kind not in ("probs", "counts"):
        raise ValueError(f"unknown matrix kind: {kind}")
    rows: list[list] = [["site", *m.sites]]
    for i, site in enumerate(m.sites):
        if kind == "probs":
            rows.append([site, *(f"{p:.6f}" for p in m.probs[i])])
        else:
            rows.append([site, *(int(c) for c in m.counts[i])])
    if hasattr(dest, "write"):
        csv.writer(dest, lineterminator="\n").writerows(rows)  # type: ignore[arg-type]
    else:
        with Path(dest).open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)


def write_summary_json(m: TransitionMatrix, dest: str | Path) -> None:
    summary = {
        "sites": list(m.sites),
        "total_transitions": int(m.counts.sum()),
        "zero_rows": m.zero_rows,
    }
    Path(dest).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
