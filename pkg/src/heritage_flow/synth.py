"""Seeded synthetic data: Markov itineraries, photo datasets, feature blobs.

These generators are the independent oracles for the estimator and
clustering acceptance tests. Every generator is fully deterministic under
its seed; per-user streams are derived by hashing (seed, user index) so
adding users never perturbs earlier users' draws.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
import numpy as np

from .embeddings import FeatureVector
from .geofence import EARTH_RADIUS_KM, SiteCatalog, assign_site
from .ingestion import Dataset, PhotoRecord
from .markov import SiteSequence, Visit

ROW_SUM_TOL = 1e-9

# First timestamp any generated user may start at (the photo-sharing era).
_BASE_EPOCH = int(datetime(2004, 1, 1, tzinfo=timezone.utc).timestamp())
_START_SPAN_S = 14 * 365 * 86400


class DegenerateRowError(ValueError):
    """Sampling needed a transition row that is all-zero."""

    def __init__(self, site_id: str):
        super().__init__(f"all-zero transition row for site {site_id}")
        self.site_id = site_id


class CenterSamplingFailedError(RuntimeError):
    """Could not place blob centers respecting the minimum gap."""


@dataclass(frozen=True)
class SeqLenFixed:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("fixed sequence length must be >= 1")

    def draw(self, rng: np.random.Generator) -> int:
        return self.k


@dataclass(frozen=True)
class SeqLenGeometric:
    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError("geometric p must be in (0, 1]")

    def draw(self, rng: np.random.Generator) -> int:
        return int(rng.geometric(self.p))


@dataclass(frozen=True)
class SynthSpec:
    """Configuration for itinerary/photo generation.

    true_matrix rows must each sum to 1 (within 1e-9) or be entirely zero;
    the diagonal must be zero since consecutive same-site visits are not
    representable. All-zero rows raise DegenerateRowError only if sampling
    actually needs them.
    """

    n_users: int
    seq_len: SeqLenFixed | SeqLenGeometric
    sites: tuple[str, ...]
    true_matrix: np.ndarray
    initial_dist: np.ndarray
    photos_per_visit: tuple[int, int] = (1, 4)
    inter_visit_gap_s: tuple[int, int] = (1800, 86400)
    photo_gap_s: tuple[int, int] = (30, 300)
    seed: int = 0

    def __init__(
        self,
        n_users,
        seq_len,
        sites,
        true_matrix,
        initial_dist,
        photos_per_visit=(1, 4),
        inter_visit_gap_s=(1800, 86400),
        photo_gap_s=(30, 300),
        seed=0,
    ):
        object.__setattr__(self, "n_users", int(n_users))
        object.__setattr__(self, "seq_len", seq_len)
        object.__setattr__(self, "sites", tuple(sites))
        matrix = np.asarray(true_matrix, dtype=np.float64)
        object.__setattr__(self, "true_matrix", matrix)
        object.__setattr__(self, "initial_dist", np.asarray(initial_dist, dtype=np.float64))
        object.__setattr__(self, "photos_per_visit", tuple(int(x) for x in photos_per_visit))
        object.__setattr__(self, "inter_visit_gap_s", tuple(int(x) for x in inter_visit_gap_s))
        object.__setattr__(self, "photo_gap_s", tuple(int(x) for x in photo_gap_s))
        object.__setattr__(self, "seed", int(seed))
        self._validate()

    def _validate(self):
        n = len(self.sites)
        if n < 1:
            raise ValueError("need at least one site")
        if self.n_users < 0:
            raise ValueError("n_users must be >= 0")
        if self.true_matrix.shape != (n, n):
            raise ValueError(f"true_matrix shape {self.true_matrix.shape}, expected {(n, n)}")
        if np.any(self.true_matrix < 0):
            raise ValueError("true_matrix entries must be >= 0")
        if np.any(np.diagonal(self.true_matrix) != 0):
            raise ValueError("true_matrix diagonal must be zero (no self-transitions)")
        row_sums = self.true_matrix.sum(axis=1)
        bad = ~(np.isclose(row_sums, 1.0, atol=ROW_SUM_TOL) | (row_sums == 0.0))
        if np.any(bad):
            raise ValueError(f"rows {np.flatnonzero(bad).tolist()} must sum to 1 or be all zero")
        if self.initial_dist.shape != (n,):
            raise ValueError("initial_dist length must match sites")
        if not math.isclose(float(self.initial_dist.sum()), 1.0, abs_tol=ROW_SUM_TOL):
            raise ValueError("initial_dist must sum to 1")
        for name in ("photos_per_visit", "inter_visit_gap_s", "photo_gap_s"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} must be a range with 1 <= lo <= hi")

    @classmethod
    def from_json(cls, path: str | Path, seed_override: int | None = None) -> "SynthSpec":
        with Path(path).open(encoding="utf-8") as fh:
            raw = json.load(fh)
        sl = raw["seq_len"]
        if "fixed" in sl:
            seq_len = SeqLenFixed(int(sl["fixed"]))
        elif "geometric" in sl:
            seq_len = SeqLenGeometric(float(sl["geometric"]))
        else:
            raise ValueError("seq_len must specify 'fixed' or 'geometric'")
        return cls(
            n_users=raw["n_users"],
            seq_len=seq_len,
            sites=raw["sites"],
            true_matrix=raw["true_matrix"],
            initial_dist=raw["initial_dist"],
            photos_per_visit=raw.get("photos_per_visit", (1, 4)),
            inter_visit_gap_s=raw.get("inter_visit_gap_s", (1800, 86400)),
            photo_gap_s=raw.get("photo_gap_s", (30, 300)),
            seed=raw["seed"] if seed_override is None else seed_override,
        )


@dataclass
class SynthDataset:
    """Generated photo records plus the ground-truth visit sequences."""

    dataset: Dataset
    sequences: list[SiteSequence]


def _user_rng(seed: int, user: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(user, stream)))


@dataclass
class _VisitDraw:
    site_id: str
    photo_epochs: list[int]  # strictly increasing, whole seconds


def _sample_user_visits(spec: SynthSpec, user: int) -> list[_VisitDraw]:
    """Itinerary draws for one user, consuming only the (user, 0) stream."""
    rng = _user_rng(spec.seed, user, 0)
    length = spec.seq_len.draw(rng)
    cursor = _BASE_EPOCH + int(rng.integers(0, _START_SPAN_S))

    initial = spec.initial_dist / spec.initial_dist.sum()
    state = int(rng.choice(len(spec.sites), p=initial))
    draws: list[_VisitDraw] = []
    for _ in range(length):
        lo, hi = spec.photos_per_visit
        n_photos = int(rng.integers(lo, hi + 1))
        epochs = [cursor]
        for _ in range(n_photos - 1):
            g_lo, g_hi = spec.photo_gap_s
            epochs.append(epochs[-1] + int(rng.integers(g_lo, g_hi + 1)))
        draws.append(_VisitDraw(spec.sites[state], epochs))
        iv_lo, iv_hi = spec.inter_visit_gap_s
        cursor = epochs[-1] + int(rng.integers(iv_lo, iv_hi + 1))
        if len(draws) < length:
            row = spec.true_matrix[state]
            total = float(row.sum())
            if total == 0.0:
                raise DegenerateRowError(spec.sites[state])
            state = int(rng.choice(len(spec.sites), p=row / total))
    return draws


def _to_visit(user_id: str, draw: _VisitDraw) -> Visit:
    return Visit(
        user_id=user_id,
        site_id=draw.site_id,
        first_ts=datetime.fromtimestamp(draw.photo_epochs[0], timezone.utc),
        last_ts=datetime.fromtimestamp(draw.photo_epochs[-1], timezone.utc),
        n_photos=len(draw.photo_epochs),
    )


def sample_sequences(spec: SynthSpec) -> list[SiteSequence]:
    """Visit sequences sampled from the spec's chain; deterministic under seed."""
    sequences = []
    for u in range(spec.n_users):
        user_id = f"u{u:05d}"
        visits = tuple(_to_visit(user_id, d) for d in _sample_user_visits(spec, u))
        sequences.append(SiteSequence(user_id=user_id, visits=visits))
    return sequences


def _sample_point_in_site(
    rng: np.random.Generator, site_id: str, catalog: SiteCatalog
) -> tuple[float, float]:
    """Uniform-by-area point inside the site's buffer that geofences back to it.

    Overlapping buffers can pull a point toward a nearer neighbor, so
    candidates are rejection-tested against assign_site; the site center
    itself is the safe fallback.
    """
    site = catalog.get(site_id)
    probe = PhotoRecord("_probe", "_probe", 0.0, 0.0, datetime(2000, 1, 1, tzinfo=timezone.utc))
    for _ in range(64):
        r = site.buffer_km * math.sqrt(rng.random())
        theta = 2.0 * math.pi * rng.random()
        dlat = math.degrees(r * math.cos(theta) / EARTH_RADIUS_KM)
        denom = EARTH_RADIUS_KM * math.cos(math.radians(site.center_lat))
        if abs(denom) < 1e-9:
            continue
        dlon = math.degrees(r * math.sin(theta) / denom)
        lat, lon = site.center_lat + dlat, site.center_lon + dlon
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            continue
        candidate = PhotoRecord(probe.photo_id, probe.user_id, lat, lon, probe.timestamp)
        if assign_site(candidate, catalog) == site_id:
            return lat, lon
    return site.center_lat, site.center_lon


def generate_dataset(spec: SynthSpec, catalog: SiteCatalog) -> SynthDataset:
    """Expand sampled itineraries into photo records inside site buffers.

    Coordinates draw from a separate per-user stream, so the returned
    sequences are identical to sample_sequences(spec). Running the records
    back through geofencing and sequence building recovers the sequences
    exactly.
    """
    for site_id in spec.sites:
        catalog.get(site_id)  # KeyError early if the catalog lacks a spec site
    records: list[PhotoRecord] = []
    sequences: list[SiteSequence] = []
    for u in range(spec.n_users):
        user_id = f"u{u:05d}"
        coord_rng = _user_rng(spec.seed, u, 1)
        draws = _sample_user_visits(spec, u)
        counter = 0
        for draw in draws:
            for epoch in draw.photo_epochs:
                lat, lon = _sample_point_in_site(coord_rng, draw.site_id, catalog)
                records.append(
                    PhotoRecord(
                        photo_id=f"p{u:05d}_{counter:04d}",
                        user_id=user_id,
                        lat=lat,
                        lon=lon,
                        timestamp=datetime.fromtimestamp(epoch, timezone.utc),
                    )
                )
                counter += 1
        visits = tuple(_to_visit(user_id, d) for d in draws)
        sequences.append(SiteSequence(user_id=user_id, visits=visits))
    return SynthDataset(dataset=Dataset(records=records), sequences=sequences)


def random_transition_matrix(
    n: int, rng: np.random.Generator, sparsity: float = 0.0
) -> np.ndarray:
    """Random row-stochastic matrix with zero diagonal.

    sparsity is the probability of zeroing an off-diagonal cell before
    normalization (rows are kept from going entirely zero).
    """
    if n < 2:
        raise ValueError("need n >= 2")
    m = rng.random((n, n))
    if sparsity > 0.0:
        m[rng.random((n, n)) < sparsity] = 0.0
    np.fill_diagonal(m, 0.0)
    for i in range(n):
        if m[i].sum() == 0.0:
            j = (i + 1) % n
            m[i, j] = 1.0
    return m / m.sum(axis=1, keepdims=True)


@dataclass
class BlobSample:
    """Blob draw plus its ground truth: member map and true centers."""

    vectors: list[FeatureVector]
    truth: dict[str, int]  # photo_id -> blob index
    centers: np.ndarray  # (n_blobs, dim)


def sample_blobs(
    n_blobs: int,
    points_per_blob: int,
    dim: int,
    sigma: float,
    min_center_gap: float,
    seed: int = 0,
    center_box: float | None = None,
) -> BlobSample:
    """Gaussian blobs around rejection-sampled centers.

    Centers are drawn uniformly in [0, center_box]^dim (default box scales
    with n_blobs * min_center_gap) and re-drawn until pairwise gaps hold;
    CenterSamplingFailedError after a bounded number of attempts.
    """
    if n_blobs < 1 or points_per_blob < 1 or dim < 1:
        raise ValueError("n_blobs, points_per_blob, dim must be >= 1")
    if not min_center_gap > 0:
        raise ValueError("min_center_gap must be > 0")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    box = center_box if center_box is not None else 2.0 * n_blobs * min_center_gap

    centers: list[np.ndarray] = []
    attempts = 0
    while len(centers) < n_blobs:
        attempts += 1
        if attempts > 200 * n_blobs:
            raise CenterSamplingFailedError(
                f"placed {len(centers)}/{n_blobs} centers after {attempts} attempts"
            )
        candidate = rng.uniform(0.0, box, size=dim)
        if all(np.linalg.norm(candidate - c) >= min_center_gap for c in centers):
            centers.append(candidate)

    vectors: list[FeatureVector] = []
    truth: dict[str, int] = {}
    for b, center in enumerate(centers):
        offsets = rng.standard_normal((points_per_blob, dim))
        for i in range(points_per_blob):
            photo_id = f"b{b:02d}_{i:04d}"
            vectors.append(FeatureVector(photo_id, center + sigma * offsets[i]))
            truth[photo_id] = b
    return BlobSample(vectors, truth, np.stack(centers))
