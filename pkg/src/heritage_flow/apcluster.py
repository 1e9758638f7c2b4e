"""Affinity propagation clustering over image-feature vectors.

Message passing follows the classic responsibility/availability updates
with damping. Similarity is negative squared Euclidean distance; the
diagonal preference defaults to the median off-diagonal similarity. A
point is an exemplar when it is its own best choice under a(i,k)+r(i,k),
with argmax ties resolved to the lowest index; the final assignment is
recomputed from the converged exemplar set by maximum similarity so the
result invariants hold exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .embeddings import DimensionMismatchError, FeatureVector


class NonSquareMatrixError(ValueError):
    """The similarity matrix is not square."""


class NoExemplarEmergedError(RuntimeError):
    """No point selected itself as exemplar within the iteration budget."""


@dataclass(frozen=True)
class APConfig:
    damping: float = 0.9
    max_iter: int = 1000
    convergence_iter: int = 100
    preference: float | None = None  # None = median off-diagonal similarity
    jitter: bool = False  # seeded index-proportional tie-breaking noise

    def __post_init__(self):
        if not 0.5 <= self.damping < 1.0:
            raise ValueError("damping must be in [0.5, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.convergence_iter < self.max_iter:
            raise ValueError("convergence_iter must be in (0, max_iter)")


@dataclass(frozen=True)
class APRun:
    """Index-level clustering outcome of one message-passing run."""

    exemplar_indices: tuple[int, ...]
    labels: np.ndarray  # labels[i] = exemplar index owning point i
    converged: bool
    iterations: int

    @property
    def n_clusters(self) -> int:
        return len(self.exemplar_indices)


@dataclass(frozen=True)
class ClusterResult:
    """Exemplar-based partition keyed by photo_id."""

    exemplars: tuple[str, ...]
    assignment: dict[str, str]  # photo_id -> exemplar photo_id
    converged: bool
    iterations: int
    cluster_sizes: dict[str, int]

    @property
    def n_clusters(self) -> int:
        return len(self.exemplars)

    def clusters(self) -> dict[str, list[str]]:
        """Exemplar -> member photo_ids (exemplar included), in assignment order."""
        members: dict[str, list[str]] = {e: [] for e in self.exemplars}
        for photo_id, exemplar in self.assignment.items():
            members[exemplar].append(photo_id)
        return members


def similarity_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Pairwise negative squared Euclidean distances; zero diagonal.

    The diagonal is a placeholder: affinity_propagation overwrites it with
    the preference.
    """
    if len(vectors) < 1:
        raise ValueError("need at least one vector")
    d = vectors[0].dim
    for v in vectors:
        if v.dim != d:
            raise DimensionMismatchError(f"{v.photo_id} has dimension {v.dim}, expected {d}")
    x = np.stack([v.values for v in vectors])
    s = -cdist(x, x, "sqeuclidean")
    np.fill_diagonal(s, 0.0)
    return s


def affinity_propagation(s: np.ndarray, cfg: APConfig = APConfig(), seed: int = 0) -> APRun:
    """Run damped responsibility/availability message passing on s.

    Deterministic given (s, cfg, seed). Converged means the exemplar set
    stayed unchanged for cfg.convergence_iter consecutive iterations.
    Raises NoExemplarEmergedError when no point ends up self-selected.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NonSquareMatrixError(f"similarity matrix has shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("similarity matrix contains non-finite entries")
    n = s.shape[0]
    if n == 1:
        return APRun((0,), np.zeros(1, dtype=np.intp), True, 0)

    off_diag = s[~np.eye(n, dtype=bool)]
    preference = float(np.median(off_diag)) if cfg.preference is None else cfg.preference

    S = s.copy()
    np.fill_diagonal(S, preference)
    if cfg.jitter:
        # Deterministic symmetry breaker: a tiny ramp over the flat index,
        # scaled by a seeded factor, biased so lower indices win ties.
        rng = np.random.default_rng(seed)
        span = float(np.ptp(S)) or 1.0
        ramp = np.arange(n * n, dtype=np.float64).reshape(n, n)
        S = S - (1e-12 * span) * ramp * rng.uniform(0.5, 1.5)

    lam = cfg.damping
    rows = np.arange(n)
    A = np.zeros((n, n))
    R = np.zeros((n, n))
    last_exemplars: frozenset[int] | None = None
    stable = 0
    converged = False
    iterations = 0
    exemplars: frozenset[int] = frozenset()

    for iterations in range(1, cfg.max_iter + 1):
        # responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        AS = A + S
        top = AS.argmax(axis=1)
        first = AS[rows, top]
        AS[rows, top] = -np.inf
        second = AS.max(axis=1)
        R_new = S - first[:, None]
        R_new[rows, top] = S[rows, top] - second
        R = lam * R + (1.0 - lam) * R_new

        # availabilities: a(i,k) = min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        Rp = np.maximum(R, 0.0)
        Rp[rows, rows] = R[rows, rows]
        A_new = Rp.sum(axis=0)[None, :] - Rp
        diag = A_new[rows, rows].copy()
        A_new = np.minimum(A_new, 0.0)
        A_new[rows, rows] = diag
        A = lam * A + (1.0 - lam) * A_new

        choice = (A + R).argmax(axis=1)  # argmax ties -> lowest index
        exemplars = frozenset(np.flatnonzero(choice == rows).tolist())
        if exemplars and exemplars == last_exemplars:
            stable += 1
            if stable >= cfg.convergence_iter:
                converged = True
                break
        else:
            stable = 0
            last_exemplars = exemplars

    if not exemplars:
        raise NoExemplarEmergedError(
            f"no exemplar emerged after {iterations} iterations "
            f"(preference {preference:g}); raise the preference or max_iter"
        )

    # Final assignment from the exemplar set by maximum input similarity.
    exemplar_list = sorted(exemplars)
    labels = np.empty(n, dtype=np.intp)
    sub = s[:, exemplar_list]
    nearest = np.asarray(exemplar_list)[sub.argmax(axis=1)]
    labels[:] = nearest
    labels[exemplar_list] = exemplar_list
    return APRun(tuple(exemplar_list), labels, converged, iterations)


def cluster_vectors(
    vectors: Sequence[FeatureVector], cfg: APConfig = APConfig(), seed: int = 0
) -> ClusterResult:
    """Cluster feature vectors and key the result by photo_id."""
    ids = [v.photo_id for v in vectors]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate photo_id among vectors")
    run = affinity_propagation(similarity_matrix(vectors), cfg, seed)
    exemplars = tuple(ids[i] for i in run.exemplar_indices)
    assignment = {ids[i]: ids[int(run.labels[i])] for i in range(len(ids))}
    sizes = dict(Counter(assignment.values()))
    return ClusterResult(exemplars, assignment, run.converged, run.iterations, sizes)


def cluster_per_site(
    embeddings: Mapping[str, Sequence[FeatureVector]],
    cfg: APConfig = APConfig(),
    seed: int = 0,
) -> dict[str, ClusterResult]:
    """Independent AP run per site, keyed by site_id."""
    results: dict[str, ClusterResult] = {}
    for site_id in sorted(embeddings):
        vectors = embeddings[site_id]
        if not vectors:
            raise ValueError(f"site {site_id} has no feature vectors")
        results[site_id] = cluster_vectors(vectors, cfg, seed)
    return results


def cluster_result_json(site_id: str, result: ClusterResult) -> dict:
    """The per-site cluster output schema for JSON emission."""
    clusters = [
        {"exemplar": exemplar, "members": sorted(members)}
        for exemplar, members in sorted(result.clusters().items())
    ]
    return {
        "site_id": site_id,
        "converged": result.converged,
        "iterations": result.iterations,
        "clusters": clusters,
    }
