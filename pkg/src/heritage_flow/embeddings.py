"""Feature vectors and the embeddings file formats.

Binary layout ("EMB1"): magic bytes b"EMB1", u32 little-endian count n,
u32 dimension d, then n records of (u16 id-length, UTF-8 photo_id,
d float32 little-endian values). A CSV fallback with columns
photo_id,v0..v{d-1} is accepted on read.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MAGIC = b"EMB1"


class DimensionMismatchError(ValueError):
    """Vectors in one collection disagree on dimension."""


@dataclass(frozen=True)
class FeatureVector:
    photo_id: str
    values: np.ndarray

    def __init__(self, photo_id: str, values):
        object.__setattr__(self, "photo_id", photo_id)
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("feature values must be a 1-d vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite feature values for {photo_id}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.photo_id == other.photo_id and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.photo_id, self.values.tobytes()))


def _uniform_dim(vectors: Sequence[FeatureVector]) -> int:
    if not vectors:
        return 0
    d = vectors[0].dim
    for v in vectors:
        if v.dim != d:
            raise DimensionMismatchError(
                f"{v.photo_id} has dimension {v.dim}, expected {d}"
            )
    return d


def write_embeddings(vectors: Sequence[FeatureVector], path: str | Path) -> None:
    """Write the binary EMB1 layout (values stored as float32)."""
    d = _uniform_dim(vectors)
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", len(vectors), d))
        for v in vectors:
            id_bytes = v.photo_id.encode("utf-8")
            if len(id_bytes) > 0xFFFF:
                raise ValueError(f"photo_id too long: {v.photo_id[:32]}...")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(v.values.astype("<f4").tobytes())


def write_embeddings_csv(vectors: Sequence[FeatureVector], path: str | Path) -> None:
    d = _uniform_dim(vectors)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["photo_id", *(f"v{i}" for i in range(d))])
        for v in vectors:
            writer.writerow([v.photo_id, *(repr(float(x)) for x in v.values)])


def read_embeddings(path: str | Path) -> list[FeatureVector]:
    """Read an embeddings file, auto-detecting binary EMB1 vs CSV."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with path.open("rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return _read_binary(path)
    return _read_csv(path)


def _read_binary(path: Path) -> list[FeatureVector]:
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise ValueError("not an EMB1 file")
    n, d = struct.unpack_from("<II", data, 4)
    offset = 12
    vectors: list[FeatureVector] = []
    for _ in range(n):
        (id_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        photo_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        values = np.frombuffer(data, dtype="<f4", count=d, offset=offset)
        offset += 4 * d
        vectors.append(FeatureVector(photo_id, values))
    if offset != len(data):
        raise ValueError(f"trailing bytes in {path.name}: expected {offset}, got {len(data)}")
    return vectors


def _read_csv(path: Path) -> list[FeatureVector]:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path.name}: empty embeddings CSV") from None
        if not header or header[0] != "photo_id":
            raise ValueError(f"{path.name}: first column must be photo_id")
        d = len(header) - 1
        vectors: list[FeatureVector] = []
        for row in reader:
            if not row:
                continue
            if len(row) != d + 1:
                raise DimensionMismatchError(
                    f"{path.name}: row for {row[0]} has {len(row) - 1} values, expected {d}"
                )
            vectors.append(FeatureVector(row[0], [float(x) for x in row[1:]]))
    return vectors


def vectors_by_id(vectors: Iterable[FeatureVector]) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for v in vectors:
        if v.photo_id in out:
            raise ValueError(f"duplicate photo_id in embeddings: {v.photo_id}")
        out[v.photo_id] = v.values
    return out


def group_by_site(
    vectors: Iterable[FeatureVector], assignment: Mapping[str, str]
) -> tuple[dict[str, list[FeatureVector]], int]:
    """Group vectors by the site their photo was assigned to.

    Vectors whose photo_id is absent from the assignment are skipped;
    returns (groups, skipped count).
    """
    groups: dict[str, list[FeatureVector]] = {}
    skipped = 0
    for v in vectors:
        site = assignment.get(v.photo_id)
        if site is None:
            skipped += 1
            continue
        groups.setdefault(site, []).append(v)
    return groups, skipped
