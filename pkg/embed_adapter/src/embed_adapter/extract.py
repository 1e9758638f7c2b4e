"""Embedding extraction into the pipeline's binary EMB1 layout.

EMB1: magic b"EMB1", u32-LE count, u32-LE dimension, then per record
u16-LE id length, UTF-8 photo_id, dimension x float32-LE. A companion
<out>.meta.json records the model, weights spec, and preprocessing
constants so the vectors are reproducible.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from . import __version__
from .inference import batched_features
from .manifest import read_manifest
from .models import FEATURE_DIM, PREPROCESSING, load_backbone

MAGIC = b"EMB1"


def write_emb1(records: list[tuple[str, np.ndarray]], dim: int, path: str | Path) -> None:
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", len(records), dim))
        for photo_id, values in records:
            id_bytes = photo_id.encode("utf-8")
            if len(id_bytes) > 0xFFFF:
                raise ValueError(f"photo_id too long: {photo_id[:32]}...")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def _write_meta(path: Path, payload: dict) -> None:
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def extract_embeddings(
    manifest_path: str | Path,
    out_path: str | Path,
    batch_size: int = 16,
    weights: str = "pretrained",
) -> tuple[int, int]:
    """Embed every decodable manifest image; returns (written, skipped)."""
    entries = read_manifest(manifest_path)
    model = load_backbone(weights)
    outputs, skipped = batched_features(entries, model, batch_size)
    records = [
        (photo_id, features.to(torch.float32).numpy()) for photo_id, features in outputs
    ]
    out_path = Path(out_path)
    write_emb1(records, FEATURE_DIM, out_path)
    _write_meta(
        out_path,
        {
            "adapter_version": __version__,
            "model": "resnet50-penultimate",
            "weights": weights,
            "dimension": FEATURE_DIM,
            "preprocessing": PREPROCESSING,
            "n_embeddings": len(records),
            "n_skipped": skipped,
        },
    )
    return len(records), skipped
