"""Scene-label prediction into the pipeline's scene CSV schema.

One row per decodable image: photo_id, argmax label, softmax confidence.
"""

from __future__ import annotations

import csv
from pathlib import Path

import torch

from . import __version__
from .extract import _write_meta
from .inference import batched_features
from .manifest import read_manifest
from .models import PREPROCESSING, load_scene_model, read_categories


def predict_scenes(
    manifest_path: str | Path,
    out_path: str | Path,
    categories_path: str | Path,
    batch_size: int = 16,
    weights: str = "pretrained",
) -> tuple[int, int]:
    """Predict a top-1 scene label per image; returns (written, skipped)."""
    entries = read_manifest(manifest_path)
    categories = read_categories(categories_path)
    model = load_scene_model(categories, weights)
    outputs, skipped = batched_features(entries, model, batch_size)

    out_path = Path(out_path)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["photo_id", "label", "confidence"])
        for photo_id, logits in outputs:
            probs = torch.softmax(logits.to(torch.float64), dim=0)
            top = int(probs.argmax())
            confidence = min(1.0, max(0.0, float(probs[top])))
            writer.writerow([photo_id, categories[top], f"{confidence:.6f}"])

    _write_meta(
        out_path,
        {
            "adapter_version": __version__,
            "model": "resnet50-classifier",
            "weights": weights,
            "n_categories": len(categories),
            "preprocessing": PREPROCESSING,
            "n_labels": len(outputs),
            "n_skipped": skipped,
        },
    )
    return len(outputs), skipped
