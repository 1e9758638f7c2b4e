"""Batch inference over a manifest: decode, preprocess, forward.

Undecodable or missing images are skipped with a warning and counted;
inference runs under torch.no_grad() in eval mode, so identical inputs
give identical outputs run to run.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterator

import torch
from PIL import Image

from .models import build_transform

logger = logging.getLogger(__name__)


def batched_features(
    entries: list[tuple[str, Path]],
    model: torch.nn.Module,
    batch_size: int = 16,
) -> tuple[list[tuple[str, torch.Tensor]], int]:
    """Run the model over all decodable images; returns (outputs, skipped).

    Outputs preserve manifest order; each tensor is the model's output row
    for that photo_id.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    transform = build_transform()
    outputs: list[tuple[str, torch.Tensor]] = []
    skipped = 0
    with torch.no_grad():
        for chunk in _chunks(entries, batch_size):
            ids: list[str] = []
            tensors: list[torch.Tensor] = []
            for photo_id, path in chunk:
                try:
                    with Image.open(path) as img:
                        tensors.append(transform(img.convert("RGB")))
                    ids.append(photo_id)
                except (OSError, ValueError) as exc:
                    skipped += 1
                    logger.warning("skipping %s (%s): %s", photo_id, path, exc)
            if not ids:
                continue
            batch_out = model(torch.stack(tensors))
            for i, photo_id in enumerate(ids):
                outputs.append((photo_id, batch_out[i]))
    return outputs, skipped


def _chunks(entries: list, size: int) -> Iterator[list]:
    for start in range(0, len(entries), size):
        yield entries[start : start + size]
