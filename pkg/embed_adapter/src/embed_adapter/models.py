"""Model construction, weight loading, and the fixed preprocessing stack.

Weight specs:
  "pretrained"   torchvision ImageNet weights (needs network or a warm cache)
  "random:SEED"  seeded random initialization; deterministic, for tests and
                 air-gapped runs where feature geometry does not matter
  <path>         a local .pth/.pth.tar state dict (torchvision layout or a
                 Places365-style checkpoint with a "state_dict" + "module."
                 prefixes)
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn
from torchvision import transforms
from torchvision.models import resnet50

# Recorded verbatim in each output's companion metadata JSON so embeddings
# are reproducible.
PREPROCESSING = {
    "resize_shorter_side": 256,
    "resize_interpolation": "bilinear",
    "center_crop": 224,
    "normalize_mean": [0.485, 0.456, 0.406],
    "normalize_std": [0.229, 0.224, 0.225],
}

FEATURE_DIM = 2048  # resnet50 penultimate (post-avgpool) width


class MissingWeightsError(RuntimeError):
    """Model weights could not be obtained; the run must abort."""


def build_transform() -> transforms.Compose:
    return transforms.Compose(
        [
            transforms.Resize(
                PREPROCESSING["resize_shorter_side"],
                interpolation=transforms.InterpolationMode.BILINEAR,
            ),
            transforms.CenterCrop(PREPROCESSING["center_crop"]),
            transforms.ToTensor(),
            transforms.Normalize(PREPROCESSING["normalize_mean"], PREPROCESSING["normalize_std"]),
        ]
    )


def _load_state_dict(model: nn.Module, weights_path: Path) -> None:
    if not weights_path.exists():
        raise MissingWeightsError(f"weights file not found: {weights_path}")
    checkpoint = torch.load(weights_path, map_location="cpu", weights_only=False)
    state = checkpoint.get("state_dict", checkpoint) if isinstance(checkpoint, dict) else checkpoint
    state = {k.removeprefix("module."): v for k, v in state.items()}
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise MissingWeightsError(f"incompatible weights in {weights_path}: {exc}") from exc


def _parse_random_seed(weights: str) -> int | None:
    if weights == "random":
        return 0
    if weights.startswith("random:"):
        return int(weights.split(":", 1)[1])
    return None


def load_backbone(weights: str = "pretrained") -> nn.Module:
    """ResNet50 with the classifier removed: 2048-d penultimate features."""
    seed = _parse_random_seed(weights)
    if seed is not None:
        torch.manual_seed(seed)
        model = resnet50(weights=None)
    elif weights == "pretrained":
        try:
            from torchvision.models import ResNet50_Weights

            model = resnet50(weights=ResNet50_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise MissingWeightsError(
                "could not obtain pretrained ImageNet weights (no network/cache?); "
                "pass --weights <path> or --weights random:SEED"
            ) from exc
    else:
        model = resnet50(weights=None)
        _load_state_dict(model, Path(weights))
    model.fc = nn.Identity()
    model.eval()
    return model


def load_scene_model(categories: list[str], weights: str = "pretrained") -> nn.Module:
    """ResNet50 classifier over the given scene-category vocabulary.

    "pretrained" is not meaningful here: ImageNet heads are object-centric
    and scene checkpoints (e.g. Places365) must be supplied as a file, so
    only random:SEED and a weights path are accepted.
    """
    if not categories:
        raise ValueError("empty scene category list")
    seed = _parse_random_seed(weights)
    if seed is not None:
        torch.manual_seed(seed)
        model = resnet50(weights=None, num_classes=len(categories))
    elif weights == "pretrained":
        raise MissingWeightsError(
            "scene classification needs a scene-trained checkpoint; "
            "pass --weights <path-to-places365-style.pth> or --weights random:SEED"
        )
    else:
        model = resnet50(weights=None, num_classes=len(categories))
        _load_state_dict(model, Path(weights))
    model.eval()
    return model


def read_categories(path: str | Path) -> list[str]:
    """One label per line; Places365-style lines ("/a/abbey 0") are normalized."""
    labels: list[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        token = line.split()[0]
        token = token.lstrip("/")
        if "/" in token:  # "/a/amphitheater" -> "amphitheater"
            token = token.split("/", 1)[1]
        labels.append(token.replace("/", "_"))
    if not labels:
        raise ValueError(f"no categories in {path}")
    return labels
