"""Shared test helpers and repo-relative paths."""

from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from heritage_flow.ingestion import PhotoRecord

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"
FIXTURE_DIR = DATA_DIR / "fixtures"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def ts(text: str) -> datetime:
    t = text.replace("Z", "+00:00")
    dt = datetime.fromisoformat(t)
    return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)


def record(photo_id, user_id="u1", lat=0.0, lon=0.0, when="2013-06-01T10:00:00Z", url=None):
    return PhotoRecord(photo_id, user_id, lat, lon, ts(when), url)


def uniform_dist(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)
