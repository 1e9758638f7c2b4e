#!/usr/bin/env python3
"""Run the whole toolkit over the shipped synthetic fixtures.

Produces every table and matrix the pipeline knows how to emit into
out/full_study/: popularity and site-year tables, dwell summaries, full /
phase-split / windowed / grouped transition matrices, per-site clusters
with separation-compactness metrics, the scene-site matrix, and SVG
heatmaps. A quick way to eyeball end-to-end behavior without real data.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from heritage_flow.cli import main  # noqa: E402


def run() -> int:
    data = ROOT / "data"
    fixtures = data / "fixtures"
    out = ROOT / "out" / "full_study"
    catalog = str(data / "cuzco_sites.json")

    steps = [
        ["ingest", "--input", str(fixtures / "photos.csv"), "--catalog", catalog,
         "--out-dir", str(out / "ingest")],
        ["stats", "--assigned", str(out / "ingest" / "assigned.csv"), "--catalog", catalog,
         "--out-dir", str(out / "stats")],
        ["markov", "--assigned", str(out / "ingest" / "assigned.csv"), "--catalog", catalog,
         "--out-dir", str(out / "markov"),
         "--phase-boundary", "2008-01-01T00:00:00Z",
         "--window", "24h",
         "--group", "sacsayhuaman,qenqo,puca_pucara,tambomachay",
         "--min-prob", "0.2", "--top-k", "6"],
        ["cluster", "--embeddings", str(fixtures / "embeddings.emb"),
         "--assigned", str(out / "ingest" / "assigned.csv"),
         "--out-dir", str(out / "cluster"),
         "--convergence-iter", "50", "--max-iter", "800"],
        ["scenes", "--labels", str(fixtures / "scene_labels.csv"),
         "--assigned", str(out / "ingest" / "assigned.csv"), "--catalog", catalog,
         "--out-dir", str(out / "scenes"),
         "--ordering", str(data / "scene_naturalness.json"), "--svg"],
        ["report", "--input", str(fixtures / "photos.csv"), "--catalog", catalog,
         "--out-dir", str(out / "report")],
    ]
    for argv in steps:
        print(f"$ heritage-flow {' '.join(argv)}")
        code = main(argv)
        if code != 0:
            print(f"step failed with exit code {code}", file=sys.stderr)
            return code
    print(f"\nall outputs under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
