#!/usr/bin/env python3
"""Regenerate the checked-in synthetic fixtures under data/fixtures/.

Everything is seeded, so reruns are byte-identical. The fixtures let the
whole pipeline (including clustering and scene aggregation) run without
any image models: feature vectors come from per-site Gaussian blobs and
scene labels from per-site categorical draws.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from heritage_flow.embeddings import FeatureVector, write_embeddings  # noqa: E402
from heritage_flow.geofence import SiteCatalog, filter_within_buffer  # noqa: E402
from heritage_flow.ingestion import write_photo_csv  # noqa: E402
from heritage_flow.scene_matrix import SceneLabel, write_scene_csv  # noqa: E402
from heritage_flow.synth import SynthSpec, generate_dataset, random_transition_matrix  # noqa: E402

SEED = 2019
DIM = 16
BLOBS_PER_SITE = 3
VOCAB = [
    "mountain_path",
    "valley",
    "amphitheater",
    "archaeological_excavation",
    "ruins",
    "village",
    "plaza",
    "church",
    "market",
    "bazaar",
]


def main() -> int:
    out = ROOT / "data" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    catalog = SiteCatalog.from_json(ROOT / "data" / "cuzco_sites.json")
    sites = catalog.site_ids()
    rng = np.random.default_rng(SEED)

    spec_payload = {
        "n_users": 60,
        "seq_len": {"geometric": 0.35},
        "sites": sites,
        "true_matrix": [[round(x, 10) for x in row] for row in random_transition_matrix(len(sites), rng)],
        "initial_dist": [round(1.0 / len(sites), 10)] * (len(sites) - 1)
        + [round(1.0 - (len(sites) - 1) * round(1.0 / len(sites), 10), 10)],
        "photos_per_visit": [1, 3],
        "inter_visit_gap_s": [1800, 43200],
        "photo_gap_s": [30, 300],
        "seed": SEED,
    }
    (out / "synth_spec.json").write_text(
        json.dumps(spec_payload, indent=2) + "\n", encoding="utf-8"
    )

    spec = SynthSpec.from_json(out / "synth_spec.json")
    generated = generate_dataset(spec, catalog)
    write_photo_csv(generated.dataset.records, out / "photos.csv")

    assigned = filter_within_buffer(generated.dataset, catalog)
    by_site: dict[str, list[str]] = {}
    for record, site_id in assigned:
        by_site.setdefault(site_id, []).append(record.photo_id)

    # Per-site blob features; blob centers far apart relative to sigma.
    vectors: list[FeatureVector] = []
    for site_id in sites:
        photo_ids = by_site.get(site_id, [])
        centers = rng.uniform(0.0, 60.0, size=(BLOBS_PER_SITE, DIM))
        for photo_id in photo_ids:
            blob = int(rng.integers(0, BLOBS_PER_SITE))
            vectors.append(FeatureVector(photo_id, centers[blob] + 0.5 * rng.standard_normal(DIM)))
    write_embeddings(vectors, out / "embeddings.emb")

    # Per-site scene-label preferences over a small shared vocabulary.
    labels: list[SceneLabel] = []
    for site_id in sites:
        weights = rng.dirichlet(np.full(len(VOCAB), 0.6))
        for photo_id in by_site.get(site_id, []):
            label = VOCAB[int(rng.choice(len(VOCAB), p=weights))]
            confidence = round(float(rng.uniform(0.5, 1.0)), 6)
            labels.append(SceneLabel(photo_id, label, confidence))
    write_scene_csv(labels, out / "scene_labels.csv")

    print(f"photos:     {len(generated.dataset.records)}")
    print(f"assigned:   {len(assigned)}")
    print(f"embeddings: {len(vectors)} x {DIM}")
    print(f"labels:     {len(labels)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
