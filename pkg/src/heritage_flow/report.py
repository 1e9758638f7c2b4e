"""End-to-end pipeline driver and the reproducibility manifest.

Data outputs never embed wall-clock content, so identical inputs and
flags produce byte-identical files; the manifest records a timestamp but
lives outside the hashed outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .geofence import SiteCatalog, filter_within_buffer
from .ingestion import parse_photo_csv
from .markov import build_sequences, estimate, write_matrix_csv
from .site_stats import (
    dwell_times,
    mean_dwell_per_site,
    photos_per_site_year,
    popularity_table,
    write_mean_dwell_csv,
    write_popularity_csv,
    write_site_year_csv,
)
from .svg import render_heatmap_svg
from .util import sha256_file


@dataclass
class RunManifest:
    inputs: dict[str, str]
    config_digest: str
    version: str
    created_at: str
    outputs: list[dict] = field(default_factory=list)

    def add_output(self, path: Path, base: Path) -> None:
        self.outputs.append(
            {"path": str(path.relative_to(base)), "sha256": sha256_file(path)}
        )

    def write(self, path: str | Path) -> None:
        payload = {
            "inputs": self.inputs,
            "config_digest": self.config_digest,
            "toolkit_version": self.version,
            "created_at": self.created_at,
            "outputs": self.outputs,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def config_digest(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()


def new_manifest(inputs: dict[str, str], config: dict) -> RunManifest:
    return RunManifest(
        inputs=inputs,
        config_digest=config_digest(config),
        version=__version__,
        created_at=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )


def run_report(input_csv: str | Path, catalog_path: str | Path, out_dir: str | Path) -> RunManifest:
    """Ingest -> geofence -> stats -> transition matrix, with manifest.

    Emits six data files: the site/year count table, the popularity table,
    mean dwell times, transition counts and probabilities, and an SVG
    heatmap of the probabilities.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    catalog = SiteCatalog.from_json(catalog_path)
    dataset = parse_photo_csv(input_csv)
    assigned = filter_within_buffer(dataset, catalog)
    site_order = catalog.site_ids()

    paths = {
        "site_year_counts": out / "site_year_counts.csv",
        "popularity": out / "popularity.csv",
        "dwell_means": out / "dwell_means.csv",
        "transition_counts": out / "transition_counts.csv",
        "transition_probs": out / "transition_probs.csv",
        "transition_heatmap": out / "transition_heatmap.svg",
    }

    write_site_year_csv(photos_per_site_year(assigned), paths["site_year_counts"], site_order)
    write_popularity_csv(popularity_table(assigned), paths["popularity"])
    write_mean_dwell_csv(mean_dwell_per_site(dwell_times(assigned)), paths["dwell_means"])

    matrix = estimate(build_sequences(assigned), catalog)
    write_matrix_csv(matrix, paths["transition_counts"], kind="counts")
    write_matrix_csv(matrix, paths["transition_probs"], kind="probs")
    svg = render_heatmap_svg(matrix.probs, site_order, site_order, vmin=0.0, vmax=1.0)
    paths["transition_heatmap"].write_text(svg, encoding="utf-8")

    manifest = new_manifest(
        inputs={"photos": str(input_csv), "catalog": str(catalog_path)},
        config={"command": "report"},
    )
    for path in paths.values():
        manifest.add_output(path, out)
    manifest.write(out / "manifest.json")
    return manifest
