"""Command-line entry point.

Subcommands: ingest, stats, markov, cluster, scenes, synth, report.
Usage errors exit 2 (argparse), data errors exit 1 with a diagnostic on
stderr. The environment variable HERITAGE_FLOW_SEED overrides the synth
seed when no --seed flag is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .apcluster import APConfig, cluster_per_site, cluster_result_json
from .cluster_metrics import site_metrics, write_metrics_csv
from .embeddings import group_by_site, read_embeddings, vectors_by_id
from .geofence import (
    SiteCatalog,
    filter_within_buffer,
    read_assigned_csv,
    write_assigned_csv,
)
from .ingestion import parse_photo_csv, parse_timestamp, write_photo_csv
from .markov import (
    build_sequences,
    estimate,
    group_submatrix,
    split_by_phase,
    top_transitions,
    windowed,
    write_matrix_csv,
    write_summary_json,
)
from .report import run_report
from .scene_matrix import aggregate_scene_counts, build_matrix, read_ordering, read_scene_csv
from .site_stats import (
    dwell_times,
    mean_dwell_per_site,
    photos_per_site_year,
    popularity_table,
    write_dwell_csv,
    write_mean_dwell_csv,
    write_popularity_csv,
    write_site_year_csv,
)
from .svg import render_heatmap_svg
from .synth import SynthSpec, generate_dataset
from .util import parse_duration

SEED_ENV_VAR = "HERITAGE_FLOW_SEED"


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_assigned(args) -> list:
    if getattr(args, "assigned", None):
        return read_assigned_csv(args.assigned)
    catalog = SiteCatalog.from_json(args.catalog)
    dataset = parse_photo_csv(args.input, strict=getattr(args, "strict", False))
    return filter_within_buffer(dataset, catalog)


def cmd_ingest(args) -> int:
    out = _out_dir(args)
    catalog = SiteCatalog.from_json(args.catalog)
    dataset = parse_photo_csv(args.input, strict=args.strict)
    assigned = filter_within_buffer(dataset, catalog)
    write_assigned_csv(assigned, out / "assigned.csv")
    with (out / "rejected.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["raw_line", "reason"])
        writer.writerows(dataset.rejected)
    print(
        f"parsed {len(dataset.records)} records "
        f"({len(dataset.rejected)} rejected), {len(assigned)} inside buffers"
    )
    return 0


def cmd_stats(args) -> int:
    out = _out_dir(args)
    catalog = SiteCatalog.from_json(args.catalog)
    assigned = _load_assigned(args)
    write_site_year_csv(photos_per_site_year(assigned), out / "site_year_counts.csv", catalog.site_ids())
    write_popularity_csv(popularity_table(assigned), out / "popularity.csv")
    dwells = dwell_times(assigned, split_by_day=args.split_by_day)
    write_dwell_csv(dwells, out / "dwell.csv")
    write_mean_dwell_csv(mean_dwell_per_site(dwells), out / "dwell_means.csv")
    print(f"stats written for {len(assigned)} assigned photos")
    return 0


def cmd_markov(args) -> int:
    out = _out_dir(args)
    catalog = SiteCatalog.from_json(args.catalog)
    seqs = build_sequences(_load_assigned(args))

    matrix = estimate(seqs, catalog)
    write_matrix_csv(matrix, out / "transition_counts.csv", kind="counts")
    write_matrix_csv(matrix, out / "transition_probs.csv", kind="probs")
    write_summary_json(matrix, out / "transition_summary.json")

    if args.phase_boundary:
        boundary = parse_timestamp(args.phase_boundary)
        phase_a, phase_b = split_by_phase(seqs, catalog, boundary)
        write_matrix_csv(phase_a, out / "transition_phase_a_probs.csv", kind="probs")
        write_matrix_csv(phase_b, out / "transition_phase_b_probs.csv", kind="probs")
    if args.window:
        win = windowed(seqs, catalog, parse_duration(args.window))
        write_matrix_csv(win, out / "transition_window_probs.csv", kind="probs")
        write_matrix_csv(win, out / "transition_window_counts.csv", kind="counts")
    if args.group:
        group = [s.strip() for s in args.group.split(",") if s.strip()]
        sub = group_submatrix(matrix, group)
        write_matrix_csv(sub, out / "transition_group_probs.csv", kind="probs")
    if args.smoothing is not None:
        smoothed = matrix.smoothed_probs(args.smoothing)
        rows = [["site", *matrix.sites]]
        for i, site in enumerate(matrix.sites):
            rows.append([site, *(f"{p:.6f}" for p in smoothed[i])])
        with (out / "transition_smoothed_probs.csv").open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    if args.min_prob is not None or args.top_k is not None:
        entries = top_transitions(
            matrix,
            min_prob=args.min_prob if args.min_prob is not None else 0.0,
            k=args.top_k,
        )
        with (out / "top_transitions.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["from_site", "to_site", "prob"])
            for a, b, p in entries:
                writer.writerow([a, b, f"{p:.6f}"])
    print(f"transition matrices written over {len(seqs)} sequences")
    return 0


def cmd_cluster(args) -> int:
    out = _out_dir(args)
    vectors = read_embeddings(args.embeddings)
    assignment = {rec.photo_id: site for rec, site in read_assigned_csv(args.assigned)}
    groups, skipped = group_by_site(vectors, assignment)
    if not groups:
        raise ValueError("no embedding matches any assigned photo")
    cfg = APConfig(
        damping=args.damping,
        max_iter=args.max_iter,
        convergence_iter=args.convergence_iter,
        preference=args.preference,
        jitter=args.jitter,
    )
    results = cluster_per_site(groups, cfg, seed=args.seed)
    by_id = vectors_by_id(vectors)
    metrics = []
    for site_id, result in results.items():
        payload = cluster_result_json(site_id, result)
        path = out / f"clusters_{site_id}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        metrics.append(
            site_metrics(site_id, result, by_id, fraction=args.fraction, all_clusters=args.all_clusters)
        )
    write_metrics_csv(metrics, out / "cluster_metrics.csv")
    if skipped:
        print(f"skipped {skipped} embeddings without a site assignment", file=sys.stderr)
    print(f"clustered {len(results)} sites")
    return 0


def cmd_scenes(args) -> int:
    out = _out_dir(args)
    catalog = SiteCatalog.from_json(args.catalog)
    labels = read_scene_csv(args.labels)
    assignment = {rec.photo_id: site for rec, site in read_assigned_csv(args.assigned)}
    counts, skipped = aggregate_scene_counts(labels, assignment)
    ordering = read_ordering(args.ordering) if args.ordering else None
    matrix = build_matrix(counts, catalog, fraction=args.fraction, ordering=ordering)
    matrix.to_csv(out / "scene_site_matrix.csv")
    if args.svg:
        svg = render_heatmap_svg(matrix.values, matrix.sites, matrix.labels)
        (out / "scene_site_matrix.svg").write_text(svg, encoding="utf-8")
    if skipped:
        print(f"skipped {skipped} labels without a site assignment", file=sys.stderr)
    print(f"scene matrix written: {len(matrix.sites)} sites x {len(matrix.labels)} labels")
    return 0


def cmd_synth(args) -> int:
    out = _out_dir(args)
    seed_override = args.seed
    if seed_override is None and os.environ.get(SEED_ENV_VAR):
        seed_override = int(os.environ[SEED_ENV_VAR])
    spec = SynthSpec.from_json(args.spec, seed_override=seed_override)
    catalog = SiteCatalog.from_json(args.catalog)
    generated = generate_dataset(spec, catalog)
    write_photo_csv(generated.dataset.records, out / "photos.csv")
    truth = [
        {"user_id": seq.user_id, "sites": seq.site_ids()} for seq in generated.sequences
    ]
    (out / "truth_sequences.json").write_text(
        json.dumps(truth, indent=2) + "\n", encoding="utf-8"
    )
    print(
        f"generated {len(generated.dataset.records)} photos "
        f"for {len(generated.sequences)} users (seed {spec.seed})"
    )
    return 0


def cmd_report(args) -> int:
    manifest = run_report(args.input, args.catalog, args.out_dir)
    print(f"report complete: {len(manifest.outputs)} outputs in {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heritage-flow",
        description="Mine tourist movement patterns and photo-theme structure "
        "from geotagged photo metadata.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse photos and assign them to catalog sites")
    p.add_argument("--input", required=True, help="photo metadata CSV")
    p.add_argument("--catalog", required=True, help="site catalog JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--strict", action="store_true", help="abort on the first malformed row")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="per-site popularity tables and dwell times")
    p.add_argument("--input", help="photo metadata CSV")
    p.add_argument("--assigned", help="assigned CSV from `ingest` (skips re-assignment)")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--split-by-day", action="store_true", help="one dwell record per UTC day")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("markov", help="transition matrices from visit sequences")
    p.add_argument("--input", help="photo metadata CSV")
    p.add_argument("--assigned", help="assigned CSV from `ingest`")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--phase-boundary", help="ISO instant splitting phase A/B (e.g. 2008-01-01T00:00:00Z)")
    p.add_argument("--window", help="max transition gap, e.g. 24h or 2d")
    p.add_argument("--group", help="comma-separated site_ids for a grouped submatrix")
    p.add_argument("--min-prob", type=float, help="threshold for top transitions")
    p.add_argument("--top-k", type=int, help="cap on top transitions")
    p.add_argument(
        "--smoothing", type=float, default=None, metavar="ALPHA",
        help="also emit add-alpha smoothed probabilities (simulation use only)",
    )
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("cluster", help="affinity-propagation clusters per site")
    p.add_argument("--embeddings", required=True, help="EMB1 binary or CSV embeddings file")
    p.add_argument("--assigned", required=True, help="assigned CSV from `ingest`")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--damping", type=float, default=0.9)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--convergence-iter", type=int, default=100)
    p.add_argument("--preference", type=float, default=None, help="default: median similarity")
    p.add_argument("--jitter", action="store_true", help="seeded tie-breaking noise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fraction", type=float, default=0.1, help="top cluster fraction for metrics")
    p.add_argument("--all-clusters", action="store_true", help="metrics over all clusters")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("scenes", help="scene-site occurrence matrix from scene labels")
    p.add_argument("--labels", required=True, help="scene label CSV (photo_id,label,confidence)")
    p.add_argument("--assigned", required=True, help="assigned CSV from `ingest`")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fraction", type=float, default=0.1, help="representative scene fraction")
    p.add_argument("--ordering", help="naturalness ranking JSON (label -> rank)")
    p.add_argument("--svg", action="store_true", help="also render an SVG heatmap")
    p.set_defaults(func=cmd_scenes)

    p = sub.add_parser("synth", help="generate a synthetic photo dataset")
    p.add_argument("--spec", required=True, help="synth spec JSON")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None, help=f"overrides spec seed and ${SEED_ENV_VAR}")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", help="full pipeline with a hashed-output manifest")
    p.add_argument("--input", required=True, help="photo metadata CSV")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
