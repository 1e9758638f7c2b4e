"""Command-line entry point: `extract` and `scenes`.

Usage errors exit 2 (argparse); data/model errors exit 1 with a
diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .extract import extract_embeddings
from .scenes import predict_scenes

WEIGHTS_HELP = "'pretrained', 'random:SEED', or a path to a .pth state dict"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-adapter",
        description="Convert an image manifest into embeddings and scene-label files.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="penultimate-layer embeddings to a binary EMB1 file")
    p.add_argument("--manifest", required=True, help="CSV with photo_id,path columns")
    p.add_argument("--out", required=True, help="output .emb path")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--weights", default="pretrained", help=WEIGHTS_HELP)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("scenes", help="top-1 scene labels to a CSV file")
    p.add_argument("--manifest", required=True, help="CSV with photo_id,path columns")
    p.add_argument("--out", required=True, help="output .csv path")
    p.add_argument("--categories", required=True, help="label vocabulary, one per line")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--weights", default="pretrained", help=WEIGHTS_HELP)
    p.set_defaults(func=cmd_scenes)
    return parser


def cmd_extract(args) -> int:
    written, skipped = extract_embeddings(
        args.manifest, args.out, batch_size=args.batch_size, weights=args.weights
    )
    print(f"wrote {written} embeddings to {args.out}" + (f" ({skipped} skipped)" if skipped else ""))
    return 0


def cmd_scenes(args) -> int:
    written, skipped = predict_scenes(
        args.manifest, args.out, args.categories, batch_size=args.batch_size, weights=args.weights
    )
    print(f"wrote {written} scene labels to {args.out}" + (f" ({skipped} skipped)" if skipped else ""))
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
