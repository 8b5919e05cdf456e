"""Command line: featexport export --images DIR --backbone NAME --out DIR."""

from __future__ import annotations

import argparse
import sys

from .backbones import REGISTRY
from .errors import ExporterError
from .export import export_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featexport",
        description="Extract backbone features from a class-per-subfolder "
        "image directory into FMX/LBL files plus a manifest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="run a feature export")
    p.add_argument("--images", required=True, help="directory with class subfolders")
    p.add_argument(
        "--backbone",
        required=True,
        help=f"backbone name ({', '.join(sorted(REGISTRY))})",
    )
    p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = export_features(args.images, args.backbone, args.out)
    except (ExporterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"backbone={manifest['backbone']}")
    print(f"weights={manifest['weights']}")
    print(f"feature_dim={manifest['feature_dim']}")
    print(f"n_rows={manifest['n_rows']}")
    print(f"n_skipped={len(manifest['skipped'])}")
    print(f"out={args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
