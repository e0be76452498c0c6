"""Command-line entry points: ``extract`` and ``validate``.

Exit codes: 0 success, 2 validation error, 3 runtime/data error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .extract import ExtractionError, extract, write_tags
from .manifest import ManifestError, load_manifest
from .validate import validate_output

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _cmd_extract(args) -> int:
    manifest = load_manifest(args.manifest)
    kept = extract(manifest, args.out, batch_size=args.batch_size)
    print(f"wrote {len(kept)} of {len(manifest.images)} records to {args.out}")
    if args.out_tags:
        written = write_tags(manifest, kept, args.out_tags)
        print(f"wrote {written} tag records to {args.out_tags}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    report = validate_output(args.embeddings, args.dim)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imgembed",
        description="Batch penultimate-layer image descriptor extraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="embed manifest images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="embeddings output path")
    p.add_argument("--out-tags", help="also copy sidecar tags for kept ids")
    p.add_argument("--batch-size", type=int, default=8)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("validate", help="check an emitted embeddings file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dim", type=int, help="expected dimension (else inferred)")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ExtractionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
