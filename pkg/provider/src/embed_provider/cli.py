"""Provider command line: serve the /embed API or batch-export a bank."""

from __future__ import annotations

import argparse
import sys

from .encoder import DEFAULT_MODEL_TAG, ModelLoadError, load_encoder
from .export import export_bank_embeddings


def _cmd_export(args: argparse.Namespace) -> int:
    encoder = load_encoder(args.model)
    count = export_bank_embeddings(args.bank, args.out, encoder)
    print(f"exported {count} vectors (dim {encoder.dim}, model {encoder.model_tag}) -> {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(args.model, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="provider", description="Sentence-embedding sidecar")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="embed a bank file into {'id','vector'} JSON lines")
    p.add_argument("--bank", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", default=DEFAULT_MODEL_TAG,
                   help="model tag; 'hashed-<dim>' selects the offline encoder")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="run the /embed HTTP service")
    p.add_argument("--model", default=DEFAULT_MODEL_TAG)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8900)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelLoadError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
