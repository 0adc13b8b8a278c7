"""Command-line client for the corpus pipeline and evaluation service.

Each subcommand builds the same request model the HTTP API accepts and
either runs it in-process (default) or posts it to a running server
(``--server http://host:port``). Reports print as UTF-8 JSON with LF;
``--format table`` switches stats/eval to the fixed-layout text table.

Exit codes: 0 success, 2 io error, 3 format error, 4 config error.
The MRFORGE_SEED environment variable overrides any ``--seed`` flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, ToolkitError
from .service import ops
from .service.schemas import (
    BuildRequest,
    EvalRequest,
    FilterPolicyModel,
    OverlapRequest,
    SplitRequest,
    StatsRequest,
    TemplatesRequest,
)

EXIT_CODES = {"io": 2, "format": 3, "config": 4}

ENDPOINTS = {
    "build": "/build",
    "split": "/split",
    "overlap": "/overlap",
    "stats": "/stats",
    "eval": "/eval",
    "templates": "/templates",
}


def _seed(args: argparse.Namespace) -> int:
    env = os.environ.get("MRFORGE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"MRFORGE_SEED must be an integer, got {env!r}") from None
    return args.seed


def _filter_model(args: argparse.Namespace) -> FilterPolicyModel | None:
    touched = (
        args.min_len is not None
        or args.max_len is not None
        or args.anchors is not None
        or args.keep_fragments
    )
    if not touched:
        return None
    return FilterPolicyModel(
        min_len=args.min_len if args.min_len is not None else 4,
        max_len=args.max_len if args.max_len is not None else 30,
        anchor_values=(
            [a.strip() for a in args.anchors.split(",") if a.strip()]
            if args.anchors is not None
            else None
        ),
        drop_fragments=not args.keep_fragments,
    )


def build_request(args: argparse.Namespace):
    command = args.command
    if command == "build":
        return BuildRequest(
            lexicons=args.lexicons,
            conllu=args.conllu,
            out=args.out,
            meta=args.meta,
            variants=args.variant if args.variant is not None else ["all"],
            split=args.split,
            seed=_seed(args),
            sample=args.sample,
            filter=_filter_model(args),
            filter_config=args.filter_config,
        )
    if command == "split":
        return SplitRequest(corpus=args.corpus, out=args.out, split=args.split, seed=_seed(args))
    if command == "overlap":
        return OverlapRequest(train=args.train, test=args.test)
    if command == "stats":
        return StatsRequest(corpus=args.corpus)
    if command == "eval":
        return EvalRequest(
            corpus=args.corpus,
            outputs=args.outputs,
            metrics=args.metrics,
            lexicons=args.lexicons,
            top_k=args.top_k,
        )
    if command == "templates":
        return TemplatesRequest(outputs=args.outputs, lexicons=args.lexicons, top_k=args.top_k)
    raise ConfigError(f"unknown command {command!r}")


def _remote_call(server: str, command: str, request) -> dict:
    import httpx

    from .errors import FormatError, IoError

    url = server.rstrip("/") + ENDPOINTS[command]
    try:
        response = httpx.post(url, json=request.model_dump(), timeout=600.0)
    except httpx.HTTPError as exc:
        raise IoError(f"cannot reach server {server}: {exc}") from exc
    try:
        payload = response.json()
    except ValueError as exc:
        raise FormatError(f"server returned non-JSON response: {exc}") from exc
    if response.status_code != 200:
        detail = payload.get("error", {}) if isinstance(payload, dict) else {}
        category = detail.get("category", "config")
        message = detail.get("message", response.text)
        cls = {"io": IoError, "format": FormatError}.get(category, ConfigError)
        raise cls(message)
    return payload


def run_local(command: str, request) -> dict:
    handler = {
        "build": ops.run_build,
        "split": ops.run_split,
        "overlap": ops.run_overlap,
        "stats": ops.run_stats,
        "eval": ops.run_eval,
        "templates": ops.run_templates,
    }[command]
    return handler(request).model_dump()


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrforge",
        description="Build MR/reference corpora from parsed review sentences and evaluate generator outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", help="run against a mrforge server instead of in-process")

    p = sub.add_parser("build", help="extract MRs and write per-variant, per-split corpora")
    p.add_argument("--lexicons", required=True, help="lexicon manifest (JSON)")
    p.add_argument("--conllu", required=True, nargs="+", help="CoNLL-U input file(s)")
    p.add_argument("--meta", help="review metadata JSONL (review_id, business_id, stars)")
    p.add_argument(
        "--variant",
        action="append",
        default=None,
        help="base|adj|sent|style|all (repeatable or comma-separated; default all)",
    )
    p.add_argument("--split", default="0.8,0.1,0.1", help="train,dev,test fractions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sample", type=int, help="sample N sentences before filtering")
    p.add_argument("--filter-config", help="TOML file with a [filter] section")
    p.add_argument("--min-len", type=int, default=None)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--anchors", help="comma-separated anchor values")
    p.add_argument("--keep-fragments", action="store_true")
    common(p)

    p = sub.add_parser("split", help="re-split an existing corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("overlap", help="MR and MR+reference overlap between two splits")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    common(p)

    p = sub.add_parser("stats", help="profile a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("json", "table"), default="json")
    common(p)

    p = sub.add_parser("eval", help="score generator outputs against a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--outputs", required=True)
    p.add_argument(
        "--metrics",
        action="append",
        default=None,
        help="ser|bleu|nist|entropy|discourse|vocab|style|templates (repeatable/comma-separated)",
    )
    p.add_argument("--lexicons", help="lexicon manifest, needed for the templates metric")
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--format", choices=("json", "table"), default="json")
    common(p)

    p = sub.add_parser("templates", help="mine delexicalized templates from outputs")
    p.add_argument("--outputs", required=True)
    p.add_argument("--lexicons", required=True)
    p.add_argument("--top-k", type=int, default=20)
    common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    try:
        request = build_request(args)
        if getattr(args, "server", None):
            payload = _remote_call(args.server, args.command, request)
        else:
            payload = run_local(args.command, request)
    except ToolkitError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    if getattr(args, "format", "json") == "table" and "table" in payload:
        print(payload["table"])
    else:
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
