"""Command-line harness: fetch, score, forge, diagnose, report, serve.

Thin argument-parsing layer over the library. Exit codes: 0 success,
1 usage error, 2 input-data error, 3 endpoint failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import DEFAULTS, load_config, merged
from .errors import ConfigError, EndpointUnreachable, InputDataError, LangmixError
from .metrics import exact

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_ENDPOINT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the harness contract says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_arg(parser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")


def _settings(args, overrides: dict) -> dict:
    file_values = load_config(args.config) if args.config else {}
    return merged(file_values, overrides)


def build_parser() -> _Parser:
    parser = _Parser(prog="langmix", description=__doc__)
    parser.add_argument("--version", action="version", version=f"langmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="collect generations from an inference endpoint")
    p.add_argument("--endpoint", help="generation endpoint URL")
    p.add_argument("--prompts", required=True, help="prompts JSONL")
    p.add_argument("--out", required=True, help="output generations JSONL (appended, resumable)")
    p.add_argument("--model", help="model label for the output records")
    p.add_argument("--method", choices=("base", "sft", "dpo", "orpo"))
    p.add_argument("--temperatures", help="comma-separated list, e.g. 0.7,1.0,1.2")
    p.add_argument("--repeats", type=int)
    p.add_argument("--concurrency", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--timeout", type=float)
    _add_config_arg(p)

    p = sub.add_parser("score", help="score a generations file and write reports")
    p.add_argument("generations", help="generations JSONL")
    p.add_argument("--threshold", help="report threshold (decimal, default 0.9)")
    p.add_argument("--repeats", type=int)
    p.add_argument("--workers", type=int, default=1, help="scoring threads (output-invariant)")
    p.add_argument("--out-prefix", default="report", help="writes PREFIX.md/.csv/.json")
    p.add_argument("--quiet", action="store_true", help="do not print the Markdown report")
    _add_config_arg(p)

    p = sub.add_parser("forge", help="build preference triplets/quadruplets from a corpus")
    p.add_argument("corpus", help="input corpus JSONL")
    p.add_argument("--mode", required=True, choices=("code-mixed", "full-foreign", "quadruplet"))
    p.add_argument("--out", required=True, help="output triplets JSONL")
    p.add_argument("--lexicon", help="substitution lexicon TSV (word<TAB>lang<TAB>replacement)")
    p.add_argument("--report", help="sidecar stage-count JSON (default OUT.report.json)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=8, help="words substituted per row")
    p.add_argument("--langs", default="en,zh", help="enabled substitution languages")

    p = sub.add_parser("diagnose", help="loss-log trajectories and ORPO/DPO calculators")
    p.add_argument("--loss-log", help="loss CSV to analyze")
    p.add_argument("--trajectory-out", help="write per-checkpoint trajectory CSV")
    p.add_argument("--summary-out", help="write delta summary JSON")
    p.add_argument("--weighting", choices=("example", "token"), default="example")
    p.add_argument("--objective", choices=("orpo", "dpo"), help="pairwise loss over log-prob files")
    p.add_argument("--chosen", help="chosen log-probs JSONL (with --objective)")
    p.add_argument("--rejected", help="rejected log-probs JSONL (with --objective)")
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--out", help="per-example loss JSONL (with --objective)")

    p = sub.add_parser("report", help="re-render a report JSON")
    p.add_argument("report_json", help="report JSON produced by `score`")
    p.add_argument("--format", choices=("markdown", "csv", "json"), default="markdown")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def cmd_fetch(args) -> int:
    from .fetch import FetchSettings, fetch_generations, read_prompts

    overrides = {
        "endpoint": args.endpoint,
        "model": args.model,
        "method": args.method,
        "repeats": args.repeats,
        "concurrency": args.concurrency,
        "seed": args.seed,
        "timeout": args.timeout,
        "temperatures": (
            [float(t) for t in args.temperatures.split(",")] if args.temperatures else None
        ),
    }
    cfg = _settings(args, overrides)
    if not cfg["endpoint"]:
        raise ConfigError("no endpoint configured (use --endpoint or a config file)")
    if not cfg["model"]:
        raise ConfigError("no model label configured (use --model or a config file)")
    settings = FetchSettings(
        endpoint=cfg["endpoint"],
        model=cfg["model"],
        method=cfg["method"],
        temperatures=cfg["temperatures"],
        repeats=int(cfg["repeats"]),
        concurrency=int(cfg["concurrency"]),
        seed=int(cfg["seed"]),
        timeout=float(cfg["timeout"]),
    )
    prompts = read_prompts(args.prompts)
    summary = fetch_generations(settings, prompts, args.out)
    print(
        f"fetched {summary.fetched} records "
        f"({summary.resumed} already present, {len(summary.failed)} skipped)"
    )
    for key, reason in summary.failed:
        print(f"  skipped {key}: {reason}", file=sys.stderr)
    return EXIT_OK


def cmd_score(args) -> int:
    from .harness import score_file
    from .reporting import render_csv, render_json, render_markdown

    cfg = _settings(args, {"threshold": args.threshold, "repeats": args.repeats})
    report = score_file(
        args.generations,
        threshold=exact(cfg["threshold"]),
        repeats=int(cfg["repeats"]),
        workers=args.workers,
    )
    prefix = Path(args.out_prefix)
    markdown = render_markdown(report)
    prefix.with_suffix(".md").write_bytes(markdown)
    prefix.with_suffix(".csv").write_bytes(render_csv(report))
    prefix.with_suffix(".json").write_bytes(render_json(report))
    if not args.quiet:
        sys.stdout.write(markdown.decode("utf-8"))
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_forge(args) -> int:
    from .forge import (
        ForgeConfig,
        ForgeMode,
        SubstitutionLexicon,
        build_triplets,
        read_corpus,
        write_forge_report,
        write_triplets,
    )

    mode = ForgeMode(args.mode)
    lexicon = None
    if args.lexicon:
        lexicon = SubstitutionLexicon.from_tsv(args.lexicon)
    elif mode in (ForgeMode.CODE_MIXED, ForgeMode.QUADRUPLET):
        raise ConfigError(f"mode {mode.value} requires --lexicon")
    langs = tuple(lang.strip() for lang in args.langs.split(",") if lang.strip())
    config = ForgeConfig(mode=mode, lexicon=lexicon, seed=args.seed, k=args.k, langs=langs)
    try:
        result = build_triplets(read_corpus(args.corpus), config)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    write_triplets(args.out, result.rows)
    report_path = args.report or f"{args.out}.report.json"
    write_forge_report(report_path, result)
    drops = sum(result.stage_counts[s] for s in result.stage_counts if s not in ("input", "emitted"))
    print(
        f"forged {result.stage_counts['emitted']} rows from "
        f"{result.stage_counts['input']} inputs ({drops} dropped); report: {report_path}"
    )
    return EXIT_OK


def cmd_diagnose(args) -> int:
    from . import diagnostics as diag

    if args.objective:
        if not args.chosen or not args.rejected:
            raise ConfigError("--objective requires --chosen and --rejected")
        chosen = {r.example_id: r for r in diag.read_logprobs_jsonl(args.chosen)}
        rejected = {r.example_id: r for r in diag.read_logprobs_jsonl(args.rejected)}
        shared = sorted(set(chosen) & set(rejected))
        if not shared:
            raise InputDataError("no example_id appears in both files")
        rows = []
        for example_id in shared:
            if args.objective == "orpo":
                result = diag.orpo_loss(chosen[example_id], rejected[example_id], args.beta)
                rows.append(
                    {
                        "example_id": example_id,
                        "total": result.total,
                        "sft_term": result.sft_term,
                        "or_term": result.or_term,
                    }
                )
            else:
                rows.append(
                    {
                        "example_id": example_id,
                        "loss": diag.dpo_loss(chosen[example_id], rejected[example_id], args.beta),
                    }
                )
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                for row in rows:
                    fh.write(json.dumps(row) + "\n")
        key = "total" if args.objective == "orpo" else "loss"
        mean = sum(row[key] for row in rows) / len(rows)
        print(f"{args.objective} over {len(rows)} pairs: mean {key} = {mean:.6f}")
        return EXIT_OK

    if not args.loss_log:
        raise ConfigError("diagnose needs --loss-log or --objective")
    records = diag.read_loss_csv(args.loss_log)
    points = diag.trajectory(records, args.weighting)
    if args.trajectory_out:
        diag.write_trajectory_csv(args.trajectory_out, points)
    if args.summary_out:
        diag.write_delta_summary(args.summary_out, records, args.weighting)
    print(
        f"{len(records)} records over {len(points)} checkpoints; "
        f"delta loss = {diag.delta_loss(records):.4f}"
    )
    return EXIT_OK


def cmd_report(args) -> int:
    from .reporting import render, report_from_json

    report = report_from_json(Path(args.report_json).read_bytes())
    payload = render(report, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("langmix.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "fetch": cmd_fetch,
    "score": cmd_score,
    "forge": cmd_forge,
    "diagnose": cmd_diagnose,
    "report": cmd_report,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"langmix: usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except EndpointUnreachable as err:
        print(f"langmix: endpoint failure: {err}", file=sys.stderr)
        return EXIT_ENDPOINT
    except FileNotFoundError as err:
        print(f"langmix: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except LangmixError as err:
        print(f"langmix: input error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
