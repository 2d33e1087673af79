"""Command-line entry point: ``ladybug index | localize | evaluate``.

Results go to stdout, progress and diagnostics to stderr as plain lines
prefixed ``[ladybug]``.  Exit status is 0 only when no error occurred.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

from ladybug import evaluate as evaluate_mod
from ladybug.embedding import ExternalProvider, LexicalProvider
from ladybug.errors import ConfigurationError, LadybugError
from ladybug.index_store import Freshness, ensure_fresh, index_lock, load_index
from ladybug.localize import LocalizeConfig, localize, render_markdown
from ladybug.trace import parse_trace

_PREFIX = "[ladybug]"


def _progress(message: str) -> None:
    print(f"{_PREFIX} {message}", file=sys.stderr)


def _result(message: str) -> None:
    print(message)


def _freshness_event(decision: Freshness, snapshot) -> None:
    short = snapshot.commit_id[:12]
    if decision is Freshness.REUSE:
        _progress(f"index fresh (commit {short})")
    elif decision is Freshness.REBUILD_COMMIT_CHANGED:
        _progress("re-indexing: commit changed")
    elif decision is Freshness.REBUILD_PROVIDER_CHANGED:
        _progress("re-indexing: provider changed")
    elif decision is Freshness.REBUILD_UNREADABLE:
        _progress("re-indexing: stored index unreadable")
    else:
        _progress(f"indexing {len(snapshot.files)} files (commit {short})")


def _make_provider(args: argparse.Namespace):
    if args.provider == "lexical":
        return LexicalProvider()
    if not args.provider_cmd:
        raise ConfigurationError("--provider external requires --provider-cmd")
    return ExternalProvider(args.provider_cmd, timeout=args.provider_timeout)


def _default_store(repo_path: str) -> str:
    env = os.environ.get("LADYBUG_STORE")
    if env:
        return env
    return str(Path(repo_path) / ".ladybug.index")


def cmd_index(args: argparse.Namespace) -> int:
    provider = _make_provider(args)
    store = args.store or _default_store(args.repo)
    with index_lock(store):
        index = ensure_fresh(args.repo, store, provider, on_event=_freshness_event)
    _result(f"{_PREFIX} commit: {index.commit_id}")
    _result(f"{_PREFIX} files: {len(index.file_token_sets)}")
    _result(f"{_PREFIX} segments: {len(index.segment_embeddings)}")
    _result(f"{_PREFIX} store: {store}")
    return 0


def cmd_localize(args: argparse.Namespace) -> int:
    provider = _make_provider(args)

    if args.repo:
        store = args.store or _default_store(args.repo)
        with index_lock(store):
            index = ensure_fresh(args.repo, store, provider, on_event=_freshness_event)
    else:
        store = args.store or os.environ.get("LADYBUG_STORE")
        if not store:
            raise ConfigurationError("give a repository path or --store")
        index = load_index(store)

    report_text = Path(args.report).read_text("utf-8")

    trace = None
    if args.trace and not args.no_gui:
        trace = parse_trace(Path(args.trace).read_text("utf-8"))

    if trace is not None:
        config = LocalizeConfig.gui(top_k_display=args.top_k)
    else:
        config = LocalizeConfig.no_gui(top_k_display=args.top_k)
    _progress(f"localizing in {config.mode} mode over {len(index.file_token_sets)} files")

    ranking = localize(report_text, trace, index, config, provider)
    if args.format == "json":
        _result(ranking.to_json())
    else:
        _result(render_markdown(ranking, top_k=args.top_k))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    provider = _make_provider(args)
    k_values = _parse_k_values(args.k)
    _progress(f"evaluating {args.dataset} in {args.mode} mode")

    result = evaluate_mod.run_benchmark(
        args.dataset,
        mode=args.mode,
        iterations=args.iterations,
        provider=provider,
        store_dir=args.store,
        k_values=k_values,
    )

    for report in result.reports.values():
        for bug_id, message in report.failures:
            _progress(f"warning: bug {bug_id} skipped: {message}")
        break  # failures are shared between modes

    if args.format == "json":
        _result(result.to_json())
    else:
        _result(_render_table(result, k_values))

    if args.iterations > 1:
        _result(f"{_PREFIX} determinism: {'PASS' if result.determinism_ok else 'FAIL'}")
        seconds = ", ".join(f"{s:.3f}s" for s in result.iteration_seconds)
        _progress(f"iteration wall times: {seconds}")

    if args.out:
        Path(args.out).write_text(result.to_json() + "\n", "utf-8")
        _progress(f"report written: {args.out}")

    if not result.determinism_ok:
        raise LadybugError("determinism audit failed: iteration reports differ")
    return 0


def _parse_k_values(raw: str) -> tuple[int, ...]:
    try:
        values = tuple(sorted({int(part) for part in raw.split(",") if part.strip()}))
    except ValueError:
        raise ConfigurationError(f"bad --k list: {raw!r}") from None
    if not values or any(k < 1 for k in values):
        raise ConfigurationError(f"bad --k list: {raw!r}")
    return values


def _fmt_delta(value: float) -> str:
    if math.isinf(value):
        return "+inf%" if value > 0 else "-inf%"
    return f"{value * 100:+.1f}%"


def _render_table(result: evaluate_mod.BenchmarkResult, k_values) -> str:
    rows: list[tuple[str, ...]] = []
    if result.mode == "compare":
        gui = result.reports["gui"]
        no_gui = result.reports["no_gui"]
        deltas = evaluate_mod.relative_improvement(gui, no_gui)
        header = ("metric", "gui", "no_gui", "delta")
        for k in k_values:
            rows.append(
                (
                    f"H@{k}",
                    f"{gui.hits_at[k]:.4f}",
                    f"{no_gui.hits_at[k]:.4f}",
                    _fmt_delta(deltas["hits_at"][k]),
                )
            )
        rows.append(("MRR", f"{gui.mrr:.4f}", f"{no_gui.mrr:.4f}", _fmt_delta(deltas["mrr"])))
        rows.append(
            ("MAP", f"{gui.map_score:.4f}", f"{no_gui.map_score:.4f}", _fmt_delta(deltas["map"]))
        )
        rows.append(
            (
                "E",
                f"{gui.effectiveness:.4f}",
                f"{no_gui.effectiveness:.4f}",
                _fmt_delta(deltas["effectiveness"]),
            )
        )
    else:
        report = result.reports[result.mode]
        header = ("metric", "value")
        for k in k_values:
            rows.append((f"H@{k}", f"{report.hits_at[k]:.4f}"))
        rows.append(("MRR", f"{report.mrr:.4f}"))
        rows.append(("MAP", f"{report.map_score:.4f}"))
        rows.append(("E", f"{report.effectiveness:.4f}"))

    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladybug",
        description="GUI-aware bug localization for Android (Java) repositories",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_provider_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--provider",
            choices=("lexical", "external"),
            default="lexical",
            help="embedding provider (default: lexical tf-idf)",
        )
        p.add_argument(
            "--provider-cmd",
            default=None,
            help="command line of the external embedding process",
        )
        p.add_argument(
            "--provider-timeout",
            type=float,
            default=60.0,
            help="seconds to wait for each external provider response",
        )

    p_index = sub.add_parser("index", help="snapshot a repository and build its index")
    p_index.add_argument("repo", help="repository root")
    p_index.add_argument("--store", default=None, help="index file path ($LADYBUG_STORE)")
    add_provider_flags(p_index)
    p_index.set_defaults(func=cmd_index)

    p_loc = sub.add_parser("localize", help="rank files against a bug report")
    p_loc.add_argument("repo", nargs="?", default=None, help="repository root")
    p_loc.add_argument("--store", default=None, help="index file path ($LADYBUG_STORE)")
    p_loc.add_argument("--report", required=True, help="bug report text file")
    p_loc.add_argument("--trace", default=None, help="execution trace json file")
    p_loc.add_argument(
        "--no-gui",
        action="store_true",
        help="ignore the trace and run the text-only pipeline",
    )
    p_loc.add_argument("--top-k", type=int, default=10, help="entries to display")
    p_loc.add_argument("--format", choices=("markdown", "json"), default="markdown")
    add_provider_flags(p_loc)
    p_loc.set_defaults(func=cmd_localize)

    p_eval = sub.add_parser("evaluate", help="run the benchmark harness on a dataset")
    p_eval.add_argument("dataset", help="JSONL dataset manifest")
    p_eval.add_argument(
        "--mode", choices=("gui", "no_gui", "compare"), default="no_gui"
    )
    p_eval.add_argument("--iterations", type=int, default=1)
    p_eval.add_argument("--store", default=None, help="directory for per-corpus indexes")
    p_eval.add_argument("--k", default="1,5,10", help="comma-separated Hits@K cutoffs")
    p_eval.add_argument("--format", choices=("markdown", "json"), default="markdown")
    p_eval.add_argument("--out", default=None, help="write the machine-readable report here")
    add_provider_flags(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LadybugError as exc:
        _progress(f"error ({exc.category}): {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
