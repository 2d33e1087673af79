#!/usr/bin/env python3
"""Benchmark the compiled preprocessing kernels against the pure fallback.

Generates a synthetic Java corpus, then times the indexing hot path
(sanitize -> split -> stem) through both implementations.

    python benchmarks/bench_kernels.py [--files 200] [--rounds 3]
"""

from __future__ import annotations

import argparse
import random
import time

from ladybug._kernels import pure

try:
    from ladybug._kernels import _speedups
except ImportError:
    _speedups = None

_WORDS = [
    "save", "button", "click", "handler", "note", "view", "list", "cache",
    "load", "store", "sync", "draw", "toolbar", "widget", "layout", "cursor",
    "adapter", "fragment", "activity", "binder", "parcel", "intent",
]


def _identifier(rng: random.Random) -> str:
    parts = rng.sample(_WORDS, rng.randint(1, 3))
    return parts[0] + "".join(p.capitalize() for p in parts[1:])


def _method(rng: random.Random) -> str:
    lines = [f"    void {_identifier(rng)}(int {_identifier(rng)}) {{"]
    for _ in range(rng.randint(3, 12)):
        kind = rng.random()
        if kind < 0.2:
            lines.append(f"        // {_identifier(rng)} {_identifier(rng)}")
        elif kind < 0.35:
            lines.append(f'        String s{rng.randint(0, 99)} = "{_identifier(rng)} text";')
        else:
            lines.append(
                f"        int {_identifier(rng)}{rng.randint(0, 99)} = "
                f"{_identifier(rng)}.compute({rng.randint(0, 500)});"
            )
    lines.append("    }")
    return "\n".join(lines)


def make_corpus(n_files: int, seed: int = 7) -> list[str]:
    rng = random.Random(seed)
    files = []
    for i in range(n_files):
        methods = "\n".join(_method(rng) for _ in range(rng.randint(4, 14)))
        files.append(
            "package bench.gen;\n\n"
            "import java.util.List;\n"
            "import java.util.Map;\n\n"
            "/* generated corpus file */\n"
            f"public class Bench{i:04d} {{\n{methods}\n}}\n"
        )
    return files


def run_pipeline(impl, corpus: list[str]) -> tuple[int, dict[str, float]]:
    timings = {"sanitize": 0.0, "split": 0.0, "stem": 0.0}
    tokens_out = 0
    for source in corpus:
        t0 = time.perf_counter()
        clean, _ = impl.sanitize_java(source)
        t1 = time.perf_counter()
        tokens, _ = impl.split_tokens_with_offsets(clean)
        t2 = time.perf_counter()
        for token in tokens:
            impl.porter_stem(token)
        t3 = time.perf_counter()
        timings["sanitize"] += t1 - t0
        timings["split"] += t2 - t1
        timings["stem"] += t3 - t2
        tokens_out += len(tokens)
    return tokens_out, timings


def best_of(impl, corpus: list[str], rounds: int) -> dict[str, float]:
    best: dict[str, float] = {}
    for _ in range(rounds):
        _, timings = run_pipeline(impl, corpus)
        for stage, elapsed in timings.items():
            if stage not in best or elapsed < best[stage]:
                best[stage] = elapsed
    best["total"] = sum(best[s] for s in ("sanitize", "split", "stem"))
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--files", type=int, default=200)
    parser.add_argument("--rounds", type=int, default=3)
    args = parser.parse_args()

    corpus = make_corpus(args.files)
    size_kb = sum(len(f) for f in corpus) / 1024
    tokens, _ = run_pipeline(pure, corpus)
    print(f"corpus: {args.files} files, {size_kb:.0f} KiB, {tokens} tokens\n")

    pure_times = best_of(pure, corpus, args.rounds)
    rows = [("stage", "pure (ms)", "compiled (ms)", "speedup")]
    if _speedups is None:
        print("compiled kernels not available; timing the pure implementation only\n")
        for stage in ("sanitize", "split", "stem", "total"):
            rows.append((stage, f"{pure_times[stage] * 1e3:.1f}", "-", "-"))
    else:
        fast_tokens, _ = run_pipeline(_speedups, corpus)
        assert fast_tokens == tokens, "implementations disagree on token count"
        fast_times = best_of(_speedups, corpus, args.rounds)
        for stage in ("sanitize", "split", "stem", "total"):
            ratio = pure_times[stage] / fast_times[stage] if fast_times[stage] else 0.0
            rows.append(
                (
                    stage,
                    f"{pure_times[stage] * 1e3:.1f}",
                    f"{fast_times[stage] * 1e3:.1f}",
                    f"{ratio:.1f}x",
                )
            )

    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for row in rows:
        print("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
