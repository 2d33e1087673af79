"""Benchmark harness: run the localizer over a dataset and score it.

The dataset manifest is JSON-lines, one record per bug:

  {"bug_id": ..., "corpus_path": ..., "report_text": ...,
   "trace_path": ..., "ground_truth": [...]}

Paths are resolved relative to the manifest file.  Metrics are Hits@K,
MRR, MAP, and Effectiveness (mean rank of the first buggy file).  Compare
mode runs both GUI and no-GUI pipelines and reports per-metric relative
improvement, (gui - no_gui) / no_gui.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from tempfile import TemporaryDirectory
from typing import Iterable, Sequence

from ladybug.errors import DatasetError, LadybugError
from ladybug.index_store import ensure_fresh
from ladybug.localize import LocalizeConfig, RankedList, localize
from ladybug.trace import parse_trace

DEFAULT_K_VALUES = (1, 5, 10)


# -- metrics ------------------------------------------------------------------


def _paths(ranking: RankedList | Iterable[str]) -> list[str]:
    if isinstance(ranking, RankedList):
        return ranking.paths()
    return list(ranking)


def first_relevant_rank(
    ranking: RankedList | Iterable[str], truth: Iterable[str]
) -> int | None:
    """1-based rank of the first ground-truth file, None when absent."""
    truth_set = set(truth)
    for rank, path in enumerate(_paths(ranking), start=1):
        if path in truth_set:
            return rank
    return None


def reciprocal_rank(ranking: RankedList | Iterable[str], truth: Iterable[str]) -> float:
    rank = first_relevant_rank(ranking, truth)
    return 0.0 if rank is None else 1.0 / rank


def average_precision(
    ranking: RankedList | Iterable[str], truth: Iterable[str]
) -> float:
    """Mean of precision-at-hit over all truth files; misses contribute 0."""
    truth_set = set(truth)
    if not truth_set:
        return 0.0
    found = 0
    total = 0.0
    for rank, path in enumerate(_paths(ranking), start=1):
        if path in truth_set:
            found += 1
            total += found / rank
    return total / len(truth_set)


def hits_at_k(
    runs: Sequence[tuple[RankedList | Iterable[str], Iterable[str]]], k: int
) -> float:
    """Fraction of queries whose top-k contains at least one truth file."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not runs:
        return 0.0
    hits = 0
    for ranking, truth in runs:
        rank = first_relevant_rank(ranking, truth)
        if rank is not None and rank <= k:
            hits += 1
    return hits / len(runs)


def effectiveness(
    runs: Sequence[tuple[RankedList | Iterable[str], Iterable[str]]],
    corpus_sizes: Sequence[int] | None = None,
) -> float:
    """Mean rank of the first truth file; a miss costs corpus size + 1.

    Without explicit corpus sizes the ranking length stands in, which is
    only right for unfiltered rankings.
    """
    if not runs:
        return 0.0
    total = 0.0
    for i, (ranking, truth) in enumerate(runs):
        paths = _paths(ranking)
        rank = first_relevant_rank(paths, truth)
        if rank is None:
            size = corpus_sizes[i] if corpus_sizes is not None else len(paths)
            rank = size + 1
        total += rank
    return total / len(runs)


# -- dataset ------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetEntry:
    bug_id: str
    corpus_path: Path
    report_text: str
    trace_path: Path | None
    ground_truth: tuple[str, ...]


def load_dataset(manifest_path: str | Path) -> list[DatasetEntry]:
    manifest = Path(manifest_path)
    try:
        text = manifest.read_text("utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset manifest {manifest}: {exc}") from exc

    base = manifest.parent
    entries: list[DatasetEntry] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{manifest}:{lineno}: malformed record: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise DatasetError(f"{manifest}:{lineno}: record is not an object")
        try:
            entry = _parse_entry(record, base)
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{manifest}:{lineno}: {exc}") from exc
        if entry.bug_id in seen_ids:
            raise DatasetError(f"{manifest}:{lineno}: duplicate bug_id {entry.bug_id!r}")
        seen_ids.add(entry.bug_id)
        entries.append(entry)
    if not entries:
        raise DatasetError(f"{manifest}: dataset has no entries")
    return entries


def _parse_entry(record: dict, base: Path) -> DatasetEntry:
    bug_id = record["bug_id"]
    if not isinstance(bug_id, str) or not bug_id:
        raise ValueError("bug_id must be a non-empty string")
    corpus_path = record["corpus_path"]
    if not isinstance(corpus_path, str):
        raise ValueError("corpus_path must be a string")
    report_text = record["report_text"]
    if not isinstance(report_text, str):
        raise ValueError("report_text must be a string")
    truth = record["ground_truth"]
    if (
        not isinstance(truth, list)
        or not truth
        or not all(isinstance(p, str) and p.endswith(".java") for p in truth)
    ):
        raise ValueError("ground_truth must be a non-empty list of .java paths")
    trace_raw = record.get("trace_path")
    if trace_raw is not None and not isinstance(trace_raw, str):
        raise ValueError("trace_path must be a string when present")
    return DatasetEntry(
        bug_id=bug_id,
        corpus_path=(base / corpus_path).resolve(),
        report_text=report_text,
        trace_path=(base / trace_raw).resolve() if trace_raw else None,
        ground_truth=tuple(truth),
    )


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class PerBugResult:
    bug_id: str
    first_rank: int | None
    reciprocal_rank: float
    average_precision: float
    corpus_size: int
    ranked_count: int

    def to_doc(self) -> dict:
        return {
            "bug_id": self.bug_id,
            "first_rank": self.first_rank,
            "reciprocal_rank": self.reciprocal_rank,
            "average_precision": self.average_precision,
            "corpus_size": self.corpus_size,
            "ranked_count": self.ranked_count,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PerBugResult":
        return cls(
            bug_id=doc["bug_id"],
            first_rank=doc["first_rank"],
            reciprocal_rank=float(doc["reciprocal_rank"]),
            average_precision=float(doc["average_precision"]),
            corpus_size=int(doc["corpus_size"]),
            ranked_count=int(doc["ranked_count"]),
        )


@dataclass(frozen=True)
class MetricsReport:
    mode: str
    hits_at: dict[int, float]
    mrr: float
    map_score: float
    effectiveness: float
    per_bug: tuple[PerBugResult, ...]
    failures: tuple[tuple[str, str], ...] = ()

    def to_doc(self) -> dict:
        return {
            "mode": self.mode,
            "hits_at": {str(k): v for k, v in sorted(self.hits_at.items())},
            "mrr": self.mrr,
            "map": self.map_score,
            "effectiveness": self.effectiveness,
            "per_bug": [row.to_doc() for row in self.per_bug],
            "failures": [list(pair) for pair in self.failures],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), ensure_ascii=False, indent=2)

    @classmethod
    def from_doc(cls, doc: dict) -> "MetricsReport":
        return cls(
            mode=doc["mode"],
            hits_at={int(k): float(v) for k, v in doc["hits_at"].items()},
            mrr=float(doc["mrr"]),
            map_score=float(doc["map"]),
            effectiveness=float(doc["effectiveness"]),
            per_bug=tuple(PerBugResult.from_doc(d) for d in doc["per_bug"]),
            failures=tuple((a, b) for a, b in doc["failures"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_doc(json.loads(text))


def relative_change(gui_value: float, no_gui_value: float) -> float:
    """(gui - no_gui) / no_gui, with signed infinity when no_gui is 0."""
    if no_gui_value == 0.0:
        if gui_value > 0.0:
            return math.inf
        if gui_value < 0.0:
            return -math.inf
        return 0.0
    return (gui_value - no_gui_value) / no_gui_value


def relative_improvement(gui: MetricsReport, no_gui: MetricsReport) -> dict:
    return {
        "hits_at": {
            k: relative_change(gui.hits_at[k], no_gui.hits_at[k])
            for k in sorted(gui.hits_at)
        },
        "mrr": relative_change(gui.mrr, no_gui.mrr),
        "map": relative_change(gui.map_score, no_gui.map_score),
        "effectiveness": relative_change(gui.effectiveness, no_gui.effectiveness),
    }


@dataclass(frozen=True)
class BenchmarkResult:
    mode: str
    reports: dict[str, MetricsReport]  # keyed by "gui" / "no_gui"
    iterations: int
    determinism_ok: bool
    iteration_seconds: tuple[float, ...]

    def to_doc(self) -> dict:
        doc: dict = {
            "mode": self.mode,
            "iterations": self.iterations,
            "determinism": "PASS" if self.determinism_ok else "FAIL",
            "iteration_seconds": list(self.iteration_seconds),
        }
        if self.mode == "compare":
            doc["gui"] = self.reports["gui"].to_doc()
            doc["no_gui"] = self.reports["no_gui"].to_doc()
            doc["relative_improvement"] = relative_improvement(
                self.reports["gui"], self.reports["no_gui"]
            )
        else:
            doc["report"] = self.reports[self.mode].to_doc()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), ensure_ascii=False, indent=2)


# -- runner -------------------------------------------------------------------


def _store_file(store_dir: Path, corpus_path: Path, provider) -> Path:
    identity = provider.identity()
    key = f"{corpus_path}|{identity.name}|{identity.version}"
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
    return store_dir / f"{digest}.lbix"


def _score(ranking: RankedList, truth: Sequence[str], corpus_size: int, bug_id: str) -> PerBugResult:
    paths = ranking.paths()
    return PerBugResult(
        bug_id=bug_id,
        first_rank=first_relevant_rank(paths, truth),
        reciprocal_rank=reciprocal_rank(paths, truth),
        average_precision=average_precision(paths, truth),
        corpus_size=corpus_size,
        ranked_count=len(paths),
    )


def _aggregate(
    mode: str,
    rows: list[PerBugResult],
    failures: list[tuple[str, str]],
    k_values: Sequence[int],
) -> MetricsReport:
    n = len(rows)
    hits = {
        k: (
            sum(1 for r in rows if r.first_rank is not None and r.first_rank <= k) / n
            if n
            else 0.0
        )
        for k in k_values
    }
    mrr = sum(r.reciprocal_rank for r in rows) / n if n else 0.0
    map_score = sum(r.average_precision for r in rows) / n if n else 0.0
    eff = (
        sum(r.first_rank if r.first_rank is not None else r.corpus_size + 1 for r in rows) / n
        if n
        else 0.0
    )
    return MetricsReport(
        mode=mode,
        hits_at=hits,
        mrr=mrr,
        map_score=map_score,
        effectiveness=eff,
        per_bug=tuple(rows),
        failures=tuple(failures),
    )


def _evaluate_once(
    entries: list[DatasetEntry],
    mode: str,
    provider,
    store_dir: Path,
    k_values: Sequence[int],
) -> dict[str, MetricsReport]:
    wanted = ("gui", "no_gui") if mode == "compare" else (mode,)
    rows: dict[str, list[PerBugResult]] = {m: [] for m in wanted}
    failures: list[tuple[str, str]] = []

    for entry in sorted(entries, key=lambda e: e.bug_id):
        try:
            index = ensure_fresh(
                entry.corpus_path, _store_file(store_dir, entry.corpus_path, provider), provider
            )
            trace = None
            if entry.trace_path is not None:
                trace = parse_trace(entry.trace_path.read_text("utf-8"))
            corpus_size = len(index.file_token_sets)
            for m in wanted:
                config = LocalizeConfig.gui() if m == "gui" else LocalizeConfig.no_gui()
                ranking = localize(entry.report_text, trace, index, config, provider)
                rows[m].append(_score(ranking, entry.ground_truth, corpus_size, entry.bug_id))
        except (LadybugError, OSError) as exc:
            warnings.warn(
                f"skipping bug {entry.bug_id}: {exc}", RuntimeWarning, stacklevel=2
            )
            failures.append((entry.bug_id, str(exc)))

    return {m: _aggregate(m, rows[m], failures, k_values) for m in wanted}


def run_benchmark(
    dataset_path: str | Path,
    mode: str = "no_gui",
    iterations: int = 1,
    provider=None,
    store_dir: str | Path | None = None,
    k_values: Sequence[int] = DEFAULT_K_VALUES,
) -> BenchmarkResult:
    """Evaluate a dataset; iterations > 1 audits determinism concurrently.

    Every iteration must serialize to byte-identical reports (timings are
    kept outside the reports).  Per-entry failures are recorded on the
    report and excluded from aggregation; they never abort the batch.
    """
    if mode not in ("gui", "no_gui", "compare"):
        raise DatasetError(f"unknown benchmark mode {mode!r}")
    if iterations < 1:
        raise DatasetError("iterations must be >= 1")

    entries = load_dataset(dataset_path)
    if provider is None:
        from ladybug.embedding import LexicalProvider

        provider = LexicalProvider()

    tempdir: TemporaryDirectory | None = None
    if store_dir is None:
        tempdir = TemporaryDirectory(prefix="ladybug-store-")
        store_root = Path(tempdir.name)
    else:
        store_root = Path(store_dir)
        store_root.mkdir(parents=True, exist_ok=True)

    def one_run(_: int) -> tuple[dict[str, MetricsReport], float]:
        start = time.perf_counter()
        reports = _evaluate_once(entries, mode, provider, store_root, k_values)
        return reports, time.perf_counter() - start

    try:
        if iterations == 1:
            outcomes = [one_run(0)]
        else:
            with ThreadPoolExecutor(max_workers=min(iterations, 4)) as pool:
                outcomes = list(pool.map(one_run, range(iterations)))
    finally:
        if tempdir is not None:
            tempdir.cleanup()

    serialized = [
        json.dumps({m: r.to_doc() for m, r in reports.items()}, sort_keys=True)
        for reports, _ in outcomes
    ]
    determinism_ok = all(s == serialized[0] for s in serialized)

    return BenchmarkResult(
        mode=mode,
        reports=outcomes[0][0],
        iterations=iterations,
        determinism_ok=determinism_ok,
        iteration_seconds=tuple(elapsed for _, elapsed in outcomes),
    )
