"""The ranking pipeline: query reformulation, retrieval, filtering, boosting.

GUI mode reformulates the bug report with Screen Component terms, ranks
all files by best-segment cosine similarity, removes files unrelated to
the screens in the trace, and stably promotes files matching GUI Screen
terms.  No-GUI mode is the bare embed-and-rank path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from ladybug import preprocess
from ladybug.errors import (
    ConfigurationError,
    DimensionMismatchError,
    ProviderMismatchError,
)
from ladybug.index_store import CorpusIndex
from ladybug.trace import ExecutionTrace, GuiTermSet


@dataclass(frozen=True)
class RankEntry:
    file_path: str
    score: float
    boosted: bool = False
    survived_filter: bool = True


@dataclass(frozen=True)
class RankedList:
    entries: tuple[RankEntry, ...]
    mode: str  # "gui" or "no_gui"
    commit_id: str

    def paths(self) -> list[str]:
        return [entry.file_path for entry in self.entries]

    def to_json(self) -> str:
        doc = {
            "mode": self.mode,
            "commit_id": self.commit_id,
            "entries": [
                {
                    "file_path": e.file_path,
                    "score": e.score,
                    "boosted": e.boosted,
                    "survived_filter": e.survived_filter,
                }
                for e in self.entries
            ],
        }
        return json.dumps(doc, ensure_ascii=False, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RankedList":
        doc = json.loads(text)
        entries = tuple(
            RankEntry(
                file_path=e["file_path"],
                score=float(e["score"]),
                boosted=bool(e["boosted"]),
                survived_filter=bool(e["survived_filter"]),
            )
            for e in doc["entries"]
        )
        return cls(entries=entries, mode=doc["mode"], commit_id=doc["commit_id"])


@dataclass(frozen=True)
class LocalizeConfig:
    """Which GUI augmentations run; all three off means no-GUI mode."""

    use_query_reformulation: bool = True
    use_filtering: bool = True
    use_boosting: bool = True
    top_k_display: int = 10

    @property
    def mode(self) -> str:
        if self.use_query_reformulation or self.use_filtering or self.use_boosting:
            return "gui"
        return "no_gui"

    @classmethod
    def gui(cls, top_k_display: int = 10) -> "LocalizeConfig":
        return cls(True, True, True, top_k_display)

    @classmethod
    def no_gui(cls, top_k_display: int = 10) -> "LocalizeConfig":
        return cls(False, False, False, top_k_display)


def reformulate_query(
    report_text: str, sc_terms: Iterable[Sequence[str]]
) -> str:
    """Append each distinct Screen Component term once, extraction order."""
    seen: set[tuple[str, ...]] = set()
    extra: list[str] = []
    for term in sc_terms:
        key = tuple(term)
        if key and key not in seen:
            seen.add(key)
            extra.extend(key)
    if not extra:
        return report_text
    return report_text + " " + " ".join(extra)


def rank_files(
    query_vector: np.ndarray, index: CorpusIndex, mode: str = "no_gui"
) -> RankedList:
    """Rank every corpus file by its best segment cosine similarity.

    Ties break on lexicographic path so rankings are reproducible.
    """
    query_vector = np.asarray(query_vector, dtype=np.float64)
    if query_vector.ndim != 1 or query_vector.shape[0] != index.provider.dimension:
        raise DimensionMismatchError(
            f"query dimension {query_vector.shape} does not match index "
            f"dimension {index.provider.dimension}"
        )

    matrix, norms, seg_paths = index.scoring_arrays()
    qnorm = float(np.linalg.norm(query_vector))
    if qnorm == 0.0 or matrix.shape[0] == 0:
        sims = np.zeros(matrix.shape[0], dtype=np.float64)
    else:
        sims = matrix @ query_vector
        nonzero = norms > 0.0
        sims[nonzero] /= norms[nonzero] * qnorm
        sims[~nonzero] = 0.0
        np.clip(sims, -1.0, 1.0, out=sims)

    # Max-pool segment similarities per file; initialize from the first
    # occurrence so a file whose best similarity is negative keeps it.
    best: dict[str, float] = {path: 0.0 for path in index.file_token_sets}
    seen: set[str] = set()
    for path, sim in zip(seg_paths, sims):
        value = float(sim)
        if path not in seen:
            best[path] = value
            seen.add(path)
        elif value > best[path]:
            best[path] = value

    ordered = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    entries = tuple(RankEntry(path, score) for path, score in ordered)
    return RankedList(entries=entries, mode=mode, commit_id=index.commit_id)


def _normalized_term_tokens(tokens: Iterable[str]) -> frozenset[str]:
    """Map term tokens into the normalized space the index stores."""
    out = set()
    for token in tokens:
        normalized = preprocess.normalize_token(token)
        if normalized is not None:
            out.add(normalized)
    return frozenset(out)


class _ScreenPredicate:
    """The screen-relation rules shared by filtering and boosting.

    A file relates to the trace's screens when (a) its token set meets any
    Screen Component term, (b) its base name equals a screen class name,
    or (c) its token set covers a screen name's split form.  Boosting uses
    only (b) and (c), per the GUI Screen term rule.
    """

    def __init__(self, terms: GuiTermSet):
        self.component_sets = [
            s
            for s in (
                _normalized_term_tokens(t) for t in terms.screen_component_terms
            )
            if s
        ]
        self.screen_names = {t.class_name for t in terms.gui_screen_terms}
        self.screen_token_sets = [
            s
            for s in (
                _normalized_term_tokens(t.tokens) for t in terms.gui_screen_terms
            )
            if s
        ]

    @staticmethod
    def _base_name(path: str) -> str:
        name = path.rsplit("/", 1)[-1]
        return name[:-5] if name.endswith(".java") else name

    def matches_screen(self, path: str, file_tokens: frozenset[str]) -> bool:
        if self._base_name(path) in self.screen_names:
            return True
        return any(tokens <= file_tokens for tokens in self.screen_token_sets)

    def matches_component(self, file_tokens: frozenset[str]) -> bool:
        return any(file_tokens & tokens for tokens in self.component_sets)

    def related(self, path: str, file_tokens: frozenset[str]) -> bool:
        return self.matches_component(file_tokens) or self.matches_screen(
            path, file_tokens
        )


def filter_ranking(
    ranking: RankedList, terms: GuiTermSet, index: CorpusIndex
) -> RankedList:
    """Drop files unrelated to the trace's screens, keeping order.

    When no file at all is screen-related the filter would empty the
    ranking, so it skips instead (fail open, never fail closed).
    """
    predicate = _ScreenPredicate(terms)
    related = [
        predicate.related(e.file_path, index.file_token_sets.get(e.file_path, frozenset()))
        for e in ranking.entries
    ]
    if not any(related):
        return replace(
            ranking,
            entries=tuple(replace(e, survived_filter=True) for e in ranking.entries),
        )
    kept = tuple(
        replace(entry, survived_filter=True)
        for entry, keep in zip(ranking.entries, related)
        if keep
    )
    return replace(ranking, entries=kept)


def boost_ranking(
    ranking: RankedList, terms: GuiTermSet, index: CorpusIndex
) -> RankedList:
    """Stable partition: files matching GUI Screen terms move to the front."""
    predicate = _ScreenPredicate(terms)
    boosted = []
    rest = []
    for entry in ranking.entries:
        tokens = index.file_token_sets.get(entry.file_path, frozenset())
        if predicate.matches_screen(entry.file_path, tokens):
            boosted.append(replace(entry, boosted=True))
        else:
            rest.append(entry)
    return replace(ranking, entries=tuple(boosted + rest))


def _embed_query(tokens: preprocess.TokenStream, index: CorpusIndex, provider):
    identity = provider.identity()
    if not identity.same_semantics(index.provider):
        raise ProviderMismatchError(
            f"index built with {index.provider.name}/{index.provider.version}, "
            f"query provider is {identity.name}/{identity.version}"
        )
    return provider.embed_query(tokens, index.lexical_model)


def localize(
    report_text: str,
    trace: ExecutionTrace | None,
    index: CorpusIndex,
    config: LocalizeConfig,
    provider,
) -> RankedList:
    """Run the full pipeline in the mode the config selects.

    GUI mode: reformulate, embed, rank, filter, boost (in that order).
    No-GUI mode: embed the raw report and rank.
    """
    gui = config.mode == "gui"
    if gui and trace is None:
        raise ConfigurationError("GUI augmentations are enabled but no trace was given")

    terms = GuiTermSet.from_trace(trace) if (gui and trace is not None) else GuiTermSet()

    query_text = report_text
    if config.use_query_reformulation:
        query_text = reformulate_query(report_text, terms.screen_component_terms)

    query_tokens = preprocess.preprocess_query(query_text)
    query_vector = _embed_query(query_tokens, index, provider)
    ranking = rank_files(query_vector, index, mode=config.mode)

    if config.use_filtering:
        ranking = filter_ranking(ranking, terms, index)
    if config.use_boosting:
        ranking = boost_ranking(ranking, terms, index)
    return ranking


def render_markdown(ranking: RankedList, top_k: int = 10) -> str:
    """Numbered top-k list in the comment format the bot posts."""
    lines = []
    for i, entry in enumerate(ranking.entries[:top_k], start=1):
        suffix = " (boosted)" if entry.boosted else ""
        lines.append(f"{i}. {entry.file_path} — score {entry.score:.4f}{suffix}")
    return "\n".join(lines)
