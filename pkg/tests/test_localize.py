"""Ranking pipeline: retrieval oracle, filter/boost algebra, end-to-end modes."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

import conftest
from ladybug.corpus import snapshot_repository
from ladybug.embedding import LexicalProvider, ProviderIdentity
from ladybug.errors import ConfigurationError, DimensionMismatchError, ProviderMismatchError
from ladybug.index_store import CorpusIndex, build_index
from ladybug.localize import (
    LocalizeConfig,
    RankedList,
    RankEntry,
    boost_ranking,
    filter_ranking,
    localize,
    rank_files,
    reformulate_query,
    render_markdown,
)
from ladybug.preprocess import Segment, normalize_token, preprocess_query
from ladybug.trace import GuiScreenTerm, GuiTermSet, parse_trace

# 5 files, 12 segments; token sets chosen to avoid score ties.
TOY_CORPUS = {
    "alpha.java": [["save", "button", "click"], ["handler", "click"], ["save", "store"]],
    "beta.java": [["note", "view", "list"], ["list", "cach"], ["view", "draw"]],
    "gamma.java": [["cach", "load"], ["load", "store", "sync"]],
    "delta.java": [["sync", "button"], ["draw", "handler"]],
    "epsilon.java": [["note", "save", "button"], ["click", "view"]],
}


def build_toy_index() -> tuple[CorpusIndex, LexicalProvider]:
    segments = [
        Segment(path, i, tuple(tokens))
        for path, seg_lists in sorted(TOY_CORPUS.items())
        for i, tokens in enumerate(seg_lists)
    ]
    provider = LexicalProvider()
    embeddings, model, identity = provider.embed_corpus(segments)
    index = CorpusIndex(
        commit_id="toy-commit",
        provider=identity,
        segment_embeddings=tuple(embeddings),
        file_token_sets={
            path: frozenset(t for seg in segs for t in seg)
            for path, segs in TOY_CORPUS.items()
        },
        lexical_model=model,
    )
    index.validate()
    return index, provider


def oracle_rank(query_tokens: list[str]) -> list[tuple[str, float]]:
    """Brute-force all-pairs tf-idf cosine, independent of the library."""
    segments = [
        (path, tokens)
        for path, seg_lists in sorted(TOY_CORPUS.items())
        for tokens in seg_lists
    ]
    n = len(segments)
    vocab = sorted({t for _, tokens in segments for t in tokens})
    df = {t: sum(1 for _, tokens in segments if t in tokens) for t in vocab}
    idf = {t: math.log((n + 1) / (df[t] + 1)) + 1 for t in vocab}

    def embed(tokens: list[str]) -> list[float]:
        return [tokens.count(t) * idf[t] for t in vocab]

    def cos(u: list[float], v: list[float]) -> float:
        dot = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u))
        nv = math.sqrt(sum(b * b for b in v))
        return 0.0 if nu == 0 or nv == 0 else dot / (nu * nv)

    qvec = embed(query_tokens)
    best: dict[str, float] = {}
    for path, tokens in segments:
        score = cos(qvec, embed(list(tokens)))
        if path not in best or score > best[path]:
            best[path] = score
    return sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))


# -- retrieval oracle ----------------------------------------------------------


def test_toy_corpus_shape():
    assert len(TOY_CORPUS) == 5
    assert sum(len(v) for v in TOY_CORPUS.values()) == 12


@pytest.mark.parametrize(
    "query",
    [
        ["save", "button"],
        ["note", "view"],
        ["sync"],
        ["load", "store", "sync"],
        ["click", "click", "save"],
        ["missing"],
    ],
    ids=lambda q: "+".join(q),
)
def test_rank_files_matches_oracle(query):
    index, _ = build_toy_index()
    expected = oracle_rank(query)
    ranking = rank_files(index.lexical_model.embed(query), index)
    assert [e.file_path for e in ranking.entries] == [p for p, _ in expected]
    for entry, (_, score) in zip(ranking.entries, expected):
        assert entry.score == pytest.approx(score, abs=1e-12)


def test_query_equal_to_segment_ranks_its_file_first():
    index, _ = build_toy_index()
    segment_tokens = list(TOY_CORPUS["gamma.java"][1])
    ranking = rank_files(index.lexical_model.embed(segment_tokens), index)
    assert ranking.entries[0].file_path == "gamma.java"
    assert ranking.entries[0].score == pytest.approx(1.0, abs=1e-12)


def test_rank_files_single_file_corpus():
    provider = LexicalProvider()
    segments = [Segment("only.java", 0, ("alone",))]
    embeddings, model, identity = provider.embed_corpus(segments)
    index = CorpusIndex("c", identity, tuple(embeddings), {"only.java": frozenset(["alone"])}, model)
    ranking = rank_files(model.embed(["unrelated"]), index)
    assert [e.file_path for e in ranking.entries] == ["only.java"]


def test_rank_files_zero_query_vector_lexicographic():
    index, _ = build_toy_index()
    ranking = rank_files(np.zeros(index.provider.dimension), index)
    paths = [e.file_path for e in ranking.entries]
    assert paths == sorted(paths)
    assert all(e.score == 0.0 for e in ranking.entries)


def test_rank_files_dimension_mismatch():
    index, _ = build_toy_index()
    with pytest.raises(DimensionMismatchError):
        rank_files(np.zeros(index.provider.dimension + 1), index)


def test_rank_files_all_files_present():
    index, _ = build_toy_index()
    ranking = rank_files(index.lexical_model.embed(["save"]), index)
    assert sorted(e.file_path for e in ranking.entries) == sorted(TOY_CORPUS)


# -- reformulation ---------------------------------------------------------------


def test_reformulate_appends_terms():
    assert reformulate_query("app crashes", [("save", "button")]) == "app crashes save button"


def test_reformulate_empty_terms_identity():
    assert reformulate_query("bug", []) == "bug"


def test_reformulate_dedupes():
    out = reformulate_query("text", [("save", "button"), ("save", "button")])
    assert out == "text save button"


# -- filter / boost examples ------------------------------------------------------


class _StubIndex:
    """filter/boost only consult file_token_sets."""

    def __init__(self, file_token_sets: dict[str, frozenset[str]]):
        self.file_token_sets = file_token_sets


def _ranking(*paths_scores: tuple[str, float]) -> RankedList:
    entries = tuple(RankEntry(p, s) for p, s in paths_scores)
    return RankedList(entries=entries, mode="gui", commit_id="c")


def test_filter_empty_terms_is_identity():
    ranking = _ranking(("A.java", 0.9), ("B.java", 0.5))
    index = _StubIndex({"A.java": frozenset(["a"]), "B.java": frozenset(["b"])})
    out = filter_ranking(ranking, GuiTermSet(), index)
    assert [e.file_path for e in out.entries] == ["A.java", "B.java"]
    assert all(e.survived_filter for e in out.entries)


def test_filter_by_screen_class_name():
    ranking = _ranking(("x/LoginActivity.java", 0.2), ("y/Other.java", 0.9))
    index = _StubIndex(
        {
            "x/LoginActivity.java": frozenset(["login", "activ"]),
            "y/Other.java": frozenset(["other"]),
        }
    )
    terms = GuiTermSet(gui_screen_terms=(GuiScreenTerm("LoginActivity", ("login", "activity")),))
    out = filter_ranking(ranking, terms, index)
    assert [e.file_path for e in out.entries] == ["x/LoginActivity.java"]


def test_filter_by_component_token_intersection():
    ranking = _ranking(
        ("A.java", 0.9), ("B.java", 0.8), ("C.java", 0.7),
        ("D.java", 0.6), ("E.java", 0.5), ("F.java", 0.4),
    )
    token_sets = {
        "A.java": frozenset(["save", "misc"]),
        "B.java": frozenset(["other"]),
        "C.java": frozenset(["save"]),
        "D.java": frozenset(["load"]),
        "E.java": frozenset(["x"]),
        "F.java": frozenset(["y"]),
    }
    terms = GuiTermSet(screen_component_terms=(("save", "button"),))
    out = filter_ranking(_ranking(*[(e.file_path, e.score) for e in ranking.entries]), terms, _StubIndex(token_sets))
    assert [e.file_path for e in out.entries] == ["A.java", "C.java"]


def test_filter_skips_when_nothing_related():
    ranking = _ranking(("A.java", 0.9), ("B.java", 0.5))
    index = _StubIndex({"A.java": frozenset(["a"]), "B.java": frozenset(["b"])})
    terms = GuiTermSet(screen_component_terms=(("zzz",),))
    out = filter_ranking(ranking, terms, index)
    assert [e.file_path for e in out.entries] == ["A.java", "B.java"]
    assert all(e.survived_filter for e in out.entries)


def test_boost_stable_partition():
    ranking = _ranking(("A.java", 0.9), ("B.java", 0.8), ("C.java", 0.7))
    index = _StubIndex(
        {
            "A.java": frozenset(["a"]),
            "B.java": frozenset(["main", "activ"]),
            "C.java": frozenset(["c"]),
        }
    )
    terms = GuiTermSet(gui_screen_terms=(GuiScreenTerm("MainActivity", ("main", "activity")),))
    out = boost_ranking(ranking, terms, index)
    assert [e.file_path for e in out.entries] == ["B.java", "A.java", "C.java"]
    assert [e.boosted for e in out.entries] == [True, False, False]


def test_boost_no_match_keeps_order():
    ranking = _ranking(("A.java", 0.9), ("B.java", 0.8))
    index = _StubIndex({"A.java": frozenset(["a"]), "B.java": frozenset(["b"])})
    terms = GuiTermSet(gui_screen_terms=(GuiScreenTerm("Zork", ("zork",)),))
    out = boost_ranking(ranking, terms, index)
    assert [e.file_path for e in out.entries] == ["A.java", "B.java"]
    assert not any(e.boosted for e in out.entries)


def test_boost_preserves_relative_order_of_matches():
    ranking = _ranking(("A.java", 0.9), ("Hit2.java", 0.8), ("C.java", 0.7), ("Hit4.java", 0.6))
    index = _StubIndex(
        {
            "A.java": frozenset(),
            "Hit2.java": frozenset(["hit"]),
            "C.java": frozenset(),
            "Hit4.java": frozenset(["hit"]),
        }
    )
    terms = GuiTermSet(gui_screen_terms=(GuiScreenTerm("Hit2", ("hit",)),))
    # Hit2 matches by name, Hit4 by token containment; Hit2 was ranked higher.
    out = boost_ranking(ranking, terms, index)
    assert [e.file_path for e in out.entries] == ["Hit2.java", "Hit4.java", "A.java", "C.java"]


def test_boost_ignores_component_terms():
    ranking = _ranking(("A.java", 0.9), ("B.java", 0.8))
    index = _StubIndex({"A.java": frozenset(["a"]), "B.java": frozenset(["save"])})
    terms = GuiTermSet(screen_component_terms=(("save",),))
    out = boost_ranking(ranking, terms, index)
    assert [e.file_path for e in out.entries] == ["A.java", "B.java"]
    assert not any(e.boosted for e in out.entries)


# -- randomized ranking algebra ---------------------------------------------------

_POOL_CANDIDATES = [
    "save", "button", "click", "view", "screen", "login", "menu", "list",
    "draw", "cach", "load", "store", "sync", "panel", "widget", "grid",
    "tab", "icon", "card", "row", "note", "editor", "toolbar", "dialog",
]
POOL = [w for w in _POOL_CANDIDATES if normalize_token(w) == w]


def make_random_case(rng: random.Random):
    n = rng.randint(2, 20)
    names = rng.sample(
        [f"Screen{chr(65 + i)}{i}" for i in range(30)] + [f"Helper{i}" for i in range(30)],
        n,
    )
    paths = [f"src/{name}.java" for name in names]
    token_sets = {
        p: frozenset(rng.sample(POOL, rng.randint(0, 6))) for p in paths
    }
    scored = sorted(
        ((p, round(rng.uniform(0, 1), 6)) for p in paths),
        key=lambda kv: (-kv[1], kv[0]),
    )
    ranking = RankedList(
        entries=tuple(RankEntry(p, s) for p, s in scored),
        mode="gui",
        commit_id="c",
    )
    sc_terms = tuple(
        tuple(rng.sample(POOL, rng.randint(1, 3))) for _ in range(rng.randint(0, 3))
    )
    screen_terms = []
    for _ in range(rng.randint(0, 3)):
        if rng.random() < 0.5:
            target = rng.choice(names)
            screen_terms.append(GuiScreenTerm(target, tuple(rng.sample(POOL, 2))))
        else:
            screen_terms.append(
                GuiScreenTerm(f"Ghost{rng.randint(0, 9)}", tuple(rng.sample(POOL, rng.randint(1, 3))))
            )
    terms = GuiTermSet(screen_component_terms=sc_terms, gui_screen_terms=tuple(screen_terms))
    return ranking, terms, _StubIndex(token_sets)


def _check_boost_algebra(ranking, terms, index):
    out = boost_ranking(ranking, terms, index)
    in_paths = [e.file_path for e in ranking.entries]
    out_paths = [e.file_path for e in out.entries]
    assert sorted(in_paths) == sorted(out_paths)  # permutation
    flags = [e.boosted for e in out.entries]
    assert flags == sorted(flags, reverse=True)  # boosted block first
    boosted = [p for p, f in zip(out_paths, flags) if f]
    rest = [p for p, f in zip(out_paths, flags) if not f]
    assert boosted == [p for p in in_paths if p in set(boosted)]
    assert rest == [p for p in in_paths if p in set(rest)]
    for path in boosted:
        assert out_paths.index(path) <= in_paths.index(path)  # never demoted


def _check_filter_algebra(ranking, terms, index):
    out = filter_ranking(ranking, terms, index)
    in_paths = [e.file_path for e in ranking.entries]
    out_paths = [e.file_path for e in out.entries]
    if len(out_paths) == len(in_paths):
        assert out_paths == in_paths
    else:
        it = iter(in_paths)
        assert all(p in it for p in out_paths)  # order-preserving subsequence
    assert all(e.survived_filter for e in out.entries)


def test_boost_algebra_random():
    rng = random.Random(2024)
    for _ in range(300):
        _check_boost_algebra(*make_random_case(rng))


def test_filter_algebra_random():
    rng = random.Random(2025)
    for _ in range(300):
        _check_filter_algebra(*make_random_case(rng))


def test_truth_satisfying_boost_predicate_never_loses_rank():
    rng = random.Random(2026)
    for _ in range(300):
        ranking, terms, index = make_random_case(rng)
        paths = [e.file_path for e in ranking.entries]
        truth = set(rng.sample(paths, rng.randint(1, min(3, len(paths)))))
        # Force every truth file to satisfy the boost predicate by name.
        extra = tuple(
            GuiScreenTerm(p.rsplit("/", 1)[-1][:-5], ("nomatch",)) for p in truth
        )
        terms = GuiTermSet(
            screen_component_terms=terms.screen_component_terms,
            gui_screen_terms=terms.gui_screen_terms + extra,
        )
        before = min(paths.index(p) for p in truth)
        after_list = boost_ranking(filter_ranking(ranking, terms, index), terms, index)
        after_paths = [e.file_path for e in after_list.entries]
        after = min(after_paths.index(p) for p in truth)
        assert after <= before


# -- end-to-end localize ------------------------------------------------------------


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    root = tmp_path_factory.mktemp("planted")
    repo = conftest.write_mini_repo(root / "repo")
    trace_path = conftest.write_trace(root / "trace.json")
    provider = LexicalProvider()
    index = build_index(snapshot_repository(repo), provider)
    trace = parse_trace(trace_path.read_text("utf-8"))
    return index, provider, trace


def test_no_gui_mode_buries_ground_truth(planted):
    index, provider, trace = planted
    ranking = localize(conftest.BUG_REPORT, None, index, LocalizeConfig.no_gui(), provider)
    paths = ranking.paths()
    assert ranking.mode == "no_gui"
    assert len(paths) == 12
    rank = paths.index(conftest.GROUND_TRUTH_PATH) + 1
    assert rank >= 11  # shares no token with the report; every decoy does
    assert not any(e.boosted for e in ranking.entries)


def test_gui_mode_pins_ground_truth_first(planted):
    index, provider, trace = planted
    ranking = localize(conftest.BUG_REPORT, trace, index, LocalizeConfig.gui(), provider)
    assert ranking.mode == "gui"
    assert ranking.entries[0].file_path == conftest.GROUND_TRUTH_PATH
    assert ranking.entries[0].boosted


def test_no_gui_equals_bare_rank_files(planted):
    index, provider, trace = planted
    direct = rank_files(
        provider.embed_query(preprocess_query(conftest.BUG_REPORT), index.lexical_model),
        index,
    )
    piped = localize(conftest.BUG_REPORT, None, index, LocalizeConfig.no_gui(), provider)
    assert piped.paths() == direct.paths()
    assert [e.score for e in piped.entries] == [e.score for e in direct.entries]


def test_gui_mode_with_empty_trace_degenerates(planted):
    index, provider, _ = planted
    empty_trace = parse_trace('{"steps": []}')
    gui = localize(conftest.BUG_REPORT, empty_trace, index, LocalizeConfig.gui(), provider)
    no_gui = localize(conftest.BUG_REPORT, None, index, LocalizeConfig.no_gui(), provider)
    assert gui.paths() == no_gui.paths()


def test_gui_flags_without_trace_rejected(planted):
    index, provider, _ = planted
    with pytest.raises(ConfigurationError):
        localize(conftest.BUG_REPORT, None, index, LocalizeConfig.gui(), provider)


def test_provider_identity_mismatch_rejected(planted):
    index, provider, trace = planted

    class OtherProvider(LexicalProvider):
        VERSION = "999"

    with pytest.raises(ProviderMismatchError):
        localize(conftest.BUG_REPORT, None, index, LocalizeConfig.no_gui(), OtherProvider())


def test_render_markdown_format(planted):
    index, provider, trace = planted
    ranking = localize(conftest.BUG_REPORT, trace, index, LocalizeConfig.gui(), provider)
    text = render_markdown(ranking, top_k=3)
    lines = text.splitlines()
    assert len(lines) == min(3, len(ranking.entries))
    assert lines[0].startswith(f"1. {conftest.GROUND_TRUTH_PATH} — score ")
    assert lines[0].endswith("(boosted)")
    import re

    assert re.match(r"^\d+\. \S+ — score \d\.\d{4}( \(boosted\))?$", lines[0])


def test_localize_config_mode_derivation():
    assert LocalizeConfig.gui().mode == "gui"
    assert LocalizeConfig.no_gui().mode == "no_gui"
    assert LocalizeConfig(False, False, True).mode == "gui"


def test_ranked_list_invariants_after_full_pipeline(planted):
    index, provider, trace = planted
    for config in (LocalizeConfig.gui(), LocalizeConfig.no_gui()):
        args = (conftest.BUG_REPORT, trace if config.mode == "gui" else None)
        ranking = localize(*args, index, config, provider)
        paths = ranking.paths()
        assert len(paths) == len(set(paths))  # no duplicates
        # Within each boost class scores are nonincreasing, ties by path.
        for cls in (True, False):
            block = [e for e in ranking.entries if e.boosted is cls]
            keys = [(-e.score, e.file_path) for e in block]
            assert keys == sorted(keys)
        flags = [e.boosted for e in ranking.entries]
        assert flags == sorted(flags, reverse=True)


def test_degenerate_corpus_all_comment_files(tmp_path):
    # Files that sanitize to nothing make a zero-dimension lexical space;
    # the pipeline must stay total and fall back to lexicographic order.
    (tmp_path / "A.java").write_text("// only a comment\n")
    (tmp_path / "B.java").write_text("/* nothing else */\n")
    provider = LexicalProvider()
    index = build_index(snapshot_repository(tmp_path), provider)
    assert index.provider.dimension == 0
    ranking = localize("some report text", None, index, LocalizeConfig.no_gui(), provider)
    assert ranking.paths() == ["A.java", "B.java"]
    assert all(e.score == 0.0 for e in ranking.entries)
