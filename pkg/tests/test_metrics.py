"""Ranked-retrieval metrics against a brute-force oracle."""

from __future__ import annotations

import random

import pytest

from ladybug.evaluate import (
    average_precision,
    effectiveness,
    first_relevant_rank,
    hits_at_k,
    reciprocal_rank,
    relative_change,
)


# -- independent oracle (loops and counting only, no shared helpers) -----------


def oracle_rr(ranking: list[str], truth: set[str]) -> float:
    for i in range(len(ranking)):
        if ranking[i] in truth:
            return 1.0 / (i + 1)
    return 0.0


def oracle_ap(ranking: list[str], truth: set[str]) -> float:
    if not truth:
        return 0.0
    precisions = []
    for i in range(len(ranking)):
        if ranking[i] in truth:
            hits_so_far = len([p for p in ranking[: i + 1] if p in truth])
            precisions.append(hits_so_far / (i + 1))
    return sum(precisions) / len(truth)


def oracle_hits(runs: list[tuple[list[str], set[str]]], k: int) -> float:
    if not runs:
        return 0.0
    count = 0
    for ranking, truth in runs:
        if any(p in truth for p in ranking[:k]):
            count += 1
    return count / len(runs)


def oracle_effectiveness(
    runs: list[tuple[list[str], set[str]]], sizes: list[int]
) -> float:
    ranks = []
    for (ranking, truth), size in zip(runs, sizes):
        rank = size + 1
        for i in range(len(ranking)):
            if ranking[i] in truth:
                rank = i + 1
                break
        ranks.append(rank)
    return sum(ranks) / len(ranks)


# -- worked examples ---------------------------------------------------------------


def test_rr_examples():
    assert reciprocal_rank(["A", "B"], {"A"}) == 1.0
    assert reciprocal_rank(["B", "A"], {"A"}) == 0.5
    assert reciprocal_rank(["B", "C"], {"A"}) == 0.0


def test_ap_examples():
    assert average_precision(["A"], {"A"}) == 1.0
    assert average_precision(["A", "x", "B"], {"A", "B"}) == pytest.approx(
        (1 / 1 + 2 / 3) / 2, abs=1e-9
    )
    assert average_precision(["B", "C"], {"A"}) == 0.0


def test_ap_equals_rr_for_single_truth():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 15)
        ranking = [f"f{i}" for i in range(n)]
        rng.shuffle(ranking)
        truth = {rng.choice(ranking)} if rng.random() < 0.8 else {"absent"}
        assert average_precision(ranking, truth) == pytest.approx(
            reciprocal_rank(ranking, truth), abs=1e-12
        )


def test_hits_examples():
    assert hits_at_k([(["A"], {"A"})], 1) == 1.0
    runs = [(["x"] * 2 + ["A"], {"A"}), (["x"] * 11 + ["B"], {"B"})]
    assert hits_at_k(runs, 10) == 0.5
    ranks = {1: "q1", 2: "q2", 7: "q3", 30: "q4"}
    runs4 = [
        (["pad"] * (r - 1) + [f"t{r}"] + ["pad2"] * (31 - r), {f"t{r}"})
        for r in ranks
    ]
    assert hits_at_k(runs4, 1) == 0.25
    assert hits_at_k(runs4, 5) == 0.5
    assert hits_at_k(runs4, 10) == 0.75


def test_effectiveness_examples():
    assert effectiveness([(["x", "y", "z", "A"], {"A"})]) == 4.0
    r1 = ["A"] + ["x"] * 30
    r27 = ["y"] * 26 + ["B"] + ["z"] * 4
    assert effectiveness([(r1, {"A"}), (r27, {"B"})]) == 14.0
    # absent truth in a 50-file corpus contributes 51
    assert effectiveness([(["f"] * 50, {"missing"})], corpus_sizes=[50]) == 51.0


def test_hits_monotone_in_k():
    rng = random.Random(6)
    for _ in range(100):
        runs = []
        for _ in range(rng.randint(1, 8)):
            n = rng.randint(1, 20)
            ranking = [f"f{i}" for i in range(n)]
            rng.shuffle(ranking)
            truth = set(rng.sample(ranking, rng.randint(0, min(3, n))))
            runs.append((ranking, truth))
        values = [hits_at_k(runs, k) for k in (1, 5, 10)]
        assert values == sorted(values)


def make_random_runs(rng: random.Random, count: int):
    runs = []
    sizes = []
    for _ in range(count):
        size = rng.randint(1, 20)
        corpus = [f"f{i:02d}.java" for i in range(size)]
        ranking = corpus[:]
        rng.shuffle(ranking)
        if rng.random() < 0.3:  # filtered ranking: a subsequence
            ranking = [p for p in ranking if rng.random() < 0.7]
        n_truth = rng.randint(1, 4)
        truth = set(rng.sample(corpus, min(n_truth, size)))
        runs.append((ranking, truth))
        sizes.append(size)
    return runs, sizes


def test_metrics_match_oracle_randomized():
    rng = random.Random(1000)
    runs, sizes = make_random_runs(rng, 600)
    for ranking, truth in runs:
        assert reciprocal_rank(ranking, truth) == pytest.approx(
            oracle_rr(ranking, truth), abs=1e-9
        )
        assert average_precision(ranking, truth) == pytest.approx(
            oracle_ap(ranking, truth), abs=1e-9
        )
    for k in (1, 5, 10):
        assert hits_at_k(runs, k) == pytest.approx(oracle_hits(runs, k), abs=1e-9)
    assert effectiveness(runs, corpus_sizes=sizes) == pytest.approx(
        oracle_effectiveness(runs, sizes), abs=1e-9
    )


def test_first_relevant_rank():
    assert first_relevant_rank(["a", "b", "c"], {"c"}) == 3
    assert first_relevant_rank(["a"], {"z"}) is None


def test_relative_change():
    assert relative_change(1.16, 1.0) == pytest.approx(0.16)
    assert relative_change(1.0, 0.0) == float("inf")
    assert relative_change(0.0, 0.0) == 0.0
    assert relative_change(-1.0, 0.0) == float("-inf")
