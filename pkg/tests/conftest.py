"""Shared fixtures: the published worked examples and instance generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from revmatch.core import (
    Dataset,
    PaperDescriptor,
    ReviewerDescriptor,
    SimilarityMatrix,
    TopicSelection,
    TopicVocabulary,
)

FIXTURES = Path(__file__).parent / "fixtures"

# The 5x5 golden matrix used throughout the assignment tests. Its optimal
# one-to-one matching weight (all 120 permutations enumerated, zero cells
# forbidden) is 1.23: p1->r2 0.20, p2->r1 0.54, p3->r3 0.13, p4->r5 0.22,
# p5->r4 0.14.
GOLDEN_5X5 = [
    [0.40, 0.54, 0.21, 0.27, 0.25],
    [0.20, 0.10, 0.14, 0.00, 0.00],
    [0.18, 0.20, 0.13, 0.00, 0.00],
    [0.17, 0.30, 0.25, 0.17, 0.14],
    [0.38, 0.42, 0.27, 0.22, 0.09],
]
GOLDEN_5X5_OPTIMUM = 1.23


@pytest.fixture
def golden_matrix() -> SimilarityMatrix:
    return SimilarityMatrix(
        ["r1", "r2", "r3", "r4", "r5"],
        ["p1", "p2", "p3", "p4", "p5"],
        GOLDEN_5X5,
    )


@pytest.fixture
def golden_matrix_path() -> Path:
    return FIXTURES / "golden_5x5_matrix.txt"


# The 2x2 instance where sequential greedy strands a paper: r1 is best for
# both papers but is the only competent reviewer for neither; taking r1 for
# p1 leaves p2 with nobody.
@pytest.fixture
def greedy_trap_matrix() -> SimilarityMatrix:
    return SimilarityMatrix(["r1", "r2"], ["p1", "p2"], [[0.9, 0.8], [0.7, 0.0]])


@pytest.fixture
def greedy_trap_path() -> Path:
    return FIXTURES / "greedy_trap_matrix.txt"


# Topic sets from the worked similarity examples: vocabulary {a..i} -> 0..8,
# paper {b,e,g,i}, reviewer one {b,c,e}, reviewer two {a,b,e,f,h}.
@pytest.fixture
def example_paper_topics() -> TopicSelection:
    return TopicSelection.binary([1, 4, 6, 8])


@pytest.fixture
def example_reviewer_one() -> TopicSelection:
    return TopicSelection.binary([1, 2, 4])


@pytest.fixture
def example_reviewer_two() -> TopicSelection:
    return TopicSelection.binary([0, 1, 4, 5, 7])


# Weighted variants: paper weighs b=0.5, e=0.4; reviewer one b=0.7, e=0.4;
# reviewer two b=0.3, e=0.6. Non-common topics keep weight 1.
@pytest.fixture
def weighted_paper_topics() -> TopicSelection:
    return TopicSelection({1: 0.5, 4: 0.4, 6: 1.0, 8: 1.0})


@pytest.fixture
def weighted_reviewer_one() -> TopicSelection:
    return TopicSelection({1: 0.7, 2: 1.0, 4: 0.4})


@pytest.fixture
def weighted_reviewer_two() -> TopicSelection:
    return TopicSelection({1: 0.3, 2: 1.0, 4: 0.6})


def make_dataset(
    paper_topic_sets,
    reviewer_topic_sets,
    n_topics: int = 10,
    capacities=None,
    conflicts=None,
    m: int = 1,
) -> Dataset:
    """Small literal dataset builder for tests."""
    vocabulary = TopicVocabulary.from_labels(f"t{i}" for i in range(n_topics))
    papers = tuple(
        PaperDescriptor(f"p{i + 1}", TopicSelection.binary(ts) if not isinstance(ts, TopicSelection) else ts)
        for i, ts in enumerate(paper_topic_sets)
    )
    reviewers = []
    for i, ts in enumerate(reviewer_topic_sets):
        rid = f"r{i + 1}"
        reviewers.append(
            ReviewerDescriptor(
                rid,
                TopicSelection.binary(ts) if not isinstance(ts, TopicSelection) else ts,
                capacity=(capacities or {}).get(rid, 1) if isinstance(capacities, dict) else (capacities or 1),
                conflicts=frozenset((conflicts or {}).get(rid, ())),
            )
        )
    return Dataset(vocabulary, papers, tuple(reviewers), m)


def random_matrix(rng: random.Random, n_reviewers: int, n_papers: int, zero_prob: float = 0.3) -> SimilarityMatrix:
    weights = [
        [0.0 if rng.random() < zero_prob else round(rng.uniform(0.01, 1.0), 3) for _ in range(n_papers)]
        for _ in range(n_reviewers)
    ]
    return SimilarityMatrix(
        [f"r{i + 1}" for i in range(n_reviewers)],
        [f"p{j + 1}" for j in range(n_papers)],
        weights,
    )


def feasible_instance(rng: random.Random, n_reviewers: int, n_papers: int, m: int,
                      zero_prob: float = 0.3, max_capacity: int = 3):
    """Random matrix plus capacities passing the dataset feasibility check.

    The assignment operations' precondition is a validated dataset, and
    validation rejects capacity totals below m * papers, so random draws are
    topped up round-robin until the total suffices.
    """
    matrix = random_matrix(rng, n_reviewers, n_papers, zero_prob)
    ids = [f"r{i + 1}" for i in range(n_reviewers)]
    caps = {rid: rng.randint(1, max_capacity) for rid in ids}
    deficit = m * n_papers - sum(caps.values())
    for i in range(max(deficit, 0)):
        caps[ids[i % n_reviewers]] += 1
    return matrix, caps
