"""Seeded synthetic datasets for experiments and benchmarks.

Generation is fully deterministic per seed: the same arguments always
produce the same descriptors (and therefore byte-identical files), which
keeps benchmark runs and golden tests reproducible.
"""

from __future__ import annotations

import math
import random

from .core import (
    Dataset,
    PaperDescriptor,
    ReviewerDescriptor,
    TopicSelection,
    TopicVocabulary,
)

__all__ = ["generate_dataset", "generate_truth", "auto_capacity"]

# Menu-style weight levels, like a drop-down with low/medium/high/full.
WEIGHT_LEVELS = (0.25, 0.5, 0.75, 1.0)


def auto_capacity(n_papers: int, n_reviewers: int, m: int) -> int:
    """Uniform reviewer capacity with one paper of slack above the minimum."""
    return max(1, math.ceil(m * n_papers / n_reviewers)) + 1


def _pick_topics(rng: random.Random, n_topics: int, density: float, weighted: bool) -> TopicSelection:
    chosen = [tid for tid in range(n_topics) if rng.random() < density]
    if not chosen:
        chosen = [rng.randrange(n_topics)]
    if weighted:
        return TopicSelection((tid, rng.choice(WEIGHT_LEVELS)) for tid in chosen)
    return TopicSelection.binary(chosen)


def generate_dataset(
    seed: int,
    n_papers: int,
    n_reviewers: int,
    n_topics: int,
    density: float,
    m: int = 3,
    capacity: int | None = None,
    weighted: bool = False,
) -> Dataset:
    """Build a valid random dataset.

    Every descriptor selects each topic independently with probability
    ``density`` (at least one topic is always selected, and density 1 selects
    all of them). Capacities default to :func:`auto_capacity`, so the dataset
    always passes the feasibility check.
    """
    if n_papers < 1 or n_reviewers < 1 or n_topics < 1:
        raise ValueError("paper, reviewer and topic counts must all be >= 1")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    if m < 1:
        raise ValueError("m must be >= 1")
    if capacity is None:
        capacity = auto_capacity(n_papers, n_reviewers, m)
    if capacity < 1:
        raise ValueError("capacity must be >= 1")

    rng = random.Random(seed)
    vocabulary = TopicVocabulary.from_labels(f"topic_{i:03d}" for i in range(n_topics))
    p_width = len(str(n_papers))
    r_width = len(str(n_reviewers))
    papers = tuple(
        PaperDescriptor(f"p{i + 1:0{p_width}d}", _pick_topics(rng, n_topics, density, weighted))
        for i in range(n_papers)
    )
    reviewers = tuple(
        ReviewerDescriptor(
            f"r{i + 1:0{r_width}d}",
            _pick_topics(rng, n_topics, density, weighted),
            capacity,
        )
        for i in range(n_reviewers)
    )
    return Dataset(vocabulary, papers, reviewers, m)


def generate_truth(dataset: Dataset, seed: int, extra_prob: float = 0.25) -> dict[str, TopicSelection]:
    """Hidden interest profiles for the simulated bidder.

    Starts from each reviewer's declared topics with jittered weights and,
    with probability ``extra_prob``, adds one undeclared interest. The gap
    between declared and hidden topics is what gives rating prediction
    something to discover.
    """
    rng = random.Random(seed)
    n_topics = len(dataset.vocabulary)
    truth: dict[str, TopicSelection] = {}
    for reviewer in dataset.reviewers:
        weights = {tid: rng.choice(WEIGHT_LEVELS) for tid, _ in reviewer.topics.items()}
        if n_topics > len(weights) and rng.random() < extra_prob:
            hidden = rng.choice(sorted(set(range(n_topics)) - set(weights)))
            weights[hidden] = rng.choice(WEIGHT_LEVELS[:2])
        truth[reviewer.reviewer_id] = TopicSelection(weights)
    return truth
