"""Similarity factors: the edge weights between papers and reviewers.

Four topic-overlap measures (two set-based, two weight-aware), the coarse
common-topic rule used by some conference systems, bid-derived weights, and
the combined precedence rule that prefers an available bid and falls back to
topics instead of a neutral constant. ``build_similarity_matrix`` applies one
configured method across a whole dataset.

All measures are pure functions over immutable inputs and return values in
[0, 1]; matrix cells are independent and may be computed in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .core import (
    DEFAULT_SCALE,
    BidScale,
    PaperDescriptor,
    ReviewerDescriptor,
    SimilarityMatrix,
    TopicSelection,
)

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .ratings import RatingTable

__all__ = [
    "jaccard",
    "dice",
    "weighted_relative",
    "weighted_absolute",
    "easychair_coarse",
    "bid_weight",
    "combined_weight",
    "TOPIC_MEASURES",
    "SimilarityMethod",
    "METHOD_KINDS",
    "build_similarity_matrix",
]


def jaccard(paper_topics: TopicSelection, reviewer_topics: TopicSelection) -> float:
    """Shared topics over the union of both topic sets.

    Ignores weights (support sets only). Returns 0 when the union is empty:
    an undescribed paper matches no one.
    """
    a = paper_topics.support
    b = reviewer_topics.support
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def dice(paper_topics: TopicSelection, reviewer_topics: TopicSelection) -> float:
    """Twice the shared topics over the summed set sizes.

    Ranks candidates identically to :func:`jaccard`; only the absolute values
    differ. Returns 0 when both sets are empty.
    """
    a = paper_topics.support
    b = reviewer_topics.support
    denom = len(a) + len(b)
    if denom == 0:
        return 0.0
    return 2 * len(a & b) / denom


def weighted_relative(paper_topics: TopicSelection, reviewer_topics: TopicSelection) -> float:
    """Weight-aware variant of :func:`jaccard` using relative competence.

    Each common topic contributes 1 when the reviewer's weight reaches the
    paper's, else 1 minus the shortfall; the sum is divided by the size of
    the support union. With all weights at 1.0 this reduces exactly to
    :func:`jaccard`. Raising a reviewer weight on a common topic never
    lowers the result.
    """
    a = paper_topics.support
    b = reviewer_topics.support
    union = a | b
    if not union:
        return 0.0
    total = 0.0
    for topic in a & b:
        wp = paper_topics.weight(topic)
        wr = reviewer_topics.weight(topic)
        total += 1.0 if wr >= wp else 1.0 - (wp - wr)
    return total / len(union)


def weighted_absolute(paper_topics: TopicSelection, reviewer_topics: TopicSelection) -> float:
    """Like :func:`weighted_relative` but scaled by absolute competence.

    Each common topic contributes ``wr * (1 - (wp - wr))``, clamped to
    [0, 1] per topic so the aggregate stays a weight (the product exceeds 1
    whenever the reviewer out-weighs the paper by enough, e.g. wr=1, wp=0).
    """
    a = paper_topics.support
    b = reviewer_topics.support
    union = a | b
    if not union:
        return 0.0
    total = 0.0
    for topic in a & b:
        wp = paper_topics.weight(topic)
        wr = reviewer_topics.weight(topic)
        contribution = wr * (1.0 - (wp - wr))
        total += min(max(contribution, 0.0), 1.0)
    return total / len(union)


def easychair_coarse(paper_topics: TopicSelection, reviewer_topics: TopicSelection) -> float:
    """Three-step rule from counting common topics: 0, one, or several.

    Two or more shared topics count as a full match (1.0), exactly one as a
    half match (0.5), none as 0. Depends only on the intersection size.
    """
    common = len(paper_topics.support & reviewer_topics.support)
    if common >= 2:
        return 1.0
    if common == 1:
        return 0.5
    return 0.0


def bid_weight(level: int | None, scale: BidScale = DEFAULT_SCALE) -> float:
    """Edge weight for a stated bid level; a missing bid counts as neutral."""
    return scale.weight(level)


def combined_weight(
    bid: int | None,
    paper_topics: TopicSelection,
    reviewer_topics: TopicSelection,
    topic_method: str = "jaccard",
    scale: BidScale = DEFAULT_SCALE,
) -> float:
    """Bid when one exists (stated or predicted), topic similarity otherwise.

    The fallback never degrades to the neutral constant: with no bid the
    weight is always computed from the declared topics, so an unrated paper
    still gets meaningful weights.
    """
    if bid is not None:
        return scale.weight(bid)
    return TOPIC_MEASURES[topic_method](paper_topics, reviewer_topics)


TOPIC_MEASURES = {
    "jaccard": jaccard,
    "dice": dice,
    "weighted-relative": weighted_relative,
    "weighted-absolute": weighted_absolute,
}

METHOD_KINDS = (
    "jaccard",
    "dice",
    "weighted-relative",
    "weighted-absolute",
    "easychair",
    "bid-only",
    "combined",
)


@dataclass(frozen=True)
class SimilarityMethod:
    """Configured way of scoring every (paper, reviewer) edge.

    ``kind`` picks the measure; ``topic_method`` is the fallback measure used
    by ``combined`` for unbid cells; ``scale`` maps bid levels to weights for
    the bid-driven kinds.
    """

    kind: str
    topic_method: str = "jaccard"
    scale: BidScale = DEFAULT_SCALE

    def __post_init__(self) -> None:
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"unknown similarity method {self.kind!r}")
        if self.kind == "combined" and self.topic_method not in TOPIC_MEASURES:
            raise ValueError(
                f"combined method needs a topic measure, got {self.topic_method!r}"
            )

    @property
    def needs_ratings(self) -> bool:
        return self.kind in ("bid-only", "combined")

    def describe(self) -> str:
        if self.kind == "combined":
            return f"combined({self.topic_method})"
        return self.kind


def build_similarity_matrix(
    papers: Iterable[PaperDescriptor],
    reviewers: Iterable[ReviewerDescriptor],
    method: SimilarityMethod,
    ratings: "RatingTable | None" = None,
) -> SimilarityMatrix:
    """Score every edge with ``method`` and force conflict cells to zero.

    Raises ValueError when the method needs bids but no rating table was
    supplied. Ratings are consulted regardless of provenance: a predicted
    bid counts like a stated one.
    """
    papers = tuple(papers)
    reviewers = tuple(reviewers)
    if method.needs_ratings and ratings is None:
        raise ValueError(f"method {method.describe()!r} requires a rating table")

    weights = np.zeros((len(reviewers), len(papers)), dtype=float)
    topic_fn = TOPIC_MEASURES.get(method.kind)
    for i, reviewer in enumerate(reviewers):
        for j, paper in enumerate(papers):
            if paper.paper_id in reviewer.conflicts:
                continue
            if topic_fn is not None:
                w = topic_fn(paper.topics, reviewer.topics)
            elif method.kind == "easychair":
                w = easychair_coarse(paper.topics, reviewer.topics)
            elif method.kind == "bid-only":
                level = ratings.level_for(reviewer.reviewer_id, paper.paper_id)
                w = method.scale.weight(level)
            else:  # combined
                level = ratings.level_for(reviewer.reviewer_id, paper.paper_id)
                w = combined_weight(
                    level, paper.topics, reviewer.topics, method.topic_method, method.scale
                )
            weights[i, j] = w

    # Guard against float fuzz from the weighted sums before the range check.
    np.clip(weights, 0.0, 1.0, out=weights)
    return SimilarityMatrix(
        [r.reviewer_id for r in reviewers], [p.paper_id for p in papers], weights
    )
