"""Shared domain types for the assignment engine.

Papers and reviewers are described by topic selections over a fixed
vocabulary; the engine scores every (paper, reviewer) edge with a weight in
[0, 1] and assignment algorithms consume the resulting dense matrix.
Everything in this module is immutable after construction and safe to share
across concurrent readers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "BidLevel",
    "BidScale",
    "DEFAULT_SCALE",
    "TopicVocabulary",
    "TopicSelection",
    "PaperDescriptor",
    "ReviewerDescriptor",
    "SimilarityMatrix",
    "AssignmentSet",
    "Dataset",
    "Violation",
    "ValidationReport",
    "validate_dataset",
    "weight_of_matching",
]


class BidLevel(IntEnum):
    """Willingness levels a reviewer can state for a paper, low to high."""

    CANNOT = 0
    PREFER_NOT = 1
    NEUTRAL = 2
    CAN_REVIEW = 3
    WANT_TO_REVIEW = 4


@dataclass(frozen=True)
class BidScale:
    """Ordinal bid scale mapped onto edge weights with uniform spacing.

    Levels are the integers ``0 .. n_levels - 1``; level ``i`` carries weight
    ``i / (n_levels - 1)``. The default five-level scale lines up with
    :class:`BidLevel`. Neutral is the middle level (lower middle on even
    scales) and is what a missing bid counts as.
    """

    n_levels: int = 5

    def __post_init__(self) -> None:
        if self.n_levels < 2:
            raise ValueError("a bid scale needs at least two levels")

    @property
    def neutral(self) -> int:
        return (self.n_levels - 1) // 2

    @property
    def max_level(self) -> int:
        return self.n_levels - 1

    def weight(self, level: int | None) -> float:
        """Edge weight for a bid level; a missing bid counts as neutral."""
        if level is None:
            level = self.neutral
        if not 0 <= level <= self.max_level:
            raise ValueError(f"bid level {level} outside 0..{self.max_level}")
        return level / self.max_level

    def quantize(self, value: float) -> int:
        """Nearest level for a weight in [0, 1]; exact halves round up."""
        level = math.floor(value * self.max_level + 0.5)
        return min(max(level, 0), self.max_level)


DEFAULT_SCALE = BidScale()


@dataclass(frozen=True)
class TopicVocabulary:
    """Ordered list of conference topics that all descriptors index into.

    A well-formed vocabulary has unique contiguous ids starting at 0 and
    unique non-empty labels. Malformed vocabularies are representable so that
    :func:`validate_dataset` can report every problem in one pass instead of
    aborting on the first.
    """

    entries: tuple[tuple[int, str], ...]

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "TopicVocabulary":
        return cls(tuple(enumerate(labels)))

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(tid for tid, _ in self.entries)

    def label(self, topic_id: int) -> str:
        for tid, label in self.entries:
            if tid == topic_id:
                return label
        raise KeyError(topic_id)

    def __len__(self) -> int:
        return len(self.entries)


class TopicSelection:
    """Topic choices with per-topic weights, canonically stored without zeros.

    A weight of zero means "not selected", so zero entries are dropped at
    construction; the stored weights of a valid selection lie in (0, 1]. A
    binary selection (plain checkboxes) stores weight 1.0 everywhere.
    Out-of-range weights are representable -- dataset validation reports
    them -- but the similarity measures assume weights in [0, 1].
    """

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[int, float] | Iterable[tuple[int, float]] = ()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        cleaned: dict[int, float] = {}
        for tid, w in items:
            tid = int(tid)
            w = float(w)
            if tid in cleaned:
                raise ValueError(f"duplicate topic id {tid} in selection")
            if w != 0.0:
                cleaned[tid] = w
        self._weights = dict(sorted(cleaned.items()))

    @classmethod
    def binary(cls, topic_ids: Iterable[int]) -> "TopicSelection":
        return cls((tid, 1.0) for tid in topic_ids)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._weights)

    @property
    def is_binary(self) -> bool:
        return all(w == 1.0 for w in self._weights.values())

    def weight(self, topic_id: int) -> float:
        return self._weights.get(topic_id, 0.0)

    def items(self) -> Iterator[tuple[int, float]]:
        return iter(self._weights.items())

    def __len__(self) -> int:
        return len(self._weights)

    def __bool__(self) -> bool:
        return bool(self._weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TopicSelection):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self) -> int:
        return hash(frozenset(self._weights.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{t}: {w:g}" for t, w in self._weights.items())
        return f"TopicSelection({{{inner}}})"


@dataclass(frozen=True)
class PaperDescriptor:
    """A submitted paper reduced to what the assignment needs: id and topics."""

    paper_id: str
    topics: TopicSelection


@dataclass(frozen=True)
class ReviewerDescriptor:
    """A reviewer: declared topics, how many papers they may take, conflicts.

    Conflicted papers are forbidden edges; they are forced to weight zero in
    any similarity matrix built from this descriptor.
    """

    reviewer_id: str
    topics: TopicSelection
    capacity: int = 1
    conflicts: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "conflicts", frozenset(self.conflicts))


@dataclass(frozen=True)
class Dataset:
    """A validated-or-not bundle of everything one conference provides."""

    vocabulary: TopicVocabulary
    papers: tuple[PaperDescriptor, ...]
    reviewers: tuple[ReviewerDescriptor, ...]
    m: int = 3

    def paper_by_id(self, paper_id: str) -> PaperDescriptor:
        for p in self.papers:
            if p.paper_id == paper_id:
                return p
        raise KeyError(paper_id)

    def reviewer_by_id(self, reviewer_id: str) -> ReviewerDescriptor:
        for r in self.reviewers:
            if r.reviewer_id == reviewer_id:
                return r
        raise KeyError(reviewer_id)


class SimilarityMatrix:
    """Dense reviewer x paper weight table.

    Rows follow ``reviewer_ids`` order and columns ``paper_ids`` order; every
    cell is in [0, 1]. A zero cell is a forbidden edge (conflict, or simply no
    measured competence) and is never assigned.
    """

    __slots__ = ("reviewer_ids", "paper_ids", "_weights", "_ridx", "_pidx")

    def __init__(
        self,
        reviewer_ids: Iterable[str],
        paper_ids: Iterable[str],
        weights: Iterable[Iterable[float]] | np.ndarray,
    ):
        self.reviewer_ids = tuple(reviewer_ids)
        self.paper_ids = tuple(paper_ids)
        if len(set(self.reviewer_ids)) != len(self.reviewer_ids):
            raise ValueError("duplicate reviewer ids")
        if len(set(self.paper_ids)) != len(self.paper_ids):
            raise ValueError("duplicate paper ids")
        arr = np.array(weights, dtype=float)
        expected = (len(self.reviewer_ids), len(self.paper_ids))
        if arr.shape != expected:
            raise ValueError(f"weight array shape {arr.shape} != {expected}")
        if arr.size:
            if not np.isfinite(arr).all():
                raise ValueError("matrix weights must be finite")
            if arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError("matrix weights must lie in [0, 1]")
        arr.setflags(write=False)
        self._weights = arr
        self._ridx = {r: i for i, r in enumerate(self.reviewer_ids)}
        self._pidx = {p: i for i, p in enumerate(self.paper_ids)}

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def shape(self) -> tuple[int, int]:
        return self._weights.shape

    def reviewer_index(self, reviewer_id: str) -> int:
        return self._ridx[reviewer_id]

    def paper_index(self, paper_id: str) -> int:
        return self._pidx[paper_id]

    def weight(self, reviewer_id: str, paper_id: str) -> float:
        return float(self._weights[self._ridx[reviewer_id], self._pidx[paper_id]])


class AssignmentSet:
    """The assignments produced by one algorithm run, with per-pair weights.

    Duplicate pairs are rejected, and so are zero-weight pairs: assigning a
    reviewer with no measured competence is the "random assignment" failure
    the engine exists to avoid, so shortfalls are reported as uncovered
    papers instead. Per-reviewer capacity and the per-paper reviewer count
    depend on dataset context; :meth:`limit_violations` checks them when that
    context is known.
    """

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Iterable[tuple[str, str, float]] = ()):
        self._pairs: dict[tuple[str, str], float] = {}
        for paper_id, reviewer_id, w in pairs:
            key = (paper_id, reviewer_id)
            if key in self._pairs:
                raise ValueError(f"duplicate assignment pair {key}")
            w = float(w)
            if w <= 0.0:
                raise ValueError(f"zero-weight assignment pair {key} is forbidden")
            self._pairs[key] = w

    def pairs(self) -> Iterator[tuple[str, str, float]]:
        for (paper_id, reviewer_id), w in self._pairs.items():
            yield paper_id, reviewer_id, w

    def weight(self, paper_id: str, reviewer_id: str) -> float:
        return self._pairs[(paper_id, reviewer_id)]

    def paper_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for paper_id, _ in self._pairs:
            counts[paper_id] = counts.get(paper_id, 0) + 1
        return counts

    def reviewer_loads(self) -> dict[str, int]:
        loads: dict[str, int] = {}
        for _, reviewer_id in self._pairs:
            loads[reviewer_id] = loads.get(reviewer_id, 0) + 1
        return loads

    def limit_violations(self, m: int, capacities: Mapping[str, int]) -> list[str]:
        """Capacity / per-paper-limit violations, empty when the set is legal."""
        problems = []
        for paper_id, count in self.paper_counts().items():
            if count > m:
                problems.append(f"paper {paper_id} has {count} reviewers > m={m}")
        for reviewer_id, load in self.reviewer_loads().items():
            cap = capacities.get(reviewer_id, 0)
            if load > cap:
                problems.append(f"reviewer {reviewer_id} load {load} > capacity {cap}")
        return problems

    def __len__(self) -> int:
        return len(self._pairs)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self._pairs

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AssignmentSet):
            return NotImplemented
        return self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash(frozenset(self._pairs.items()))

    def __repr__(self) -> str:
        return f"AssignmentSet({len(self._pairs)} pairs)"


def weight_of_matching(assignment: AssignmentSet) -> float:
    """Total weight of all assigned pairs: the accuracy objective.

    Additive over disjoint pair sets and zero for the empty assignment.
    """
    return math.fsum(w for _, _, w in assignment.pairs())


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of dataset validation: every violation found, never a partial list."""

    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> frozenset[str]:
        return frozenset(v.code for v in self.violations)

    def messages(self) -> list[str]:
        return [f"{v.code}: {v.message}" for v in self.violations]


def _check_selection(
    report: list[Violation], owner: str, selection: TopicSelection, known_ids: frozenset[int]
) -> None:
    for tid, w in selection.items():
        if tid not in known_ids:
            report.append(Violation("unknown-topic", f"{owner} references unknown topic id {tid}"))
        if not 0.0 <= w <= 1.0:
            report.append(
                Violation("weight-range", f"{owner} has topic {tid} weight {w:g} outside [0, 1]")
            )


def validate_dataset(
    vocabulary: TopicVocabulary,
    papers: Iterable[PaperDescriptor],
    reviewers: Iterable[ReviewerDescriptor],
    m: int = 3,
) -> ValidationReport:
    """Check a dataset against all structural invariants.

    Validation never aborts: the report lists every violation found, and a
    dataset is accepted iff the report is empty. Checked: vocabulary id
    contiguity and label uniqueness, unknown topic ids, weights outside
    [0, 1], duplicate paper/reviewer ids, capacities below 1, conflicts
    naming unknown papers, and total capacity too small to give every paper
    ``m`` reviewers.
    """
    papers = tuple(papers)
    reviewers = tuple(reviewers)
    found: list[Violation] = []

    ids_seen = [tid for tid, _ in vocabulary.entries]
    if sorted(ids_seen) != list(range(len(ids_seen))):
        found.append(
            Violation("vocab-ids", "topic ids must be unique and contiguous from 0")
        )
    labels = [label for _, label in vocabulary.entries]
    if any(not label for label in labels):
        found.append(Violation("vocab-labels", "topic labels must be non-empty"))
    if len(set(labels)) != len(labels):
        found.append(Violation("vocab-labels", "topic labels must be unique"))

    known_ids = vocabulary.ids

    paper_ids = [p.paper_id for p in papers]
    for pid in sorted({p for p in paper_ids if paper_ids.count(p) > 1}):
        found.append(Violation("duplicate-id", f"duplicate paper id {pid}"))
    reviewer_ids = [r.reviewer_id for r in reviewers]
    for rid in sorted({r for r in reviewer_ids if reviewer_ids.count(r) > 1}):
        found.append(Violation("duplicate-id", f"duplicate reviewer id {rid}"))

    paper_id_set = set(paper_ids)
    for p in papers:
        _check_selection(found, f"paper {p.paper_id}", p.topics, known_ids)
    for r in reviewers:
        _check_selection(found, f"reviewer {r.reviewer_id}", r.topics, known_ids)
        if r.capacity < 1:
            found.append(
                Violation("capacity", f"reviewer {r.reviewer_id} capacity {r.capacity} < 1")
            )
        for pid in sorted(r.conflicts):
            if pid not in paper_id_set:
                found.append(
                    Violation(
                        "unknown-conflict",
                        f"reviewer {r.reviewer_id} conflict names unknown paper {pid}",
                    )
                )

    if m < 1:
        found.append(Violation("m-range", f"reviewers-per-paper m={m} must be >= 1"))
    else:
        total = sum(r.capacity for r in reviewers)
        needed = m * len(papers)
        if total < needed:
            found.append(
                Violation(
                    "infeasible",
                    f"total reviewer capacity {total} < {needed} "
                    f"(m={m} reviewers for each of {len(papers)} papers)",
                )
            )

    return ValidationReport(tuple(found))
