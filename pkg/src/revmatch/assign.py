"""Assignment algorithms over a similarity matrix.

Three algorithms with the same contract (respect reviewer capacities, give
each paper at most ``m`` reviewers, never assign a zero-weight edge, report
papers left short) plus an exhaustive oracle for small instances:

* ``assign_hungarian``: ``m`` passes of maximum-weight bipartite matching,
  one reviewer per paper per pass. Optimal per pass.
* ``assign_greedy``: sequential per-paper best-available picks; fast but can
  strand a paper whose only competent reviewer fills up earlier.
* ``assign_heuristic``: proposal/rejection rounds where reviewers prefer the
  papers with the fewest remaining candidates, committing all placements at
  once; covers every paper that optimal coverage allows and lands close to
  the optimum weight at quadratic cost per round.
* ``brute_force_optimal``: exact maximum by enumeration, for tests only.

All algorithms are deterministic: ties break by the matrix's reviewer and
paper order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import AssignmentSet, SimilarityMatrix, weight_of_matching

__all__ = [
    "SortedColumns",
    "AssignmentOutcome",
    "hungarian_pass",
    "assign_hungarian",
    "assign_greedy",
    "assign_heuristic",
    "brute_force_optimal",
    "BRUTE_FORCE_MAX_SLOTS",
    "BRUTE_FORCE_MAX_REVIEWERS",
]

BRUTE_FORCE_MAX_SLOTS = 10  # |papers| * m
BRUTE_FORCE_MAX_REVIEWERS = 8


@dataclass(frozen=True)
class SortedColumns:
    """Per-paper candidate lists, best reviewer first.

    Zero-weight cells are omitted entirely (a forbidden edge is not a
    candidate); ties break by reviewer order, so the listing is
    deterministic. The list length of a paper is its scarcity: how many
    reviewers could still take it.
    """

    columns: Mapping[str, tuple[tuple[str, float], ...]]

    @classmethod
    def from_matrix(
        cls,
        matrix: SimilarityMatrix,
        capacities: Mapping[str, int] | None = None,
        excluded: frozenset[tuple[str, str]] | set[tuple[str, str]] = frozenset(),
    ) -> "SortedColumns":
        weights = matrix.weights
        columns: dict[str, tuple[tuple[str, float], ...]] = {}
        for j, paper_id in enumerate(matrix.paper_ids):
            candidates = []
            for i, reviewer_id in enumerate(matrix.reviewer_ids):
                w = float(weights[i, j])
                if w <= 0.0:
                    continue
                if capacities is not None and capacities.get(reviewer_id, 0) < 1:
                    continue
                if (paper_id, reviewer_id) in excluded:
                    continue
                candidates.append((-w, i, reviewer_id, w))
            candidates.sort()
            columns[paper_id] = tuple((rid, w) for _, _, rid, w in candidates)
        return cls(columns)

    def candidates(self, paper_id: str) -> tuple[tuple[str, float], ...]:
        return self.columns[paper_id]

    def scarcity(self, paper_id: str) -> int:
        return len(self.columns[paper_id])


@dataclass(frozen=True)
class AssignmentOutcome:
    """Result of one algorithm run: the pairs, the shortfalls, the score."""

    assignment: AssignmentSet
    uncovered: tuple[tuple[str, int], ...]
    total_weight: float
    algorithm: str
    rounds: int


def _outcome(
    matrix: SimilarityMatrix,
    pairs: Iterable[tuple[str, str, float]],
    m: int,
    algorithm: str,
    rounds: int,
) -> AssignmentOutcome:
    assignment = AssignmentSet(pairs)
    counts = assignment.paper_counts()
    uncovered = tuple(
        (pid, m - counts.get(pid, 0)) for pid in matrix.paper_ids if counts.get(pid, 0) < m
    )
    return AssignmentOutcome(
        assignment=assignment,
        uncovered=uncovered,
        total_weight=weight_of_matching(assignment),
        algorithm=algorithm,
        rounds=rounds,
    )


def _normalize_capacities(
    matrix: SimilarityMatrix, capacities: Mapping[str, int] | int
) -> dict[str, int]:
    if isinstance(capacities, int):
        return {rid: capacities for rid in matrix.reviewer_ids}
    return {rid: int(capacities.get(rid, 0)) for rid in matrix.reviewer_ids}


def hungarian_pass(
    matrix: SimilarityMatrix,
    remaining_capacity: Mapping[str, int] | int,
    excluded_pairs: Iterable[tuple[str, str]] = (),
) -> list[tuple[str, str, float]]:
    """One maximum-weight matching pass: at most one new reviewer per paper.

    A reviewer with remaining capacity ``c`` is duplicated into ``c`` rows so
    they can pick up several papers within the pass. Zero-weight and excluded
    cells are never matched; the returned pairs carry the true matrix
    weights and maximise their sum over all feasible one-per-paper
    matchings.
    """
    caps = _normalize_capacities(matrix, remaining_capacity)
    excluded = set(excluded_pairs)

    row_owner: list[int] = []
    for i, rid in enumerate(matrix.reviewer_ids):
        row_owner.extend([i] * max(caps.get(rid, 0), 0))
    if not row_owner or not matrix.paper_ids:
        return []

    work = matrix.weights[row_owner, :].astype(float)
    for paper_id, reviewer_id in excluded:
        try:
            i = matrix.reviewer_index(reviewer_id)
            j = matrix.paper_index(paper_id)
        except KeyError:
            continue
        rows = [k for k, owner in enumerate(row_owner) if owner == i]
        work[rows, j] = 0.0

    row_ind, col_ind = linear_sum_assignment(work, maximize=True)
    pairs = []
    for r, c in zip(row_ind, col_ind):
        if work[r, c] > 0.0:
            reviewer_id = matrix.reviewer_ids[row_owner[r]]
            paper_id = matrix.paper_ids[c]
            pairs.append((paper_id, reviewer_id, float(matrix.weights[row_owner[r], c])))
    pairs.sort(key=lambda t: matrix.paper_index(t[0]))
    return pairs


def assign_hungarian(
    matrix: SimilarityMatrix,
    m: int,
    capacities: Mapping[str, int] | int,
) -> AssignmentOutcome:
    """Repeated maximum-weight matching until every paper has ``m`` reviewers.

    Each pass adds at most one reviewer per paper; assigned pairs are
    excluded and capacities decremented between passes. Stops early once a
    pass can no longer place anything.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    caps = _normalize_capacities(matrix, capacities)
    excluded: set[tuple[str, str]] = set()
    all_pairs: list[tuple[str, str, float]] = []
    passes = 0
    for _ in range(m):
        pairs = hungarian_pass(matrix, caps, excluded)
        passes += 1
        if not pairs:
            break
        for paper_id, reviewer_id, w in pairs:
            caps[reviewer_id] -= 1
            excluded.add((paper_id, reviewer_id))
            all_pairs.append((paper_id, reviewer_id, w))
    return _outcome(matrix, all_pairs, m, "hungarian", passes)


def assign_greedy(
    matrix: SimilarityMatrix,
    m: int,
    capacities: Mapping[str, int] | int,
    paper_order: Sequence[str] | None = None,
) -> AssignmentOutcome:
    """Sequential assignment: finish one paper before looking at the next.

    Each paper takes its ``m`` best-weighted reviewers that still have
    capacity. Locally optimal and cheap, but a reviewer who is the only
    option for a later paper may already be full by the time that paper is
    processed.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    order = tuple(paper_order) if paper_order is not None else matrix.paper_ids
    if sorted(order) != sorted(matrix.paper_ids):
        raise ValueError("paper_order must be a permutation of the matrix papers")
    caps = _normalize_capacities(matrix, capacities)
    weights = matrix.weights
    pairs: list[tuple[str, str, float]] = []
    for paper_id in order:
        j = matrix.paper_index(paper_id)
        candidates = [
            (-float(weights[i, j]), i, rid)
            for i, rid in enumerate(matrix.reviewer_ids)
            if weights[i, j] > 0.0 and caps[rid] > 0
        ]
        candidates.sort()
        for negw, _, rid in candidates[:m]:
            caps[rid] -= 1
            pairs.append((paper_id, rid, -negw))
    return _outcome(matrix, pairs, m, "greedy", 1)


def _heuristic_round(
    matrix: SimilarityMatrix,
    caps: dict[str, int],
    excluded: set[tuple[str, str]],
) -> list[tuple[str, str, float]]:
    """One proposal/rejection round placing at most one reviewer per paper.

    Every unplaced paper proposes to its best remaining candidate. A
    reviewer over their remaining capacity keeps the proposals from the
    papers with the fewest candidates (scarcity first, then weight, then
    paper order) and rejects the rest, which strike that reviewer off their
    list and re-propose. Nothing is committed until no paper can move, then
    all placements land simultaneously. Each candidate edge is consumed at
    most once, so a round is quadratic in the instance size.
    """
    columns = SortedColumns.from_matrix(matrix, caps, frozenset(excluded))
    scarcity = {pid: columns.scarcity(pid) for pid in matrix.paper_ids}
    paper_pos = {pid: i for i, pid in enumerate(matrix.paper_ids)}

    def priority(paper_id: str, reviewer_id: str) -> tuple[int, float, int]:
        return (
            scarcity[paper_id],
            -matrix.weight(reviewer_id, paper_id),
            paper_pos[paper_id],
        )

    pointer = {pid: 0 for pid in matrix.paper_ids}
    held: dict[str, list[str]] = {rid: [] for rid in matrix.reviewer_ids}
    queue = deque(pid for pid in matrix.paper_ids if columns.scarcity(pid) > 0)

    while queue:
        paper_id = queue.popleft()
        candidates = columns.candidates(paper_id)
        while pointer[paper_id] < len(candidates):
            reviewer_id, _ = candidates[pointer[paper_id]]
            holding = held[reviewer_id]
            holding.append(paper_id)
            if len(holding) <= caps[reviewer_id]:
                break
            holding.sort(key=lambda pid: priority(pid, reviewer_id))
            bumped = holding.pop()
            pointer[bumped] += 1
            if bumped is paper_id or bumped == paper_id:
                continue
            queue.append(bumped)
            break

    pairs = [
        (paper_id, reviewer_id, matrix.weight(reviewer_id, paper_id))
        for reviewer_id, holding in held.items()
        for paper_id in holding
    ]
    pairs.sort(key=lambda t: paper_pos[t[0]])
    return pairs


def assign_heuristic(
    matrix: SimilarityMatrix,
    m: int,
    capacities: Mapping[str, int] | int,
) -> AssignmentOutcome:
    """Scarcity-first proposal/rejection assignment, ``m`` rounds.

    Within a round, a paper with at least one candidate ends placed unless
    every one of its candidates filled up with higher-priority (scarcer)
    papers, so coverage never loses to the sequential greedy pass.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    caps = _normalize_capacities(matrix, capacities)
    excluded: set[tuple[str, str]] = set()
    all_pairs: list[tuple[str, str, float]] = []
    rounds = 0
    for _ in range(m):
        pairs = _heuristic_round(matrix, caps, excluded)
        rounds += 1
        if not pairs:
            break
        for paper_id, reviewer_id, w in pairs:
            caps[reviewer_id] -= 1
            excluded.add((paper_id, reviewer_id))
            all_pairs.append((paper_id, reviewer_id, w))
    return _outcome(matrix, all_pairs, m, "heuristic", rounds)


def brute_force_optimal(
    matrix: SimilarityMatrix,
    m: int,
    capacities: Mapping[str, int] | int,
) -> AssignmentOutcome:
    """Exact maximum-weight assignment by exhaustive enumeration.

    A test oracle, deliberately independent of the matching machinery: plain
    depth-first enumeration over per-paper reviewer subsets with memoised
    capacity states. Rejects instances beyond ``|papers| * m <= 10`` and
    ``|reviewers| <= 8``. Infeasible capacities yield the best partial
    assignment with the shortfall reported.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n_papers = len(matrix.paper_ids)
    n_reviewers = len(matrix.reviewer_ids)
    if n_papers * m > BRUTE_FORCE_MAX_SLOTS or n_reviewers > BRUTE_FORCE_MAX_REVIEWERS:
        raise ValueError(
            f"instance too large for exhaustive search "
            f"(|P|*m <= {BRUTE_FORCE_MAX_SLOTS}, |R| <= {BRUTE_FORCE_MAX_REVIEWERS})"
        )

    weights = matrix.weights
    per_paper_choices: list[list[tuple[float, tuple[int, ...]]]] = []
    for j in range(n_papers):
        eligible = [i for i in range(n_reviewers) if weights[i, j] > 0.0]
        choices = [(0.0, ())]
        for size in range(1, m + 1):
            for subset in combinations(eligible, size):
                choices.append((float(sum(weights[i, j] for i in subset)), subset))
        per_paper_choices.append(choices)

    @lru_cache(maxsize=None)
    def best(j: int, caps: tuple[int, ...]) -> tuple[float, tuple[tuple[int, ...], ...]]:
        if j == n_papers:
            return 0.0, ()
        best_weight = -1.0
        best_tail: tuple[tuple[int, ...], ...] = ()
        for w, subset in per_paper_choices[j]:
            if any(caps[i] < 1 for i in subset):
                continue
            next_caps = list(caps)
            for i in subset:
                next_caps[i] -= 1
            tail_w, tail = best(j + 1, tuple(next_caps))
            if w + tail_w > best_weight:
                best_weight = w + tail_w
                best_tail = (subset,) + tail
        return best_weight, best_tail

    caps0 = _normalize_capacities(matrix, capacities)
    start = tuple(max(caps0[rid], 0) for rid in matrix.reviewer_ids)
    _, chosen = best(0, start)
    best.cache_clear()

    pairs = [
        (matrix.paper_ids[j], matrix.reviewer_ids[i], float(weights[i, j]))
        for j, subset in enumerate(chosen)
        for i in subset
    ]
    return _outcome(matrix, pairs, m, "brute-force", 1)
