"""Bid collection and the iterative rating loop.

Reviewers bid on small per-reviewer samples of papers; missing bids are
predicted with user-based collaborative filtering (nearest neighbours by
rating correlation). Each loop iteration selects fresh samples, collects
bids, and recomputes every prediction, so stated bids accumulate and
prediction confidence improves over iterations.

A known limitation is preserved on purpose: a paper nobody has rated and
that shares no topics with a reviewer can never be sampled or predicted for
that reviewer. Bids relate papers and reviewers but do not describe them,
so there is nothing to extrapolate from.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core import DEFAULT_SCALE, BidScale, PaperDescriptor, ReviewerDescriptor, TopicSelection
from .similarity import jaccard, weighted_relative

__all__ = [
    "Rating",
    "RatingTable",
    "IrmState",
    "BidSource",
    "DEFAULT_NEIGHBORS",
    "reviewer_similarity",
    "predict_rating",
    "recompute_predictions",
    "initial_samples",
    "irm_iteration",
    "simulate_bidder",
]

DEFAULT_NEIGHBORS = 5

# reviewer_id, proposed paper ids -> bid level per paper (possibly partial)
BidSource = Callable[[str, Sequence[str]], Mapping[str, int]]


@dataclass(frozen=True)
class Rating:
    """One cell of the rating table: the level plus where it came from."""

    level: int
    explicit: bool
    confidence: float = 1.0


class RatingTable:
    """Sparse (reviewer, paper) -> bid level store with provenance.

    Stated (explicit) bids are authoritative: a prediction can never
    overwrite one, while a stated bid replaces any prediction for the same
    cell. Levels are integers on the bid scale (0..4 by default).
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[tuple[str, str], Rating] | None = None):
        self._entries: dict[tuple[str, str], Rating] = dict(entries or {})

    def copy(self) -> "RatingTable":
        return RatingTable(self._entries)

    def get(self, reviewer_id: str, paper_id: str) -> Rating | None:
        return self._entries.get((reviewer_id, paper_id))

    def level_for(self, reviewer_id: str, paper_id: str) -> int | None:
        entry = self._entries.get((reviewer_id, paper_id))
        return None if entry is None else entry.level

    def has_explicit(self, reviewer_id: str, paper_id: str) -> bool:
        entry = self._entries.get((reviewer_id, paper_id))
        return entry is not None and entry.explicit

    def set_explicit(self, reviewer_id: str, paper_id: str, level: int) -> None:
        if level < 0 or int(level) != level:
            raise ValueError(f"bid level must be a non-negative integer, got {level!r}")
        self._entries[(reviewer_id, paper_id)] = Rating(int(level), explicit=True)

    def set_predicted(self, reviewer_id: str, paper_id: str, level: int, confidence: float) -> None:
        if self.has_explicit(reviewer_id, paper_id):
            raise ValueError(
                f"prediction for ({reviewer_id}, {paper_id}) would overwrite a stated bid"
            )
        if not 0.0 <= confidence <= 1.0:
            raise ValueError(f"confidence {confidence!r} outside [0, 1]")
        self._entries[(reviewer_id, paper_id)] = Rating(int(level), explicit=False, confidence=confidence)

    def clear_predictions(self) -> None:
        self._entries = {k: v for k, v in self._entries.items() if v.explicit}

    def items(self) -> list[tuple[str, str, Rating]]:
        """All entries sorted by (reviewer, paper) for stable output."""
        return [(r, p, entry) for (r, p), entry in sorted(self._entries.items())]

    def explicit_count(self) -> int:
        return sum(1 for entry in self._entries.values() if entry.explicit)

    def predicted_count(self) -> int:
        return sum(1 for entry in self._entries.values() if not entry.explicit)

    def explicit_raters(self, paper_id: str) -> list[str]:
        """Reviewers with a stated bid on this paper, in id order."""
        return sorted(
            r for (r, p), entry in self._entries.items() if p == paper_id and entry.explicit
        )

    def explicit_vector(self, reviewer_id: str) -> dict[str, int]:
        return {
            p: entry.level
            for (r, p), entry in self._entries.items()
            if r == reviewer_id and entry.explicit
        }

    def rated_count(self, paper_id: str) -> int:
        return sum(
            1 for (_, p), entry in self._entries.items() if p == paper_id and entry.explicit
        )

    def __len__(self) -> int:
        return len(self._entries)


def reviewer_similarity(table: RatingTable, reviewer_a: str, reviewer_b: str) -> float | None:
    """Pearson correlation of two reviewers' stated bids on shared papers.

    Levels enter as plain integers. Returns None (undefined) with fewer than
    two co-rated papers or when either side has zero variance over them.
    """
    va = table.explicit_vector(reviewer_a)
    vb = table.explicit_vector(reviewer_b)
    shared = sorted(set(va) & set(vb))
    if len(shared) < 2:
        return None
    xs = [float(va[p]) for p in shared]
    ys = [float(vb[p]) for p in shared]
    mx = math.fsum(xs) / len(xs)
    my = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    return min(max(r, -1.0), 1.0)


def _neighbor_similarity(
    table: RatingTable, reviewer_a: str, reviewer_b: str, scale: BidScale = DEFAULT_SCALE
) -> float | None:
    """Neighbour weight for prediction: Pearson, with an agreement fallback.

    Pearson is undefined on a single co-rated paper or constant vectors,
    which is exactly the "both want the same paper" situation that makes two
    reviewers informative about each other in the first place. Where it is
    undefined, fall back to mean level agreement, 1 - mean|delta|/max_level,
    over however many papers they share. None without any co-rated paper.
    """
    r = reviewer_similarity(table, reviewer_a, reviewer_b)
    if r is not None:
        return r
    va = table.explicit_vector(reviewer_a)
    vb = table.explicit_vector(reviewer_b)
    shared = sorted(set(va) & set(vb))
    if not shared:
        return None
    mean_gap = math.fsum(abs(va[p] - vb[p]) for p in shared) / len(shared)
    return 1.0 - mean_gap / scale.max_level


def _round_toward_neutral(value: float, scale: BidScale) -> int:
    """Nearest level; an exact half goes to whichever side is nearer neutral."""
    lo = max(min(math.floor(value), scale.max_level), 0)
    hi = max(min(math.ceil(value), scale.max_level), 0)
    if lo == hi:
        return lo
    d_lo = value - lo
    d_hi = hi - value
    if d_lo < d_hi:
        return lo
    if d_hi < d_lo:
        return hi
    return lo if abs(lo - scale.neutral) <= abs(hi - scale.neutral) else hi


def predict_rating(
    table: RatingTable,
    reviewer_id: str,
    paper_id: str,
    n: int = DEFAULT_NEIGHBORS,
    scale: BidScale = DEFAULT_SCALE,
    _similarity: Callable[[str, str], float | None] | None = None,
) -> tuple[int, float] | None:
    """User-based nearest-neighbour prediction for one unrated cell.

    Takes the up-to-``n`` most similar reviewers with positive similarity who
    stated a bid on the paper; the prediction is their similarity-weighted
    mean level rounded to the nearest level (halves toward neutral).
    Confidence is the contributed similarity mass over ``n``, capped at 1.
    Returns None when no qualifying neighbour exists.
    """
    if table.has_explicit(reviewer_id, paper_id):
        raise ValueError(f"({reviewer_id}, {paper_id}) already has a stated bid")
    if n < 1:
        raise ValueError("neighbourhood size must be >= 1")
    sim = _similarity or (lambda a, b: _neighbor_similarity(table, a, b, scale))

    candidates: list[tuple[float, str, int]] = []
    for other in table.explicit_raters(paper_id):
        if other == reviewer_id:
            continue
        s = sim(reviewer_id, other)
        if s is not None and s > 0.0:
            level = table.level_for(other, paper_id)
            candidates.append((s, other, level))
    if not candidates:
        return None

    candidates.sort(key=lambda c: (-c[0], c[1]))
    chosen = candidates[:n]
    mass = math.fsum(s for s, _, _ in chosen)
    mean = math.fsum(s * level for s, _, level in chosen) / mass
    confidence = min(mass / n, 1.0)
    return _round_toward_neutral(mean, scale), confidence


def recompute_predictions(
    table: RatingTable,
    papers: Sequence[PaperDescriptor],
    reviewers: Sequence[ReviewerDescriptor],
    n: int = DEFAULT_NEIGHBORS,
    scale: BidScale = DEFAULT_SCALE,
    confidence_floor: Mapping[tuple[str, str], float] | None = None,
) -> None:
    """Drop all predictions and refill every predictable cell in place.

    Stated bids are never touched. Similarities are cached per call since
    every cell of one recompute sees the same explicit table.

    ``confidence_floor`` carries per-cell confidence already achieved in
    earlier rounds: the loop's contract is that confidence only improves
    while stated bids accumulate, but the raw per-prediction mass can dip
    when fresh co-ratings revise a neighbour similarity downward, so the
    stored confidence is the maximum of the fresh value and the floor.
    """
    table.clear_predictions()
    cache: dict[tuple[str, str], float | None] = {}

    def sim(a: str, b: str) -> float | None:
        key = (a, b)
        if key not in cache:
            cache[key] = _neighbor_similarity(table, a, b, scale)
        return cache[key]

    for reviewer in reviewers:
        for paper in papers:
            pid = paper.paper_id
            rid = reviewer.reviewer_id
            if pid in reviewer.conflicts or table.has_explicit(rid, pid):
                continue
            result = predict_rating(table, rid, pid, n, scale, _similarity=sim)
            if result is not None:
                confidence = result[1]
                if confidence_floor is not None:
                    confidence = max(confidence, confidence_floor.get((rid, pid), 0.0))
                table.set_predicted(rid, pid, result[0], confidence)


def initial_samples(
    papers: Sequence[PaperDescriptor],
    reviewers: Sequence[ReviewerDescriptor],
    k: int,
    table: RatingTable | None = None,
) -> dict[str, list[str]]:
    """First rating samples, computed from declared topics alone.

    Per reviewer: the top-``k`` papers by topic overlap, skipping conflicts,
    zero-overlap papers, and papers the reviewer already rated. Ties go to
    the paper with fewer stated bids so coverage spreads, then to paper
    order.
    """
    if k < 1:
        raise ValueError("sample size k must be >= 1")
    table = table or RatingTable()
    samples: dict[str, list[str]] = {}
    for reviewer in reviewers:
        ranked: list[tuple[float, int, int, str]] = []
        for idx, paper in enumerate(papers):
            pid = paper.paper_id
            if pid in reviewer.conflicts or table.has_explicit(reviewer.reviewer_id, pid):
                continue
            sim = jaccard(paper.topics, reviewer.topics)
            if sim <= 0.0:
                continue
            ranked.append((-sim, table.rated_count(pid), idx, pid))
        ranked.sort()
        samples[reviewer.reviewer_id] = [pid for _, _, _, pid in ranked[:k]]
    return samples


@dataclass(frozen=True)
class IrmState:
    """Everything one loop iteration hands to the next.

    ``samples`` holds the papers proposed to each reviewer by the iteration
    that produced this state; ``anomalies`` logs rejected bids (conflicted or
    otherwise invalid) without failing the run.
    """

    table: RatingTable
    iteration: int = 0
    samples: Mapping[str, list[str]] = field(default_factory=dict)
    anomalies: tuple[str, ...] = ()

    def sample_count(self) -> int:
        return sum(len(s) for s in self.samples.values())


def _select_samples(
    table: RatingTable,
    papers: Sequence[PaperDescriptor],
    reviewers: Sequence[ReviewerDescriptor],
    k: int,
    scale: BidScale,
) -> dict[str, list[str]]:
    """Rank unrated papers per reviewer for the next round of bidding.

    Cells with a prediction rank by predicted level (high first) and then by
    low confidence, so the bids we ask for are the ones expected to be high
    and worth confirming. Cells without a prediction fall back to declared
    topic overlap, quantized onto the level scale with confidence 0.
    """
    samples: dict[str, list[str]] = {}
    for reviewer in reviewers:
        rid = reviewer.reviewer_id
        ranked: list[tuple[int, float, float, int, str]] = []
        for idx, paper in enumerate(papers):
            pid = paper.paper_id
            if pid in reviewer.conflicts or table.has_explicit(rid, pid):
                continue
            sim = jaccard(paper.topics, reviewer.topics)
            entry = table.get(rid, pid)
            if entry is not None:
                level, confidence = entry.level, entry.confidence
            elif sim > 0.0:
                level, confidence = scale.quantize(sim), 0.0
            else:
                continue
            ranked.append((-level, confidence, -sim, idx, pid))
        ranked.sort()
        samples[rid] = [pid for _, _, _, _, pid in ranked[:k]]
    return samples


def irm_iteration(
    state: IrmState,
    papers: Sequence[PaperDescriptor],
    reviewers: Sequence[ReviewerDescriptor],
    k: int,
    n: int = DEFAULT_NEIGHBORS,
    bid_source: BidSource | None = None,
    scale: BidScale = DEFAULT_SCALE,
) -> IrmState:
    """Run one iteration of the rating loop and return the successor state.

    Three steps: select a fresh sample per reviewer, collect whatever bids
    ``bid_source`` returns for it (stored as stated bids), then recompute
    every prediction from scratch. Bids for conflicted pairs, already-stated
    cells, or with out-of-range levels are rejected into the anomaly log.
    The stated-bid count never decreases.
    """
    table = state.table.copy()
    anomalies = list(state.anomalies)
    conflict_map = {r.reviewer_id: r.conflicts for r in reviewers}
    achieved_confidence = {
        (rid, pid): entry.confidence
        for rid, pid, entry in table.items()
        if not entry.explicit
    }

    samples = _select_samples(table, papers, reviewers, k, scale)

    if bid_source is not None:
        for reviewer in reviewers:
            rid = reviewer.reviewer_id
            sample = samples.get(rid, [])
            if not sample:
                continue
            bids = bid_source(rid, list(sample)) or {}
            for pid in sorted(bids):
                level = bids[pid]
                if pid in conflict_map[rid]:
                    anomalies.append(f"iteration {state.iteration + 1}: "
                                     f"rejected bid on conflicted pair ({rid}, {pid})")
                    continue
                if not isinstance(level, int) or not 0 <= level <= scale.max_level:
                    anomalies.append(f"iteration {state.iteration + 1}: "
                                     f"rejected invalid level {level!r} for ({rid}, {pid})")
                    continue
                if table.has_explicit(rid, pid):
                    anomalies.append(f"iteration {state.iteration + 1}: "
                                     f"rejected duplicate bid for ({rid}, {pid})")
                    continue
                table.set_explicit(rid, pid, level)

    recompute_predictions(table, papers, reviewers, n, scale, achieved_confidence)
    return IrmState(table, state.iteration + 1, samples, tuple(anomalies))


def _pair_rng(seed: int, reviewer_id: str, paper_id: str) -> random.Random:
    # Stable across runs and call orders; hash() would vary per process.
    digest = hashlib.blake2b(
        f"{seed}/{reviewer_id}/{paper_id}".encode(), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "big"))


def simulate_bidder(
    papers: Iterable[PaperDescriptor],
    hidden_truth: Mapping[str, TopicSelection],
    noise: float = 0.0,
    seed: int = 0,
    scale: BidScale = DEFAULT_SCALE,
) -> BidSource:
    """Deterministic stand-in for human reviewers in desk-scale experiments.

    Each bid is the reviewer's hidden weighted interest profile matched
    against the paper's topics and quantized onto the level scale. With
    probability ``min(noise, 1)`` the level is replaced by a uniform random
    one. Randomness derives from (seed, reviewer, paper), so the same seed
    reproduces the same bids regardless of sampling order, and re-asking the
    same pair returns the same answer.
    """
    if noise < 0:
        raise ValueError("noise must be >= 0")
    by_id = {p.paper_id: p for p in papers}
    flip_p = min(noise, 1.0)

    def source(reviewer_id: str, paper_ids: Sequence[str]) -> dict[str, int]:
        truth = hidden_truth.get(reviewer_id)
        if truth is None:
            return {}
        bids: dict[str, int] = {}
        for pid in paper_ids:
            paper = by_id[pid]
            level = scale.quantize(weighted_relative(paper.topics, truth))
            if flip_p > 0.0:
                rng = _pair_rng(seed, reviewer_id, pid)
                if rng.random() < flip_p:
                    level = rng.randrange(scale.n_levels)
            bids[pid] = level
        return bids

    return source
