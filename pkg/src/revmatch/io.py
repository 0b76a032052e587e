"""Line-oriented text formats for datasets, ratings, matrices, assignments.

Every format is a sequence of flat records, one per line: a record kind
followed by ``key=value`` fields (the matrix format is the one exception,
using a header row of paper ids and one row of fixed six-decimal weights per
reviewer, which keeps the golden files diffable). Blank lines and ``#``
comments are ignored. Everything the package writes can be read back.
"""

from __future__ import annotations

import io as _io
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import IO, Iterator, Mapping, Sequence

from .core import (
    AssignmentSet,
    Dataset,
    PaperDescriptor,
    ReviewerDescriptor,
    SimilarityMatrix,
    TopicSelection,
    TopicVocabulary,
)
from .ratings import Rating, RatingTable

__all__ = [
    "ParseError",
    "ParsedAssignment",
    "read_dataset",
    "write_dataset",
    "read_matrix",
    "write_matrix",
    "read_ratings",
    "write_ratings",
    "read_truth",
    "write_truth",
    "read_assignment",
    "write_assignment",
    "open_input",
    "open_output",
]

DEFAULT_M = 3


class ParseError(Exception):
    """Malformed input file; carries enough to point at the offending field."""

    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.source = source
        self.line_no = line_no
        self.message = message


@contextmanager
def open_input(path: str) -> Iterator[IO[str]]:
    """Open a text input; '-' reads standard input."""
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


@contextmanager
def open_output(path: str) -> Iterator[IO[str]]:
    """Open a text output; '-' writes standard output."""
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _records(stream: IO[str], source: str) -> Iterator[tuple[int, str, dict[str, str]]]:
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        kind = tokens[0]
        fields: dict[str, str] = {}
        for token in tokens[1:]:
            key, sep, value = token.partition("=")
            if not sep or not key:
                raise ParseError(source, line_no, f"expected key=value field, got {token!r}")
            if key in fields:
                raise ParseError(source, line_no, f"duplicate field {key!r}")
            fields[key] = value
        yield line_no, kind, fields


def _require(fields: Mapping[str, str], key: str, source: str, line_no: int) -> str:
    if key not in fields:
        raise ParseError(source, line_no, f"missing required field {key!r}")
    return fields[key]


def _parse_int(value: str, what: str, source: str, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(source, line_no, f"{what} must be an integer, got {value!r}") from None


def _parse_float(value: str, what: str, source: str, line_no: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(source, line_no, f"{what} must be a number, got {value!r}") from None


def _parse_selection(value: str, source: str, line_no: int) -> TopicSelection:
    if not value:
        return TopicSelection()
    entries = []
    for item in value.split(","):
        tid_text, sep, weight_text = item.partition(":")
        tid = _parse_int(tid_text, "topic id", source, line_no)
        weight = _parse_float(weight_text, "topic weight", source, line_no) if sep else 1.0
        entries.append((tid, weight))
    try:
        return TopicSelection(entries)
    except ValueError as exc:
        raise ParseError(source, line_no, str(exc)) from None


def _format_selection(selection: TopicSelection) -> str:
    parts = []
    for tid, w in selection.items():
        parts.append(str(tid) if w == 1.0 else f"{tid}:{w:g}")
    return ",".join(parts)


def read_dataset(stream: IO[str], source: str = "<dataset>") -> Dataset:
    """Parse a dataset file: topics, papers, reviewers, optional m."""
    topics: list[tuple[int, str]] = []
    papers: list[PaperDescriptor] = []
    reviewers: list[ReviewerDescriptor] = []
    m = DEFAULT_M
    for line_no, kind, fields in _records(stream, source):
        if kind == "m":
            m = _parse_int(_require(fields, "value", source, line_no), "m", source, line_no)
        elif kind == "topic":
            tid = _parse_int(_require(fields, "id", source, line_no), "topic id", source, line_no)
            topics.append((tid, _require(fields, "label", source, line_no)))
        elif kind == "paper":
            pid = _require(fields, "id", source, line_no)
            sel = _parse_selection(fields.get("topics", ""), source, line_no)
            papers.append(PaperDescriptor(pid, sel))
        elif kind == "reviewer":
            rid = _require(fields, "id", source, line_no)
            capacity = _parse_int(
                _require(fields, "capacity", source, line_no), "capacity", source, line_no
            )
            sel = _parse_selection(fields.get("topics", ""), source, line_no)
            conflicts = frozenset(c for c in fields.get("conflicts", "").split(",") if c)
            reviewers.append(ReviewerDescriptor(rid, sel, capacity, conflicts))
        else:
            raise ParseError(source, line_no, f"unknown record kind {kind!r}")
    return Dataset(TopicVocabulary(tuple(topics)), tuple(papers), tuple(reviewers), m)


def write_dataset(dataset: Dataset, stream: IO[str]) -> None:
    stream.write(f"m value={dataset.m}\n")
    for tid, label in dataset.vocabulary.entries:
        stream.write(f"topic id={tid} label={label}\n")
    for paper in dataset.papers:
        stream.write(f"paper id={paper.paper_id} topics={_format_selection(paper.topics)}\n")
    for reviewer in dataset.reviewers:
        line = (
            f"reviewer id={reviewer.reviewer_id} capacity={reviewer.capacity}"
            f" topics={_format_selection(reviewer.topics)}"
        )
        if reviewer.conflicts:
            line += f" conflicts={','.join(sorted(reviewer.conflicts))}"
        stream.write(line + "\n")


def read_matrix(stream: IO[str], source: str = "<matrix>") -> SimilarityMatrix:
    """Parse a similarity-matrix file: header of paper ids, one row per reviewer."""
    paper_ids: list[str] | None = None
    reviewer_ids: list[str] = []
    rows: list[list[float]] = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if paper_ids is None:
            if tokens[0] != "matrix":
                raise ParseError(source, line_no, "matrix file must start with a 'matrix' header")
            paper_ids = tokens[1:]
            continue
        if len(tokens) != len(paper_ids) + 1:
            raise ParseError(
                source,
                line_no,
                f"row has {len(tokens) - 1} weights, header names {len(paper_ids)} papers",
            )
        reviewer_ids.append(tokens[0])
        rows.append([_parse_float(t, "weight", source, line_no) for t in tokens[1:]])
    if paper_ids is None:
        raise ParseError(source, 0, "empty matrix file")
    try:
        return SimilarityMatrix(reviewer_ids, paper_ids, rows)
    except ValueError as exc:
        raise ParseError(source, 0, str(exc)) from None


def write_matrix(matrix: SimilarityMatrix, stream: IO[str]) -> None:
    stream.write("matrix " + " ".join(matrix.paper_ids) + "\n")
    for i, rid in enumerate(matrix.reviewer_ids):
        cells = " ".join(f"{w:.6f}" for w in matrix.weights[i])
        stream.write(f"{rid} {cells}\n")


def read_ratings(stream: IO[str], source: str = "<ratings>") -> RatingTable:
    table = RatingTable()
    for line_no, kind, fields in _records(stream, source):
        if kind != "rating":
            raise ParseError(source, line_no, f"unknown record kind {kind!r}")
        rid = _require(fields, "reviewer", source, line_no)
        pid = _require(fields, "paper", source, line_no)
        level = _parse_int(_require(fields, "level", source, line_no), "level", source, line_no)
        prov = _require(fields, "source", source, line_no)
        if prov == "explicit":
            table.set_explicit(rid, pid, level)
        elif prov == "predicted":
            confidence = _parse_float(
                _require(fields, "confidence", source, line_no), "confidence", source, line_no
            )
            try:
                table.set_predicted(rid, pid, level, confidence)
            except ValueError as exc:
                raise ParseError(source, line_no, str(exc)) from None
        else:
            raise ParseError(source, line_no, f"source must be explicit or predicted, got {prov!r}")
    return table


def write_ratings(table: RatingTable, stream: IO[str]) -> None:
    for rid, pid, entry in table.items():
        if entry.explicit:
            stream.write(f"rating reviewer={rid} paper={pid} level={entry.level} source=explicit\n")
        else:
            stream.write(
                f"rating reviewer={rid} paper={pid} level={entry.level} "
                f"source=predicted confidence={entry.confidence:.6f}\n"
            )


def read_truth(stream: IO[str], source: str = "<truth>") -> dict[str, TopicSelection]:
    """Parse hidden reviewer interest profiles for the simulated bidder."""
    truth: dict[str, TopicSelection] = {}
    for line_no, kind, fields in _records(stream, source):
        if kind != "truth":
            raise ParseError(source, line_no, f"unknown record kind {kind!r}")
        rid = _require(fields, "id", source, line_no)
        if rid in truth:
            raise ParseError(source, line_no, f"duplicate truth record for reviewer {rid!r}")
        truth[rid] = _parse_selection(fields.get("topics", ""), source, line_no)
    return truth


def write_truth(truth: Mapping[str, TopicSelection], stream: IO[str]) -> None:
    for rid in truth:
        stream.write(f"truth id={rid} topics={_format_selection(truth[rid])}\n")


@dataclass(frozen=True)
class ParsedAssignment:
    """An assignment file read back: header metadata plus the pair list."""

    algorithm: str
    m: int
    rounds: int
    total_weight: float
    infeasible: bool
    pairs: tuple[tuple[str, str, float], ...]
    uncovered: tuple[tuple[str, int], ...] = field(default=())

    def assignment_set(self) -> AssignmentSet:
        return AssignmentSet(self.pairs)


def read_assignment(stream: IO[str], source: str = "<assignment>") -> ParsedAssignment:
    header: dict[str, str] | None = None
    header_line = 0
    pairs: list[tuple[str, str, float]] = []
    uncovered: list[tuple[str, int]] = []
    for line_no, kind, fields in _records(stream, source):
        if kind == "assignment":
            if header is not None:
                raise ParseError(source, line_no, "duplicate assignment header")
            header, header_line = fields, line_no
        elif kind == "pair":
            pairs.append(
                (
                    _require(fields, "paper", source, line_no),
                    _require(fields, "reviewer", source, line_no),
                    _parse_float(
                        _require(fields, "weight", source, line_no), "weight", source, line_no
                    ),
                )
            )
        elif kind == "uncovered":
            uncovered.append(
                (
                    _require(fields, "paper", source, line_no),
                    _parse_int(
                        _require(fields, "shortfall", source, line_no),
                        "shortfall",
                        source,
                        line_no,
                    ),
                )
            )
        else:
            raise ParseError(source, line_no, f"unknown record kind {kind!r}")
    if header is None:
        raise ParseError(source, 0, "missing assignment header")
    return ParsedAssignment(
        algorithm=_require(header, "algorithm", source, header_line),
        m=_parse_int(_require(header, "m", source, header_line), "m", source, header_line),
        rounds=_parse_int(
            _require(header, "rounds", source, header_line), "rounds", source, header_line
        ),
        total_weight=_parse_float(
            _require(header, "total", source, header_line), "total", source, header_line
        ),
        infeasible=header.get("infeasible", "0") == "1",
        pairs=tuple(pairs),
        uncovered=tuple(uncovered),
    )


def write_assignment(parsed: ParsedAssignment, stream: IO[str]) -> None:
    line = (
        f"assignment algorithm={parsed.algorithm} m={parsed.m} "
        f"rounds={parsed.rounds} total={parsed.total_weight:.6f}"
    )
    if parsed.infeasible:
        line += " infeasible=1"
    stream.write(line + "\n")
    for paper_id, reviewer_id, w in parsed.pairs:
        stream.write(f"pair paper={paper_id} reviewer={reviewer_id} weight={w:.6f}\n")
    for paper_id, shortfall in parsed.uncovered:
        stream.write(f"uncovered paper={paper_id} shortfall={shortfall}\n")


def dataset_to_text(dataset: Dataset) -> str:
    buf = _io.StringIO()
    write_dataset(dataset, buf)
    return buf.getvalue()


def matrix_to_text(matrix: SimilarityMatrix) -> str:
    buf = _io.StringIO()
    write_matrix(matrix, buf)
    return buf.getvalue()
