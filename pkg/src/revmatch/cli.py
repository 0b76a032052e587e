"""Command-line front end: gen, similarity, assign, irm, bench.

All randomized subcommands require an explicit seed and are fully
deterministic given one. Inputs and outputs are explicit paths; "-" means
the standard stream where a command reads or writes a single file. Reports
print a human-readable table plus machine-readable ``result`` lines; the
exit code is 0 exactly when no error diagnostic was emitted.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field

from .assign import AssignmentOutcome, SortedColumns, assign_greedy, assign_heuristic, assign_hungarian
from .core import DEFAULT_SCALE, Dataset, SimilarityMatrix, validate_dataset
from .gen import generate_dataset, generate_truth
from .io import (
    ParseError,
    ParsedAssignment,
    open_input,
    open_output,
    read_dataset,
    read_matrix,
    read_ratings,
    read_truth,
    write_assignment,
    write_dataset,
    write_matrix,
    write_ratings,
    write_truth,
)
from .ratings import DEFAULT_NEIGHBORS, IrmState, RatingTable, irm_iteration, simulate_bidder
from .similarity import METHOD_KINDS, TOPIC_MEASURES, SimilarityMethod, build_similarity_matrix, weighted_relative

__all__ = ["main", "RunConfig", "run_bench", "run_irm", "BenchResult", "IrmIterationReport"]

ALGORITHMS = ("hungarian", "greedy", "heuristic")


@dataclass
class RunConfig:
    """Resolved options for one invocation."""

    method: SimilarityMethod | None = None
    m: int | None = None
    algorithm: str = "hungarian"
    k: int = 20
    n: int = DEFAULT_NEIGHBORS
    seed: int | None = None
    noise: float = 0.0
    iterations: int = 1
    capacity: int | None = None
    paths: dict[str, str] = field(default_factory=dict)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _load_dataset(path: str) -> Dataset:
    with open_input(path) as fh:
        return read_dataset(fh, path)


def _validated_dataset(path: str, m: int | None, dataset: Dataset | None = None) -> tuple[Dataset, int] | None:
    if dataset is None:
        dataset = _load_dataset(path)
    effective_m = m if m is not None else dataset.m
    report = validate_dataset(dataset.vocabulary, dataset.papers, dataset.reviewers, effective_m)
    if not report.ok:
        for line in report.messages():
            print(f"error: {path}: {line}", file=sys.stderr)
        return None
    return dataset, effective_m


def _build_matrix(dataset: Dataset, config: RunConfig) -> SimilarityMatrix:
    ratings = None
    if "ratings" in config.paths:
        with open_input(config.paths["ratings"]) as fh:
            ratings = read_ratings(fh, config.paths["ratings"])
    return build_similarity_matrix(dataset.papers, dataset.reviewers, config.method, ratings)


# ---------------------------------------------------------------- gen


def cmd_gen(config: RunConfig, n_papers: int, n_reviewers: int, n_topics: int,
            density: float, weighted: bool) -> int:
    dataset = generate_dataset(
        seed=config.seed,
        n_papers=n_papers,
        n_reviewers=n_reviewers,
        n_topics=n_topics,
        density=density,
        m=config.m if config.m is not None else 3,
        capacity=config.capacity,
        weighted=weighted,
    )
    with open_output(config.paths["out"]) as fh:
        write_dataset(dataset, fh)
    if "truth_out" in config.paths:
        truth = generate_truth(dataset, config.seed)
        with open_output(config.paths["truth_out"]) as fh:
            write_truth(truth, fh)
    return 0


# ---------------------------------------------------------------- similarity


def cmd_similarity(config: RunConfig) -> int:
    dataset = _load_dataset(config.paths["dataset"])
    if not dataset.reviewers:
        return _fail("no reviewers in dataset")
    if not dataset.papers:
        return _fail("no papers in dataset")
    loaded = _validated_dataset(config.paths["dataset"], config.m, dataset)
    if loaded is None:
        return 1
    dataset, _ = loaded
    if config.method.needs_ratings and "ratings" not in config.paths:
        return _fail(f"method {config.method.describe()!r} requires --ratings")
    matrix = _build_matrix(dataset, config)
    out = config.paths["out"]
    with open_output(out) as fh:
        write_matrix(matrix, fh)
    if out != "-":
        columns = SortedColumns.from_matrix(matrix)
        print(f"similarity matrix: {len(matrix.reviewer_ids)} reviewers x "
              f"{len(matrix.paper_ids)} papers ({config.method.describe()}) -> {out}")
        for pid in matrix.paper_ids:
            print(f"candidates paper={pid} count={columns.scarcity(pid)}")
    return 0


# ---------------------------------------------------------------- assign


def _capacities_for(dataset: Dataset | None, matrix: SimilarityMatrix, config: RunConfig) -> dict[str, int]:
    if dataset is not None:
        return {r.reviewer_id: r.capacity for r in dataset.reviewers}
    uniform = config.capacity if config.capacity is not None else 1
    return {rid: uniform for rid in matrix.reviewer_ids}


def _run_algorithm(name: str, matrix: SimilarityMatrix, m: int, capacities: dict[str, int]):
    started = time.perf_counter()
    if name == "hungarian":
        outcome = assign_hungarian(matrix, m, capacities)
    elif name == "greedy":
        outcome = assign_greedy(matrix, m, capacities)
    else:
        outcome = assign_heuristic(matrix, m, capacities)
    return outcome, time.perf_counter() - started


def _outcome_to_parsed(outcome: AssignmentOutcome, m: int, infeasible: bool) -> ParsedAssignment:
    return ParsedAssignment(
        algorithm=outcome.algorithm,
        m=m,
        rounds=outcome.rounds,
        total_weight=outcome.total_weight,
        infeasible=infeasible,
        pairs=tuple(outcome.assignment.pairs()),
        uncovered=outcome.uncovered,
    )


def _assign_out_path(base: str, algorithm: str, multiple: bool) -> str:
    if not multiple:
        return base
    stem, dot, suffix = base.rpartition(".")
    if dot:
        return f"{stem}.{algorithm}.{suffix}"
    return f"{base}.{algorithm}"


def cmd_assign(config: RunConfig) -> int:
    dataset = None
    if "dataset" in config.paths:
        loaded = _validated_dataset(config.paths["dataset"], config.m)
        if loaded is None:
            return 1
        dataset, m = loaded
        matrix = _build_matrix(dataset, config)
    else:
        with open_input(config.paths["matrix"]) as fh:
            matrix = read_matrix(fh, config.paths["matrix"])
        m = config.m if config.m is not None else 3

    capacities = _capacities_for(dataset, matrix, config)
    total_capacity = sum(capacities.values())
    needed = m * len(matrix.paper_ids)
    infeasible = total_capacity < needed
    if infeasible:
        print(
            f"warning: total capacity {total_capacity} < {needed} required for "
            f"m={m}; expect uncovered papers",
            file=sys.stderr,
        )

    names = list(ALGORITHMS) if config.algorithm == "all" else [config.algorithm]
    results = []
    for name in names:
        outcome, seconds = _run_algorithm(name, matrix, m, dict(capacities))
        results.append((outcome, seconds))
        out_path = _assign_out_path(config.paths["out"], name, len(names) > 1)
        with open_output(out_path) as fh:
            write_assignment(_outcome_to_parsed(outcome, m, infeasible), fh)

    n_papers = len(matrix.paper_ids)
    print(f"{'algorithm':<10} {'weight':>10} {'covered':>9} {'uncovered':>9} {'seconds':>9}")
    for outcome, seconds in results:
        covered = n_papers - len(outcome.uncovered)
        print(
            f"{outcome.algorithm:<10} {outcome.total_weight:>10.6f} "
            f"{covered:>4}/{n_papers:<4} {len(outcome.uncovered):>9} {seconds:>9.3f}"
        )
    for outcome, seconds in results:
        covered = n_papers - len(outcome.uncovered)
        print(
            f"result algorithm={outcome.algorithm} weight={outcome.total_weight:.6f} "
            f"covered={covered} uncovered={len(outcome.uncovered)} pairs={len(outcome.assignment)} "
            f"rounds={outcome.rounds} infeasible={int(infeasible)} seconds={seconds:.4f}"
        )
    return 0


# ---------------------------------------------------------------- irm


@dataclass(frozen=True)
class IrmIterationReport:
    """Prediction quality after one loop iteration of a simulated run."""

    iteration: int
    explicit: int
    predicted: int
    sample_count: int
    rmse: float | None
    baseline_rmse: float | None
    state: IrmState


def _truth_levels(dataset: Dataset, truth) -> dict[tuple[str, str], int]:
    levels = {}
    for reviewer in dataset.reviewers:
        profile = truth.get(reviewer.reviewer_id)
        if profile is None:
            continue
        for paper in dataset.papers:
            sf = weighted_relative(paper.topics, profile)
            levels[(reviewer.reviewer_id, paper.paper_id)] = DEFAULT_SCALE.quantize(sf)
    return levels


def _prediction_rmse(state: IrmState, truth_levels) -> tuple[float | None, float | None]:
    """RMSE of predicted levels vs hidden truth on the predicted (held-out)
    cells, and the RMSE a flat neutral default would score on the same cells."""
    errors = []
    baseline = []
    neutral = DEFAULT_SCALE.neutral
    for rid, pid, entry in state.table.items():
        if entry.explicit:
            continue
        expected = truth_levels.get((rid, pid))
        if expected is None:
            continue
        errors.append((entry.level - expected) ** 2)
        baseline.append((neutral - expected) ** 2)
    if not errors:
        return None, None
    rmse = math.sqrt(math.fsum(errors) / len(errors))
    base = math.sqrt(math.fsum(baseline) / len(baseline))
    return rmse, base


def run_irm(dataset: Dataset, truth, iterations: int, k: int, n: int,
            noise: float, seed: int) -> list[IrmIterationReport]:
    """Run the full simulated bidding pipeline and report each iteration."""
    bidder = simulate_bidder(dataset.papers, truth, noise=noise, seed=seed)
    truth_levels = _truth_levels(dataset, truth)
    state = IrmState(RatingTable())
    reports = []
    for _ in range(iterations):
        state = irm_iteration(state, dataset.papers, dataset.reviewers, k, n, bidder)
        rmse, baseline = _prediction_rmse(state, truth_levels)
        reports.append(
            IrmIterationReport(
                iteration=state.iteration,
                explicit=state.table.explicit_count(),
                predicted=state.table.predicted_count(),
                sample_count=state.sample_count(),
                rmse=rmse,
                baseline_rmse=baseline,
                state=state,
            )
        )
    return reports


def cmd_irm(config: RunConfig) -> int:
    loaded = _validated_dataset(config.paths["dataset"], config.m)
    if loaded is None:
        return 1
    dataset, _ = loaded
    with open_input(config.paths["truth"]) as fh:
        truth = read_truth(fh, config.paths["truth"])

    reports = run_irm(dataset, truth, config.iterations, config.k, config.n,
                      config.noise, config.seed)

    prefix = config.paths.get("out_prefix")
    print(f"{'iter':>4} {'explicit':>9} {'predicted':>10} {'sampled':>8} "
          f"{'rmse':>8} {'neutral_rmse':>13}")
    for report in reports:
        if prefix:
            path = f"{prefix}_iter{report.iteration}.txt"
            with open_output(path) as fh:
                write_ratings(report.state.table, fh)
        rmse = f"{report.rmse:.4f}" if report.rmse is not None else "n/a"
        base = f"{report.baseline_rmse:.4f}" if report.baseline_rmse is not None else "n/a"
        print(f"{report.iteration:>4} {report.explicit:>9} {report.predicted:>10} "
              f"{report.sample_count:>8} {rmse:>8} {base:>13}")
    for report in reports:
        rmse = f"{report.rmse:.6f}" if report.rmse is not None else "nan"
        base = f"{report.baseline_rmse:.6f}" if report.baseline_rmse is not None else "nan"
        print(f"result iteration={report.iteration} explicit={report.explicit} "
              f"predicted={report.predicted} sampled={report.sample_count} "
              f"rmse={rmse} baseline_rmse={base}")
    anomalies = reports[-1].state.anomalies if reports else ()
    for note in anomalies:
        print(f"warning: {note}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- bench


@dataclass(frozen=True)
class BenchResult:
    """Aggregates of heuristic and greedy against the per-pass optimum."""

    instances: int
    ratios: dict[str, list[float]]
    covered: dict[str, list[int]]
    weights: dict[str, list[float]]
    seconds: dict[str, float]

    def mean_ratio(self, algorithm: str) -> float:
        values = self.ratios[algorithm]
        return math.fsum(values) / len(values)

    def min_ratio(self, algorithm: str) -> float:
        return min(self.ratios[algorithm])


def run_bench(seed: int, instances: int, n_papers: int, n_reviewers: int, m: int,
              n_topics: int = 12, density: float = 0.25,
              capacity: int | None = None) -> BenchResult:
    """Compare the algorithms on seeded random topic datasets.

    Per instance the Jaccard matrix is built and all three algorithms run;
    ratios are each algorithm's weight over the hungarian weight for the
    same instance (1 when both are zero).
    """
    method = SimilarityMethod("jaccard")
    ratios = {name: [] for name in ALGORITHMS}
    covered = {name: [] for name in ALGORITHMS}
    weights = {name: [] for name in ALGORITHMS}
    seconds = {name: 0.0 for name in ALGORITHMS}
    for i in range(instances):
        dataset = generate_dataset(
            seed=seed + i,
            n_papers=n_papers,
            n_reviewers=n_reviewers,
            n_topics=n_topics,
            density=density,
            m=m,
            capacity=capacity,
        )
        matrix = build_similarity_matrix(dataset.papers, dataset.reviewers, method)
        capacities = {r.reviewer_id: r.capacity for r in dataset.reviewers}
        outcomes = {}
        for name in ALGORITHMS:
            outcome, elapsed = _run_algorithm(name, matrix, m, dict(capacities))
            outcomes[name] = outcome
            seconds[name] += elapsed
        reference = outcomes["hungarian"].total_weight
        for name in ALGORITHMS:
            w = outcomes[name].total_weight
            ratios[name].append(1.0 if reference == 0.0 else w / reference)
            covered[name].append(n_papers - len(outcomes[name].uncovered))
            weights[name].append(w)
    return BenchResult(instances, ratios, covered, weights, seconds)


def cmd_bench(config: RunConfig, instances: int, n_papers: int, n_reviewers: int,
              n_topics: int, density: float) -> int:
    m = config.m if config.m is not None else 1
    result = run_bench(config.seed, instances, n_papers, n_reviewers, m,
                       n_topics, density, config.capacity)
    print(f"bench instances={instances} papers={n_papers} reviewers={n_reviewers} "
          f"m={m} seed={config.seed}")
    print(f"{'algorithm':<10} {'mean_weight':>12} {'mean_ratio':>11} {'min_ratio':>10} "
          f"{'mean_covered':>13} {'seconds':>8}")
    for name in ALGORITHMS:
        mean_w = math.fsum(result.weights[name]) / instances
        mean_cov = math.fsum(result.covered[name]) / instances
        print(f"{name:<10} {mean_w:>12.4f} {result.mean_ratio(name):>11.6f} "
              f"{result.min_ratio(name):>10.6f} {mean_cov:>13.2f} {result.seconds[name]:>8.2f}")
    for name in ALGORITHMS:
        mean_cov = math.fsum(result.covered[name]) / instances
        print(f"result algorithm={name} mean_ratio={result.mean_ratio(name):.6f} "
              f"min_ratio={result.min_ratio(name):.6f} mean_covered={mean_cov:.2f} "
              f"seconds={result.seconds[name]:.2f}")
    return 0


# ---------------------------------------------------------------- parser


def _add_method_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--method", choices=METHOD_KINDS, default="jaccard",
                        help="similarity method (default: jaccard)")
    parser.add_argument("--topic-method", choices=sorted(TOPIC_MEASURES), default="jaccard",
                        help="topic fallback for --method combined")
    parser.add_argument("--ratings", help="rating table file (for bid-only / combined)")


def _method_from(args: argparse.Namespace) -> SimilarityMethod:
    return SimilarityMethod(args.method, topic_method=args.topic_method)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revmatch",
        description="Reviewer-to-paper assignment: similarity, bid prediction, matching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--papers", type=int, required=True)
    p_gen.add_argument("--reviewers", type=int, required=True)
    p_gen.add_argument("--topics", type=int, required=True)
    p_gen.add_argument("--density", type=float, required=True)
    p_gen.add_argument("--m", type=int, default=3, help="reviewers per paper (default 3)")
    p_gen.add_argument("--capacity", type=int, help="uniform reviewer capacity (default: auto)")
    p_gen.add_argument("--weighted", action="store_true", help="weighted topic selections")
    p_gen.add_argument("--truth-out", help="also write hidden bidder-interest profiles here")
    p_gen.add_argument("--out", required=True, help="dataset file to write ('-' for stdout)")

    p_sim = sub.add_parser("similarity", help="compute a similarity matrix")
    p_sim.add_argument("--dataset", required=True)
    _add_method_args(p_sim)
    p_sim.add_argument("--m", type=int, help="override the dataset's reviewers-per-paper")
    p_sim.add_argument("--out", default="-", help="matrix file to write ('-' for stdout)")

    p_asg = sub.add_parser("assign", help="run assignment algorithms")
    src = p_asg.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", help="dataset file (matrix computed via --method)")
    src.add_argument("--matrix", help="precomputed similarity matrix file")
    _add_method_args(p_asg)
    p_asg.add_argument("--m", type=int, help="reviewers per paper (default: dataset m, or 3)")
    p_asg.add_argument("--capacity", type=int,
                       help="uniform capacity when assigning from --matrix (default 1)")
    p_asg.add_argument("--algorithm", choices=ALGORITHMS + ("all",), default="hungarian")
    p_asg.add_argument("--out", required=True,
                       help="assignment file to write (per-algorithm suffix with --algorithm all)")

    p_irm = sub.add_parser("irm", help="simulate the iterative rating loop")
    p_irm.add_argument("--dataset", required=True)
    p_irm.add_argument("--truth", required=True, help="hidden interest profiles file")
    p_irm.add_argument("--iterations", type=int, required=True)
    p_irm.add_argument("--k", type=int, default=20, help="sample size per reviewer (default 20)")
    p_irm.add_argument("--n", type=int, default=DEFAULT_NEIGHBORS,
                       help="prediction neighbourhood size (default 5)")
    p_irm.add_argument("--noise", type=float, default=0.0, help="bidder noise level (default 0)")
    p_irm.add_argument("--seed", type=int, required=True)
    p_irm.add_argument("--m", type=int, help="override the dataset's reviewers-per-paper")
    p_irm.add_argument("--out-prefix", help="write a rating snapshot per iteration")

    p_bench = sub.add_parser("bench", help="compare algorithms on random instances")
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--instances", type=int, default=200)
    p_bench.add_argument("--papers", type=int, default=50)
    p_bench.add_argument("--reviewers", type=int, default=30)
    p_bench.add_argument("--m", type=int, default=1)
    p_bench.add_argument("--topics", type=int, default=12)
    p_bench.add_argument("--density", type=float, default=0.25)
    p_bench.add_argument("--capacity", type=int, help="uniform reviewer capacity (default: auto)")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            if args.papers < 1 or args.reviewers < 1 or args.topics < 1:
                parser.error("paper, reviewer and topic counts must all be >= 1")
            if not 0.0 < args.density <= 1.0:
                parser.error("density must lie in (0, 1]")
            if args.m < 1:
                parser.error("m must be >= 1")
            if args.capacity is not None and args.capacity < 1:
                parser.error("capacity must be >= 1")
            config = RunConfig(m=args.m, seed=args.seed, capacity=args.capacity,
                               paths={"out": args.out})
            if args.truth_out:
                config.paths["truth_out"] = args.truth_out
            return cmd_gen(config, args.papers, args.reviewers, args.topics,
                           args.density, args.weighted)

        if args.command == "similarity":
            if args.m is not None and args.m < 1:
                parser.error("m must be >= 1")
            config = RunConfig(method=_method_from(args), m=args.m,
                               paths={"dataset": args.dataset, "out": args.out})
            if args.ratings:
                config.paths["ratings"] = args.ratings
            return cmd_similarity(config)

        if args.command == "assign":
            if args.m is not None and args.m < 1:
                parser.error("m must be >= 1")
            if args.capacity is not None and args.capacity < 1:
                parser.error("capacity must be >= 1")
            config = RunConfig(method=_method_from(args), m=args.m,
                               algorithm=args.algorithm, capacity=args.capacity,
                               paths={"out": args.out})
            if args.dataset:
                config.paths["dataset"] = args.dataset
            else:
                config.paths["matrix"] = args.matrix
            if args.ratings:
                config.paths["ratings"] = args.ratings
            return cmd_assign(config)

        if args.command == "irm":
            if args.iterations < 1:
                parser.error("iterations must be >= 1")
            if args.k < 1:
                parser.error("k must be >= 1")
            if args.n < 1:
                parser.error("n must be >= 1")
            if args.noise < 0:
                parser.error("noise must be >= 0")
            config = RunConfig(m=args.m, k=args.k, n=args.n, seed=args.seed,
                               noise=args.noise, iterations=args.iterations,
                               paths={"dataset": args.dataset, "truth": args.truth})
            if args.out_prefix:
                config.paths["out_prefix"] = args.out_prefix
            return cmd_irm(config)

        if args.command == "bench":
            if args.instances < 1:
                parser.error("instances must be >= 1")
            if args.m < 1:
                parser.error("m must be >= 1")
            config = RunConfig(m=args.m, seed=args.seed, capacity=args.capacity)
            return cmd_bench(config, args.instances, args.papers, args.reviewers,
                             args.topics, args.density)

        parser.error(f"unknown command {args.command!r}")
    except ParseError as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))
    except ValueError as exc:
        return _fail(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
