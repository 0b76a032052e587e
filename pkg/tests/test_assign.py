"""Assignment algorithms: golden instances, oracle equality, and contracts."""

import random
from itertools import permutations

import pytest

from revmatch.assign import (
    SortedColumns,
    assign_greedy,
    assign_heuristic,
    assign_hungarian,
    brute_force_optimal,
    hungarian_pass,
)
from revmatch.core import SimilarityMatrix, weight_of_matching

from conftest import GOLDEN_5X5, GOLDEN_5X5_OPTIMUM, feasible_instance, random_matrix

TOL = 1e-9


class TestSortedColumns:
    def test_golden_matrix_column_order(self, golden_matrix):
        # published sorted-column table for the 5x5 matrix, dashes omitted
        columns = SortedColumns.from_matrix(golden_matrix)
        assert columns.candidates("p1") == (
            ("r1", 0.40), ("r5", 0.38), ("r2", 0.20), ("r3", 0.18), ("r4", 0.17))
        assert columns.candidates("p2") == (
            ("r1", 0.54), ("r5", 0.42), ("r4", 0.30), ("r3", 0.20), ("r2", 0.10))
        assert columns.candidates("p3") == (
            ("r5", 0.27), ("r4", 0.25), ("r1", 0.21), ("r2", 0.14), ("r3", 0.13))
        assert columns.candidates("p4") == (("r1", 0.27), ("r5", 0.22), ("r4", 0.17))
        assert columns.candidates("p5") == (("r1", 0.25), ("r4", 0.14), ("r5", 0.09))
        assert columns.scarcity("p4") == 3

    def test_zero_capacity_reviewers_excluded(self, golden_matrix):
        columns = SortedColumns.from_matrix(golden_matrix, {"r1": 0, "r2": 1, "r3": 1,
                                                            "r4": 1, "r5": 1})
        assert all(rid != "r1" for rid, _ in columns.candidates("p1"))

    def test_ties_break_by_reviewer_order(self):
        matrix = SimilarityMatrix(["rA", "rB"], ["p1"], [[0.5], [0.5]])
        columns = SortedColumns.from_matrix(matrix)
        assert columns.candidates("p1") == (("rA", 0.5), ("rB", 0.5))


class TestHungarianPass:
    def test_golden_matrix_equals_permutation_oracle(self, golden_matrix):
        pairs = hungarian_pass(golden_matrix, 1)
        got = sum(w for _, _, w in pairs)
        best = max(
            sum(GOLDEN_5X5[perm[j]][j] for j in range(5) if GOLDEN_5X5[perm[j]][j] > 0)
            for perm in permutations(range(5))
        )
        assert best == pytest.approx(GOLDEN_5X5_OPTIMUM, abs=TOL)
        assert got == pytest.approx(best, abs=TOL)

    def test_single_cell(self):
        matrix = SimilarityMatrix(["r1"], ["p1"], [[0.7]])
        assert hungarian_pass(matrix, 1) == [("p1", "r1", 0.7)]

    def test_all_zero_matrix_matches_nothing(self):
        matrix = SimilarityMatrix(["r1", "r2"], ["p1", "p2"], [[0.0, 0.0], [0.0, 0.0]])
        assert hungarian_pass(matrix, 1) == []

    def test_excluded_pairs_never_matched(self):
        matrix = SimilarityMatrix(["r1"], ["p1"], [[0.9]])
        assert hungarian_pass(matrix, 1, excluded_pairs={("p1", "r1")}) == []

    def test_capacity_duplication_allows_multiple_papers_per_pass(self):
        matrix = SimilarityMatrix(["r1"], ["p1", "p2"], [[0.9, 0.8]])
        pairs = hungarian_pass(matrix, {"r1": 2})
        assert pairs == [("p1", "r1", 0.9), ("p2", "r1", 0.8)]

    def test_zero_capacity_yields_nothing(self, golden_matrix):
        assert hungarian_pass(golden_matrix, 0) == []


class TestAssignHungarian:
    def test_m1_equals_single_pass(self, golden_matrix):
        outcome = assign_hungarian(golden_matrix, 1, 1)
        pairs = hungarian_pass(golden_matrix, 1)
        assert sorted(outcome.assignment.pairs()) == sorted(pairs)
        assert outcome.total_weight == pytest.approx(GOLDEN_5X5_OPTIMUM, abs=TOL)
        assert outcome.uncovered == ()
        assert outcome.rounds == 1

    def test_m2_covers_everything_when_capacity_suffices(self):
        rng = random.Random(1)
        matrix = random_matrix(rng, 6, 3, zero_prob=0.0)
        outcome = assign_hungarian(matrix, 2, 1)
        assert outcome.uncovered == ()
        counts = outcome.assignment.paper_counts()
        assert all(counts[pid] == 2 for pid in matrix.paper_ids)

    def test_pigeonhole_reports_shortfall(self):
        # two papers, one competent reviewer with a single slot
        matrix = SimilarityMatrix(["r1"], ["p1", "p2"], [[0.9, 0.8]])
        outcome = assign_hungarian(matrix, 1, 1)
        assert len(outcome.assignment) == 1
        assert outcome.uncovered == (("p2", 1),)

    def test_no_pair_repeats_across_passes(self):
        rng = random.Random(7)
        matrix = random_matrix(rng, 4, 4, zero_prob=0.2)
        outcome = assign_hungarian(matrix, 3, 3)
        pairs = [(p, r) for p, r, _ in outcome.assignment.pairs()]
        assert len(pairs) == len(set(pairs))


class TestAssignGreedy:
    def test_trap_instance_strands_second_paper(self, greedy_trap_matrix):
        outcome = assign_greedy(greedy_trap_matrix, 1, 1)
        assert outcome.total_weight == pytest.approx(0.9, abs=TOL)
        assert outcome.uncovered == (("p2", 1),)
        assert ("p1", "r1") in outcome.assignment

    def test_order_changes_result(self, greedy_trap_matrix):
        outcome = assign_greedy(greedy_trap_matrix, 1, 1, paper_order=["p2", "p1"])
        assert outcome.uncovered == ()
        assert outcome.total_weight == pytest.approx(1.5, abs=TOL)

    def test_single_paper_takes_best_reviewer(self):
        matrix = SimilarityMatrix(["r1", "r2"], ["p1"], [[0.3], [0.8]])
        outcome = assign_greedy(matrix, 1, 1)
        assert ("p1", "r2") in outcome.assignment

    def test_zero_matrix_covers_nothing(self):
        matrix = SimilarityMatrix(["r1"], ["p1", "p2"], [[0.0, 0.0]])
        outcome = assign_greedy(matrix, 1, 1)
        assert len(outcome.assignment) == 0
        assert outcome.uncovered == (("p1", 1), ("p2", 1))

    def test_bad_order_rejected(self, greedy_trap_matrix):
        with pytest.raises(ValueError, match="permutation"):
            assign_greedy(greedy_trap_matrix, 1, 1, paper_order=["p1"])


class TestAssignHeuristic:
    def test_trap_instance_covers_both(self, greedy_trap_matrix):
        outcome = assign_heuristic(greedy_trap_matrix, 1, 1)
        assert outcome.uncovered == ()
        assert outcome.total_weight == pytest.approx(1.5, abs=TOL)
        # the scarce paper keeps the contested reviewer
        assert ("p2", "r1") in outcome.assignment
        assert ("p1", "r2") in outcome.assignment

    def test_golden_matrix_full_coverage(self, golden_matrix):
        outcome = assign_heuristic(golden_matrix, 1, 1)
        assert outcome.uncovered == ()

    def test_scarce_paper_wins_contested_reviewer(self):
        # both papers want r1; p2 has no alternative and lower candidate count
        matrix = SimilarityMatrix(
            ["r1", "r2"], ["p1", "p2"], [[0.9, 0.5], [0.4, 0.0]]
        )
        outcome = assign_heuristic(matrix, 1, 1)
        assert ("p2", "r1") in outcome.assignment
        assert ("p1", "r2") in outcome.assignment

    def test_equal_scarcity_prefers_weight(self):
        matrix = SimilarityMatrix(
            ["r1", "r2"], ["p1", "p2"], [[0.9, 0.8], [0.3, 0.4]]
        )
        outcome = assign_heuristic(matrix, 1, 1)
        assert ("p1", "r1") in outcome.assignment
        assert ("p2", "r2") in outcome.assignment

    def test_coverage_guarantee_within_round(self):
        # an unplaced paper with candidates means every candidate filled up
        # with strictly higher-priority papers
        for trial in range(200):
            rng = random.Random(trial)
            matrix = random_matrix(rng, rng.randint(1, 5), rng.randint(1, 6), zero_prob=0.45)
            caps = {rid: rng.randint(1, 2) for rid in matrix.reviewer_ids}
            outcome = assign_heuristic(matrix, 1, caps)
            columns = SortedColumns.from_matrix(matrix, caps)
            loads = outcome.assignment.reviewer_loads()
            assigned = {p: r for p, r, _ in outcome.assignment.pairs()}

            def priority(pid, rid):
                return (
                    columns.scarcity(pid),
                    -matrix.weight(rid, pid),
                    matrix.paper_index(pid),
                )

            for pid, _ in outcome.uncovered:
                for rid, _ in columns.candidates(pid):
                    assert loads.get(rid, 0) == caps[rid], (trial, pid, rid)
                    holders = [p for p, r in assigned.items() if r == rid]
                    assert all(priority(q, rid) < priority(pid, rid) for q in holders)

    def test_rounds_do_not_duplicate_pairs(self):
        rng = random.Random(3)
        matrix = random_matrix(rng, 4, 4, zero_prob=0.2)
        outcome = assign_heuristic(matrix, 3, 3)
        pairs = [(p, r) for p, r, _ in outcome.assignment.pairs()]
        assert len(pairs) == len(set(pairs))


class TestBruteForce:
    def test_single_cell(self):
        matrix = SimilarityMatrix(["r1"], ["p1"], [[0.7]])
        outcome = brute_force_optimal(matrix, 1, 1)
        assert outcome.total_weight == pytest.approx(0.7, abs=TOL)

    def test_golden_matrix_optimum(self, golden_matrix):
        outcome = brute_force_optimal(golden_matrix, 1, 1)
        assert outcome.total_weight == pytest.approx(GOLDEN_5X5_OPTIMUM, abs=TOL)

    def test_infeasible_capacity_reports_partial(self):
        matrix = SimilarityMatrix(["r1"], ["p1", "p2"], [[0.9, 0.8]])
        outcome = brute_force_optimal(matrix, 1, 1)
        assert outcome.total_weight == pytest.approx(0.9, abs=TOL)
        assert outcome.uncovered == (("p2", 1),)

    def test_oversized_instance_rejected(self):
        rng = random.Random(0)
        matrix = random_matrix(rng, 9, 2, zero_prob=0.0)
        with pytest.raises(ValueError, match="too large"):
            brute_force_optimal(matrix, 1, 1)
        matrix = random_matrix(rng, 4, 6, zero_prob=0.0)
        with pytest.raises(ValueError, match="too large"):
            brute_force_optimal(matrix, 2, 1)

    def test_respects_capacities(self):
        matrix = SimilarityMatrix(["r1", "r2"], ["p1", "p2"],
                                  [[0.9, 0.8], [0.1, 0.1]])
        outcome = brute_force_optimal(matrix, 1, {"r1": 1, "r2": 1})
        assert outcome.assignment.limit_violations(1, {"r1": 1, "r2": 1}) == []
        assert outcome.total_weight == pytest.approx(1.0, abs=TOL)


class TestContracts:
    def algorithms(self):
        return (
            ("hungarian", assign_hungarian),
            ("greedy", assign_greedy),
            ("heuristic", assign_heuristic),
        )

    def test_constraints_hold_on_random_instances(self):
        for trial in range(150):
            rng = random.Random(1000 + trial)
            n_r, n_p = rng.randint(1, 6), rng.randint(1, 6)
            m = rng.randint(1, 3)
            matrix = random_matrix(rng, n_r, n_p)
            caps = {rid: rng.randint(1, 3) for rid in matrix.reviewer_ids}
            for name, algo in self.algorithms():
                outcome = algo(matrix, m, caps)
                assert outcome.assignment.limit_violations(m, caps) == [], (name, trial)
                assert outcome.total_weight == pytest.approx(
                    weight_of_matching(outcome.assignment), abs=TOL
                )
                counts = outcome.assignment.paper_counts()
                expected_uncovered = tuple(
                    (pid, m - counts.get(pid, 0))
                    for pid in matrix.paper_ids
                    if counts.get(pid, 0) < m
                )
                assert outcome.uncovered == expected_uncovered, name

    def test_hungarian_dominates_at_m1(self):
        for trial in range(150):
            rng = random.Random(2000 + trial)
            matrix = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
            caps = {rid: rng.randint(1, 3) for rid in matrix.reviewer_ids}
            best = assign_hungarian(matrix, 1, caps).total_weight
            assert best >= assign_greedy(matrix, 1, caps).total_weight - TOL
            assert best >= assign_heuristic(matrix, 1, caps).total_weight - TOL

    def test_heuristic_coverage_never_below_greedy(self):
        # coverage in the stranded-paper sense: papers with >= 1 reviewer
        for trial in range(150):
            rng = random.Random(3000 + trial)
            matrix = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
            m = rng.randint(1, 3)
            caps = {rid: rng.randint(1, 3) for rid in matrix.reviewer_ids}
            greedy_papers = {p for p, _, _ in assign_greedy(matrix, m, caps).assignment.pairs()}
            heuristic_papers = {p for p, _, _ in assign_heuristic(matrix, m, caps).assignment.pairs()}
            assert len(heuristic_papers) >= len(greedy_papers), trial

    def test_hungarian_matches_oracle_at_m1(self):
        # single-pass assignment solves exactly the oracle's m=1 problem
        for trial in range(60):
            rng = random.Random(4000 + trial)
            n_p, n_r = rng.randint(1, 5), rng.randint(1, 5)
            matrix, caps = feasible_instance(rng, n_r, n_p, 1)
            oracle = brute_force_optimal(matrix, 1, caps).total_weight
            got = assign_hungarian(matrix, 1, caps).total_weight
            assert got == pytest.approx(oracle, abs=TOL), trial

    def test_every_pass_matches_oracle_on_its_residual(self):
        # each pass is a maximum-weight one-per-paper matching: verified by
        # running the exhaustive oracle at m=1 on the pass's residual
        # instance (already-assigned cells zeroed, capacities decremented)
        for trial in range(40):
            rng = random.Random(6000 + trial)
            n_p, n_r = rng.randint(1, 5), rng.randint(1, 5)
            m = rng.randint(1, 2)
            matrix, caps = feasible_instance(rng, n_r, n_p, m)
            rcaps = dict(caps)
            excluded: set[tuple[str, str]] = set()
            for _ in range(m):
                pairs = hungarian_pass(matrix, rcaps, excluded)
                weights = matrix.weights.copy()
                for pid, rid in excluded:
                    weights[matrix.reviewer_index(rid), matrix.paper_index(pid)] = 0.0
                residual = SimilarityMatrix(matrix.reviewer_ids, matrix.paper_ids, weights)
                want = brute_force_optimal(residual, 1, rcaps).total_weight
                got = sum(w for _, _, w in pairs)
                assert got == pytest.approx(want, abs=TOL), trial
                for pid, rid, _ in pairs:
                    rcaps[rid] -= 1
                    excluded.add((pid, rid))

    def test_determinism(self):
        for trial in range(30):
            rng = random.Random(5000 + trial)
            matrix = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
            m = rng.randint(1, 2)
            caps = {rid: rng.randint(1, 3) for rid in matrix.reviewer_ids}
            for name, algo in self.algorithms():
                first = algo(matrix, m, caps)
                second = algo(matrix, m, caps)
                assert first.assignment == second.assignment, name
                assert first.uncovered == second.uncovered, name
