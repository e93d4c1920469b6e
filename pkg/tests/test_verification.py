import math
from fractions import Fraction

import pytest

from corrsubopt import SubgraphMask, compile_formula, load_graph
from corrsubopt.reduction import ReductionInstance
from corrsubopt.scoring import neighbourhood_discrepancy
from corrsubopt.verification import (
    ALL_CHECKS,
    SearchBudgetExceeded,
    attachment_violations,
    find_low_discrepancy_mask,
    infeasible_score_bound,
    iter_valid_masks,
    leaf_discrepancy_total,
    max_sampled_score,
    reduction_score,
    run_checks,
    witness_score_bound,
)

import helpers


class TestExactQuantities:
    def test_full_graph_attachment_discrepancies(self, sat3):
        inst = compile_formula(sat3, 2)
        full = SubgraphMask.full(inst.graph)
        g = inst.graph
        # zp keeps z plus 3t^2 leaves: deviation 3t/(3t^2+1) squared
        assert neighbourhood_discrepancy(g, full, inst.zp(1)) == Fraction(36, 169)
        # ap keeps a plus t^2 leaves: deviation t/(t^2+1) squared
        assert neighbourhood_discrepancy(g, full, inst.ap(1)) == Fraction(4, 25)

    def test_attachment_bound_tightens_with_t(self, sat3):
        inst = compile_formula(sat3, 4)
        full = SubgraphMask.full(inst.graph)
        nd = neighbourhood_discrepancy(inst.graph, full, inst.zp(1))
        assert nd == Fraction(144, 2401)
        assert nd < Fraction(1, 16)

    def test_leaf_total_is_6nt_on_full_graph(self, sat3, unsat4):
        for formula, t in ((sat3, 2), (unsat4, 3)):
            inst = compile_formula(formula, t)
            total = leaf_discrepancy_total(inst, SubgraphMask.full(inst.graph))
            assert total == 6 * formula.variable_count * t

    def test_attachment_violations_empty_on_full_graph(self, unsat4):
        inst = compile_formula(unsat4, 2)
        assert attachment_violations(inst, SubgraphMask.full(inst.graph)) == []


class TestInfeasibilitySearch:
    def test_unsatisfiable_exhausts_without_hit(self, unsat4):
        inst = compile_formula(unsat4, 2)
        mask, nodes = find_low_discrepancy_mask(inst)
        assert mask is None
        assert nodes > 0

    def test_satisfiable_finds_counterexample(self, sat3):
        inst = compile_formula(sat3, 2)
        mask, _ = find_low_discrepancy_mask(inst)
        assert mask is not None
        threshold = Fraction(inst.t**2, 9)
        for vtx in inst.designated_vertices:
            assert neighbourhood_discrepancy(inst.graph, mask, vtx) < threshold

    def test_budget_raises_instead_of_passing(self, unsat4):
        inst = compile_formula(unsat4, 2)
        with pytest.raises(SearchBudgetExceeded):
            find_low_discrepancy_mask(inst, node_budget=3)


class TestScoreBounds:
    def test_bound_values(self, sat3):
        inst = compile_formula(sat3, 2)
        n, t = 3, 2
        assert witness_score_bound(inst) == 6 * n * math.log(t) - n * math.log(10 * n * t)
        assert infeasible_score_bound(inst) == (
            6 * n * math.log(t) + 20 * n - n * math.log(t * t / 9)
        )

    def test_enumeration_branch_on_tiny_instance(self):
        g = load_graph("4 5\n0 0\n1 4\n2 1\n3 9\n0 1\n0 2\n0 3\n1 2\n2 3\n")
        inst = ReductionInstance(
            graph=g, t=2, variable_count=2, roles=("x",) * 4, clause_slots=()
        )
        best, count = max_sampled_score(inst)
        masks = list(iter_valid_masks(g))
        assert count == len(masks)
        values = [reduction_score(inst, m) for m in masks]
        from corrsubopt import compare_scores

        top = max(
            values,
            key=lambda v: (v.value is None, v.value if v.value is not None else v.log_degree_sum),
        )
        assert compare_scores(best, top) >= 0

    def test_sampling_branch_on_compiled_instance(self, sat3):
        inst = compile_formula(sat3, 2)
        best, count = max_sampled_score(inst, samples=50, seed=1)
        # 30 free edges, so the sampler runs: full mask plus 50 samples
        assert count == 51
        assert best.value is None or best.value <= infeasible_score_bound(inst)


class TestIterValidMasks:
    def test_matches_brute_force_count(self):
        import random

        rng = random.Random(4)
        g = helpers.random_graph(rng, max_vertices=6)
        ours = sum(1 for _ in iter_valid_masks(g))
        brute = sum(1 for _ in helpers.enumerate_valid_bitlists(g))
        assert ours == brute


class TestRunChecks:
    def test_all_pass_on_satisfiable(self, sat3):
        records = run_checks(sat3, 2, mask_samples=15, lemma_samples=100)
        assert [r.check for r in records] == list(ALL_CHECKS)
        assert all(r.status == "pass" for r in records)

    def test_all_pass_on_unsatisfiable(self, unsat4):
        records = run_checks(unsat4, 2, mask_samples=15, lemma_samples=100)
        by = {r.check: r for r in records}
        assert by["6"].status == "pass"
        assert "exhaustive" in by["6"].details
        assert by["5"].status == "inconclusive"
        assert by["lemmas"].status == "pass"
        for c in ("1", "2", "3", "4"):
            assert by[c].status == "pass"

    def test_negative_control_reported(self, sat3):
        records = run_checks(sat3, 2, checks=("6",))
        assert records[0].status == "pass"
        assert "negative control" in records[0].details

    def test_tiny_budget_goes_inconclusive(self, unsat4):
        records = run_checks(unsat4, 2, checks=("6",), search_budget=3)
        assert records[0].status == "inconclusive"

    def test_bad_assignment_fails_witness_check(self, sat3):
        records = run_checks(sat3, 2, checks=("5", "lemmas"),
                             assignment=(True, True, False))
        assert all(r.status == "fail" for r in records)

    def test_good_assignment_restricts_witness_check(self, sat3):
        records = run_checks(sat3, 2, checks=("5",), assignment=(True, False, False))
        assert records[0].status == "pass"
        assert ("assignments_checked", "1") in records[0].quantities

    def test_unknown_selector_rejected(self, sat3):
        with pytest.raises(ValueError, match="unknown checks"):
            run_checks(sat3, 2, checks=("7",))

    def test_records_carry_instance_label(self, sat3):
        records = run_checks(sat3, 2, checks=("1",))
        assert records[0].instance.startswith("n=3 t=2 formula=")
