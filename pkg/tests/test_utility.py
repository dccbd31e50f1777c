import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import brute_certificate, brute_diff_extrema, conjunction_formula
from sbfe.core import (
    STAR,
    Branch,
    ConstantFunctionError,
    InvalidUtilityError,
    Leaf,
    ProductDistribution,
    all_assignments,
    all_partials,
)
from sbfe.instances import gen_cdnf, gen_linear_system, gen_threshold, gen_truth_table
from sbfe.problems import disjunction_formula
from sbfe.utility import (
    CdnfFormula,
    LinearSystem,
    ThresholdFormula,
    TruthTable,
    UtilityFunction,
    cdnf_utility,
    combine_and,
    combine_or,
    decision_tree_to_cdnf,
    expected_gain,
    marginal,
    ranking_pair_utility,
    threshold_utility,
    truth_table_utility,
)
from sbfe.verify import check_axioms, check_goal_certificate


def truncated_modular(n, weights, cap) -> UtilityFunction:
    """Monotone submodular test family: capped sum of per-outcome weights."""

    def fn(b):
        total = 0
        for i, v in enumerate(b):
            if v != STAR:
                total += weights[i][v]
        return min(cap, total)

    return UtilityFunction(n, cap, fn)


class TestMarginals:
    def test_cdnf_jump_to_goal(self):
        g = cdnf_utility(conjunction_formula(2))
        assert g.goal == 2
        assert marginal(g, (STAR, STAR), 0, 0) == 2

    def test_tested_position_gains_nothing(self):
        g = cdnf_utility(conjunction_formula(2))
        assert marginal(g, (1, STAR), 0, 0) == 0
        assert expected_gain(g, (1, STAR), 0, ProductDistribution.uniform(2)) == 0.0

    def test_threshold_jump(self):
        g = threshold_utility(ThresholdFormula((1, 1), 1))
        assert g.goal == 2
        assert marginal(g, (STAR, STAR), 0, 1) == 2

    def test_expected_gain_or(self):
        g = cdnf_utility(disjunction_formula(2))
        d = ProductDistribution.uniform(2)
        assert expected_gain(g, (STAR, STAR), 0, d) == pytest.approx(1.5)
        assert expected_gain(g, (STAR, STAR), 1, d) == pytest.approx(1.5)

    def test_broken_utility_detected(self):
        g = UtilityFunction(1, 1, lambda b: 1 if b[0] == STAR else 0)
        with pytest.raises(InvalidUtilityError):
            marginal(g, (STAR,), 0, 1)


class TestCombinators:
    def test_or_formula(self):
        g0 = UtilityFunction(1, 3, lambda b: 2)
        g1 = UtilityFunction(1, 2, lambda b: 1)
        g = combine_or(g0, g1)
        assert g.goal == 6
        assert g.value((STAR,)) == 6 - (3 - 2) * (2 - 1)

    def test_or_zero_factor(self):
        g0 = UtilityFunction(1, 3, lambda b: 3)
        g1 = UtilityFunction(1, 2, lambda b: 0)
        assert combine_or(g0, g1).value((STAR,)) == 6

    def test_or_at_zero(self):
        g0 = UtilityFunction(1, 3, lambda b: 0)
        g1 = UtilityFunction(1, 2, lambda b: 0)
        assert combine_or(g0, g1).value((STAR,)) == 0

    def test_and_formula(self):
        g0 = UtilityFunction(1, 3, lambda b: 2)
        g1 = UtilityFunction(1, 2, lambda b: 2)
        g = combine_and(g0, g1)
        assert g.goal == 5
        assert g.value((STAR,)) == 4

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            combine_or(UtilityFunction(1, 1, lambda b: 0), UtilityFunction(2, 1, lambda b: 0))

    def test_goal_semantics_exhaustive(self):
        # or-combined covers iff either side covers; and-combined iff both
        f_thr = ThresholdFormula((1, -2, 1), 0)
        f_cdnf = gen_cdnf(random.Random(4), 3)
        g0 = threshold_utility(f_thr)
        g1 = cdnf_utility(f_cdnf)
        g_or = combine_or(g0, g1)
        g_and = combine_and(g0, g1)
        for b in all_partials(3):
            at0 = g0.value(b) == g0.goal
            at1 = g1.value(b) == g1.goal
            assert (g_or.value(b) == g_or.goal) == (at0 or at1)
            assert (g_and.value(b) == g_and.goal) == (at0 and at1)

    @given(
        st.integers(2, 4).flatmap(
            lambda n: st.tuples(
                st.just(n),
                st.lists(
                    st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=n, max_size=n
                ),
                st.integers(1, 6),
                st.lists(
                    st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=n, max_size=n
                ),
                st.integers(1, 6),
            )
        )
    )
    def test_combinators_preserve_axioms(self, case):
        n, w0, cap0, w1, cap1 = case
        g0 = truncated_modular(n, w0, cap0)
        g1 = truncated_modular(n, w1, cap1)
        assert check_axioms(g0, "exhaustive").ok
        assert check_axioms(combine_or(g0, g1), "exhaustive").ok
        assert check_axioms(combine_and(g0, g1), "exhaustive").ok

    def test_goal_overflow_rejected(self):
        big = UtilityFunction(1, 2**32, lambda b: 0)
        with pytest.raises(ValueError):
            combine_or(big, big)


class TestCdnf:
    def test_conjunction_values(self):
        f = conjunction_formula(2)
        g = cdnf_utility(f)
        assert g.goal == f.k * f.d == 2
        assert g.value((1, STAR)) == 1
        assert g.value((0, STAR)) == 2
        assert g.value((STAR, STAR)) == 0

    def test_goal_is_kd(self):
        rng = random.Random(7)
        for _ in range(10):
            f = gen_cdnf(rng, 5)
            assert cdnf_utility(f).goal == f.k * f.d

    def test_inconsistent_pair_rejected(self):
        with pytest.raises(ValueError):
            CdnfFormula(2, (frozenset({1}),), (frozenset({2}),))

    def test_constant_detection(self):
        f = CdnfFormula(1, (frozenset({1, -1}),), (frozenset({1}), frozenset({-1})))
        assert f.constant_value() == 1
        with pytest.raises(ConstantFunctionError):
            cdnf_utility(f)

    def test_mixed_degenerate_rejected(self):
        f = CdnfFormula(
            2,
            (frozenset({1}), frozenset({2, -2})),
            (frozenset({1}),),
        )
        assert f.constant_value() is None
        assert f.certificate((1, STAR)) == 1  # via effective clauses only
        with pytest.raises(ValueError):
            cdnf_utility(f)

    def test_axioms(self):
        rng = random.Random(13)
        for _ in range(5):
            f = gen_cdnf(rng, 4)
            assert check_axioms(cdnf_utility(f), "exhaustive").ok


class TestDecisionTreeConversion:
    def test_single_test_tree(self):
        t = Branch(0, Leaf(0), Leaf(1))
        f = decision_tree_to_cdnf(t, 1)
        assert f.clauses == (frozenset({1}),)
        assert f.terms == (frozenset({1}),)

    def test_conjunction_tree(self):
        t = Branch(0, Leaf(0), Branch(1, Leaf(0), Leaf(1)))
        f = decision_tree_to_cdnf(t, 2)
        assert f.k == 2 and f.d == 1
        assert frozenset({1, 2}) in f.terms
        for x in all_assignments(2):
            assert f.evaluate(x) == int(x[0] == 1 and x[1] == 1)

    def test_leaf_count_identity(self):
        rng = random.Random(3)
        from sbfe.instances import _random_tree

        for _ in range(30):
            t = _random_tree(rng, list(range(4)), 3)
            leaves = sum(1 for _ in _leaves(t))
            try:
                f = decision_tree_to_cdnf(t, 4)
            except ConstantFunctionError:
                continue
            assert f.k + f.d == leaves
            from sbfe.core import tree_decide

            for x in all_assignments(4):
                assert f.evaluate(x) == tree_decide(t, x)

    def test_constant_tree_short_circuits(self):
        with pytest.raises(ConstantFunctionError) as exc:
            decision_tree_to_cdnf(Branch(0, Leaf(1), Leaf(1)), 1)
        assert exc.value.value == 1


def _leaves(t):
    if isinstance(t, Leaf):
        yield t
    else:
        yield from _leaves(t.if0)
        yield from _leaves(t.if1)


class TestThreshold:
    def test_or_threshold_values(self):
        f = ThresholdFormula((1, 1), 1)
        assert (f.r_min, f.r_max) == (-1, 1)
        g = threshold_utility(f)
        assert g.goal == (-f.r_min) * (f.r_max + 1) == 2
        assert g.value((0, STAR)) == 1
        assert g.value((0, 0)) == 2
        assert g.value((STAR, STAR)) == 0

    def test_constant_false_short_circuit(self):
        f = ThresholdFormula((1, 1), 3)
        assert f.constant_value() == 0
        with pytest.raises(ConstantFunctionError):
            threshold_utility(f)

    def test_extrema_match_brute_force(self):
        rng = random.Random(5)
        for _ in range(10):
            f = gen_threshold(rng, 4)
            for b in itertools.product((0, 1, STAR), repeat=4):
                lo, hi = brute_diff_extrema(f.coeffs, b)
                assert f.min_of(b) == lo - f.theta
                assert f.max_of(b) == hi - f.theta

    def test_axioms(self):
        rng = random.Random(17)
        for _ in range(5):
            f = gen_threshold(rng, 4)
            assert check_axioms(threshold_utility(f), "exhaustive").ok


class TestTruthTable:
    def test_single_variable(self):
        f = TruthTable(1, (0, 1))
        g = truth_table_utility(f)
        assert g.goal == 1
        assert g.value((1,)) == 1

    def test_or_table(self):
        f = TruthTable(2, (0, 1, 1, 1))
        g = truth_table_utility(f)
        assert g.goal == 3
        assert g.value((1, STAR)) == 3
        assert g.value((STAR, STAR)) == 0

    def test_constant_short_circuit(self):
        with pytest.raises(ConstantFunctionError):
            truth_table_utility(TruthTable(1, (1, 1)))

    def test_axioms(self):
        rng = random.Random(19)
        for _ in range(4):
            f = gen_truth_table(rng, 4)
            assert check_axioms(truth_table_utility(f), "exhaustive").ok


class TestRankingPairs:
    def test_two_variables(self):
        sys = LinearSystem(((1, 0), (0, 1)))
        g = ranking_pair_utility(sys, 0, 1)
        assert g.goal == 1
        assert g.value((1, STAR)) == 1
        assert g.value((STAR, STAR)) == 0

    def test_identical_functions_trivial(self):
        sys = LinearSystem(((1, 2), (1, 2)))
        g = ranking_pair_utility(sys, 0, 1)
        assert g.goal == 0
        assert g.value((STAR, STAR)) == 0

    def test_requires_ordered_pair(self):
        sys = LinearSystem(((1, 0), (0, 1)))
        with pytest.raises(ValueError):
            ranking_pair_utility(sys, 1, 0)

    def test_goal_iff_order_decided(self):
        rng = random.Random(23)
        for _ in range(8):
            sys = gen_linear_system(rng, 2, 3)
            g = ranking_pair_utility(sys, 0, 1)
            delta = sys.diff(0, 1)
            for b in all_partials(3):
                lo, hi = brute_diff_extrema(delta, b)
                decided = hi <= 0 or lo >= 0
                assert (g.value(b) == g.goal) == decided

    def test_axioms(self):
        rng = random.Random(29)
        for _ in range(5):
            sys = gen_linear_system(rng, 2, 4)
            assert check_axioms(ranking_pair_utility(sys, 0, 1), "exhaustive").ok


class TestGoalCertificate:
    def test_constructions_small(self):
        rng = random.Random(31)
        f1 = gen_cdnf(rng, 4)
        assert check_goal_certificate(cdnf_utility(f1), f1).ok
        f2 = gen_threshold(rng, 4)
        assert check_goal_certificate(threshold_utility(f2), f2).ok
        f3 = gen_truth_table(rng, 4)
        assert check_goal_certificate(truth_table_utility(f3), f3).ok

    def test_certificate_agreement(self):
        rng = random.Random(37)
        f = gen_cdnf(rng, 4)
        g = cdnf_utility(f)
        for b in all_partials(4):
            assert (g.value(b) == g.goal) == (brute_certificate(f, b) is not None)
