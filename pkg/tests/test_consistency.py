import pytest
from hypothesis import given, settings, strategies as st

from pcsp.consistency import (
    all_partial_homs,
    compute_strategy,
    format_strategy,
    is_strategy,
    leq_k,
    parse_strategy,
    width_counterexample_check,
)
from pcsp.core import Signature, Structure, complete_graph, cycle, hom_search
from pcsp.errors import BudgetExceededError


def random_structure(data, n_max=4, carrier=None):
    n = carrier if carrier is not None else data.draw(st.integers(1, n_max))
    ar = data.draw(st.integers(1, 2))
    tups = data.draw(st.lists(st.tuples(*[st.integers(0, n - 1)] * ar), max_size=6))
    return Structure(Signature((("R", ar),)), n, (("R", tuple(tups)),)), ar


class TestComputeStrategy:
    def test_odd_cycle_vs_k2_has_no_3_strategy(self):
        assert compute_strategy(cycle(5), complete_graph(2), 3) is None

    def test_even_cycle_vs_k2_has_3_strategy(self):
        s = compute_strategy(cycle(4), complete_graph(2), 3)
        assert s is not None
        assert is_strategy(s, cycle(4), complete_graph(2), 3)

    def test_empty_instance(self):
        empty = Structure(Signature((("E", 2),)), 0)
        assert compute_strategy(empty, complete_graph(2), 3) == frozenset({()})

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            compute_strategy(cycle(12), complete_graph(3), 4, budget=100)

    def test_result_is_maximal(self):
        # every 3-strategy is contained in the computed fixed point: check
        # that the fixed point is itself a strategy and that re-running the
        # removal on it changes nothing
        s = compute_strategy(complete_graph(3), complete_graph(3), 2)
        assert s == frozenset(h for h in all_partial_homs(
            complete_graph(3), complete_graph(3), 2) if h in s)
        assert is_strategy(s, complete_graph(3), complete_graph(3), 2)


class TestLeqK:
    def test_c5_not_leq3_k2(self):
        assert not leq_k(cycle(5), complete_graph(2), 3)

    def test_c5_leq2_k2(self):
        # 2-consistency is too weak to refute odd cycles
        assert leq_k(cycle(5), complete_graph(2), 2)

    def test_k3_leq4_k3(self):
        assert leq_k(complete_graph(3), complete_graph(3), 4)

    def test_hom_implies_leq_all_k(self):
        for k in (1, 2, 3, 4):
            assert leq_k(cycle(6), complete_graph(2), k)

    @given(st.data())
    @settings(max_examples=30, deadline=None)
    def test_hom_implies_strategy(self, data):
        inst, ar = random_structure(data)
        sig = inst.signature
        tn = data.draw(st.integers(1, 3))
        tt = data.draw(st.lists(st.tuples(*[st.integers(0, tn - 1)] * ar), max_size=8))
        tmpl = Structure(sig, tn, (("R", tuple(tt)),))
        if hom_search(inst, tmpl) is not None:
            for k in (1, 2, 3):
                assert leq_k(inst, tmpl, k)

    @given(st.data())
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_k(self, data):
        inst, ar = random_structure(data)
        tn = data.draw(st.integers(1, 2))
        tt = data.draw(st.lists(st.tuples(*[st.integers(0, tn - 1)] * ar), max_size=4))
        tmpl = Structure(inst.signature, tn, (("R", tuple(tt)),))
        for k in (1, 2, 3):
            if leq_k(inst, tmpl, k + 1):
                assert leq_k(inst, tmpl, k)

    @given(st.data())
    @settings(max_examples=20, deadline=None)
    def test_returned_strategy_satisfies_invariants(self, data):
        inst, ar = random_structure(data, n_max=3)
        tn = data.draw(st.integers(1, 2))
        tt = data.draw(st.lists(st.tuples(*[st.integers(0, tn - 1)] * ar), max_size=4))
        tmpl = Structure(inst.signature, tn, (("R", tuple(tt)),))
        k = data.draw(st.integers(1, 3))
        s = compute_strategy(inst, tmpl, k)
        if s is not None:
            assert is_strategy(s, inst, tmpl, min(k, inst.n))


class TestWidthCheck:
    def test_k2_width3_on_small_cycles(self):
        report = width_counterexample_check(
            complete_graph(2), complete_graph(2), 3,
            [cycle(n) for n in range(3, 8)])
        assert not any(row["counterexample"] for row in report)

    def test_empty_instance_list(self):
        assert width_counterexample_check(
            complete_graph(2), complete_graph(2), 3, []) == []

    def test_weak_k_can_produce_counterexamples(self):
        report = width_counterexample_check(
            complete_graph(2), complete_graph(2), 2,
            [cycle(n) for n in (3, 5, 7)])
        assert all(row["counterexample"] for row in report)


class TestStrategySerialization:
    def test_roundtrip(self):
        s = compute_strategy(cycle(4), complete_graph(2), 2)
        assert parse_strategy(format_strategy(s)) == s
