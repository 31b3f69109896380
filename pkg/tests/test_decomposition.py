"""Chain components, cyclic structure, entropy, exact chain reachability."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from shiftlab.decomposition import (
    chain_components,
    chain_equivalent,
    class_of_word,
    cyclic_structure,
    delta_chain_reachable,
    entropy,
    has_positive_entropy,
    is_irreducible,
    is_mixing,
    mixing_constant,
    restrict_graph_to_cr,
    sync_length,
)
from shiftlab.errors import NotMixing
from shiftlab.fixtures import (
    disjoint_union,
    golden_mean_graph,
    three_cycle_graph,
    two_cycle_graph,
    two_fixed_points_graph,
)
from shiftlab.shift_core import (
    from_forbidden_words,
    full_shift,
    language_equal,
    make_graph,
    parse_word,
)

BIN = ["0", "1"]
PHI = (1 + math.sqrt(5)) / 2


class TestChainComponents:
    def test_irreducible_graph_is_one_component(self):
        dec = chain_components(golden_mean_graph())
        assert len(dec.components) == 1
        assert not dec.transient_vertices

    def test_disjoint_union_splits(self):
        g = disjoint_union(golden_mean_graph(), three_cycle_graph())
        dec = chain_components(g)
        assert len(dec.components) == 2

    def test_contained_loop_is_not_a_component(self):
        # A lone 0-loop beside a full-shift vertex presents a point set
        # contained in the full shift, so there is only one component.
        g = make_graph(["a", "b"],
                       [("a", "a", "0"),
                        ("b", "b", "0"), ("b", "b", "1")],
                       alphabet=BIN)
        dec = chain_components(g)
        assert len(dec.components) == 1
        assert language_equal(dec.components[0].graph, full_shift(BIN))[0]

    def test_transient_vertices_reported(self):
        g = make_graph(["a", "b"],
                       [("a", "a", "0"), ("a", "b", "1"), ("b", "b", "0")],
                       alphabet=BIN)
        dec = chain_components(g)
        # canonical presentation: two loops joined by a one-way edge
        assert len(dec.components) == 2

    def test_restrict_to_cr(self):
        g = make_graph(["a", "b"],
                       [("a", "a", "0"), ("a", "b", "1"), ("b", "b", "2")],
                       alphabet=["0", "1", "2"])
        cr = restrict_graph_to_cr(g)
        assert not is_irreducible(g)
        from shiftlab.shift_core import word_in_language
        assert not word_in_language(cr, parse_word("0.1.2"))
        assert word_in_language(cr, parse_word("0.0"))
        assert word_in_language(cr, parse_word("2.2"))


class TestCyclicStructure:
    def test_mixing_graph_has_period_one(self):
        cs = cyclic_structure(golden_mean_graph())
        assert cs.period == 1

    def test_two_cycle(self):
        cs = cyclic_structure(two_cycle_graph())
        assert cs.period == 2
        assert len(cs.classes) == 2

    def test_three_cycle(self):
        assert cyclic_structure(three_cycle_graph()).period == 3

    def test_even_odd_block_graph(self):
        # two states, edges both ways with distinct labels: period 2
        g = two_cycle_graph()
        cs = cyclic_structure(g)
        k = sync_length(g)
        assert k is not None
        assert class_of_word(g, cs, parse_word("a"[:0] + "ab"[0])) in (0, 1)
        c1 = class_of_word(g, cs, ("a",))
        c2 = class_of_word(g, cs, ("b",))
        assert {c1, c2} == {0, 1}

    def test_mixing_predicates(self):
        assert is_mixing(golden_mean_graph())
        assert not is_mixing(two_cycle_graph())
        with pytest.raises(NotMixing):
            mixing_constant(two_cycle_graph())

    def test_mixing_constant_golden_mean(self):
        m = mixing_constant(golden_mean_graph())
        assert m == 2


class TestEntropy:
    def test_full_shift(self):
        assert entropy(full_shift(BIN)) == pytest.approx(math.log(2), abs=1e-12)

    def test_golden_mean(self):
        assert entropy(golden_mean_graph()) == pytest.approx(math.log(PHI), abs=1e-9)

    def test_cycles_have_zero_entropy(self):
        assert entropy(three_cycle_graph()) == 0.0
        assert not has_positive_entropy(three_cycle_graph())

    def test_union_takes_max(self):
        g = disjoint_union(golden_mean_graph(), three_cycle_graph())
        assert entropy(g) == pytest.approx(math.log(PHI), abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.lists(st.sampled_from(BIN), min_size=2, max_size=3).map(tuple),
                    max_size=2))
    def test_entropy_below_full_shift(self, forbidden):
        g = from_forbidden_words(BIN, forbidden)
        if g.is_empty():
            return
        assert entropy(g) <= math.log(2) + 1e-12


class TestChainReachability:
    def test_reachable_within_component(self):
        g = golden_mean_graph()
        w = delta_chain_reachable(g, parse_word("01"), parse_word("10"), 2)
        assert w is not None
        for a, b in zip(w.steps, w.steps[1:]):
            assert a[1:] == b[:-1]

    def test_not_reachable_across_components(self):
        g = disjoint_union(golden_mean_graph(), three_cycle_graph())
        assert not chain_equivalent(g, ("0",), ("x",), 1)

    def test_length_congruence_constraint(self):
        g = two_cycle_graph()
        # same class needs even-length chains
        w = delta_chain_reachable(g, ("a",), ("a",), 1, length_mod=(2, 0))
        assert w is not None
        assert (len(w.steps) - 1) % 2 == 0
