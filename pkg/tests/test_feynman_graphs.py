import time

import pytest

from splitcs.effective_action import LABELS, build_terms
from splitcs.feynman_graphs import (
    SRC1,
    SRC2,
    FeynmanGraph,
    InadmissibleGraphError,
    TadpoleError,
    census,
    diagram_census,
    enumerate_admissible,
    graph_weight,
    prune_by_propagator_properties,
    term_family,
    vertex_types,
)
from splitcs.graded_algebra import Coefficient
from splitcs.lie_bialgebra import fixture


def keys(classes):
    return sorted(repr(c.key) for c in classes)


def test_vertex_types_exclude_pure_and_aa_vertices():
    types = vertex_types()
    for t in types:
        n_a = sum(1 for h in t if h in ("a", "alpha"))
        assert 0 < n_a < 3
        assert t.count("a") < 2
    assert ("a", "b", "b") in types
    assert ("a", "a", "b") not in types


def test_single_connected_diagram_without_interactions():
    assert len(enumerate_admissible(0, 0, 1)) == 1


def test_three_one_vertex_trees():
    classes = enumerate_admissible(1, trees_only=True)
    assert len(classes) == 3
    leaves = sorted(tuple(sorted(x for lv in c.graph.leaves for x in lv)) for c in classes)
    assert leaves == [("a", "b"), ("a", "b", "b"), ("b",)]


def test_five_two_vertex_trees():
    t0 = time.perf_counter()
    assert len(enumerate_admissible(2, m=2, trees_only=True)) == 5
    assert time.perf_counter() - t0 < 1.0


def test_enumeration_order_does_not_matter():
    for l, m in ((1, None), (2, 2), (2, 3)):
        assert keys(enumerate_admissible(l, m, order="lex")) == keys(enumerate_admissible(l, m, order="reverse"))


def test_classes_are_duplicate_free():
    classes = enumerate_admissible(2, m=3, trees_only=False)
    assert len(keys(classes)) == len(set(keys(classes)))


def test_negative_counts_are_rejected():
    with pytest.raises(ValueError):
        enumerate_admissible(-1)


def test_automorphism_orders():
    by_leaves = {tuple(sorted(x for lv in c.graph.leaves for x in lv)): c.automorphisms for c in enumerate_admissible(1)}
    assert by_leaves == {("a", "b", "b"): 2, ("a", "b"): 1, ("b",): 2}


def test_pruning_keeps_the_two_integrated_classes():
    survivors = prune_by_propagator_properties(enumerate_admissible(2, m=2))
    assert sorted(term_family(c) for c in survivors) == ["S4", "S5"]


def test_pruning_leaves_one_vertex_classes_alone():
    classes = enumerate_admissible(1)
    assert keys(prune_by_propagator_properties(list(classes))) == keys(classes)


def test_closed_two_vertex_trees_are_pruned():
    classes = enumerate_admissible(2, m=0, k=0)
    assert not prune_by_propagator_properties(classes)
    assert all(c.pruned_by == "no boundary vertex" for c in classes)


def test_pruned_classes_are_marked_not_deleted():
    classes = enumerate_admissible(2, m=2)
    prune_by_propagator_properties(classes)
    assert sum(c.pruned_by == "chosen propagator" for c in classes) == 3


def test_census_helper():
    assert census(2, m=2) == {"admissible": 5, "contributing": 2}


def _one_vertex(leaves):
    return next(c.graph for c in enumerate_admissible(1) if sorted(x for lv in c.graph.leaves for x in lv) == sorted(leaves))


def test_weight_of_cubic_vertex():
    w = graph_weight(_one_vertex(("a", "b", "b")))
    assert w.action_prefactor == Coefficient.of(0.5)
    assert w.slots == [("g", ("a", "b", "b"))]


def test_weight_of_single_source_graph():
    w = graph_weight(_one_vertex(("a", "b")))
    assert w.action_prefactor == Coefficient.of(-1)


def test_weight_of_two_source_graph():
    assert graph_weight(_one_vertex(("b",))).action_prefactor == Coefficient.of(0.5)


def test_two_vertex_weights():
    pref = {term_family(c): graph_weight(c.graph).action_prefactor for c in prune_by_propagator_properties(enumerate_admissible(2, m=2))}
    assert pref == {"S4": Coefficient.of(1), "S5": Coefficient.of(0.5)}


def test_tadpole_is_unsupported():
    g = FeynmanGraph((("b",),), ((0, 0),))
    with pytest.raises(TadpoleError):
        graph_weight(g)


def test_unmatched_tail_is_inadmissible():
    g = FeynmanGraph((("a", "alpha", "b"),), ())
    with pytest.raises(InadmissibleGraphError):
        graph_weight(g)


def test_arrow_out_of_first_boundary_is_inadmissible():
    g = FeynmanGraph((("a", "b"),), ((SRC1, 0),))
    with pytest.raises(InadmissibleGraphError):
        graph_weight(g)


def test_tensor_of_cubic_vertex_is_g():
    sc = fixture("iwasawa_su2")
    t = graph_weight(_one_vertex(("a", "b", "b")), sc).tensor()
    assert t == {(i, j, k): sc.g(j, k, i) for i in sc.indices for j in sc.indices for k in sc.indices if sc.g(j, k, i)}


def test_abelian_weights_vanish():
    sc = fixture("abelian_2")
    for l in (1, 2):
        for c in prune_by_propagator_properties(enumerate_admissible(l, m=2)):
            assert graph_weight(c.graph, sc).tensor() == {}


def test_two_vertex_tensor_is_a_contraction():
    sc = fixture("iwasawa_su2")
    (c,) = [c for c in prune_by_propagator_properties(enumerate_admissible(2, m=2)) if term_family(c) == "S5"]
    t = graph_weight(c.graph, sc).tensor()
    r = sc.indices
    expect = {}
    for i in r:
        for j in r:
            for l in r:
                for m in r:
                    v = sum(sc.f(j, k, i) * sc.f(l, m, k) for k in r)
                    if v:
                        expect[(i, j, l, m)] = v
    assert sorted(t.values()) == sorted(expect.values())


def test_second_boundary_vertices():
    # B alpha on the second boundary feeding a vertex, and the bare boundary arrow
    classes = enumerate_admissible(1, m=2, m2=1, trees_only=True)
    assert classes and all(c.graph.m2 == 1 for c in classes)
    bare = enumerate_admissible(0, m=1, k=0, m2=1)
    assert len(bare) == 1 and bare[0].graph.arrows == ((SRC2, SRC1),)
    w = graph_weight(classes[0].graph)
    assert w.prefactor.hbar_power == -1


def test_diagram_term_bijection():
    sc = fixture("iwasawa_su2")
    S = build_terms(sc)
    fams = diagram_census()
    assert None not in fams
    assert sorted(fams) == sorted(LABELS)
    assert all(len(v) == 1 for v in fams.values())
    assert sorted(k for k in fams if S[k]) == sorted(S.nonzero_labels())


def test_dot_export():
    for c in enumerate_admissible(2, m=2):
        dot = c.graph.to_dot()
        assert dot.startswith("digraph G {") and dot.endswith("}")
        assert dot.count("->") >= len(c.graph.arrows)
