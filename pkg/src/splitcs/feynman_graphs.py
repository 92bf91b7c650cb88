"""Admissible Feynman graphs of split Chern-Simons theory on a handlebody.

Half-edges at an interaction vertex carry one of four labels:

* ``a`` and ``alpha`` are components of the A-type field (residual leaf and
  arrow tail),
* ``b`` and ``beta`` are components of the B-type field (residual leaf and
  arrowhead).

An interaction vertex is either <B,[A,A]> (weight f) or <A,[B,B]> (weight g);
the pure vertices vanish for a Manin triple.  Boundary vertices are sources
(``beta A`` on the first boundary, ``B alpha`` on the second) and isolated
backgrounds (``b A`` and ``B a``).  Graphs are stored with anonymous
boundary vertices: a source is identified with the arrow that ends (or
starts) on it.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .graded_algebra import I, I_OVER_HBAR, MINUS_I_HBAR, Coefficient, GaussianRational
from .lie_bialgebra import StructureConstants

A_TYPE = ("a", "alpha")
B_TYPE = ("b", "beta")
LEAVES = ("a", "b")

# endpoints other than interaction vertices
SRC1 = "src1"  # beta A on the first boundary (receives an arrow)
SRC2 = "src2"  # B alpha on the second boundary (emits an arrow)


class InadmissibleGraphError(ValueError):
    """The graph violates the arrow-matching rules."""


class TadpoleError(InadmissibleGraphError):
    """A propagator starts and ends at the same vertex."""


def vertex_types() -> List[Tuple[str, ...]]:
    """All interaction-vertex label multisets allowed by the Manin-triple rules."""
    out = []
    for combo in itertools.combinations_with_replacement(("a", "alpha", "b", "beta"), 3):
        n_a = sum(1 for h in combo if h in A_TYPE)
        if n_a in (0, 3):
            continue  # <A,[A,A]> and <B,[B,B]> vanish
        if combo.count("a") >= 2:
            continue  # a ^ a has form degree above the bulk dimension
        out.append(combo)
    return out


def vertex_kind(labels: Sequence[str]) -> str:
    """'f' for <B,[A,A]>, 'g' for <A,[B,B]>."""
    n_a = sum(1 for h in labels if h in A_TYPE)
    if n_a == 2:
        return "f"
    if n_a == 1:
        return "g"
    raise InadmissibleGraphError(f"vertex {labels} is not mixed")


@dataclass(frozen=True)
class FeynmanGraph:
    """Interaction vertices with their leaves, plus arrows.

    ``leaves[v]`` is a sorted tuple drawn from {a, b}.  ``arrows`` is a
    tuple of (tail, head) where an endpoint is an interaction-vertex index,
    ``SRC1`` (a source on the first boundary, head only) or ``SRC2`` (a
    source on the second boundary, tail only).  ``backgrounds`` counts
    isolated background vertices (b A on the first boundary, B a on the
    second).
    """

    leaves: Tuple[Tuple[str, ...], ...]
    arrows: Tuple[Tuple[object, object], ...]
    backgrounds: Tuple[int, int] = (0, 0)

    @property
    def l(self) -> int:
        return len(self.leaves)

    @property
    def m(self) -> int:
        """Number of sources on the first boundary."""
        return sum(1 for _, h in self.arrows if h == SRC1)

    @property
    def m2(self) -> int:
        return sum(1 for t, _ in self.arrows if t == SRC2)

    @property
    def k(self) -> int:
        return sum(self.backgrounds)

    def labels(self, v: int) -> Tuple[str, ...]:
        out = list(self.leaves[v])
        out += ["alpha"] * sum(1 for t, _ in self.arrows if t == v)
        out += ["beta"] * sum(1 for _, h in self.arrows if h == v)
        return tuple(sorted(out))

    def out_arrows(self, v: int):
        return [h for t, h in self.arrows if t == v]

    def in_arrows(self, v: int):
        return [t for t, h in self.arrows if h == v]

    def boundary_vertex_count(self) -> int:
        return self.m + self.m2 + self.k

    def n_vertices(self) -> int:
        return self.l + self.boundary_vertex_count()

    def is_connected(self) -> bool:
        n = self.n_vertices()
        if n == 0:
            return False
        if self.l == 0:
            # a lone background vertex, or one second-to-first boundary arrow
            return n == 1 or (self.k == 0 and len(self.arrows) == 1)
        if self.k:
            return False
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for t, h in self.arrows:
                for x, y in ((t, h), (h, t)):
                    if x == v and isinstance(y, int) and y not in seen:
                        seen.add(y)
                        stack.append(y)
        return len(seen) == self.l

    def is_tree(self) -> bool:
        return self.is_connected() and len(self.arrows) == self.n_vertices() - 1

    def has_tadpole(self) -> bool:
        return any(t == h for t, h in self.arrows)

    def check_admissible(self) -> None:
        for v in range(self.l):
            for x in self.leaves[v]:
                if x not in LEAVES:
                    raise InadmissibleGraphError(f"vertex {v}: {x!r} is not a leaf label")
            labels = self.labels(v)
            if len(labels) != 3:
                raise InadmissibleGraphError(f"vertex {v} has {len(labels)} half-edges")
            if labels not in VERTEX_TYPES:
                raise InadmissibleGraphError(f"vertex {v} has forbidden labels {labels}")
        for t, h in self.arrows:
            if h == SRC2 or t == SRC1:
                raise InadmissibleGraphError("an arrow issues from the first boundary or ends on the second")
            for x in (t, h):
                if isinstance(x, int) and not 0 <= x < self.l:
                    raise InadmissibleGraphError(f"arrow endpoint {x} is not a vertex")

    # -- canonical form ---------------------------------------------------

    def _descriptor(self, perm: Sequence[int]):
        """Graph description after renaming vertex v -> perm[v]."""
        inv = {perm[v]: v for v in range(self.l)}
        rows = []
        for new in range(self.l):
            v = inv[new]
            outs = sorted(_rename(h, perm) for h in self.out_arrows(v))
            ins = sorted(_rename(t, perm) for t in self.in_arrows(v))
            rows.append((self.leaves[v], tuple(outs), tuple(ins)))
        free = sorted((str(t), str(h)) for t, h in self.arrows if not isinstance(t, int) and not isinstance(h, int))
        return (tuple(rows), tuple(free), self.backgrounds)

    def canonical(self):
        return min(self._descriptor(p) for p in itertools.permutations(range(self.l)))

    def automorphism_order(self) -> int:
        """Vertex permutations fixing the graph times half-edge swaps inside a vertex."""
        base = self._descriptor(tuple(range(self.l)))
        n_perm = sum(1 for p in itertools.permutations(range(self.l)) if self._descriptor(p) == base)
        swaps = 1
        for v in range(self.l):
            for cnt in Counter(self.leaves[v]).values():
                swaps *= factorial(cnt)
            for cnt in Counter(map(str, self.out_arrows(v))).values():
                swaps *= factorial(cnt)
        free = Counter((str(t), str(h)) for t, h in self.arrows if not isinstance(t, int) and not isinstance(h, int))
        for cnt in free.values():
            swaps *= factorial(cnt)
        for cnt in self.backgrounds:
            swaps *= factorial(cnt)
        return n_perm * swaps

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for v in range(self.l):
            lines.append(f'  v{v} [shape=point, xlabel="{vertex_kind(self.labels(v))}"];')
            for j, x in enumerate(self.leaves[v]):
                lines.append(f'  v{v}_{x}{j} [shape=circle, label="{x}"];')
                lines.append(f"  v{v}_{x}{j} -> v{v} [arrowhead=none];")
        n_src = 0
        for t, h in self.arrows:
            ends = []
            for x in (t, h):
                if isinstance(x, int):
                    ends.append(f"v{x}")
                else:
                    node = f"s{n_src}"
                    n_src += 1
                    label = "beta A" if x == SRC1 else "B alpha"
                    lines.append(f'  {node} [shape=box, label="{label}"];')
                    ends.append(node)
            lines.append(f"  {ends[0]} -> {ends[1]};")
        for side, cnt in enumerate(self.backgrounds):
            for j in range(cnt):
                label = "b A" if side == 0 else "B a"
                lines.append(f'  k{side}_{j} [shape=box, label="{label}"];')
        lines.append("}")
        return "\n".join(lines)


def _rename(x, perm):
    return ("v", perm[x]) if isinstance(x, int) else (x, -1)


VERTEX_TYPES = frozenset(vertex_types())


# -- vanishing against the propagator ----------------------------------------


def _leaf_class(leaves: Tuple[str, ...]) -> Optional[str]:
    """'upper' if the leaf product is an absolute class, 'lower' if relative."""
    if not leaves:
        return None
    return "lower" if "a" in leaves else "upper"


def vanishing_vertex(g: FeynmanGraph, v: int) -> Optional[str]:
    """Reason a vertex integrates to zero against its single propagator, if any.

    With one arrow at v and only leaves otherwise, the bulk integral over v
    is int eta(x, .) chi (head side, relative class) or int chi eta(., y)
    (tail side, absolute class), both zero for the chosen propagator.
    """
    outs, ins = g.out_arrows(v), g.in_arrows(v)
    cls = _leaf_class(g.leaves[v])
    if len(outs) + len(ins) != 1 or len(g.leaves[v]) != 2:
        return None
    if outs and cls == "upper":
        return "absolute class at an arrow tail"
    if ins and cls == "lower":
        return "relative class at an arrowhead"
    return None


# -- enumeration --------------------------------------------------------------


@dataclass
class GraphClass:
    graph: FeynmanGraph
    automorphisms: int
    pruned_by: Optional[str] = None

    @property
    def key(self):
        return self.graph.canonical()


def _graphs_for(types: Sequence[Tuple[str, ...]], m_max: int, m2: int, allow_tadpoles: bool):
    tails = []
    heads = []
    leaves = []
    for v, t in enumerate(types):
        leaves.append(tuple(sorted(x for x in t if x in LEAVES)))
        tails += [v] * t.count("alpha")
        heads += [v] * t.count("beta")
    tails += [SRC2] * m2
    m = len(tails) - len(heads)
    if m < 0 or m > m_max:
        return
    heads += [SRC1] * m
    seen = set()
    for perm in itertools.permutations(range(len(heads))):
        arrows = tuple(sorted(((tails[i], heads[perm[i]]) for i in range(len(tails))), key=str))
        if arrows in seen:
            continue
        seen.add(arrows)
        if any(t == SRC2 and h == SRC1 for t, h in arrows) and types:
            continue  # a free boundary-to-boundary arrow is a separate component
        if not allow_tadpoles and any(t == h for t, h in arrows):
            continue
        yield FeynmanGraph(tuple(leaves), arrows)


def enumerate_admissible(
    l: int,
    m: Optional[int] = None,
    k: int = 1,
    trees_only: bool = True,
    m2: int = 0,
    order: str = "lex",
) -> List[GraphClass]:
    """Connected admissible graphs with ``l`` interaction vertices, at most ``m``
    first-boundary sources, at most ``k`` background vertices and exactly
    ``m2`` second-boundary sources, one per isomorphism class.

    Vertices whose leaf product is annihilated by the propagator are
    excluded here (see :func:`vanishing_vertex`); ``order`` only changes
    the traversal order and never the result.
    """
    if min(l, k, m2) < 0 or (m is not None and m < 0):
        raise ValueError("counts must be non-negative")
    if m is None:
        m = 3 * l + m2
    classes: Dict[object, GraphClass] = {}

    def consider(g: FeynmanGraph):
        if not g.is_connected():
            return
        if trees_only and not g.is_tree():
            return
        if any(vanishing_vertex(g, v) for v in range(g.l)):
            return
        key = g.canonical()
        if key not in classes:
            classes[key] = GraphClass(g, g.automorphism_order())

    if l == 0:
        if k >= 1:
            consider(FeynmanGraph((), (), (1, 0)))
        if m2 >= 1 and m >= 1:
            consider(FeynmanGraph((), ((SRC2, SRC1),)))
    else:
        types = sorted(VERTEX_TYPES)
        if order == "reverse":
            types = types[::-1]
        for combo in itertools.combinations_with_replacement(types, l):
            for g in _graphs_for(combo, m, m2, allow_tadpoles=False):
                consider(g)
    return sorted(classes.values(), key=lambda c: repr(c.key))


def prune_by_propagator_properties(classes: Iterable[GraphClass]) -> List[GraphClass]:
    """Drop classes that vanish for the chosen propagator.

    * two or more interaction vertices and no boundary vertex: every bulk
      chain ends on a cohomology class and integrates to zero;
    * two interaction vertices: only the classes with one a leaf, one b
      leaf and two first-boundary sources survive the chosen propagator
      (int eta chi = 0 and int eta eta = 0).  This is a property of that
      choice, not of every propagator.
    """
    out = []
    for c in classes:
        g = c.graph
        reason = None
        if g.l >= 2 and g.boundary_vertex_count() == 0:
            reason = "no boundary vertex"
        elif g.l == 2:
            all_leaves = sorted(x for lv in g.leaves for x in lv)
            if not (all_leaves == ["a", "b"] and g.m == 2):
                reason = "chosen propagator"
        if reason is None:
            out.append(c)
        else:
            c.pruned_by = reason
    return out


def census(l: int, m: Optional[int] = None, k: int = 1, trees_only: bool = True) -> Dict[str, int]:
    classes = enumerate_admissible(l, m, k, trees_only)
    return {"admissible": len(classes), "contributing": len(prune_by_propagator_properties(list(classes)))}


# -- weights --------------------------------------------------------------------

MINUS_I_OVER_HBAR = Coefficient.of(-I, -1)


@dataclass
class BulkIntegrand:
    """Pre-integration weight of a graph.

    ``prefactor`` is the full product of vertex and propagator factors
    divided by the automorphism order; ``action_prefactor`` divides out
    the overall i/hbar of the exponent.  ``slots`` lists, per interaction
    vertex, its weight kind and the ordered half-edge labels feeding the
    structure constant (upper slot first for f, lower slot first for g).
    """

    graph: FeynmanGraph
    prefactor: Coefficient
    action_prefactor: Coefficient
    slots: List[Tuple[str, Tuple[str, ...]]]
    propagators: List[Tuple[object, object]]
    sc: Optional[StructureConstants] = None

    def tensor(self, sc: Optional[StructureConstants] = None) -> Dict[tuple, Fraction]:
        """Structure-constant contraction as a map from external indices to values.

        External indices are listed per vertex in the order of its leaves and
        outgoing source arrows; arrows between vertices are summed over.
        """
        sc = sc or self.sc
        if sc is None:
            raise ValueError("no structure constants attached")
        return _contract(self.graph, sc)


def _vertex_slots(g: FeynmanGraph, v: int):
    """Ordered half-edges (label, target) for the structure constant of v."""
    kind = vertex_kind(g.labels(v))
    edges = [(x, None) for x in g.leaves[v]]
    edges += [("alpha", h) for h in g.out_arrows(v)]
    edges += [("beta", t) for t in g.in_arrows(v)]
    if kind == "f":
        upper = [e for e in edges if e[0] in B_TYPE]
        lower = [e for e in edges if e[0] in A_TYPE]
    else:
        upper = [e for e in edges if e[0] in A_TYPE]
        lower = [e for e in edges if e[0] in B_TYPE]
    return kind, upper + lower


def graph_weight(g: FeynmanGraph, sc: Optional[StructureConstants] = None) -> BulkIntegrand:
    """Vertex factor i/hbar, source factor -i/hbar, propagator factor -i hbar, over |Aut|."""
    g.check_admissible()
    if g.has_tadpole():
        raise TadpoleError("tadpoles are not supported on a manifold of zero Euler characteristic")
    pref = Coefficient.of(1)
    for _ in range(g.l):
        pref = pref * I_OVER_HBAR
    for _ in range(g.m + g.m2):
        pref = pref * MINUS_I_OVER_HBAR
    for _ in g.arrows:
        pref = pref * MINUS_I_HBAR
    pref = pref * Coefficient.of(GaussianRational(Fraction(1, g.automorphism_order())))
    action = pref * MINUS_I_HBAR
    slots = []
    for v in range(g.l):
        kind, edges = _vertex_slots(g, v)
        slots.append((kind, tuple(x for x, _ in edges)))
    return BulkIntegrand(g, pref, action, slots, list(g.arrows), sc)


def _contract(g: FeynmanGraph, sc: StructureConstants) -> Dict[tuple, Fraction]:
    idx = list(sc.indices)
    # one Lie index per half-edge; arrows between vertices share an index
    edge_vars = []  # external variable ids in traversal order
    n_vars = 0
    internal: Dict[tuple, int] = {}
    per_vertex = []
    for v in range(g.l):
        kind, edges = _vertex_slots(g, v)
        ids = []
        for x, other in edges:
            if isinstance(other, int):
                key = (v, other) if x == "alpha" else (other, v)
                if key not in internal:
                    internal[key] = n_vars
                    n_vars += 1
                ids.append(internal[key])
            else:
                ids.append(n_vars)
                edge_vars.append(n_vars)
                n_vars += 1
        per_vertex.append((kind, ids))
    external = edge_vars
    out: Dict[tuple, Fraction] = {}
    for assign in itertools.product(idx, repeat=n_vars):
        val = Fraction(1)
        for kind, ids in per_vertex:
            i, j, k = (assign[x] for x in ids)
            val *= sc.f(j, k, i) if kind == "f" else sc.g(j, k, i)
            if not val:
                break
        if val:
            key = tuple(assign[x] for x in external)
            out[key] = out.get(key, Fraction(0)) + val
    return {k: v for k, v in out.items() if v}


# -- correspondence with the effective action ------------------------------------


def term_family(c: GraphClass) -> Optional[str]:
    """Effective-action label produced by a surviving class, if any."""
    g = c.graph
    leaves = sorted(x for lv in g.leaves for x in lv)
    if g.l == 0:
        return "S0" if g.k == 1 and not g.arrows else None
    if g.l == 1:
        return {("a", "b", "b"): "S1", ("a", "b"): "S2", ("b",): "S3"}.get(tuple(leaves))
    if g.l == 2 and g.m == 2 and leaves == ["a", "b"]:
        # the a leaf sits on the arrowhead vertex or on the tail vertex
        head = next(h for t, h in g.arrows if isinstance(t, int) and isinstance(h, int))
        return "S4" if "a" in g.leaves[head] else "S5"
    return None


def diagram_census() -> Dict[str, List[GraphClass]]:
    """Surviving classes with at most two interaction vertices and two boundary fields."""
    out: Dict[str, List[GraphClass]] = {}
    for l in (0, 1, 2):
        for c in prune_by_propagator_properties(enumerate_admissible(l, m=2)):
            fam = term_family(c)
            out.setdefault(fam, []).append(c)
    return out
