"""Chain-recurrence structure of a presented shift space.

Chain components are computed as the strongly connected subgraphs that
contain at least one cycle, taken on the canonical deterministic
presentation so that duplicated follower sets cannot split a component.
The cyclic structure of an irreducible graph is its partition into
classes advanced cyclically by the shift; the class count is the gcd of
all cycle lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyShift,
    NotInLanguage,
    NotIrreducible,
    NotMixing,
    TooLarge,
)
from .shift_core import (
    SftGraph,
    Word,
    canonical_presentation,
    essential,
    make_graph,
    word_in_language,
    words_of_length,
)


@dataclass(frozen=True)
class ChainComponent:
    """One chain component, presented by a strongly connected subgraph."""

    component_id: str
    graph: SftGraph

    def __repr__(self) -> str:
        return "ChainComponent(%s, %d vertices)" % (self.component_id, len(self.graph.vertices))


@dataclass(frozen=True)
class Decomposition:
    components: tuple[ChainComponent, ...]
    transient_vertices: tuple[str, ...]
    source: SftGraph

    def by_id(self, component_id: str) -> ChainComponent:
        for c in self.components:
            if c.component_id == component_id:
                return c
        raise KeyError(component_id)


def _tarjan_sccs(vertices: Sequence[str], arcs: dict[str, list[str]]) -> list[list[str]]:
    """Iterative Tarjan; returns strongly connected components in a
    deterministic order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    onstack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = [0]

    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(arcs.get(root, ())))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        onstack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(arcs.get(w, ()))))
                    advanced = True
                    break
                if w in onstack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    return sccs


def chain_components(g: SftGraph) -> Decomposition:
    """Chain components of the presented shift, one per strongly connected
    subgraph with a cycle of the canonical presentation."""
    c = canonical_presentation(g)
    arcs: dict[str, list[str]] = {v: [] for v in c.vertices}
    selfedge = set()
    for (u, v, _a) in c.edges:
        arcs[u].append(v)
        if u == v:
            selfedge.add(u)
    comps = []
    transient = []
    raw = _tarjan_sccs(c.vertices, arcs)
    for verts in raw:
        vs = set(verts)
        has_cycle = len(verts) > 1 or any(v in selfedge for v in verts)
        if not has_cycle:
            transient.extend(verts)
            continue
        sub = SftGraph(
            tuple(v for v in c.vertices if v in vs),
            tuple(e for e in c.edges if e[0] in vs and e[1] in vs),
            c.alphabet)
        comps.append(sub)
    comps.sort(key=lambda s: s.vertices[0])
    named = tuple(ChainComponent("K%d" % i, s) for i, s in enumerate(comps))
    return Decomposition(named, tuple(sorted(transient)), c)


def restrict_graph_to_cr(g: SftGraph) -> SftGraph:
    """Union of all chain components: the chain recurrent part."""
    dec = chain_components(g)
    verts: list[str] = []
    edges: list[tuple[str, str, str]] = []
    for c in dec.components:
        verts.extend(c.graph.vertices)
        edges.extend(c.graph.edges)
    return SftGraph(tuple(verts), tuple(edges), g.alphabet)


def is_irreducible(g: SftGraph) -> bool:
    ge = essential(g)
    if not ge.vertices:
        return False
    arcs: dict[str, list[str]] = {v: [] for v in ge.vertices}
    for (u, v, _a) in ge.edges:
        arcs[u].append(v)
    return len(_tarjan_sccs(ge.vertices, arcs)) == 1


@dataclass(frozen=True)
class CyclicStructure:
    """Period m and ordered vertex classes of an irreducible graph; every
    edge runs from class i to class i+1 mod m.  Class 0 is the class
    holding the smallest vertex name."""

    period: int
    classes: tuple[tuple[str, ...], ...]

    def class_of_vertex(self, v: str) -> int:
        for i, cls in enumerate(self.classes):
            if v in cls:
                return i
        raise KeyError(v)


def cyclic_structure(g: SftGraph) -> CyclicStructure:
    ge = essential(g)
    if not ge.vertices:
        raise EmptyShift("cyclic structure of an empty graph")
    if not is_irreducible(ge):
        raise NotIrreducible("cyclic structure needs an irreducible graph")
    root = ge.vertices[0]
    dist = {root: 0}
    queue = [root]
    arcs: dict[str, list[str]] = {v: [] for v in ge.vertices}
    for (u, v, _a) in ge.edges:
        arcs[u].append(v)
    while queue:
        u = queue.pop(0)
        for v in arcs[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    m = 0
    for (u, v, _a) in ge.edges:
        m = math.gcd(m, dist[u] + 1 - dist[v])
    if m == 0:
        m = 1
    raw = [tuple(sorted(v for v in ge.vertices if dist[v] % m == i)) for i in range(m)]
    # Rotate so the class containing the least vertex name comes first.
    least = min(ge.vertices)
    k = next(i for i, cls in enumerate(raw) if least in cls)
    classes = tuple(raw[(k + i) % m] for i in range(m))
    return CyclicStructure(m, classes)


def is_mixing(g: SftGraph) -> bool:
    return is_irreducible(g) and cyclic_structure(g).period == 1


def mixing_constant(g: SftGraph, cap: Optional[int] = None) -> int:
    """Least L with a path of length exactly L between every ordered
    vertex pair (equivalently the adjacency matrix power is positive).
    Raises NotMixing if no such L up to the cap exists."""
    ge = essential(g)
    n = len(ge.vertices)
    if n == 0:
        raise EmptyShift("mixing constant of an empty graph")
    if cap is None:
        cap = 4 * n * n + 4
    idx = {v: i for i, v in enumerate(ge.vertices)}
    a = np.zeros((n, n), dtype=bool)
    for (u, v, _s) in ge.edges:
        a[idx[u], idx[v]] = True
    power = np.eye(n, dtype=bool)
    for ell in range(1, cap + 1):
        power = power @ a
        if power.all():
            return ell
    raise NotMixing("no positive adjacency power up to %d" % cap)


# ---------------------------------------------------------------------------
# Entropy


def has_positive_entropy(g: SftGraph) -> bool:
    """Structural test: some chain component carries two distinct cycles
    through a common vertex, i.e. is not a lone cycle."""
    dec = chain_components(g)
    for c in dec.components:
        if len(c.graph.edges) > len(c.graph.vertices):
            return True
    return False


def entropy(g: SftGraph) -> float:
    """Topological entropy: natural log of the spectral radius of the
    adjacency matrix of the canonical deterministic presentation.  Exactly
    0.0 when every chain component is a single cycle."""
    dec = chain_components(g)
    if not dec.components:
        raise EmptyShift("entropy of an empty shift")
    if not has_positive_entropy(g):
        return 0.0
    best = 1.0
    for comp in dec.components:
        ge = comp.graph
        n = len(ge.vertices)
        idx = {v: i for i, v in enumerate(ge.vertices)}
        a = np.zeros((n, n))
        for (u, v, _s) in ge.edges:
            a[idx[u], idx[v]] += 1.0
        radius = float(np.max(np.abs(np.linalg.eigvals(a))))
        best = max(best, radius)
    return math.log(best)


# ---------------------------------------------------------------------------
# Exact chain reachability at resolution 2**-K


@dataclass(frozen=True)
class ChainWitness:
    steps: tuple[Word, ...]

    def __len__(self) -> int:
        return len(self.steps) - 1


def _k_block_arcs(g: SftGraph, k: int) -> tuple[list[Word], dict[Word, list[Word]]]:
    words = words_of_length(g, k)
    wordset = set(words)
    arcs: dict[Word, list[Word]] = {w: [] for w in words}
    for w in words:
        for v in words:
            if w[1:] == v[:-1] and word_in_language(g, w + (v[-1],)):
                arcs[w].append(v)
    return words, arcs


def delta_chain_reachable(
    g: SftGraph,
    source: Sequence[str],
    target: Sequence[str],
    k: int,
    length_mod: Optional[tuple[int, int]] = None,
    max_length: Optional[int] = None,
) -> Optional[ChainWitness]:
    """Is there a chain from the source cylinder to the target cylinder in
    which every step moves by at most 2**-k?  At this resolution such
    chains are exactly the paths of the k-block graph, whose vertices are
    the admissible k-words.

    ``length_mod = (m, r)`` restricts to chain lengths congruent to r mod m.
    Returns a witness (the sequence of k-words) or None.
    """
    if k <= 0:
        raise TooLarge("resolution exponent must be positive")
    src = tuple(source)[:k]
    tgt = tuple(target)[:k]
    if len(src) < k or len(tgt) < k:
        raise NotInLanguage("source and target must have length >= k")
    words, arcs = _k_block_arcs(g, k)
    if src not in arcs or tgt not in arcs:
        raise NotInLanguage("cylinder word not admissible")
    m, r = length_mod if length_mod else (1, 0)
    if max_length is None:
        max_length = m * len(words) + abs(r) + len(words) + 1
    start = (src, 0 % m)
    parent: dict[tuple[Word, int], Optional[tuple[Word, int]]] = {start: None}
    frontier = [start]
    depth = {start: 0}
    goal = None
    if src == tgt and r % m == 0:
        goal = start
    while frontier and goal is None:
        nxt = []
        for node in frontier:
            w, ph = node
            if depth[node] >= max_length:
                continue
            for v in arcs[w]:
                child = (v, (ph + 1) % m)
                if child not in parent:
                    parent[child] = node
                    depth[child] = depth[node] + 1
                    if v == tgt and child[1] == r % m and depth[child] > 0:
                        goal = child
                        break
                    nxt.append(child)
            if goal:
                break
        frontier = nxt
    if goal is None:
        return None
    path = []
    node: Optional[tuple[Word, int]] = goal
    while node is not None:
        path.append(node[0])
        node = parent[node]
    return ChainWitness(tuple(reversed(path)))


def chain_equivalent(g: SftGraph, u: Sequence[str], v: Sequence[str], k: int,
                     length_mod: Optional[tuple[int, int]] = None) -> bool:
    """Mutual chain reachability of two cylinders at resolution 2**-k."""
    return (delta_chain_reachable(g, u, v, k, length_mod) is not None
            and delta_chain_reachable(g, v, u, k, length_mod) is not None)


def reading_vertices(g: SftGraph, word: Sequence[str]) -> tuple[str, ...]:
    """Vertices from which the word labels some outgoing path."""
    ge = essential(g)
    alive = set(ge.vertices)
    w = tuple(word)
    for j in range(len(w) - 1, -1, -1):
        alive = {u for (u, v, a) in ge.edges if a == w[j] and v in alive}
    return tuple(sorted(alive))


def sync_length(g: SftGraph, cap: Optional[int] = None) -> Optional[int]:
    """Smallest K such that, for every admissible K-word, all vertices that
    can read it lie in a single cyclic class.  None if no K up to the cap
    works (then per-point classes are not resolved by this presentation)."""
    cs = cyclic_structure(g)
    if cs.period == 1:
        return 0
    ge = essential(g)
    if cap is None:
        cap = 2 * len(ge.vertices) + 2
    for k in range(cap + 1):
        good = True
        for w in words_of_length(ge, k):
            cls = {cs.class_of_vertex(v) for v in reading_vertices(ge, w)}
            if len(cls) > 1:
                good = False
                break
        if good:
            return k
    return None


def class_of_word(g: SftGraph, cs: CyclicStructure, word: Sequence[str]) -> int:
    """Cyclic class of the cylinder determined by the word, when every
    vertex reading the word agrees on it."""
    vs = reading_vertices(g, word)
    if not vs:
        raise NotInLanguage("word not admissible: %r" % (tuple(word),))
    cls = {cs.class_of_vertex(v) for v in vs}
    if len(cls) != 1:
        raise NotIrreducible("presentation does not resolve the class of %r" % (tuple(word),))
    return cls.pop()
