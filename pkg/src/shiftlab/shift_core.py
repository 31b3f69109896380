"""Core objects: labeled graphs presenting shift spaces, symbolic points,
and the exact dyadic cylinder metric.

Conventions, fixed once here and relied on everywhere else:

* Shifts are one-sided, indexed from 0.
* d(x, y) = 2**(-j) where j is the least index at which x and y differ,
  and d(x, x) = 0.  Distances are exact ``fractions.Fraction`` values.
* A presentation is a finite directed multigraph with edge labels.  Its
  language is the set of label words of all finite paths.  The shift space
  it presents is the set of label sequences of infinite paths.
* A presentation is essential when every vertex has at least one incoming
  and one outgoing edge.  All constructors normalize to essential form.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    EmptyShift,
    InvalidAlphabet,
    NotInLanguage,
    SchemaError,
)

Word = tuple[str, ...]


@dataclass(frozen=True)
class CylinderMetric:
    """Record of the metric convention: d(x, y) = base**(-j) with j the
    least differing coordinate, coordinates starting at 0."""

    base: int = 2
    origin: int = 0

    def value(self, first_mismatch: Optional[int]) -> Fraction:
        if first_mismatch is None:
            return Fraction(0)
        return Fraction(1, self.base ** first_mismatch)


METRIC = CylinderMetric()


def word_str(word: Sequence[str]) -> str:
    if any(len(s) != 1 for s in word):
        return ".".join(word)
    return "".join(word)


def parse_word(text: str) -> Word:
    if text == "":
        return ()
    if "." in text:
        return tuple(text.split("."))
    return tuple(text)


def word_distance(u: Sequence[str], v: Sequence[str]) -> Fraction:
    """Cylinder distance between two finite words of equal length, read as
    truncated points.  Identical words give 0."""
    for j, (a, b) in enumerate(zip(u, v)):
        if a != b:
            return Fraction(1, 2 ** j)
    if len(u) != len(v):
        return Fraction(1, 2 ** min(len(u), len(v)))
    return Fraction(0)


# ---------------------------------------------------------------------------
# Graph presentations


@dataclass(frozen=True)
class SftGraph:
    """Labeled directed multigraph presenting a shift space.

    ``edges`` is a tuple of (source, target, label).  The graph is stored
    as given; use :func:`essential` to prune stranded vertices and
    :func:`canonical_presentation` for the minimal deterministic form.
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]
    alphabet: tuple[str, ...]

    def __post_init__(self) -> None:
        vs = set(self.vertices)
        ab = set(self.alphabet)
        if len(self.alphabet) != len(ab):
            raise InvalidAlphabet("duplicate symbols in alphabet")
        if len(set(self.edges)) != len(self.edges):
            raise SchemaError("duplicate labeled edge")
        for (u, v, a) in self.edges:
            if u not in vs or v not in vs:
                raise SchemaError("edge endpoint not among vertices: %r" % ((u, v, a),))
            if a not in ab:
                raise InvalidAlphabet("edge label %r not in alphabet" % a)

    @property
    def out_map(self) -> dict[str, list[tuple[str, str]]]:
        m: dict[str, list[tuple[str, str]]] = {v: [] for v in self.vertices}
        for (u, v, a) in self.edges:
            m[u].append((a, v))
        return m

    def is_empty(self) -> bool:
        return not essential(self).vertices

    def is_deterministic(self) -> bool:
        seen = set()
        for (u, _v, a) in self.edges:
            if (u, a) in seen:
                return False
            seen.add((u, a))
        return True

    def successors(self, vertex: str, symbol: str) -> list[str]:
        return [v for (u, v, a) in self.edges if u == vertex and a == symbol]


def make_graph(vertices: Iterable[str], edges: Iterable[tuple[str, str, str]],
               alphabet: Optional[Iterable[str]] = None) -> SftGraph:
    vs = tuple(dict.fromkeys(vertices))
    es = tuple(edges)
    if alphabet is None:
        ab = tuple(sorted({a for (_u, _v, a) in es}))
    else:
        ab = tuple(alphabet)
    return SftGraph(vs, es, ab)


def essential(g: SftGraph) -> SftGraph:
    """Iteratively remove vertices lacking an incoming or outgoing edge."""
    alive = set(g.vertices)
    changed = True
    while changed:
        changed = False
        outs = {v: 0 for v in alive}
        ins = {v: 0 for v in alive}
        for (u, v, a) in g.edges:
            if u in alive and v in alive:
                outs[u] += 1
                ins[v] += 1
        for v in list(alive):
            if outs[v] == 0 or ins[v] == 0:
                alive.discard(v)
                changed = True
    return SftGraph(
        tuple(v for v in g.vertices if v in alive),
        tuple(e for e in g.edges if e[0] in alive and e[1] in alive),
        g.alphabet,
    )


def full_shift(alphabet: Iterable[str]) -> SftGraph:
    ab = tuple(alphabet)
    if not ab:
        raise InvalidAlphabet("empty alphabet")
    return SftGraph(("*",), tuple(("*", "*", a) for a in ab), ab)


def from_forbidden_words(alphabet: Iterable[str], forbidden: Iterable[Sequence[str]]) -> SftGraph:
    """Higher-block presentation of the shift avoiding every word in
    ``forbidden``.  Vertices are the admissible words of length N where
    N + 1 is the longest forbidden length; the result is essential and
    deterministic, and may be empty."""
    ab = tuple(alphabet)
    if not ab:
        raise InvalidAlphabet("empty alphabet")
    bad = {tuple(w) for w in forbidden}
    for w in bad:
        for s in w:
            if s not in ab:
                raise InvalidAlphabet("forbidden word uses unknown symbol %r" % s)
        if len(w) == 0:
            return SftGraph((), (), ab)
    keep = tuple(s for s in ab if (s,) not in bad)
    long_bad = {w for w in bad if len(w) >= 2}
    n = max((len(w) for w in long_bad), default=1) - 1

    def ok(word: Word) -> bool:
        for i in range(len(word)):
            for j in range(i + 1, len(word) + 1):
                if word[i:j] in long_bad:
                    return False
        return True

    if n == 0:
        if not keep:
            return SftGraph((), (), ab)
        return SftGraph(("*",), tuple(("*", "*", a) for a in keep), ab)

    states = [w for w in itertools.product(keep, repeat=n) if ok(w)]
    names = {w: word_str(w) for w in states}
    edges = []
    stateset = set(states)
    for w in states:
        for a in keep:
            ext = w + (a,)
            if ok(ext) and ext[1:] in stateset:
                edges.append((names[w], names[ext[1:]], a))
    return essential(SftGraph(tuple(names[w] for w in states), tuple(edges), ab))


# ---------------------------------------------------------------------------
# Deterministic presentations and language comparison


def _subset_automaton(g: SftGraph) -> tuple[list[frozenset], dict[tuple[int, str], int]]:
    """Subset construction over the essential part; state 0 is the full
    vertex set.  Returns (states, transitions); all states are accepting and
    nonempty, missing transitions mean the word leaves the language."""
    ge = essential(g)
    out: dict[str, dict[str, set[str]]] = {v: {} for v in ge.vertices}
    for (u, v, a) in ge.edges:
        out[u].setdefault(a, set()).add(v)
    start = frozenset(ge.vertices)
    states = [start]
    index = {start: 0}
    trans: dict[tuple[int, str], int] = {}
    queue = [start]
    while queue:
        s = queue.pop(0)
        i = index[s]
        for a in ge.alphabet:
            nxt = frozenset().union(*(out[v].get(a, set()) for v in s)) if s else frozenset()
            if not nxt:
                continue
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
                queue.append(nxt)
            trans[(i, a)] = index[nxt]
    return states, trans


def determinize(g: SftGraph) -> SftGraph:
    """Deterministic presentation of the same language (subset construction,
    restricted to the essential part)."""
    states, trans = _subset_automaton(g)
    if not states or not states[0]:
        return SftGraph((), (), g.alphabet)
    names = ["q%d" % i for i in range(len(states))]
    edges = tuple((names[i], names[j], a) for (i, a), j in sorted(trans.items()))
    return essential(SftGraph(tuple(names), edges, g.alphabet))


def _minimize(num_states: int, trans: dict[tuple[int, str], int],
              alphabet: Sequence[str]) -> tuple[list[int], int]:
    """Moore minimization of a partial DFA in which every state is
    accepting.  Returns (block id per state, block count)."""
    block = [0] * num_states
    nblocks = 1
    while True:
        sig = {}
        newblock = [0] * num_states
        for s in range(num_states):
            key = (block[s], tuple(
                block[trans[(s, a)]] if (s, a) in trans else -1 for a in alphabet))
            if key not in sig:
                sig[key] = len(sig)
            newblock[s] = sig[key]
        if len(sig) == nblocks:
            return newblock, nblocks
        block, nblocks = newblock, len(sig)


def canonical_presentation(g: SftGraph) -> SftGraph:
    """Minimal deterministic essential presentation, with vertices renamed
    canonically by breadth-first discovery from the full-follower state.
    Two graphs present the same language iff their canonical presentations
    are identical."""
    states, trans = _subset_automaton(g)
    if not states or not states[0]:
        return SftGraph((), (), g.alphabet)
    block, nblocks = _minimize(len(states), trans, g.alphabet)
    btrans: dict[tuple[int, str], int] = {}
    for (s, a), t in trans.items():
        btrans[(block[s], a)] = block[t]
    # Canonical BFS naming from the block of the full state.
    order = [block[0]]
    seen = {block[0]}
    i = 0
    while i < len(order):
        b = order[i]
        i += 1
        for a in g.alphabet:
            if (b, a) in btrans and btrans[(b, a)] not in seen:
                seen.add(btrans[(b, a)])
                order.append(btrans[(b, a)])
    rank = {b: k for k, b in enumerate(order)}
    names = {b: "c%d" % rank[b] for b in order}
    edges = tuple(sorted(
        (names[b], names[t], a)
        for (b, a), t in btrans.items() if b in rank and t in rank))
    verts = tuple(names[b] for b in order)
    return essential(SftGraph(verts, edges, g.alphabet))


def canonical_signature(g: SftGraph) -> str:
    c = canonical_presentation(g)
    return json.dumps({"v": list(c.vertices), "e": [list(e) for e in c.edges],
                       "a": list(c.alphabet)}, separators=(",", ":"))


def _merged_alphabet(a: SftGraph, b: SftGraph) -> tuple[str, ...]:
    return tuple(sorted(set(a.alphabet) | set(b.alphabet)))


def language_subset(a: SftGraph, b: SftGraph) -> tuple[bool, Optional[Word]]:
    """Is every word of ``a`` a word of ``b``?  On failure returns a
    shortest witness word (in ``a`` but not ``b``)."""
    ab = _merged_alphabet(a, b)
    sa, ta = _subset_automaton(a)
    sb, tb = _subset_automaton(b)
    a_dead = not sa or not sa[0]
    b_dead = not sb or not sb[0]
    if a_dead:
        return True, None
    start = (0, 0 if not b_dead else None)
    queue: list[tuple[tuple[int, Optional[int]], Word]] = [(start, ())]
    seen = {start}
    while queue:
        (i, j), w = queue.pop(0)
        if j is None:
            return False, w
        for s in ab:
            if (i, s) not in ta:
                continue
            ni = ta[(i, s)]
            nj = tb.get((j, s)) if j is not None else None
            if nj is None:
                return False, w + (s,)
            key = (ni, nj)
            if key not in seen:
                seen.add(key)
                queue.append((key, w + (s,)))
    return True, None


def language_equal(a: SftGraph, b: SftGraph) -> tuple[bool, Optional[Word]]:
    """Language equality with a shortest counterexample word on failure."""
    ab = _merged_alphabet(a, b)
    sa, ta = _subset_automaton(a)
    sb, tb = _subset_automaton(b)
    ia = 0 if sa and sa[0] else None
    ib = 0 if sb and sb[0] else None
    start = (ia, ib)
    if ia is None and ib is None:
        return True, None
    if ia is None or ib is None:
        return False, ()
    queue: list[tuple[tuple[Optional[int], Optional[int]], Word]] = [(start, ())]
    seen = {start}
    while queue:
        (i, j), w = queue.pop(0)
        for s in ab:
            ni = ta.get((i, s)) if i is not None else None
            nj = tb.get((j, s)) if j is not None else None
            if ni is None and nj is None:
                continue
            if ni is None or nj is None:
                return False, w + (s,)
            key = (ni, nj)
            if key not in seen:
                seen.add(key)
                queue.append((key, w + (s,)))
    return True, None


def word_in_language(g: SftGraph, word: Sequence[str]) -> bool:
    states, trans = _subset_automaton(g)
    if not states or not states[0]:
        return len(word) == 0
    i = 0
    for s in word:
        if (i, s) not in trans:
            return False
        i = trans[(i, s)]
    return True


def words_of_length(g: SftGraph, length: int) -> list[Word]:
    """All admissible words of exactly the given length, sorted."""
    states, trans = _subset_automaton(g)
    if not states or not states[0]:
        return [()] if length == 0 else []
    out: list[Word] = []

    def walk(i: int, w: Word) -> None:
        if len(w) == length:
            out.append(w)
            return
        for a in g.alphabet:
            if (i, a) in trans:
                walk(trans[(i, a)], w + (a,))

    walk(0, ())
    return sorted(out)


def count_words(g: SftGraph, length: int) -> int:
    states, trans = _subset_automaton(g)
    if not states or not states[0]:
        return 1 if length == 0 else 0
    counts = {0: 1}
    for _ in range(length):
        nxt: dict[int, int] = {}
        for i, c in counts.items():
            for a in g.alphabet:
                if (i, a) in trans:
                    nxt[trans[(i, a)]] = nxt.get(trans[(i, a)], 0) + c
        counts = nxt
    return sum(counts.values())


# ---------------------------------------------------------------------------
# Symbolic points


@dataclass(frozen=True)
class SymbolicPoint:
    """Eventually periodic one-sided sequence, stored as a preperiod word
    plus a primitive period word and normalized so that equal expansions
    compare equal structurally."""

    preperiod: Word
    period: Word

    def __post_init__(self) -> None:
        if not self.period:
            raise NotInLanguage("period word must be nonempty")
        per = self.period
        for d in range(1, len(per) + 1):
            if len(per) % d == 0 and per == per[:d] * (len(per) // d):
                per = per[:d]
                break
        pre = self.preperiod
        while pre and pre[-1] == per[-1]:
            per = (per[-1],) + per[:-1]
            pre = pre[:-1]
        object.__setattr__(self, "preperiod", tuple(pre))
        object.__setattr__(self, "period", tuple(per))

    @staticmethod
    def periodic(period: Sequence[str]) -> "SymbolicPoint":
        return SymbolicPoint((), tuple(period))

    @staticmethod
    def eventually(preperiod: Sequence[str], period: Sequence[str]) -> "SymbolicPoint":
        return SymbolicPoint(tuple(preperiod), tuple(period))

    def symbol_at(self, i: int) -> str:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def expand(self, n: int) -> Word:
        return tuple(self.symbol_at(i) for i in range(n))

    def shift(self, k: int = 1) -> "SymbolicPoint":
        if k == 0:
            return self
        pre = self.preperiod
        per = self.period
        if k < len(pre):
            return SymbolicPoint(pre[k:], per)
        k -= len(pre)
        k %= len(per)
        return SymbolicPoint((), per[k:] + per[:k])

    def __str__(self) -> str:
        return "%s(%s)*" % (word_str(self.preperiod), word_str(self.period))


def distance(x: SymbolicPoint, y: SymbolicPoint) -> Fraction:
    """Exact cylinder distance 2**(-j), j the least differing index."""
    if x == y:
        return Fraction(0)
    bound = (len(x.preperiod) + len(y.preperiod)
             + math.lcm(len(x.period), len(y.period)))
    for j in range(bound + 1):
        if x.symbol_at(j) != y.symbol_at(j):
            return METRIC.value(j)
    return Fraction(0)


def point_in_shift(g: SftGraph, x: SymbolicPoint) -> bool:
    """Does the presented shift space contain the point?  Decided by a
    follower-set walk with cycle detection over period phases."""
    ge = essential(g)
    if not ge.vertices:
        return False
    out: dict[str, dict[str, set[str]]] = {v: {} for v in ge.vertices}
    for (u, v, a) in ge.edges:
        out[u].setdefault(a, set()).add(v)
    s = frozenset(ge.vertices)
    seen: dict[tuple[int, frozenset], bool] = {}
    i = 0
    while True:
        if i >= len(x.preperiod):
            phase = (i - len(x.preperiod)) % len(x.period)
            key = (phase, s)
            if key in seen:
                return True
            seen[key] = True
        a = x.symbol_at(i)
        s = frozenset().union(*(out[v].get(a, set()) for v in s)) if s else frozenset()
        if not s:
            return False
        i += 1


def periodic_points(g: SftGraph, period: int) -> list[SymbolicPoint]:
    """All points of (not necessarily primitive) period ``period``, i.e.
    fixed points of the ``period``-fold shift, sorted by string form."""
    if period <= 0:
        raise EmptyShift("period must be positive")
    found = set()
    for w in words_of_length(g, period):
        p = SymbolicPoint.periodic(w)
        if point_in_shift(g, p):
            found.add(p)
    return sorted(found, key=str)


# ---------------------------------------------------------------------------
# JSON interface


def graph_to_json(g: SftGraph) -> dict:
    return {
        "alphabet": list(g.alphabet),
        "vertices": list(g.vertices),
        "edges": [[u, v, a] for (u, v, a) in g.edges],
    }


def graph_from_json(data: dict) -> SftGraph:
    if not isinstance(data, dict):
        raise SchemaError("graph object expected")
    if "forbidden" in data:
        if "alphabet" not in data:
            raise SchemaError("forbidden-word form needs an alphabet")
        return from_forbidden_words(
            [str(s) for s in data["alphabet"]],
            [parse_word(str(w)) for w in data["forbidden"]])
    try:
        ab = tuple(str(s) for s in data["alphabet"])
        vs = tuple(str(v) for v in data["vertices"])
        es = tuple((str(u), str(v), str(a)) for (u, v, a) in data["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("malformed graph: %s" % exc) from exc
    return SftGraph(vs, es, ab)
