"""Sliding block codes between presented shift spaces.

A code has a window width w >= 1 and looks only forward: output symbol i
is a function of input symbols i..i+w-1.  Codes carry their domain and
codomain presentations and are validated exactly at construction: a
product walk of the domain block graph against the codomain follower
automaton proves that every admissible input maps to an admissible
output, whatever its length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    AlphabetMismatch,
    CompositionMismatch,
    NotInLanguage,
    SchemaError,
)
from .shift_core import (
    SftGraph,
    SymbolicPoint,
    Word,
    _subset_automaton,
    canonical_presentation,
    essential,
    graph_from_json,
    graph_to_json,
    language_subset,
    parse_word,
    point_in_shift,
    word_str,
    words_of_length,
)


@dataclass(frozen=True)
class SlidingBlockCode:
    domain: SftGraph
    codomain: SftGraph
    window: int
    rule: dict[Word, str]

    def __post_init__(self) -> None:
        if self.window < 1:
            raise SchemaError("window must be >= 1")
        for w, s in self.rule.items():
            if len(w) != self.window:
                raise SchemaError("rule key %r has wrong length" % (w,))
            if s not in self.codomain.alphabet:
                raise AlphabetMismatch("rule output %r not in codomain alphabet" % s)
        _check_well_defined(self)

    def word_map(self, word: Sequence[str]) -> Word:
        """Image of a finite word; shortens by window-1."""
        w = tuple(word)
        out = []
        for i in range(len(w) - self.window + 1):
            key = w[i:i + self.window]
            if key not in self.rule:
                raise NotInLanguage("no rule for block %r" % (key,))
            out.append(self.rule[key])
        return tuple(out)

    def __repr__(self) -> str:
        return "SlidingBlockCode(window=%d, rule=%d blocks)" % (self.window, len(self.rule))


def _check_well_defined(code: SlidingBlockCode) -> None:
    """Every admissible window of the domain must have a rule entry and
    every admissible input word must map into the codomain language.  The
    latter is exact: simulate the domain block walk against the codomain
    follower automaton over all reachable pairs."""
    dom = essential(code.domain)
    w = code.window
    for block in words_of_length(dom, w):
        if block not in code.rule:
            raise NotInLanguage("rule missing admissible block %r" % (block,))
    states, trans = _subset_automaton(code.codomain)
    if not states or not states[0]:
        if not dom.vertices:
            return
        raise NotInLanguage("codomain is empty but domain is not")
    dstates, dtrans = _subset_automaton(dom)
    if not dstates or not dstates[0]:
        return
    # Pair (domain follower state with w-1 symbol history, codomain state).
    start_pairs = []
    for hist in words_of_length(dom, w - 1):
        i = 0
        for s in hist:
            i = dtrans[(i, s)]
        start_pairs.append((i, hist, 0))
    seen = set(start_pairs)
    queue = list(start_pairs)
    while queue:
        di, hist, ci = queue.pop(0)
        for a in dom.alphabet:
            if (di, a) not in dtrans:
                continue
            block = hist + (a,)
            out = code.rule.get(block)
            if out is None:
                raise NotInLanguage("rule missing admissible block %r" % (block,))
            if (ci, out) not in trans:
                raise NotInLanguage(
                    "image leaves the codomain language at block %r" % (block,))
            node = (dtrans[(di, a)], block[1:], trans[(ci, out)])
            if node not in seen:
                seen.add(node)
                queue.append(node)


def identity_code(g: SftGraph) -> SlidingBlockCode:
    return SlidingBlockCode(g, g, 1, {(a,): a for a in g.alphabet})


def symbol_code(domain: SftGraph, codomain: SftGraph, mapping: dict[str, str]) -> SlidingBlockCode:
    return SlidingBlockCode(domain, codomain, 1,
                            {(a,): b for a, b in mapping.items()})


def apply_code(code: SlidingBlockCode, x: SymbolicPoint) -> SymbolicPoint:
    """Image of an eventually periodic point: preperiod and period lengths
    are preserved (the window slides into the periodic tail)."""
    if not point_in_shift(code.domain, x):
        raise NotInLanguage("point %s is not in the domain" % x)
    pre = len(x.preperiod)
    per = len(x.period)
    need = pre + per + code.window - 1
    word = x.expand(need)
    img = code.word_map(word)
    return SymbolicPoint(img[:pre], img[pre:pre + per])


def compose(outer: SlidingBlockCode, inner: SlidingBlockCode) -> SlidingBlockCode:
    """outer after inner, window w1 + w2 - 1.  Requires the image of the
    inner code to land inside the outer domain."""
    ok, witness = language_subset(code_image(inner), outer.domain)
    if not ok:
        raise CompositionMismatch(
            "inner image is not contained in outer domain; witness %s"
            % word_str(witness or ()))
    w = inner.window + outer.window - 1
    rule = {}
    for block in words_of_length(essential(inner.domain), w):
        rule[block] = outer.rule[inner.word_map(block)]
    return SlidingBlockCode(inner.domain, outer.codomain, w, rule)


def code_image(code: SlidingBlockCode, domain: Optional[SftGraph] = None) -> SftGraph:
    """Canonical presentation of the image of the (restricted) domain:
    transport labels through the rule on the block graph, then
    determinize and minimize."""
    dom = essential(domain if domain is not None else code.domain)
    if not dom.vertices:
        return SftGraph((), (), code.codomain.alphabet)
    w = code.window
    if w == 1:
        edges = tuple(dict.fromkeys(
            (u, v, code.rule[(a,)]) for (u, v, a) in dom.edges))
        labeled = SftGraph(dom.vertices, edges, code.codomain.alphabet)
        return canonical_presentation(labeled)
    states = words_of_length(dom, w - 1)
    stateset = set(states)
    names = {s: word_str(s) for s in states}
    edges = []
    for block in words_of_length(dom, w):
        u, v = block[:-1], block[1:]
        if u in stateset and v in stateset:
            edges.append((names[u], names[v], code.rule[block]))
    labeled = SftGraph(tuple(names[s] for s in states),
                       tuple(dict.fromkeys(edges)),
                       code.codomain.alphabet)
    return canonical_presentation(labeled)


def restrict(code: SlidingBlockCode, subdomain: SftGraph) -> SlidingBlockCode:
    """Same rule on a smaller domain; the subdomain language must be
    contained in the original domain language."""
    ok, witness = language_subset(subdomain, code.domain)
    if not ok:
        raise CompositionMismatch(
            "restriction target is not a subsystem; witness %s"
            % word_str(witness or ()))
    sub = essential(subdomain)
    rule = {b: code.rule[b] for b in words_of_length(sub, code.window)}
    return SlidingBlockCode(sub, code.codomain, code.window, rule)


# ---------------------------------------------------------------------------
# JSON interface


def code_to_json(code: SlidingBlockCode) -> dict:
    return {
        "window": code.window,
        "rule": {word_str(w): s for w, s in sorted(code.rule.items())},
        "domain": graph_to_json(code.domain),
        "codomain": graph_to_json(code.codomain),
    }


def code_from_json(data: dict) -> SlidingBlockCode:
    try:
        window = int(data["window"])
        rule = {parse_word(str(k)): str(v) for k, v in data["rule"].items()}
        domain = graph_from_json(data["domain"])
        codomain = graph_from_json(data["codomain"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("malformed code: %s" % exc) from exc
    return SlidingBlockCode(domain, codomain, window, rule)
