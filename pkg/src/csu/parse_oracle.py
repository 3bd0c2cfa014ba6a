"""Ground-truth parsing: Earley recognition, tree counting and enumeration.

The recognizer accepts any context-free grammar, epsilon and unit
productions included.  Counting and enumeration work span by span over the
same grammar and refuse words that have infinitely many trees.
"""

from __future__ import annotations

import sys
from . import sexpr
from .errors import CyclicGrammarError, MalformedTreeError, TreeLimitExceeded
from .grammar import DerivationTree, Grammar, Word, format_word


def nullable_nonterminals(g: Grammar) -> frozenset[int]:
    nullable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in nullable and all(isinstance(s, int) and s in nullable for s in p.rhs):
                nullable.add(p.lhs)
                changed = True
    return frozenset(nullable)


def earley_recognize(g: Grammar, w) -> bool:
    word = g.check_word(w)
    n = len(word)
    prods = g.productions
    by_lhs: dict[int, list[int]] = {}
    for k, p in enumerate(prods):
        by_lhs.setdefault(p.lhs, []).append(k)
    nullable = nullable_nonterminals(g)

    # item = (production position, dot, origin)
    chart: list[set] = [set() for _ in range(n + 1)]
    agenda: list[list] = [[] for _ in range(n + 1)]

    def add(i, item):
        if item not in chart[i]:
            chart[i].add(item)
            agenda[i].append(item)

    for k in by_lhs.get(g.start, ()):
        add(0, (k, 0, 0))
    for i in range(n + 1):
        queue = agenda[i]
        while queue:
            k, dot, origin = queue.pop()
            rhs = prods[k].rhs
            if dot < len(rhs):
                sym = rhs[dot]
                if isinstance(sym, int):
                    for k2 in by_lhs.get(sym, ()):
                        add(i, (k2, 0, i))
                    if sym in nullable:
                        add(i, (k, dot + 1, origin))
                elif i < n and word[i] == sym:
                    add(i + 1, (k, dot + 1, origin))
            else:
                lhs = prods[k].lhs
                for k2, dot2, origin2 in list(chart[origin]):
                    rhs2 = prods[k2].rhs
                    if dot2 < len(rhs2) and rhs2[dot2] == lhs:
                        add(i, (k2, dot2 + 1, origin2))
    return any(
        origin == 0 and dot == len(prods[k].rhs) and prods[k].lhs == g.start
        for k, dot, origin in chart[n]
    )


class _SpanTable:
    """Memoized span recursion; accumulates ints when counting, tree lists otherwise."""

    def __init__(self, g: Grammar, word: Word, counting: bool):
        self.g = g
        self.word = word
        self.counting = counting
        self.by_lhs: dict[int, list] = {}
        for p in g.productions:
            self.by_lhs.setdefault(p.lhs, []).append(p)
        self.min_len = _min_yield_lengths(g)
        self.active: set = set()
        self.memo_nt: dict = {}
        self.memo_seq: dict = {}
        self._suffix: dict = {}

    def nt(self, x: int, i: int, j: int):
        key = (x, i, j)
        if key in self.memo_nt:
            return self.memo_nt[key]
        if key in self.active:
            raise CyclicGrammarError(
                f"nonterminal {self.g.nonterminals[x]} re-derives itself over positions {i}..{j}"
            )
        self.active.add(key)
        try:
            if self.counting:
                total = 0
                for p in self.by_lhs.get(x, ()):
                    total += self.seq(p, 0, i, j)
                result = total
            else:
                result = []
                for p in self.by_lhs.get(x, ()):
                    for kids in self.seq(p, 0, i, j):
                        result.append(DerivationTree(p.code, kids))
        finally:
            self.active.discard(key)
        self.memo_nt[key] = result
        return result

    def seq(self, p, k: int, i: int, j: int):
        key = (p.code, k, i, j)
        if key in self.memo_seq:
            return self.memo_seq[key]
        result = self._seq(p, k, i, j)
        self.memo_seq[key] = result
        return result

    def _seq(self, p, k, i, j):
        rhs = p.rhs
        empty = 0 if self.counting else []
        if k == len(rhs):
            if i != j:
                return empty
            return 1 if self.counting else [()]
        if self.suffix_min(p, k) > j - i:
            return empty
        sym = rhs[k]
        if isinstance(sym, str):
            if i < j and self.word[i] == sym:
                return self.seq(p, k + 1, i + 1, j)
            return empty
        rest_min = self.suffix_min(p, k + 1)
        acc = 0 if self.counting else []
        for m in range(i + self.min_len.get(sym, 0), j - rest_min + 1):
            rest = self.seq(p, k + 1, m, j)
            if not rest:
                continue
            head = self.nt(sym, i, m)
            if not head:
                continue
            if self.counting:
                acc += head * rest
            else:
                acc.extend((t,) + tail for t in head for tail in rest)
        return acc

    def suffix_min(self, p, k):
        key = (p.code, k)
        if key not in self._suffix:
            total = 0
            for s in p.rhs[k:]:
                # unproductive symbols never match; inf prunes them
                total += self.min_len.get(s, float("inf")) if isinstance(s, int) else 1
            self._suffix[key] = total
        return self._suffix[key]


def _min_yield_lengths(g: Grammar) -> dict[int, int]:
    """Shortest terminal yield per productive nonterminal."""
    inf = float("inf")
    best = {i: inf for i in range(len(g.nonterminals))}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            total = 0
            for s in p.rhs:
                total += best[s] if isinstance(s, int) else 1
            if total < best[p.lhs]:
                best[p.lhs] = total
                changed = True
    return {i: v for i, v in best.items() if v != inf}


def _with_recursion_room(fn, *args):
    limit = sys.getrecursionlimit()
    if limit < 10000:
        sys.setrecursionlimit(10000)
    return fn(*args)


def count_trees(g: Grammar, w) -> int:
    word = g.check_word(w)
    table = _SpanTable(g, word, counting=True)
    return _with_recursion_room(table.nt, g.start, 0, len(word))


def enumerate_trees(g: Grammar, w, limit: int | None = None) -> list[DerivationTree]:
    """All derivation trees of ``w`` ordered by their preorder code sequence.

    Raises :class:`TreeLimitExceeded` (carrying the first ``limit`` trees)
    when more than ``limit`` trees exist.
    """
    word = g.check_word(w)
    table = _SpanTable(g, word, counting=False)
    trees = _with_recursion_room(table.nt, g.start, 0, len(word))
    trees = sorted(trees, key=DerivationTree.preorder)
    if limit is not None and len(trees) > limit:
        raise TreeLimitExceeded(trees[:limit], len(trees))
    return trees


def check_tree(t: DerivationTree, g: Grammar, lhs: int | None = None) -> None:
    """Raise :class:`MalformedTreeError` unless ``t`` is a derivation tree of ``g``."""
    stack = [(t, g.start if lhs is None else lhs)]
    while stack:
        node, expected = stack.pop()
        if not g.has_production(node.code):
            raise MalformedTreeError(f"unknown production code {node.code}")
        p = g.production(node.code)
        if p.lhs != expected:
            raise MalformedTreeError(
                f"node {node.code} rewrites {g.nonterminals[p.lhs]}, expected {g.nonterminals[expected]}"
            )
        if len(node.children) != p.nt_count:
            raise MalformedTreeError(
                f"node {node.code} has {len(node.children)} children, production needs {p.nt_count}"
            )
        stack.extend(zip(node.children, p.nonterminals))


def yield_of(t: DerivationTree, g: Grammar) -> Word:
    check_tree(t, g)
    out: list[str] = []

    def walk(node):
        p = g.production(node.code)
        kids = iter(node.children)
        for s in p.rhs:
            if isinstance(s, int):
                walk(next(kids))
            else:
                out.append(s)

    _with_recursion_room(walk, t)
    return tuple(out)


def parse_tree(text: str) -> DerivationTree:
    """Read the ``(0.2 (1.2 (2.1)) (2.1))`` serialization."""

    def build(node):
        if not isinstance(node, list) or not node or isinstance(node[0], list):
            raise MalformedTreeError(f"expected '(a.b child...)', got {sexpr.dumps(node)}")
        a, dot, b = node[0].partition(".")
        if not dot or not a.isdigit() or not b.isdigit():
            raise MalformedTreeError(f"bad production code {node[0]!r}")
        return DerivationTree((int(a), int(b)), tuple(build(c) for c in node[1:]))

    try:
        return build(sexpr.loads(text))
    except sexpr.SexprError as exc:
        raise MalformedTreeError(str(exc)) from None


def format_tree(t: DerivationTree) -> str:
    return t.to_sexpr()


def describe_tree(t: DerivationTree, g: Grammar) -> str:
    """Indented outline with production names, for humans."""
    lines = []

    def walk(node, depth):
        p = g.production(node.code)
        lines.append("  " * depth + f"p{node.code[0]}.{node.code[1]}: {g.format_production(p)}")
        for c in node.children:
            walk(c, depth + 1)

    walk(t, 0)
    lines.append(f"yield: {format_word(yield_of(t, g))}")
    return "\n".join(lines)
