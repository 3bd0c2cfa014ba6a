"""Matchings over word positions and the first-order grammar sentence.

A matching is a set of noncrossing arcs ``(i, j)``, ``i < j``, with every
position in at most one arc.  A derivation tree over a grammar in double
Greibach form induces one arc per internal node, from its leftmost to its
rightmost leaf.  :func:`build_psi_g` writes a sentence over letters, order,
successor and the arc relation that holds on ``(w, M)`` exactly when ``M`` is
the matching of some derivation tree of ``w``.

Three variants are available:

``literal``
    the construction as usually stated, whose arc checks look only at the
    designated child arcs.  Extra "floating" arcs that happen to spell a
    production pattern slip through.
``outer-exact``
    adds an exactness clause to every top-level arc check: arcs strictly
    inside ``(x, y)`` must nest inside one of the designated child arcs.
``exact`` (default)
    additionally applies the exactness clause inside the nested
    per-nonterminal checks, which closes the remaining gap (see
    :data:`OUTER_EXACT_GAP`).
"""

from __future__ import annotations

import itertools
import json
import os
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import EnumerationBoundExceeded, NotDGNFError, PreconditionError
from .formula import (
    FALSE,
    MAX,
    MIN,
    Arc,
    CompiledFormula,
    Eq,
    Exists,
    ForAll,
    Formula,
    Less,
    Letter,
    Not,
    Term,
    Var,
    WordModel,
    compile_formula,
    conj,
    disj,
    implies,
    leq,
    succ_n,
)
from .grammar import DerivationTree, Grammar, Word, format_word, validate_dgnf
from .normalize import pattern_collisions
from .parse_oracle import check_tree, count_trees, enumerate_trees

DEFAULT_ENUM_BOUND = 14
VARIANTS = ("exact", "outer-exact", "literal")

# Pattern-injective grammar on which outer-only exactness accepts a matching
# that comes from no derivation tree.
OUTER_EXACT_GAP = {
    "grammar": "start: S\nS -> c X c | d Y d\nX -> a a W b b\nW -> a b\nY -> a Y b | a b\n",
    "word": "caaabbbc",
    "arcs": ((1, 8), (2, 7), (3, 6), (4, 5)),
}


def enumeration_bound() -> int:
    raw = os.environ.get("CSU_ENUM_BOUND")
    if raw is None or not raw.strip():
        return DEFAULT_ENUM_BOUND
    try:
        value = int(raw)
    except ValueError:
        raise PreconditionError(f"CSU_ENUM_BOUND must be an integer, got {raw!r}") from None
    if value < 0:
        raise PreconditionError("CSU_ENUM_BOUND must be nonnegative")
    return value


def _check_bound(n: int, bound: int | None) -> None:
    limit = enumeration_bound() if bound is None else bound
    if n > limit:
        raise EnumerationBoundExceeded(
            f"length {n} exceeds the matching enumeration bound {limit} (set CSU_ENUM_BOUND to raise it)"
        )


# --- matchings ---------------------------------------------------------------------


@dataclass(frozen=True)
class Matching:
    arcs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(sorted((int(i), int(j)) for i, j in self.arcs)))

    @classmethod
    def of(cls, arcs: Iterable[tuple[int, int]]) -> "Matching":
        return cls(tuple(arcs))

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self):
        return len(self.arcs)

    def __contains__(self, arc) -> bool:
        return tuple(arc) in self.as_set

    @cached_property
    def as_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.arcs)

    @cached_property
    def partner(self) -> dict[int, int]:
        out = {}
        for i, j in self.arcs:
            out[i] = j
            out[j] = i
        return out

    def union(self, arcs) -> "Matching":
        return Matching(tuple(self.as_set | {tuple(a) for a in arcs}))

    def __str__(self) -> str:
        return format_matching(self)


def format_matching(m: Iterable[tuple[int, int]]) -> str:
    return "[" + ",".join(f"({i},{j})" for i, j in sorted(m)) + "]"


_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_matching(text: str) -> Matching:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"expected '[(i,j),...]', got {text!r}")
    inner = body[1:-1]
    pairs = [(int(a), int(b)) for a, b in _PAIR.findall(inner)]
    if _PAIR.sub("", inner).replace(",", "").strip():
        raise ValueError(f"unparseable matching {text!r}")
    return Matching(tuple(pairs))


@dataclass(frozen=True)
class MatchingVerdict:
    ok: bool
    clause: int | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def is_matching(arcs: Iterable[tuple[int, int]], n: int) -> MatchingVerdict:
    """Check the three matching clauses: ``i < j``; each position used at most
    once; arcs nest or are disjoint (no crossing)."""
    pairs = sorted({(int(i), int(j)) for i, j in arcs})
    for i, j in pairs:
        if not (1 <= i <= n and 1 <= j <= n):
            return MatchingVerdict(False, 1, f"arc ({i},{j}) leaves positions 1..{n}")
        if not i < j:
            return MatchingVerdict(False, 1, f"arc ({i},{j}) does not satisfy i < j")
    used: dict[int, tuple[int, int]] = {}
    for arc in pairs:
        for pos in arc:
            if pos in used:
                return MatchingVerdict(False, 2, f"position {pos} is in arcs {used[pos]} and {arc}")
            used[pos] = arc
    for (i, j), (k, l) in itertools.combinations(pairs, 2):
        if i < k < j < l or k < i < l < j:
            return MatchingVerdict(False, 3, f"arcs ({i},{j}) and ({k},{l}) cross")
    return MatchingVerdict(True)


def enumerate_matchings(n: int, bound: int | None = None) -> list[Matching]:
    """All matchings on ``1..n`` ordered by their sorted arc tuples."""
    if n < 0:
        raise ValueError("length must be nonnegative")
    _check_bound(n, bound)
    memo: dict[tuple[int, int], list[tuple]] = {}

    def block(lo: int, hi: int) -> list[tuple]:
        # matchings on lo..hi, arcs listed by left endpoint
        if lo > hi:
            return [()]
        key = (lo, hi)
        if key in memo:
            return memo[key]
        out = list(block(lo + 1, hi))
        for j in range(lo + 1, hi + 1):
            inside = block(lo + 1, j - 1)
            outside = block(j + 1, hi)
            for a in inside:
                for b in outside:
                    out.append(((lo, j),) + a + b)
        memo[key] = out
        return out

    return [Matching(m) for m in sorted(block(1, n))]


def matching_from_tree(t: DerivationTree, g: Grammar) -> Matching:
    """One arc per internal node, from its leftmost to its rightmost leaf."""
    check_tree(t, g)
    arcs: list[tuple[int, int]] = []

    def walk(node, pos, is_root):
        p = g.production(node.code)
        if len(p.rhs) < 2 and not (is_root and p.is_terminal):
            raise PreconditionError(
                f"node {node.code} has a one-symbol right-hand side; matchings need DGNF trees"
            )
        start = pos
        kids = iter(node.children)
        for s in p.rhs:
            if isinstance(s, int):
                pos = walk(next(kids), pos, False)
            else:
                pos += 1
        if pos - start >= 2:
            arcs.append((start + 1, pos))
        return pos

    walk(t, 0, True)
    return Matching(tuple(arcs))


# --- the sentence -------------------------------------------------------------------


def _require_psi_preconditions(g: Grammar) -> None:
    report = validate_dgnf(g)
    if not report:
        raise NotDGNFError(g.format_production(p) for p in report.offenders)
    clashes = pattern_collisions(g)
    if clashes:
        (a, b), *_ = clashes
        raise PreconditionError(
            "grammar is not pattern-injective: "
            f"{g.format_production(g.production(a))} and {g.format_production(g.production(b))} share a pattern"
        )
    on_rhs = {x for p in g.productions for x in p.nonterminals}
    for p in g.productions:
        if len(p.rhs) == 1 and p.lhs in on_rhs:
            raise PreconditionError(
                f"{g.format_production(p)} derives a single letter but {g.nonterminals[p.lhs]} "
                "occurs on a right-hand side; run eliminate_short_productions first"
            )


class _Fresh:
    def __init__(self):
        self.k = 0

    def __call__(self, *bases: str) -> list[str]:
        self.k += 1
        return [f"{b}{self.k}" for b in bases]


def _segment(v: Word, left: Term, right: Term) -> Formula:
    """Positions strictly between ``left`` and ``right`` spell ``v``.

    Written as ``right = left + |v| + 1`` first so that evaluation can use the
    equation to pin an existentially bound ``right``.
    """
    parts: list[Formula] = [Eq(right, succ_n(left, len(v) + 1))]
    parts.extend(Letter(a, succ_n(left, k + 1)) for k, a in enumerate(v))
    return conj(*parts)


def _spell(u: Word, left: Term, right: Term) -> Formula:
    """Positions ``left..right`` spell ``u`` exactly."""
    if not u:
        return FALSE
    parts: list[Formula] = [Letter(a, succ_n(left, k)) for k, a in enumerate(u)]
    parts.append(Eq(succ_n(left, len(u) - 1), right))
    return conj(*parts)


class _Builder:
    def __init__(self, g: Grammar, variant: str):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
        self.g = g
        self.variant = variant
        self.fresh = _Fresh()
        self.long = [p for p in g.productions if len(p.rhs) >= 2]

    def _exactness(self, x: Term, y: Term, children: Sequence[tuple[Term, Term]]) -> Formula:
        z, t = (Var(n) for n in self.fresh("z", "t"))
        inside = conj(Arc(z, t), Less(x, z), Less(t, y))
        covered = disj(*(conj(leq(xk, z), leq(t, yk)) for xk, yk in children))
        return ForAll(z.name, ForAll(t.name, implies(inside, covered)))

    def block(self, p, x: Term, y: Term, exact: bool, nested: bool) -> Formula:
        """Pattern check for production ``p`` on the arc ``(x, y)``.

        ``nested`` adds the per-nonterminal checks on the child arcs (the
        barred form); ``exact`` adds the exactness clause.
        """
        segs = p.segments
        head, tail = segs[0][0], segs[-1][-1]
        inner_segs = [segs[0][1:]] + list(segs[1:-1]) + ([segs[-1][:-1]] if len(segs) > 1 else [])
        if len(segs) == 1:
            # no nonterminals: head, middle, tail all come from one segment
            middle = segs[0][1:-1]
            body = _segment(middle, x, y)
            if exact:
                body = conj(body, self._exactness(x, y, ()))
            return conj(Letter(head, x), Letter(tail, y), body)
        s = p.nt_count
        names = [self.fresh("x", "y") for _ in range(s)]
        xs = [Var(a) for a, _ in names]
        ys = [Var(b) for _, b in names]
        child_checks = []
        if nested:
            for k in range(s):
                child_checks.append(self.nt_check(p.nonterminals[k], xs[k], ys[k]))
        # innermost first: the last segment reaches y, then the exactness clause
        core = _segment(inner_segs[s], ys[-1], y)
        core = conj(core, Less(ys[-1], y))
        if exact:
            core = conj(core, self._exactness(x, y, list(zip(xs, ys))))
        for k in reversed(range(s)):
            prev = x if k == 0 else ys[k - 1]
            checks = [child_checks[k]] if nested else []
            inner_y = conj(Arc(xs[k], ys[k]), Less(xs[k], ys[k]), *checks, core)
            core = conj(
                _segment(inner_segs[k], prev, xs[k]),
                Less(prev, xs[k]),
                Exists(ys[k].name, inner_y),
            )
            core = Exists(xs[k].name, core)
        return conj(Letter(head, x), Letter(tail, y), core)

    def nt_check(self, nt: int, x: Term, y: Term) -> Formula:
        exact = self.variant == "exact"
        return disj(*(self.block(p, x, y, exact=exact, nested=False) for p in self.long if p.lhs == nt))

    def arc_check(self, x: Term, y: Term) -> Formula:
        exact = self.variant != "literal"
        return disj(*(self.block(p, x, y, exact=exact, nested=True) for p in self.long))

    def short_disjunct(self) -> Formula:
        g = self.g
        if self.variant == "literal":
            words = [p.segments[0] for p in g.productions_of(g.start) if p.is_terminal]
            return disj(*(_spell(u, MIN, MAX) for u in words))
        letters = [p.rhs[0] for p in g.productions_of(g.start) if len(p.rhs) == 1]
        if not letters:
            return FALSE
        x, y = (Var(n) for n in self.fresh("x", "y"))
        no_arcs = ForAll(x.name, ForAll(y.name, Not(Arc(x, y))))
        return conj(Eq(MIN, MAX), disj(*(Letter(a, MIN) for a in letters)), no_arcs)


@dataclass(frozen=True)
class PsiG:
    """The sentence together with its pieces.

    ``arc_check`` has free variables ``x`` and ``y`` and only looks at arcs
    inside ``[x, y]``; ``sentence`` is ``short ∨ (∀x∀y(arc(x,y) → arc_check)
    ∧ arc(min,max) ∧ root)``.
    """

    variant: str
    short: Formula
    arc_check: Formula
    root: Formula
    sentence: Formula

    @cached_property
    def compiled(self) -> CompiledFormula:
        return compile_formula(self.sentence)

    @cached_property
    def compiled_arc_check(self) -> CompiledFormula:
        return compile_formula(self.arc_check)


@lru_cache(maxsize=32)
def build_psi_parts(g: Grammar, variant: str = "exact") -> PsiG:
    _require_psi_preconditions(g)
    b = _Builder(g, variant)
    x, y = Var("x"), Var("y")
    arc_check = b.arc_check(x, y)
    root = b.nt_check(g.start, MIN, MAX)
    structured = conj(
        ForAll("x", ForAll("y", implies(Arc(x, y), arc_check))),
        Arc(MIN, MAX),
        root,
    )
    short = b.short_disjunct()
    return PsiG(variant, short, arc_check, root, disj(short, structured))


def build_psi_g(g: Grammar, variant: str = "exact") -> Formula:
    return build_psi_parts(g, variant).sentence


# --- model search ---------------------------------------------------------------------


def _structures(g: Grammar, word: Word, psi: PsiG):
    """Candidate inner arc sets per span, generated from production patterns.

    With exactness in the arc checks, the arcs directly below a satisfying
    arc are exactly the child arcs of some production, so walking the
    patterns finds every candidate.  Each span keeps only structures that
    pass the arc check, which depends on nothing outside the span.
    """
    n = len(word)
    model = WordModel(word)
    check = psi.compiled_arc_check
    long = [p for p in g.productions if len(p.rhs) >= 2]
    memo: dict[tuple[int, int], list[frozenset]] = {}

    def spells(pos: int, v: Word) -> bool:
        return pos + len(v) <= n and tuple(word[pos:pos + len(v)]) == v

    def span(i: int, j: int) -> list[frozenset]:
        key = (i, j)
        if key in memo:
            return memo[key]
        found: set[frozenset] = set()
        for p in long:
            segs = p.segments
            if segs[0][0] != word[i - 1] or segs[-1][-1] != word[j - 1]:
                continue
            if p.is_terminal:
                if j - i + 1 == len(p.rhs) and spells(i - 1, p.rhs):
                    found.add(frozenset())
                continue
            inner = [segs[0][1:]] + list(segs[1:-1]) + [segs[-1][:-1]]

            def place(k: int, pos: int, acc: frozenset):
                # pos: last position already consumed (an endpoint or x)
                v = inner[k]
                if not spells(pos, v):
                    return
                nxt = pos + len(v) + 1
                if k == p.nt_count:
                    if nxt == j:
                        found.add(acc)
                    return
                for yk in range(nxt + 1, j):
                    for sub in span(nxt, yk):
                        place(k + 1, yk, acc | sub | {(nxt, yk)})

            place(0, i, frozenset())
        keep = [s for s in found if check(model, s | {(i, j)}, {"x": i, "y": j})]
        keep.sort(key=sorted)
        memo[key] = keep
        return keep

    return span


def satisfying_matchings(
    g: Grammar,
    w,
    variant: str = "exact",
    bound: int | None = None,
    brute_force: bool = False,
) -> list[Matching]:
    """Matchings ``M`` with ``(w, M)`` satisfying the grammar sentence, in
    canonical order.

    The default search generates candidates from production patterns and
    then evaluates the full sentence on each; ``brute_force=True`` (and the
    literal variant, whose arc checks do not pin the inner arcs) filters every
    matching on ``|w|`` positions instead.
    """
    word = g.check_word(w)
    n = len(word)
    _check_bound(n, bound)
    psi = build_psi_parts(g, variant)
    model = WordModel(word)
    if brute_force or variant == "literal":
        candidates = enumerate_matchings(n, bound=n)
    else:
        cands = [Matching()]
        if n >= 2:
            span = _structures(g, word, psi)
            cands.extend(Matching(tuple(s | {(1, n)})) for s in span(1, n))
        candidates = sorted(set(cands), key=lambda m: m.arcs)
    return [m for m in candidates if psi.compiled(model, m.as_set)]


def member_via_matching(g: Grammar, w, variant: str = "exact", bound: int | None = None) -> bool:
    return bool(satisfying_matchings(g, w, variant, bound))


# --- the probe ---------------------------------------------------------------------------


def words_up_to(alphabet: Sequence[str], max_len: int) -> Iterator[Word]:
    """All words of length ``0..max_len`` in length-then-lexicographic order."""
    letters = sorted(alphabet)
    for n in range(max_len + 1):
        yield from itertools.product(letters, repeat=n)


@dataclass(frozen=True)
class ProbeRecord:
    word: Word
    trees: int
    matchings: int
    examples: tuple[Matching, ...] = ()

    @property
    def flagged(self) -> bool:
        return self.trees >= 2 or self.matchings >= 2 or self.trees != self.matchings

    @property
    def mismatch(self) -> bool:
        return self.trees != self.matchings


@dataclass(frozen=True)
class AmbiguityReport:
    """Words with at least one tree or satisfying matching, in canonical order."""

    max_len: int
    words_checked: int
    records: tuple[ProbeRecord, ...] = field(default_factory=tuple)

    @property
    def flagged(self) -> tuple[ProbeRecord, ...]:
        return tuple(r for r in self.records if r.flagged)

    @property
    def ok(self) -> bool:
        return not self.flagged

    def to_text(self) -> str:
        lines = [f"checked {self.words_checked} words up to length {self.max_len}"]
        lines.append(f"members: {len(self.records)}  flagged: {len(self.flagged)}")
        for r in self.records:
            mark = "FLAG" if r.flagged else "ok"
            line = f"{mark} {format_word(r.word) or 'ε'} trees={r.trees} matchings={r.matchings}"
            if r.flagged and r.examples:
                line += " " + " ".join(str(m) for m in r.examples)
            lines.append(line)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "max_len": self.max_len,
            "words_checked": self.words_checked,
            "flagged": len(self.flagged),
            "records": [
                {
                    "word": format_word(r.word),
                    "trees": r.trees,
                    "matchings": r.matchings,
                    "flagged": r.flagged,
                    "examples": [[list(a) for a in m.arcs] for m in r.examples],
                }
                for r in self.records
            ],
        }
        return json.dumps(payload, indent=2)


def unambiguity_probe(
    g: Grammar,
    max_len: int,
    variant: str = "exact",
    bound: int | None = None,
    example_cap: int = 4,
) -> AmbiguityReport:
    """Compare tree counts with satisfying-matching counts on every short word."""
    _check_bound(max_len, bound)
    _require_psi_preconditions(g)
    records = []
    checked = 0
    for word in words_up_to(g.terminals, max_len):
        checked += 1
        trees = count_trees(g, word)
        ms = satisfying_matchings(g, word, variant, bound=max_len)
        if trees or ms:
            records.append(ProbeRecord(word, trees, len(ms), tuple(ms[:example_cap])))
    return AmbiguityReport(max_len, checked, tuple(records))


def tree_matchings(g: Grammar, w) -> list[Matching]:
    """``M_T`` for every derivation tree of ``w``, in tree order."""
    return [matching_from_tree(t, g) for t in enumerate_trees(g, w)]
