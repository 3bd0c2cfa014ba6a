"""Grammar rewritings: short-production elimination, pattern injectivity, and
conversion to double Greibach normal form.

All transformations work on ``(lhs, rhs)`` name lists and rebuild a
:class:`Grammar` at the end, so production codes of the result follow the
usual numbering.  Useless symbols are pruned after every transformation.
"""

from __future__ import annotations

import itertools
import warnings
from typing import Iterable

from .errors import NormalizationDiverged, NotDGNFError, PreconditionError
from .grammar import PLACEHOLDER, Grammar, validate_dgnf
from .parse_oracle import nullable_nonterminals

DEFAULT_CAP = 10**6

Rule = tuple[str, tuple[str, ...]]


class _Rules:
    """Mutable working copy of a grammar at the name level."""

    def __init__(self, start: str, rules: Iterable[Rule], nts: Iterable[str], terminals):
        self.start = start
        self.nts = set(nts) | {start}
        self.terminals = tuple(terminals)
        self.rules: list[Rule] = _dedupe(rules)

    @classmethod
    def of(cls, g: Grammar) -> "_Rules":
        return cls(g.start_name, g.rules(), g.nonterminals, g.terminals)

    def is_nt(self, s: str) -> bool:
        return s in self.nts

    def fresh(self, base: str) -> str:
        taken = self.nts | set(self.terminals)
        name = base
        k = 0
        while name in taken:
            k += 1
            name = f"{base}{k}"
        self.nts.add(name)
        return name

    def of_lhs(self, x: str) -> list[tuple[str, ...]]:
        return [rhs for lhs, rhs in self.rules if lhs == x]

    def occurs_on_rhs(self, x: str) -> bool:
        return any(x in rhs for _, rhs in self.rules)

    def prune(self) -> None:
        productive: set[str] = set()
        changed = True
        while changed:
            changed = False
            for lhs, rhs in self.rules:
                if lhs not in productive and all(not self.is_nt(s) or s in productive for s in rhs):
                    productive.add(lhs)
                    changed = True
        rules = [(l, r) for l, r in self.rules if all(not self.is_nt(s) or s in productive for s in r)]
        rules = [(l, r) for l, r in rules if l in productive]
        reachable = {self.start}
        frontier = [self.start]
        while frontier:
            x = frontier.pop()
            for lhs, rhs in rules:
                if lhs == x:
                    for s in rhs:
                        if self.is_nt(s) and s not in reachable:
                            reachable.add(s)
                            frontier.append(s)
        self.rules = [(l, r) for l, r in rules if l in reachable]

    def check_cap(self, cap: int, what: str) -> None:
        if len(self.rules) > cap:
            raise NormalizationDiverged(f"{what} exceeded {cap} productions")

    def build(self) -> Grammar:
        self.prune()
        return Grammar.from_rules(self.start, self.rules, self.terminals)


def _dedupe(rules: Iterable[Rule]) -> list[Rule]:
    seen = set()
    out = []
    for lhs, rhs in rules:
        rule = (lhs, tuple(rhs))
        if rule not in seen:
            seen.add(rule)
            out.append(rule)
    return out


def _substitute_letters(rhs: tuple[str, ...], x: str, letters: list[str]) -> list[tuple[str, ...]]:
    """Every variant of ``rhs`` with a nonempty subset of the ``x`` occurrences
    replaced by one of ``letters`` (independently per occurrence)."""
    positions = [k for k, s in enumerate(rhs) if s == x]
    out = []
    for size in range(1, len(positions) + 1):
        for chosen in itertools.combinations(positions, size):
            for picks in itertools.product(letters, repeat=size):
                body = list(rhs)
                for k, a in zip(chosen, picks):
                    body[k] = a
                out.append(tuple(body))
    return out


def _isolate_start(work: _Rules) -> None:
    """Give the grammar a start symbol that never occurs on a right-hand side."""
    if not work.occurs_on_rhs(work.start):
        return
    old = work.start
    new = work.fresh(old + "'")
    work.rules = [(new, rhs) for rhs in work.of_lhs(old)] + work.rules
    work.start = new


def _is_short(work: _Rules, rhs) -> bool:
    return len(rhs) == 1 and not work.is_nt(rhs[0])


def eliminate_short_productions(g: Grammar, cap: int = DEFAULT_CAP) -> Grammar:
    """Remove every ``X -> a`` whose ``X`` occurs on some right-hand side.

    Each use ``Y -> u X v`` gains the variants with ``a`` in place of ``X``.
    When the start symbol itself needs this it is first copied to a fresh
    start so that one-letter words stay in the language.
    """
    if any(not p.rhs for p in g.productions):
        raise PreconditionError("eliminate_short_productions needs a grammar without epsilon-productions")
    work = _Rules.of(g)
    seen_states = set()
    while True:
        target = None
        for lhs, rhs in work.rules:
            if _is_short(work, rhs) and work.occurs_on_rhs(lhs):
                target = lhs
                break
        if target is None:
            break
        if target == work.start:
            # a short start rule may only appear after substitution
            _isolate_start(work)
            continue
        state = frozenset(work.rules)
        if state in seen_states:
            raise NormalizationDiverged("short-production elimination cycles (unit-production loop)")
        seen_states.add(state)
        letters = [rhs[0] for rhs in work.of_lhs(target) if _is_short(work, rhs)]
        new_rules: list[Rule] = []
        for lhs, rhs in work.rules:
            if lhs == target and _is_short(work, rhs):
                continue
            new_rules.append((lhs, rhs))
            if target in rhs:
                new_rules.extend((lhs, body) for body in _substitute_letters(rhs, target, letters))
        work.rules = _dedupe(new_rules)
        work.check_cap(cap, "short-production elimination")
        work.prune()
    return work.build()


def _pattern(work: _Rules, rhs) -> tuple[str, ...]:
    return tuple(PLACEHOLDER if work.is_nt(s) else s for s in rhs)


def make_patterns_injective(g: Grammar, cap: int = DEFAULT_CAP) -> Grammar:
    """Rewrite until productions with nonterminals and distinct left-hand
    sides never share a pattern.

    Nonterminals are visited in index order; a production of ``X_i`` whose
    pattern already belongs to some ``X_j`` with ``j < i`` is replaced by
    its one-step expansions at its first nonterminal.
    """
    report = validate_dgnf(g)
    if not report:
        raise NotDGNFError(g.format_production(p) for p in report.offenders)
    work = _Rules.of(g)
    order = list(g.nonterminals)
    by_lhs: dict[str, list[tuple[str, ...]]] = {x: work.of_lhs(x) for x in order}
    total = sum(len(v) for v in by_lhs.values())
    for i in range(1, len(order)):
        x = order[i]
        while True:
            earlier = {
                _pattern(work, rhs)
                for j in range(i)
                for rhs in by_lhs[order[j]]
                if any(work.is_nt(s) for s in rhs)
            }
            hit = None
            for k, rhs in enumerate(by_lhs[x]):
                if any(work.is_nt(s) for s in rhs) and _pattern(work, rhs) in earlier:
                    hit = k
                    break
            if hit is None:
                break
            rhs = by_lhs[x][hit]
            pos = next(k for k, s in enumerate(rhs) if work.is_nt(s))
            expansions = [rhs[:pos] + body + rhs[pos + 1:] for body in by_lhs[rhs[pos]]]
            merged = list(dict.fromkeys(by_lhs[x][:hit] + expansions + by_lhs[x][hit + 1:]))
            total += len(merged) - len(by_lhs[x])
            by_lhs[x] = merged
            if total > cap:
                raise NormalizationDiverged(f"pattern rewriting exceeded {cap} productions")
    work.rules = [(x, rhs) for x in order for rhs in by_lhs[x]]
    return work.build()


def pattern_collisions(g: Grammar) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pairs of productions with nonterminals, distinct left-hand sides and
    equal patterns.  Empty iff the grammar is pattern-injective."""
    from .grammar import pattern_of

    nonterminal_prods = [p for p in g.productions if p.nt_count]
    out = []
    for p, q in itertools.combinations(nonterminal_prods, 2):
        if p.lhs != q.lhs and pattern_of(p) == pattern_of(q):
            out.append((p.code, q.code))
    return out


# --- double Greibach normal form -------------------------------------------


def _remove_epsilon(work: _Rules) -> None:
    g = Grammar.from_rules(work.start, work.rules, work.terminals)
    nullable = {g.nonterminals[i] for i in nullable_nonterminals(g)}
    out: list[Rule] = []
    for lhs, rhs in work.rules:
        positions = [k for k, s in enumerate(rhs) if s in nullable]
        for size in range(len(positions) + 1):
            for dropped in itertools.combinations(positions, size):
                body = tuple(s for k, s in enumerate(rhs) if k not in dropped)
                if body:
                    out.append((lhs, body))
    work.rules = _dedupe(out)


def _remove_units(work: _Rules) -> None:
    def is_unit(rhs):
        return len(rhs) == 1 and work.is_nt(rhs[0])

    closure: dict[str, set[str]] = {}
    for x in {lhs for lhs, _ in work.rules}:
        seen = {x}
        frontier = [x]
        while frontier:
            y = frontier.pop()
            for rhs in work.of_lhs(y):
                if is_unit(rhs) and rhs[0] not in seen:
                    seen.add(rhs[0])
                    frontier.append(rhs[0])
        closure[x] = seen
    out: list[Rule] = []
    for x in dict.fromkeys(lhs for lhs, _ in work.rules):
        for y in sorted(closure[x], key=lambda s: (s != x, s)):
            out.extend((x, rhs) for rhs in work.of_lhs(y) if not is_unit(rhs))
    work.rules = _dedupe(out)


def _left_greibach(work: _Rules, cap: int) -> None:
    """Make every production start with a terminal.

    Solves the left-linear system ``L(A) = R_A + sum_B L(B) P[B,A]``:
    ``A -> r`` for its terminal-led bodies ``r`` and ``A -> r Q[B,A]`` where
    ``Q[B,A]`` derives the left-corner chains from ``B`` up to ``A``.
    """
    nts = list(dict.fromkeys(lhs for lhs, _ in work.rules))
    led: dict[str, list] = {x: [] for x in nts}
    chain: dict[tuple[str, str], list] = {}
    for lhs, rhs in work.rules:
        if work.is_nt(rhs[0]):
            chain.setdefault((rhs[0], lhs), []).append(rhs[1:])
        else:
            led[lhs].append(rhs)
    qname = {}
    for b in nts:
        for a in nts:
            qname[(b, a)] = work.fresh(f"{b}/{a}")
    new: dict[str, list] = {x: list(led[x]) for x in nts}
    for a in nts:
        for b in nts:
            for r in led[b]:
                new[a].append(r + (qname[(b, a)],))

    def front(beta):
        head = beta[0]
        if work.is_nt(head) and head in new:
            return [body + beta[1:] for body in new[head]]
        return [beta]

    rules: list[Rule] = [(x, body) for x in nts for body in new[x]]
    for (b, a), name in qname.items():
        for beta in chain.get((b, a), ()):
            rules.extend((name, body) for body in front(beta))
        for c in nts:
            for beta in chain.get((b, c), ()):
                rules.extend((name, body + (qname[(c, a)],)) for body in front(beta))
        if len(rules) > cap:
            raise NormalizationDiverged(f"Greibach conversion exceeded {cap} productions")
    work.rules = _dedupe(rules)
    work.prune()


def _right_greibach(work: _Rules, cap: int) -> None:
    """Make every production also end with a terminal, keeping the leading one.

    Right-linear counterpart of :func:`_left_greibach` with chains
    ``W[C,Y]`` unfolded on both ends so their bodies start with a terminal,
    and trailing nonterminals expanded into already-fixed productions.
    """
    nts = list(dict.fromkeys(lhs for lhs, _ in work.rules))
    ends: dict[str, list] = {x: [] for x in nts}
    step: dict[tuple[str, str], list] = {}
    for lhs, rhs in work.rules:
        if work.is_nt(rhs[-1]):
            step.setdefault((lhs, rhs[-1]), []).append(rhs[:-1])
        else:
            ends[lhs].append(rhs)
    wname = {}
    for c in nts:
        for y in nts:
            if any((c, d) in step for d in nts) and any((e, y) in step for e in nts):
                wname[(c, y)] = work.fresh(f"{c}\\{y}")
    new: dict[str, list] = {x: list(ends[x]) for x in nts}
    for x in nts:
        for y in nts:
            for p in step.get((x, y), ()):
                new[x].extend(p + r for r in ends[y])
            for c in nts:
                if (c, y) not in wname:
                    continue
                for p in step.get((x, c), ()):
                    new[x].extend(p + (wname[(c, y)],) + r for r in ends[y])

    def back(p):
        tail = p[-1]
        if work.is_nt(tail):
            return [p[:-1] + body for body in new[tail]]
        return [p]

    rules: list[Rule] = [(x, body) for x in nts for body in new[x]]
    for (c, y), name in wname.items():
        for p in step.get((c, y), ()):
            rules.extend((name, body) for body in back(p))
        for e in nts:
            for p in step.get((c, e), ()):
                for q in step.get((e, y), ()):
                    rules.extend((name, p + body) for body in back(q))
        for d in nts:
            for e in nts:
                if (d, e) not in wname:
                    continue
                for p in step.get((c, d), ()):
                    for q in step.get((e, y), ()):
                        rules.extend((name, p + (wname[(d, e)],) + body) for body in back(q))
        if len(rules) > cap:
            raise NormalizationDiverged(f"double Greibach conversion exceeded {cap} productions")
    work.rules = _dedupe(rules)
    work.prune()


def _inline_single_letters(work: _Rules, cap: int) -> None:
    """Drop ``X -> a`` for non-start ``X`` by substituting ``a`` at its uses."""
    while True:
        target = next(
            (lhs for lhs, rhs in work.rules if lhs != work.start and _is_short(work, rhs)), None
        )
        if target is None:
            return
        letters = [rhs[0] for rhs in work.of_lhs(target) if _is_short(work, rhs)]
        out: list[Rule] = []
        for lhs, rhs in work.rules:
            if lhs == target and _is_short(work, rhs):
                continue
            out.append((lhs, rhs))
            if target in rhs:
                out.extend((lhs, body) for body in _substitute_letters(rhs, target, letters))
        work.rules = _dedupe(out)
        work.check_cap(cap, "double Greibach conversion")
        work.prune()


def to_double_greibach(g: Grammar, cap: int = DEFAULT_CAP) -> Grammar:
    """Equivalent grammar whose productions are ``S -> a`` or ``X -> a u b``.

    Pipeline: isolate the start symbol, remove epsilon- and unit productions,
    lead every body with a terminal, then end every body with a terminal,
    and finally inline one-letter productions of non-start symbols.
    """
    if validate_dgnf(g):
        work = _Rules.of(g)
        return work.build()
    if g.start in nullable_nonterminals(g):
        raise PreconditionError("the empty word is in the language; DGNF cannot generate it")
    work = _Rules.of(g)
    work.prune()
    if not work.rules:
        warnings.warn("grammar generates the empty language", stacklevel=2)
        return work.build()
    _isolate_start(work)
    _remove_epsilon(work)
    _remove_units(work)
    work.prune()
    _left_greibach(work, cap)
    _right_greibach(work, cap)
    _inline_single_letters(work, cap)
    out = work.build()
    report = validate_dgnf(out)
    assert report.valid, report.offenders
    return out
