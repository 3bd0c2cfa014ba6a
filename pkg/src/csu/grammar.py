"""Context-free grammars with deterministic production codes.

Nonterminals are numbered ``X_0 .. X_N`` with ``X_0`` the start symbol and the
rest in order of first appearance as a left-hand side.  Productions of ``X_i``
are numbered ``1 .. i_k`` in file order, giving each production a code
``(i, j)``.  Right-hand sides store nonterminal occurrences as ``int`` indices
and terminals as ``str`` tokens, so the two can never be confused.

Grammar file format::

    # comment
    start: S
    terminals: a b          (optional; enables strict checking)
    S -> a Y a b Z b a | a b b a
    Y -> a Z b
    Z -> a b

Any token that is the left-hand side of some line is a nonterminal; the other
tokens are terminals.  ``|`` separates alternatives and an empty alternative is
an epsilon production.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

from .errors import GrammarSyntaxError, UnknownSymbolError

Symbol = Union[int, str]
Word = tuple[str, ...]

PLACEHOLDER = "|"
ARROW = "->"


@dataclass(frozen=True)
class Production:
    lhs: int
    index: int
    rhs: tuple[Symbol, ...]

    @property
    def code(self) -> tuple[int, int]:
        return (self.lhs, self.index)

    @cached_property
    def nonterminals(self) -> tuple[int, ...]:
        """Nonterminal indices of the right-hand side, left to right."""
        return tuple(s for s in self.rhs if isinstance(s, int))

    @property
    def nt_count(self) -> int:
        return len(self.nonterminals)

    def nt_at(self, d: int) -> int:
        """Index of the ``d``-th nonterminal occurrence (1-based)."""
        if not 1 <= d <= self.nt_count:
            raise IndexError(f"production {self.code} has no nonterminal of rank {d}")
        return self.nonterminals[d - 1]

    @cached_property
    def segments(self) -> tuple[Word, ...]:
        """Terminal strings between consecutive nonterminals (``nt_count + 1`` of them)."""
        out: list[list[str]] = [[]]
        for s in self.rhs:
            if isinstance(s, int):
                out.append([])
            else:
                out[-1].append(s)
        return tuple(tuple(seg) for seg in out)

    @property
    def is_terminal(self) -> bool:
        return self.nt_count == 0


@dataclass(frozen=True)
class Pattern:
    symbols: tuple[str, ...]

    def __str__(self) -> str:
        return format_word(self.symbols)

    @property
    def placeholders(self) -> int:
        return sum(1 for s in self.symbols if s == PLACEHOLDER)


def pattern_of(p: Production) -> Pattern:
    return Pattern(tuple(PLACEHOLDER if isinstance(s, int) else s for s in p.rhs))


@dataclass(frozen=True)
class Grammar:
    terminals: tuple[str, ...]
    nonterminals: tuple[str, ...]
    productions: tuple[Production, ...]
    _by_code: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        terms = set(self.terminals)
        if terms & set(self.nonterminals):
            raise GrammarSyntaxError(
                f"symbols used both as terminal and nonterminal: {sorted(terms & set(self.nonterminals))}"
            )
        by_code = {}
        for p in self.productions:
            if not 0 <= p.lhs < len(self.nonterminals):
                raise GrammarSyntaxError(f"production {p.code} has an unknown left-hand side")
            for s in p.rhs:
                if isinstance(s, int):
                    if not 0 <= s < len(self.nonterminals):
                        raise GrammarSyntaxError(f"production {p.code} mentions nonterminal #{s}")
                elif s not in terms:
                    raise GrammarSyntaxError(f"production {p.code} mentions unknown terminal {s!r}")
            if p.code in by_code:
                raise GrammarSyntaxError(f"duplicate production code {p.code}")
            by_code[p.code] = p
        object.__setattr__(self, "_by_code", by_code)

    @classmethod
    def from_rules(
        cls,
        start: str,
        rules: Iterable[tuple[str, Sequence[str]]],
        terminals: Sequence[str] | None = None,
    ) -> "Grammar":
        """Build a grammar from ``(lhs, rhs)`` name pairs.

        Nonterminals are the start symbol plus every left-hand side; every
        other right-hand-side token is a terminal.  Duplicate rules are
        dropped.  Codes follow rule order.
        """
        rules = [(lhs, tuple(rhs)) for lhs, rhs in rules]
        nts = [start]
        for lhs, _ in rules:
            if lhs not in nts:
                nts.append(lhs)
        nt_index = {name: i for i, name in enumerate(nts)}
        seen_terms: list[str] = list(terminals) if terminals is not None else []
        known = set(seen_terms)
        counts = [0] * len(nts)
        seen_rules = set()
        prods = []
        for lhs, rhs in rules:
            if (lhs, rhs) in seen_rules:
                continue
            seen_rules.add((lhs, rhs))
            body: list[Symbol] = []
            for tok in rhs:
                if tok in nt_index:
                    body.append(nt_index[tok])
                else:
                    if tok not in known:
                        known.add(tok)
                        seen_terms.append(tok)
                    body.append(tok)
            i = nt_index[lhs]
            counts[i] += 1
            prods.append(Production(i, counts[i], tuple(body)))
        prods.sort(key=lambda p: p.code)
        return cls(tuple(seen_terms), tuple(nts), tuple(prods))

    @property
    def start(self) -> int:
        return 0

    @property
    def start_name(self) -> str:
        return self.nonterminals[0]

    def production(self, code: tuple[int, int]) -> Production:
        try:
            return self._by_code[tuple(code)]
        except KeyError:
            raise KeyError(f"no production with code {code}") from None

    def has_production(self, code) -> bool:
        return tuple(code) in self._by_code

    def productions_of(self, nt: int) -> tuple[Production, ...]:
        return tuple(p for p in self.productions if p.lhs == nt)

    def prod_count(self, nt: int) -> int:
        """Number of productions with left-hand side ``X_nt``."""
        return sum(1 for p in self.productions if p.lhs == nt)

    def symbol_name(self, s: Symbol) -> str:
        return self.nonterminals[s] if isinstance(s, int) else s

    def rhs_names(self, p: Production) -> tuple[str, ...]:
        return tuple(self.symbol_name(s) for s in p.rhs)

    def format_production(self, p: Production) -> str:
        rhs = " ".join(self.rhs_names(p))
        return f"{self.nonterminals[p.lhs]} -> {rhs}".rstrip()

    def rules(self) -> list[tuple[str, tuple[str, ...]]]:
        return [(self.nonterminals[p.lhs], self.rhs_names(p)) for p in self.productions]

    def to_text(self) -> str:
        lines = [f"start: {self.start_name}"]
        if self.terminals:
            lines.append("terminals: " + " ".join(self.terminals))
        lines.extend(self.format_production(p) for p in self.productions)
        return "\n".join(lines) + "\n"

    def check_word(self, w) -> Word:
        word = as_word(w)
        terms = set(self.terminals)
        for i, a in enumerate(word, 1):
            if a not in terms:
                raise UnknownSymbolError(f"symbol {a!r} at position {i} is not a terminal")
        return word


def parse_grammar(text: str) -> Grammar:
    start = None
    declared: list[str] | None = None
    raw_rules: list[tuple[int, str, tuple[str, ...]]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if start is None:
            key, sep, value = line.partition(":")
            if not sep or key.strip() != "start":
                raise GrammarSyntaxError("first line must be 'start: <symbol>'", lineno)
            parts = value.split()
            if len(parts) != 1:
                raise GrammarSyntaxError("start line needs exactly one symbol", lineno)
            start = parts[0]
            continue
        if line.startswith("terminals:"):
            declared = (declared or []) + line[len("terminals:"):].split()
            continue
        toks = line.split()
        if len(toks) < 2 or toks[1] != ARROW:
            raise GrammarSyntaxError(f"expected '<LHS> -> ...', got {line!r}", lineno)
        lhs = toks[0]
        if lhs in (ARROW, PLACEHOLDER):
            raise GrammarSyntaxError(f"invalid left-hand side {lhs!r}", lineno)
        alt: list[str] = []
        for tok in toks[2:] + [PLACEHOLDER]:
            if tok == ARROW:
                raise GrammarSyntaxError("more than one '->' on a line", lineno)
            if tok == PLACEHOLDER:
                raw_rules.append((lineno, lhs, tuple(alt)))
                alt = []
            else:
                alt.append(tok)
    if start is None:
        raise GrammarSyntaxError("missing 'start: <symbol>' line")
    lhss = {lhs for _, lhs, _ in raw_rules}
    if raw_rules and start not in lhss:
        raise GrammarSyntaxError(f"start symbol {start!r} has no productions")
    if declared is not None:
        clash = lhss & set(declared)
        if clash:
            raise GrammarSyntaxError(f"declared terminals used as left-hand sides: {sorted(clash)}")
    for lineno, _, rhs in raw_rules:
        for tok in rhs:
            if tok in lhss:
                continue
            if declared is not None and tok not in declared:
                raise GrammarSyntaxError(f"{tok!r} is neither a declared terminal nor a nonterminal", lineno)
            if declared is None and tok[:1].isupper():
                raise GrammarSyntaxError(
                    f"{tok!r} looks like a nonterminal but has no productions", lineno
                )
    return Grammar.from_rules(start, [(lhs, rhs) for _, lhs, rhs in raw_rules], declared)


def load_grammar(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return parse_grammar(fh.read())


@dataclass(frozen=True)
class DGNFReport:
    offenders: tuple[Production, ...]

    @property
    def valid(self) -> bool:
        return not self.offenders

    def __bool__(self) -> bool:
        return self.valid


def is_dgnf_production(p: Production, start: int = 0) -> bool:
    if len(p.rhs) == 1:
        return p.lhs == start and isinstance(p.rhs[0], str)
    return len(p.rhs) >= 2 and isinstance(p.rhs[0], str) and isinstance(p.rhs[-1], str)


def validate_dgnf(g: Grammar) -> DGNFReport:
    """Check that every production is ``S -> a`` or ``X -> a u b``."""
    return DGNFReport(tuple(p for p in g.productions if not is_dgnf_production(p, g.start)))


def as_word(w) -> Word:
    """Coerce ``w`` to a tuple of terminal tokens.

    Strings containing whitespace are split on it; other strings are split
    into characters.
    """
    if isinstance(w, str):
        return tuple(w.split()) if any(ch.isspace() for ch in w) else tuple(w)
    return tuple(w)


def format_word(w: Sequence[str]) -> str:
    if all(len(a) == 1 for a in w):
        return "".join(w)
    return " ".join(w)


@dataclass(frozen=True)
class DerivationTree:
    """A derivation tree as nested production codes.

    ``children`` has one subtree per nonterminal occurrence of the node's
    production; terminal leaves are implied by the grammar.
    """

    code: tuple[int, int]
    children: tuple["DerivationTree", ...] = ()

    def preorder(self) -> tuple[tuple[int, int], ...]:
        out = []
        stack = [self]
        while stack:
            node = stack.pop()
            out.append(node.code)
            stack.extend(reversed(node.children))
        return tuple(out)

    def size(self) -> int:
        return len(self.preorder())

    def to_sexpr(self) -> str:
        a, b = self.code
        if not self.children:
            return f"({a}.{b})"
        inner = " ".join(c.to_sexpr() for c in self.children)
        return f"({a}.{b} {inner})"

    def __str__(self) -> str:
        return self.to_sexpr()
