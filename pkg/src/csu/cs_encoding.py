"""Bracket encoding of derivation trees.

A grammar in double Greibach normal form induces a typed bracket alphabet.
Each bracket ``<a,b,c,d,e,f>`` reads "inside production ``p_{a,b}`` (with
``c`` nonterminals), at child rank ``d``, production ``p_{e,f}`` is applied";
``a = b = 0`` marks the start configuration.  Depth-first traversal of a tree
emits the opening bracket of a node on entry and its closing bracket on exit.
The resulting words are exactly the Dyck words satisfying a handful of
successor constraints, and a homomorphism maps them back to the derived word.

Token syntax: ``a.b.c.d.e.f`` opens, ``~a.b.c.d.e.f`` closes; alias tokens
``k`` / ``~k`` use the 1-based position in the sorted alphabet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DecodeError, MalformedTreeError, NotDGNFError
from .formula import (
    FALSE,
    Eq,
    ForAll,
    Formula,
    Letter,
    MAX,
    MIN,
    Succ,
    Var,
    conj,
    disj,
    implies,
)
from .grammar import DerivationTree, Grammar, Word, validate_dgnf
from .parse_oracle import check_tree


@dataclass(frozen=True, order=True)
class Bracket:
    a: int
    b: int
    c: int
    d: int
    e: int
    f: int
    opening: bool = True

    @property
    def tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.a, self.b, self.c, self.d, self.e, self.f)

    @property
    def is_start(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def parent(self) -> tuple[int, int]:
        return (self.a, self.b)

    @property
    def child(self) -> tuple[int, int]:
        return (self.e, self.f)

    def bar(self) -> "Bracket":
        return Bracket(*self.tuple, opening=not self.opening)

    def as_open(self) -> "Bracket":
        return self if self.opening else self.bar()

    def token(self) -> str:
        body = ".".join(str(v) for v in self.tuple)
        return body if self.opening else "~" + body

    def __str__(self) -> str:
        return self.token()


DyckWord = tuple[Bracket, ...]


def _require_dgnf(g: Grammar) -> None:
    report = validate_dgnf(g)
    if not report:
        raise NotDGNFError(g.format_production(p) for p in report.offenders)


class BracketAlphabet(Sequence[Bracket]):
    """Opening brackets of a grammar in lexicographic order; aliases are 1-based."""

    def __init__(self, brackets: Iterable[Bracket]):
        self.brackets = tuple(sorted(brackets))
        self._alias = {b: k for k, b in enumerate(self.brackets, 1)}

    def __getitem__(self, k):
        return self.brackets[k]

    def __len__(self) -> int:
        return len(self.brackets)

    def __contains__(self, b) -> bool:
        return isinstance(b, Bracket) and b.as_open() in self._alias

    def symbols(self) -> list[Bracket]:
        """Opening and closing brackets, opens first."""
        return list(self.brackets) + [b.bar() for b in self.brackets]

    def alias(self, b: Bracket) -> int:
        return self._alias[b.as_open()]

    def from_alias(self, k: int, opening: bool = True) -> Bracket:
        if not 1 <= k <= len(self.brackets):
            raise KeyError(f"alias {k} out of range 1..{len(self.brackets)}")
        b = self.brackets[k - 1]
        return b if opening else b.bar()

    def token(self, b: Bracket, alias: bool = False) -> str:
        if not alias:
            return b.token()
        return ("" if b.opening else "~") + str(self.alias(b))

    def to_json(self) -> list:
        return [{"alias": k, "tuple": list(b.tuple)} for k, b in enumerate(self.brackets, 1)]


def build_bracket_alphabet(g: Grammar) -> BracketAlphabet:
    _require_dgnf(g)
    out = [Bracket(0, 0, 1, 1, 0, p.index) for p in g.productions_of(g.start)]
    for p in g.productions:
        c = p.nt_count
        for d in range(1, c + 1):
            e = p.nt_at(d)
            for q in g.productions_of(e):
                out.append(Bracket(p.lhs, p.index, c, d, e, q.index))
    return BracketAlphabet(out)


# --- tokens -----------------------------------------------------------------


def parse_bracket(token: str, alphabet: BracketAlphabet | None = None) -> Bracket:
    opening = not token.startswith("~")
    body = token if opening else token[1:]
    if "." in body:
        parts = body.split(".")
        if len(parts) != 6 or not all(p.isdigit() for p in parts):
            raise DecodeError(f"bad bracket token {token!r}")
        b = Bracket(*(int(p) for p in parts), opening=opening)
        if alphabet is not None and b not in alphabet:
            raise DecodeError(f"bracket {token!r} is not in the alphabet")
        return b
    if not body.isdigit():
        raise DecodeError(f"bad bracket token {token!r}")
    if alphabet is None:
        raise DecodeError(f"alias token {token!r} needs an alphabet")
    try:
        return alphabet.from_alias(int(body), opening)
    except KeyError as exc:
        raise DecodeError(str(exc.args[0])) from None


def parse_dyck(text: str, alphabet: BracketAlphabet | None = None) -> DyckWord:
    return tuple(parse_bracket(tok, alphabet) for tok in text.split())


def format_dyck(z: Sequence[Bracket], alphabet: BracketAlphabet | None = None, alias: bool = False) -> str:
    if alias:
        if alphabet is None:
            raise ValueError("alias formatting needs an alphabet")
        return " ".join(alphabet.token(b, alias=True) for b in z)
    return " ".join(b.token() for b in z)


# --- homomorphism -------------------------------------------------------------


class HomTable(dict):
    """Bracket (either polarity) -> terminal string image."""

    def to_json(self, alphabet: BracketAlphabet | None = None, alias: bool = False) -> dict:
        def key(b):
            return alphabet.token(b, alias) if alphabet is not None else b.token()

        return {key(b): " ".join(img) if any(len(x) > 1 for x in img) else "".join(img) for b, img in self.items()}


def build_homomorphism(g: Grammar, alphabet: BracketAlphabet | None = None) -> HomTable:
    """Opening ``<a,b,c,d,e,f>`` maps to the leading segment of ``p_{e,f}``;
    closing maps to segment ``d`` of ``p_{a,b}``; start closes map to the
    empty word."""
    if alphabet is None:
        alphabet = build_bracket_alphabet(g)
    table = HomTable()
    for b in alphabet:
        e = g.start if b.is_start else b.e
        table[b] = g.production((e, b.f)).segments[0]
    for b in alphabet:
        table[b.bar()] = () if b.is_start else g.production(b.parent).segments[b.d]
    return table


def apply_hom(h: HomTable, z: Iterable[Bracket]) -> Word:
    out: list[str] = []
    for k, b in enumerate(z, 1):
        try:
            out.extend(h[b])
        except KeyError:
            raise DecodeError(f"bracket {b} has no image", k) from None
    return tuple(out)


# --- Dyck membership and local conditions ------------------------------------


def is_dyck(z: Iterable[Bracket]) -> bool:
    stack: list[Bracket] = []
    for b in z:
        if b.opening:
            stack.append(b)
        elif not stack or stack.pop() != b.bar():
            return False
    return not stack


@dataclass(frozen=True)
class LocalVerdict:
    ok: bool
    position: int | None = None
    condition: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return f"violates {self.condition} at position {self.position}: {self.detail}"


class _Successors:
    """What may follow each bracket, derived from the grammar."""

    def __init__(self, g: Grammar, alphabet: BracketAlphabet):
        self.g = g
        self.alphabet = alphabet
        self.start_opens = frozenset(b for b in alphabet if b.is_start)
        by_slot: dict[tuple, list] = {}
        for b in alphabet:
            if not b.is_start:
                by_slot.setdefault((b.a, b.b, b.d), []).append(b)
        self.by_slot = {k: frozenset(v) for k, v in by_slot.items()}
        self.closes = frozenset(b.bar() for b in alphabet)

    def child_count(self, b: Bracket) -> int:
        code = (self.g.start, b.f) if b.is_start else (b.e, b.f)
        return self.g.production(code).nt_count

    def rule(self, b: Bracket) -> tuple[str, frozenset, bool]:
        """(condition name, allowed successors, may be last)."""
        if b.opening:
            c = self.child_count(b)
            code = (self.g.start, b.f) if b.is_start else (b.e, b.f)
            if c == 0:
                return "C2", frozenset([b.bar()]), False
            return "C3", self.by_slot.get((code[0], code[1], 1), frozenset()), False
        if b.d < b.c:
            return "C4", self.by_slot.get((b.a, b.b, b.d + 1), frozenset()), False
        if b.is_start:
            return "C5", frozenset(), True
        return "C5", self.closes, True


def check_local_conditions(z: Sequence[Bracket], g: Grammar, alphabet: BracketAlphabet | None = None) -> LocalVerdict:
    """Successor constraints carving tree encodings out of the Dyck words.

    C1 the word starts with a start bracket and ends with its close;
    C2 a bracket naming a terminal production closes immediately;
    C3 otherwise its first child bracket follows;
    C4 a closed child of rank ``d < c`` is followed by the rank ``d+1`` sibling;
    C5 a closed last child is followed by a close or ends the word
    (start brackets must end the word).

    Every check is local (first symbol, last symbol, successor pairs), so the
    verdict is meaningful for any bracket sequence; together with
    :func:`is_dyck` it characterizes valid encodings.  Positions are 1-based
    and name the symbol that breaks the rule (``len(z) + 1`` when a required
    successor is missing).
    """
    if alphabet is None:
        alphabet = build_bracket_alphabet(g)
    succ = _Successors(g, alphabet)
    n = len(z)
    if n == 0:
        return LocalVerdict(False, 1, "C1", "empty word")
    for k, b in enumerate(z, 1):
        if b not in alphabet:
            raise DecodeError(f"bracket {b} is not in the alphabet", k)
    if not (z[0].opening and z[0].is_start):
        return LocalVerdict(False, 1, "C1", f"{z[0]} is not an opening start bracket")
    for x in range(n):
        cond, allowed, may_end = succ.rule(z[x])
        if x + 1 == n:
            if not may_end:
                return LocalVerdict(False, n + 1, cond, f"{z[x]} needs a successor")
            continue
        nxt = z[x + 1]
        if nxt not in allowed:
            if cond == "C5" and z[x].is_start:
                detail = f"{z[x]} must be the last symbol"
            else:
                detail = f"{nxt} may not follow {z[x]}"
            return LocalVerdict(False, x + 2, cond, detail)
    if z[-1] != z[0].bar():
        return LocalVerdict(False, n, "C1", f"last symbol {z[-1]} does not close {z[0]}")
    return LocalVerdict(True)


def emit_local_formula(g: Grammar, alias: bool = False) -> Formula:
    """First-order sentence over bracket letters equivalent to
    :func:`check_local_conditions`.  Letter names are bracket tokens (or
    alias tokens with ``alias=True``)."""
    alphabet = build_bracket_alphabet(g)
    succ = _Successors(g, alphabet)

    def P(b, term):
        return Letter(alphabet.token(b, alias), term)

    x = Var("x")
    nxt = Succ(x)
    first = disj(*(conj(P(b, MIN), P(b.bar(), MAX)) for b in sorted(succ.start_opens)))
    clauses = []
    for b in alphabet.symbols():
        _, allowed, may_end = succ.rule(b)
        options = [P(s, nxt) for s in sorted(allowed, key=lambda s: (not s.opening, s.tuple))]
        if may_end:
            options.insert(0, Eq(x, MAX))
        clauses.append(implies(P(b, x), disj(*options)))
    return conj(first, ForAll("x", conj(*clauses)))


# --- trees <-> Dyck words --------------------------------------------------------


def encode_tree(t: DerivationTree, g: Grammar) -> DyckWord:
    _require_dgnf(g)
    try:
        check_tree(t, g)
    except MalformedTreeError:
        raise
    out: list[Bracket] = []

    def walk(node: DerivationTree, opener: Bracket):
        out.append(opener)
        p = g.production(node.code)
        c = p.nt_count
        for d, child in enumerate(node.children, 1):
            walk(child, Bracket(p.lhs, p.index, c, d, child.code[0], child.code[1]))
        out.append(opener.bar())

    walk(t, Bracket(0, 0, 1, 1, 0, t.code[1]))
    return tuple(out)


def decode_dyck(z: Sequence[Bracket], g: Grammar, alphabet: BracketAlphabet | None = None) -> DerivationTree:
    """Inverse of :func:`encode_tree`: one left-to-right stack pass."""
    if alphabet is None:
        alphabet = build_bracket_alphabet(g)
    if not z:
        raise DecodeError("empty bracket word", 1)
    depth = 0
    for k, b in enumerate(z, 1):
        depth += 1 if b.opening else -1
        if depth < 0:
            raise DecodeError(f"{b} closes nothing", k)
    if not is_dyck(z):
        raise DecodeError("not a well-balanced bracket word", len(z))
    verdict = check_local_conditions(z, g, alphabet)
    if not verdict:
        raise DecodeError(str(verdict), verdict.position)
    # (code, children) frames
    stack: list[tuple[tuple[int, int], list]] = []
    root = None
    for b in z:
        if b.opening:
            code = (g.start, b.f) if b.is_start else b.child
            stack.append((code, []))
        else:
            code, kids = stack.pop()
            node = DerivationTree(code, tuple(kids))
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
    return root


def dyck_encodings(g: Grammar, w, alphabet: BracketAlphabet | None = None) -> Iterator[DyckWord]:
    """All valid encodings ``z`` with ``apply_hom(z) == w``, found by a direct
    search over bracket sequences (no parser involved).

    The search grows ``z`` one bracket at a time using the successor rules,
    keeps it balanced, and requires the image so far to be a prefix of ``w``.
    """
    _require_dgnf(g)
    word = g.check_word(w)
    if alphabet is None:
        alphabet = build_bracket_alphabet(g)
    h = build_homomorphism(g, alphabet)
    succ = _Successors(g, alphabet)
    n = len(word)
    rules = {b: succ.rule(b) for b in alphabet.symbols()}

    def fits(b, pos):
        img = h[b]
        return pos + len(img) <= n and tuple(word[pos:pos + len(img)]) == img

    path: list[Bracket] = []
    stack: list[Bracket] = []

    def extend(last: Bracket, pos: int):
        _, allowed, may_end = rules[last]
        if not stack and may_end:
            if pos == n:
                yield tuple(path)
            return
        for nxt in sorted(allowed, key=lambda s: (not s.opening, s.tuple)):
            if nxt.opening:
                if not fits(nxt, pos):
                    continue
                path.append(nxt)
                stack.append(nxt)
                yield from extend(nxt, pos + len(h[nxt]))
                stack.pop()
                path.pop()
            else:
                if not stack or stack[-1] != nxt.bar() or not fits(nxt, pos):
                    continue
                path.append(nxt)
                stack.pop()
                yield from extend(nxt, pos + len(h[nxt]))
                stack.append(nxt.bar())
                path.pop()

    for b in alphabet:
        if b.is_start and fits(b, 0):
            path.append(b)
            stack.append(b)
            yield from extend(b, len(h[b]))
            stack.pop()
            path.pop()


def alphabet_json(g: Grammar) -> str:
    alphabet = build_bracket_alphabet(g)
    h = build_homomorphism(g, alphabet)
    payload = {"brackets": alphabet.to_json(), "homomorphism": h.to_json(alphabet)}
    return json.dumps(payload, indent=2)
