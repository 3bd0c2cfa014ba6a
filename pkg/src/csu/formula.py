"""First-order formulas over word structures with an optional arc relation.

Terms are position variables, ``min``, ``max`` and the successor ``(s t)``.
Atoms are ``t < t'``, ``t = t'``, ``letter_a(t)`` and ``arc(t, t')``.
A term that falls off the word (``(s max)``, or ``min`` on the empty word)
is undefined and every atom mentioning it is false.

Evaluation compiles a formula into closures once and then runs them per
model.  Quantifiers whose body pins the variable down (a conjunct ``x = t``,
or an ``arc`` atom with a bound partner) iterate over that single candidate
instead of every position, which keeps the matching formulas cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import sexpr
from .errors import UnboundVariableError


# --- terms ----------------------------------------------------------------------


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class _Min(Term):
    def __str__(self):
        return "min"


@dataclass(frozen=True)
class _Max(Term):
    def __str__(self):
        return "max"


@dataclass(frozen=True)
class Succ(Term):
    arg: Term

    def __str__(self):
        return f"(s {self.arg})"


MIN = _Min()
MAX = _Max()


def succ_n(t: Term, k: int) -> Term:
    for _ in range(k):
        t = Succ(t)
    return t


# --- formulas -------------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return to_sexpr(self)


@dataclass(frozen=True)
class Less(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Letter(Formula):
    letter: str
    term: Term


@dataclass(frozen=True)
class Arc(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula


TRUE = And(())
FALSE = Or(())


def conj(*args: Formula) -> Formula:
    """Flattening conjunction; ``TRUE`` for no arguments, ``FALSE`` absorbs."""
    out: list[Formula] = []
    for a in args:
        if a == FALSE:
            return FALSE
        if isinstance(a, And):
            out.extend(a.args)
        else:
            out.append(a)
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*args: Formula) -> Formula:
    out: list[Formula] = []
    for a in args:
        if a == TRUE:
            return TRUE
        if isinstance(a, Or):
            out.extend(a.args)
        else:
            out.append(a)
    return out[0] if len(out) == 1 else Or(tuple(out))


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def leq(s: Term, t: Term) -> Formula:
    return Or((Less(s, t), Eq(s, t)))


# --- structural helpers -----------------------------------------------------------


def term_vars(t: Term) -> frozenset[str]:
    while isinstance(t, Succ):
        t = t.arg
    return frozenset([t.name]) if isinstance(t, Var) else frozenset()


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Less, Eq, Arc)):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Letter):
        return term_vars(f.term)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, ForAll)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def subformulas(f: Formula) -> Iterable[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (Implies, Iff)):
            stack.extend((g.right, g.left))
        elif isinstance(g, (Exists, ForAll)):
            stack.append(g.body)


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, (Exists, ForAll)):
        return 1 + quantifier_depth(f.body)
    if isinstance(f, (And, Or)):
        return max((quantifier_depth(a) for a in f.args), default=0)
    if isinstance(f, Not):
        return quantifier_depth(f.arg)
    if isinstance(f, (Implies, Iff)):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    return 0


# --- S-expressions ----------------------------------------------------------------

_KEYWORDS = {"and", "or", "not", "imp", "iff", "exists", "forall", "<", "=", "letter", "arc",
             "true", "false", "min", "max", "s"}


def _term_sexpr(t: Term):
    if isinstance(t, Succ):
        return ["s", _term_sexpr(t.arg)]
    return str(t)


def _to_list(f: Formula):
    if f == TRUE:
        return "true"
    if f == FALSE:
        return "false"
    if isinstance(f, Less):
        return ["<", _term_sexpr(f.left), _term_sexpr(f.right)]
    if isinstance(f, Eq):
        return ["=", _term_sexpr(f.left), _term_sexpr(f.right)]
    if isinstance(f, Letter):
        return ["letter", f.letter, _term_sexpr(f.term)]
    if isinstance(f, Arc):
        return ["arc", _term_sexpr(f.left), _term_sexpr(f.right)]
    if isinstance(f, And):
        return ["and"] + [_to_list(a) for a in f.args]
    if isinstance(f, Or):
        return ["or"] + [_to_list(a) for a in f.args]
    if isinstance(f, Not):
        return ["not", _to_list(f.arg)]
    if isinstance(f, Implies):
        return ["imp", _to_list(f.left), _to_list(f.right)]
    if isinstance(f, Iff):
        return ["iff", _to_list(f.left), _to_list(f.right)]
    if isinstance(f, Exists):
        return ["exists", f.var, _to_list(f.body)]
    if isinstance(f, ForAll):
        return ["forall", f.var, _to_list(f.body)]
    raise TypeError(f"not a formula: {f!r}")


def to_sexpr(f: Formula) -> str:
    return sexpr.dumps(_to_list(f))


def _term_from(node) -> Term:
    if isinstance(node, list):
        if len(node) != 2 or node[0] != "s":
            raise sexpr.SexprError(f"bad term {sexpr.dumps(node)}")
        return Succ(_term_from(node[1]))
    if node == "min":
        return MIN
    if node == "max":
        return MAX
    if node in _KEYWORDS or node[:1] in "()":
        raise sexpr.SexprError(f"bad variable name {node!r}")
    return Var(node)


def _from_list(node) -> Formula:
    if node == "true":
        return TRUE
    if node == "false":
        return FALSE
    if not isinstance(node, list) or not node or isinstance(node[0], list):
        raise sexpr.SexprError(f"bad formula {sexpr.dumps(node)}")
    head, args = node[0], node[1:]

    def arity(k):
        if len(args) != k:
            raise sexpr.SexprError(f"'{head}' takes {k} arguments, got {len(args)}")

    if head in ("<", "=", "arc"):
        arity(2)
        cls = {"<": Less, "=": Eq, "arc": Arc}[head]
        return cls(_term_from(args[0]), _term_from(args[1]))
    if head == "letter":
        arity(2)
        if isinstance(args[0], list):
            raise sexpr.SexprError("letter name must be an atom")
        return Letter(args[0], _term_from(args[1]))
    if head == "and":
        return And(tuple(_from_list(a) for a in args))
    if head == "or":
        return Or(tuple(_from_list(a) for a in args))
    if head == "not":
        arity(1)
        return Not(_from_list(args[0]))
    if head in ("imp", "iff"):
        arity(2)
        cls = Implies if head == "imp" else Iff
        return cls(_from_list(args[0]), _from_list(args[1]))
    if head in ("exists", "forall"):
        arity(2)
        if isinstance(args[0], list):
            raise sexpr.SexprError("quantified variable must be an atom")
        cls = Exists if head == "exists" else ForAll
        return cls(args[0], _from_list(args[1]))
    raise sexpr.SexprError(f"unknown connective {head!r}")


def from_sexpr(text: str) -> Formula:
    return _from_list(sexpr.loads(text))


# --- models -------------------------------------------------------------------------


@dataclass(frozen=True)
class WordModel:
    """Positions ``1..n`` labelled by letters; ``min = 1`` and ``max = n``."""

    letters: tuple[str, ...]

    @classmethod
    def of(cls, w) -> "WordModel":
        from .grammar import as_word

        return cls(as_word(w))

    @property
    def n(self) -> int:
        return len(self.letters)

    def letter(self, i: int) -> str:
        return self.letters[i - 1]


class _Ctx:
    __slots__ = ("n", "letters", "arcs", "right_of", "left_of")

    def __init__(self, model: WordModel, arcs):
        self.n = model.n
        self.letters = (None,) + tuple(model.letters)
        pairs = set() if arcs is None else {(int(i), int(j)) for i, j in arcs}
        self.arcs = pairs
        self.right_of: dict[int, list[int]] = {}
        self.left_of: dict[int, list[int]] = {}
        for i, j in sorted(pairs):
            self.right_of.setdefault(i, []).append(j)
            self.left_of.setdefault(j, []).append(i)


# --- compilation -----------------------------------------------------------------------

TermFn = Callable[[_Ctx, dict], "int | None"]
Pred = Callable[[_Ctx, dict], bool]


def _compile_term(t: Term) -> TermFn:
    if isinstance(t, Var):
        name = t.name

        def var(ctx, env):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariableError(name) from None

        return var
    if t is MIN or isinstance(t, _Min):
        return lambda ctx, env: 1 if ctx.n else None
    if t is MAX or isinstance(t, _Max):
        return lambda ctx, env: ctx.n if ctx.n else None
    if isinstance(t, Succ):
        depth = 0
        while isinstance(t, Succ):
            depth += 1
            t = t.arg
        inner = _compile_term(t)

        def succ(ctx, env):
            v = inner(ctx, env)
            if v is None or v + depth > ctx.n:
                return None
            return v + depth

        return succ
    raise TypeError(f"not a term: {t!r}")


def _conjuncts(f: Formula) -> tuple[Formula, ...]:
    return f.args if isinstance(f, And) else (f,)


def _is_var(t: Term, name: str) -> bool:
    return isinstance(t, Var) and t.name == name


def _guard(var: str, conds: Sequence[Formula]):
    """Candidate positions for ``var`` implied by a conjunction, or None.

    Returns a function ``(ctx, env) -> iterable`` that is a superset of the
    positions where every conjunct can hold.
    """
    for c in conds:
        if isinstance(c, Eq):
            for mine, other in ((c.left, c.right), (c.right, c.left)):
                if _is_var(mine, var) and var not in term_vars(other):
                    fn = _compile_term(other)

                    def point(ctx, env, fn=fn):
                        v = fn(ctx, env)
                        return () if v is None else (v,)

                    return point
    for c in conds:
        if isinstance(c, Arc):
            if _is_var(c.left, var) and var not in term_vars(c.right):
                fn = _compile_term(c.right)
                return lambda ctx, env, fn=fn: ctx.left_of.get(fn(ctx, env), ())
            if _is_var(c.right, var) and var not in term_vars(c.left):
                fn = _compile_term(c.left)
                return lambda ctx, env, fn=fn: ctx.right_of.get(fn(ctx, env), ())
    for c in conds:
        # exists y. arc(var, y) ... pins var to an arc endpoint
        if isinstance(c, Exists) and c.var != var:
            for inner in _conjuncts(c.body):
                if isinstance(inner, Arc):
                    if _is_var(inner.left, var) and _is_var(inner.right, c.var):
                        return lambda ctx, env: ctx.right_of.keys()
                    if _is_var(inner.right, var) and _is_var(inner.left, c.var):
                        return lambda ctx, env: ctx.left_of.keys()
    return None


def _universal_guard(var: str, body: Formula):
    if isinstance(body, Implies):
        return _guard(var, _conjuncts(body.left))
    if isinstance(body, ForAll) and body.var != var and isinstance(body.body, Implies):
        for c in _conjuncts(body.body.left):
            if isinstance(c, Arc):
                if _is_var(c.left, var) and _is_var(c.right, body.var):
                    return lambda ctx, env: ctx.right_of.keys()
                if _is_var(c.right, var) and _is_var(c.left, body.var):
                    return lambda ctx, env: ctx.left_of.keys()
    return None


def _compile(f: Formula) -> Pred:
    if isinstance(f, (Less, Eq, Arc)):
        lt, rt = _compile_term(f.left), _compile_term(f.right)
        if isinstance(f, Less):
            def op(a, b, ctx):
                return a < b
        elif isinstance(f, Eq):
            def op(a, b, ctx):
                return a == b
        else:
            def op(a, b, ctx):
                return (a, b) in ctx.arcs

        def atom(ctx, env):
            a = lt(ctx, env)
            if a is None:
                return False
            b = rt(ctx, env)
            return b is not None and op(a, b, ctx)

        return atom
    if isinstance(f, Letter):
        tt, letter = _compile_term(f.term), f.letter

        def letter_atom(ctx, env):
            v = tt(ctx, env)
            return v is not None and ctx.letters[v] == letter

        return letter_atom
    if isinstance(f, And):
        parts = tuple(_compile(a) for a in f.args)
        return lambda ctx, env: all(p(ctx, env) for p in parts)
    if isinstance(f, Or):
        parts = tuple(_compile(a) for a in f.args)
        return lambda ctx, env: any(p(ctx, env) for p in parts)
    if isinstance(f, Not):
        inner = _compile(f.arg)
        return lambda ctx, env: not inner(ctx, env)
    if isinstance(f, Implies):
        a, b = _compile(f.left), _compile(f.right)
        return lambda ctx, env: (not a(ctx, env)) or b(ctx, env)
    if isinstance(f, Iff):
        a, b = _compile(f.left), _compile(f.right)
        return lambda ctx, env: a(ctx, env) == b(ctx, env)
    if isinstance(f, (Exists, ForAll)):
        var, body = f.var, _compile(f.body)
        universal = isinstance(f, ForAll)
        dom = _universal_guard(var, f.body) if universal else _guard(var, _conjuncts(f.body))

        def quant(ctx, env):
            positions = range(1, ctx.n + 1) if dom is None else dom(ctx, env)
            saved = env.get(var, _MISSING)
            try:
                for v in positions:
                    if not 1 <= v <= ctx.n:
                        continue
                    env[var] = v
                    if body(ctx, env) != universal:
                        return not universal
                return universal
            finally:
                if saved is _MISSING:
                    env.pop(var, None)
                else:
                    env[var] = saved

        return quant
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


class CompiledFormula:
    def __init__(self, f: Formula):
        self.formula = f
        self.free = free_vars(f)
        self._fn = _compile(f)

    def __call__(self, model: WordModel, arcs=None, env: Mapping[str, int] | None = None) -> bool:
        env = dict(env or {})
        missing = self.free - env.keys()
        if missing:
            raise UnboundVariableError(", ".join(sorted(missing)))
        return self._fn(_Ctx(model, arcs), env)


_cache: dict[int, CompiledFormula] = {}


def compile_formula(f: Formula) -> CompiledFormula:
    hit = _cache.get(id(f))
    if hit is not None and hit.formula is f:
        return hit
    if len(_cache) > 256:
        _cache.clear()
    compiled = CompiledFormula(f)
    _cache[id(f)] = compiled
    return compiled


def eval_formula(f: Formula, model, arcs=None, env: Mapping[str, int] | None = None) -> bool:
    """Truth value of ``f`` on the word model with arc relation ``arcs``.

    ``model`` may be a :class:`WordModel` or anything :func:`as_word` accepts;
    ``arcs`` is an iterable of position pairs (a Matching works).
    """
    if not isinstance(model, WordModel):
        model = WordModel.of(model)
    return compile_formula(f)(model, arcs, env)
