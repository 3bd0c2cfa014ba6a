"""Minimal S-expression reader: atoms are whitespace/paren-delimited strings."""

from __future__ import annotations


class SexprError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def loads(text: str):
    """Parse exactly one S-expression into nested lists of atom strings."""
    toks = tokenize(text)
    if not toks:
        raise SexprError("empty S-expression")
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(toks):
            raise SexprError("unexpected end of input")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(toks):
                    raise SexprError("missing ')'")
                if toks[pos] == ")":
                    pos += 1
                    return items
                items.append(read())
        if tok == ")":
            raise SexprError("unexpected ')'")
        return tok

    value = read()
    if pos != len(toks):
        raise SexprError(f"trailing input after S-expression: {' '.join(toks[pos:])}")
    return value


def dumps(value) -> str:
    if isinstance(value, list):
        return "(" + " ".join(dumps(v) for v in value) + ")"
    return str(value)
