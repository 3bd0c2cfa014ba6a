"""Command-line front end: ``csu <command> GRAMMAR [options]``.

GRAMMAR is a grammar file, or the name of a bundled fixture (``worked``,
``tree``, ``ambiguous``) when no such file exists.

Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 usage
error, 3 invalid input (unreadable file, bad grammar, bad bracket word,
unmet precondition).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import fixtures
from .cs_encoding import (
    alphabet_json,
    apply_hom,
    build_bracket_alphabet,
    build_homomorphism,
    check_local_conditions,
    decode_dyck,
    dyck_encodings,
    emit_local_formula,
    encode_tree,
    format_dyck,
    is_dyck,
    parse_dyck,
)
from .errors import CSUError
from .fo_match import VARIANTS, build_psi_g, satisfying_matchings, unambiguity_probe
from .formula import to_sexpr
from .grammar import Grammar, as_word, format_word, parse_grammar
from .normalize import eliminate_short_productions, make_patterns_injective, to_double_greibach
from .parse_oracle import earley_recognize, enumerate_trees

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


class _InputError(Exception):
    pass


def _load(spec: str) -> Grammar:
    if not os.path.exists(spec):
        # bare fixture names and fixtures/<name>.cfg fall back to the bundled copies
        stem, ext = os.path.splitext(os.path.basename(spec))
        if stem in fixtures.NAMES and ext in ("", ".cfg"):
            return fixtures.load(stem)
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read {spec}: {exc.strerror or exc}") from None
    return parse_grammar(text)


def _word(text: str):
    return as_word(text)


def _show_word(w) -> str:
    return format_word(w) or "ε"


def _verdict(ok: bool) -> int:
    print("true" if ok else "false")
    return EXIT_OK if ok else EXIT_NO


def cmd_normalize(args) -> int:
    g = _load(args.grammar)
    if args.dgnf:
        out = to_double_greibach(g)
    elif args.injective_patterns:
        out = make_patterns_injective(g)
    else:
        out = eliminate_short_productions(g)
    sys.stdout.write(out.to_text())
    return EXIT_OK


def cmd_brackets(args) -> int:
    g = _load(args.grammar)
    if args.json:
        print(alphabet_json(g))
        return EXIT_OK
    alphabet = build_bracket_alphabet(g)
    h = build_homomorphism(g, alphabet)
    width = max((len(b.token()) for b in alphabet), default=0)
    for k, b in enumerate(alphabet, 1):
        print(f"{k:>3}  {b.token():<{width}}  open -> {_show_word(h[b]):<8} close -> {_show_word(h[b.bar()])}")
    return EXIT_OK


def cmd_encode(args) -> int:
    g = _load(args.grammar)
    alphabet = build_bracket_alphabet(g)
    trees = enumerate_trees(g, _word(args.word))
    for t in trees:
        print(format_dyck(encode_tree(t, g), alphabet, alias=args.alias))
    return EXIT_OK if trees else EXIT_NO


def cmd_decode(args) -> int:
    g = _load(args.grammar)
    alphabet = build_bracket_alphabet(g)
    z = parse_dyck(args.dyck, alphabet)
    t = decode_dyck(z, g, alphabet)
    print(t.to_sexpr())
    print(_show_word(apply_hom(build_homomorphism(g, alphabet), z)))
    return EXIT_OK


def cmd_check(args) -> int:
    g = _load(args.grammar)
    alphabet = build_bracket_alphabet(g)
    z = parse_dyck(args.dyck, alphabet)
    dyck = is_dyck(z)
    local = check_local_conditions(z, g, alphabet)
    print(f"dyck: {'true' if dyck else 'false'}")
    print(f"local: {'true' if local else 'false'}" + ("" if local else f" ({local})"))
    return EXIT_OK if dyck and local else EXIT_NO


def cmd_member(args) -> int:
    g = _load(args.grammar)
    w = _word(args.word)
    if args.via == "earley":
        ok = earley_recognize(g, w)
    elif args.via == "matching":
        ok = bool(satisfying_matchings(g, w, args.variant))
    else:
        ok = next(iter(dyck_encodings(g, w)), None) is not None
    return _verdict(ok)


def cmd_formula(args) -> int:
    g = _load(args.grammar)
    f = build_psi_g(g, args.variant) if args.psi_g else emit_local_formula(g, alias=args.alias)
    print(to_sexpr(f))
    return EXIT_OK


def cmd_probe(args) -> int:
    g = _load(args.grammar)
    report = unambiguity_probe(g, args.max_len, args.variant)
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return EXIT_OK if report.ok else EXIT_NO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csu", description="Grammar, bracket-encoding and matching-logic toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def command(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("grammar", help="grammar file or bundled fixture name")
        p.set_defaults(fn=fn)
        return p

    p = command("normalize", cmd_normalize, "rewrite a grammar and print it")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--dgnf", action="store_true", help="convert to double Greibach normal form")
    mode.add_argument("--injective-patterns", action="store_true", help="make patterns determine left-hand sides")
    mode.add_argument("--eliminate-short", action="store_true", help="inline single-letter productions")

    p = command("brackets", cmd_brackets, "print the bracket alphabet and its homomorphism")
    p.add_argument("--json", action="store_true")

    p = command("encode", cmd_encode, "print one bracket word per derivation tree of a word")
    p.add_argument("--word", required=True)
    p.add_argument("--alias", action="store_true", help="print alias numbers instead of tuples")

    p = command("decode", cmd_decode, "decode a bracket word into a tree and its image")
    p.add_argument("--dyck", required=True)

    p = command("check", cmd_check, "report balance and local-condition verdicts for a bracket word")
    p.add_argument("--dyck", required=True)

    p = command("member", cmd_member, "decide membership of a word")
    p.add_argument("--word", required=True)
    p.add_argument("--via", choices=("earley", "matching", "encoding"), default="earley")
    p.add_argument("--variant", choices=VARIANTS, default="exact", help=argparse.SUPPRESS)

    p = command("formula", cmd_formula, "print a first-order sentence as an S-expression")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--psi-g", action="store_true", help="matching sentence of the grammar")
    kind.add_argument("--local", action="store_true", help="local conditions over bracket letters")
    p.add_argument("--variant", choices=VARIANTS, default="exact")
    p.add_argument("--literal", dest="variant", action="store_const", const="literal",
                   help="shorthand for --variant literal")
    p.add_argument("--alias", action="store_true", help="bracket letters as alias numbers (with --local)")

    p = command("probe", cmd_probe, "compare tree counts and matching counts on all short words")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--variant", choices=VARIANTS, default="exact")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (_InputError, CSUError) as exc:
        print(f"csu: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
