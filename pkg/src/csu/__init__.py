"""Grammar toolkit: bracket encodings and matching logic for context-free grammars."""

from .cs_encoding import (
    Bracket,
    BracketAlphabet,
    HomTable,
    apply_hom,
    build_bracket_alphabet,
    build_homomorphism,
    check_local_conditions,
    decode_dyck,
    dyck_encodings,
    emit_local_formula,
    encode_tree,
    is_dyck,
    parse_dyck,
)
from .errors import CSUError
from .fo_match import (
    AmbiguityReport,
    Matching,
    build_psi_g,
    enumerate_matchings,
    is_matching,
    matching_from_tree,
    satisfying_matchings,
    unambiguity_probe,
)
from .formula import Formula, WordModel, eval_formula, from_sexpr, to_sexpr
from .grammar import DerivationTree, Grammar, Pattern, Production, parse_grammar, pattern_of, validate_dgnf
from .normalize import eliminate_short_productions, make_patterns_injective, to_double_greibach
from .parse_oracle import count_trees, earley_recognize, enumerate_trees, yield_of

__version__ = "0.1.0"
