"""Deterministic regular expressions with back-references and memory automata with a trap state."""

from .constructions import (
    UnaryDfa,
    WordEquation,
    bounded_intersection,
    parse_equation,
    unary_dfa_to_drx,
    word_equation_to_drx,
)
from .dtmfa import complement, complete, match_direct, match_fast, preprocess, remove_epsilon
from .errors import (
    DrxError,
    NotDeterministicError,
    PreconditionError,
    RegexSyntaxError,
    ResourceLimitError,
    UnsupportedConstructionError,
)
from .glushkov import build_graph, compile_deterministic, compile_glushkov, graph_determinism
from .ldet import is_l_deterministic, l_determinize
from .refsem import dereference, enumerate_language, enumerate_ref_words, language_by_refwords
from .syntax import parse, to_text
from .tmfa import (
    Tmfa,
    acc_to_rej,
    bounded_language,
    compile_naive,
    is_deterministic,
    member_oracle,
    normalize,
)

__version__ = "0.1.0"
