"""Command-line front end.

Exit status: 0 success (or every word accepted), 1 rejection or
nondeterminism, 2 usage error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dtmfa, glushkov, ldet, refsem
from . import syntax as sx
from . import tmfa as tm
from .constructions import (
    UnaryDfa,
    bounded_intersection,
    parse_equation,
    unary_dfa_to_drx,
    word_equation_to_drx,
)
from .dot import graph_to_dot, tmfa_to_dot
from .errors import (
    DrxError,
    PreconditionError,
    RegexSyntaxError,
    ResourceLimitError,
    UnsupportedConstructionError,
)

OK, REJECT, USAGE, RESOURCE = 0, 1, 2, 3


class _Reject(Exception):
    """Carries a message for a status-1 outcome that is not an error."""


def _word(w: str) -> str:
    return w if w else "ε"


def _length_lex(words):
    return sorted(words, key=lambda w: (len(w), w))


# ---------------------------------------------------------------- input helpers

def _parse_regex(args) -> sx.RegexAst:
    if args.regex is None:
        raise DrxError("a regex argument is required")
    return sx.parse(args.regex)


def _widen(m: tm.Tmfa, args) -> tm.Tmfa:
    return m.with_alphabet(args.alphabet) if args.alphabet else m


def _load_automaton(args) -> tm.Tmfa:
    with open(args.automaton, encoding="utf-8") as fh:
        return _widen(tm.from_json(fh.read()), args)


def _deterministic_automaton(args) -> tm.Tmfa:
    """The DTMFA given by --automaton or compiled from the regex argument."""
    if args.automaton:
        m = _load_automaton(args)
        if not tm.is_deterministic(m):
            raise _Reject("NONDETERMINISTIC automaton")
        return m
    ast = _parse_regex(args)
    result = glushkov.compile_deterministic(ast)
    if isinstance(result, glushkov.NondeterminismWitness):
        raise _Reject("NONDETERMINISTIC " + result.describe(glushkov.build_graph(ast)))
    return _widen(result, args)


def _any_automaton(args) -> tm.Tmfa:
    if args.automaton:
        return _load_automaton(args)
    return _widen(glushkov.compile_glushkov(_parse_regex(args)), args)


def _emit_automaton(m: tm.Tmfa, args, out):
    if args.format == "dot":
        out.write(tmfa_to_dot(m))
    elif args.format == "text":
        out.write(f"states={m.num_states} memories={m.num_memories} initial={m.initial} "
                  f"trap={m.trap}{' accepting' if m.trap_accepting else ''} "
                  f"finals={sorted(m.finals)}\n")
        for t in m.transitions:
            acts = " ".join(f"{a}{i + 1}" for i, a in enumerate(t.actions) if a != "d")
            out.write(f"{t.source} -{t.label}-> {t.target}{'  ' + acts if acts else ''}\n")
    else:
        out.write(tm.to_json(m) + "\n")


# ---------------------------------------------------------------- subcommands

def cmd_check(args, out):
    ast = _parse_regex(args)
    graph = glushkov.build_graph(ast)
    verdict = glushkov.graph_determinism(graph)
    if isinstance(verdict, glushkov.Deterministic):
        out.write("DETERMINISTIC\n")
        return OK
    out.write(f"NONDETERMINISTIC {verdict.describe(graph)}\n")
    return REJECT


def cmd_compile(args, out):
    _emit_automaton(_deterministic_automaton(args), args, out)
    return OK


def cmd_match(args, out, lines):
    if args.engine == "oracle":
        m = _load_automaton(args) if args.automaton else tm.compile_naive(_parse_regex(args), args.alphabet)

        def accepts(w):
            return tm.member_oracle(m, w, args.cap_configs)
    else:
        m = _deterministic_automaton(args)
        if args.engine == "fast":
            table = dtmfa.preprocess(m)

            def accepts(w):
                return dtmfa.match_fast(table, w)
        else:
            def accepts(w):
                return dtmfa.match_direct(m, w)
    status = OK
    for line in lines:
        w = line.rstrip("\r\n")
        if accepts(w):
            out.write("ACCEPT\n")
        else:
            out.write("REJECT\n")
            status = REJECT
    return status


def cmd_complement(args, out):
    _emit_automaton(dtmfa.complement(_deterministic_automaton(args), args.cap_states), args, out)
    return OK


def cmd_enum(args, out):
    if args.automaton:
        words = tm.bounded_language(_load_automaton(args), args.max_len, cap=args.cap_configs)
    else:
        ast = _parse_regex(args)
        if args.engine == "oracle":
            words = refsem.language_by_refwords(ast, args.max_len, args.cap_configs)
        else:
            m = tm.compile_naive(ast, args.alphabet)
            words = tm.bounded_language(m, args.max_len, cap=args.cap_configs)
    words = _length_lex(words)
    if args.format == "json":
        out.write(json.dumps(words) + "\n")
    else:
        for w in words:
            out.write(_word(w) + "\n")
    return OK


def cmd_intersect(args, out):
    if not args.regexes:
        raise DrxError("intersect needs at least one regex")
    ms = [tm.compile_naive(sx.parse(text)) for text in args.regexes]
    witness = bounded_intersection(ms, args.max_len, args.alphabet, args.cap_configs)
    if witness is None:
        out.write(f"EMPTY≤{args.max_len}\n")
        return REJECT
    out.write(_word(witness) + "\n")
    return OK


def cmd_unary(args, out):
    source = args.dfa
    if source == "-":
        text = args.stdin.read()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    out.write(sx.to_text(unary_dfa_to_drx(UnaryDfa.from_json(text))) + "\n")
    return OK


def cmd_wordeq(args, out):
    left, right = word_equation_to_drx(parse_equation(args.equation), args.alphabet)
    out.write(sx.to_text(left) + "\n" + sx.to_text(right) + "\n")
    return OK


def cmd_dot(args, out):
    if args.automaton:
        out.write(tmfa_to_dot(_load_automaton(args)))
    else:
        out.write(graph_to_dot(glushkov.build_graph(_parse_regex(args))))
    return OK


def cmd_ldet(args, out):
    m = _any_automaton(args)
    if not ldet.is_l_deterministic(m, args.ell, args.cap_configs):
        out.write(f"NOT {args.ell}-DETERMINISTIC\n")
        return REJECT
    if args.format in ("json", "dot"):
        _emit_automaton(ldet.l_determinize(m, args.ell, args.cap_states), args, out)
    else:
        out.write(f"{args.ell}-DETERMINISTIC\n")
    return OK


# ---------------------------------------------------------------- parser

def _nonnegative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alphabet", default="", help="extra input symbols, e.g. 'abc'")
    common.add_argument("--max-len", type=_nonnegative, default=6, help="length bound for enum/intersect")
    common.add_argument("--ell", type=_nonnegative, default=1, help="lookahead for ldet")
    common.add_argument("--engine", choices=("direct", "fast", "oracle"), default="direct")
    common.add_argument("--format", choices=("json", "dot", "text"), default=None)
    common.add_argument("--cap-states", type=_nonnegative, default=tm.DEFAULT_STATE_CAP)
    common.add_argument("--cap-configs", type=_nonnegative, default=tm.DEFAULT_CONFIG_CAP)
    common.add_argument("--automaton", metavar="FILE", help="read a JSON automaton instead of a regex")

    parser = argparse.ArgumentParser(prog="drx", description="Deterministic regexes with back-references.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, helptext, regex=True):
        p = sub.add_parser(name, parents=[common], help=helptext)
        if regex:
            p.add_argument("regex", nargs="?")
        return p

    add("check", "report whether a regex is deterministic")
    add("compile", "compile a deterministic regex to an automaton")
    add("match", "match words from standard input, one per line")
    add("complement", "complement of a deterministic automaton")
    add("enum", "list the language up to --max-len")
    add("intersect", "search a common word up to --max-len", regex=False).add_argument("regexes", nargs="+")
    add("unary", "regex for a unary lollipop DFA", regex=False).add_argument(
        "dfa", help="JSON text, a file path, or - for standard input")
    add("wordeq", "reduce a word equation to two regexes", regex=False).add_argument(
        "equation", help="e.g. 'Xa = aX'")
    add("dot", "occurrence graph (or --automaton) in Graphviz format")
    add("ldet", "decide ℓ-determinism; with --format json|dot emit the determinized automaton")
    return parser


COMMANDS = {
    "check": cmd_check, "compile": cmd_compile, "complement": cmd_complement,
    "enum": cmd_enum, "intersect": cmd_intersect, "unary": cmd_unary,
    "wordeq": cmd_wordeq, "dot": cmd_dot, "ldet": cmd_ldet,
}


def main(argv=None, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if getattr(args, "regex", None) is not None and args.automaton:
        sys.stderr.write("drx: give either a regex or --automaton, not both\n")
        return USAGE
    if args.format is None:
        args.format = "text" if args.command in ("enum", "ldet") else "json"
    args.stdin = stdin
    try:
        if args.command == "match":
            return cmd_match(args, out, stdin)
        return COMMANDS[args.command](args, out)
    except _Reject as exc:
        out.write(f"{exc}\n")
        return REJECT
    except RegexSyntaxError as exc:
        sys.stderr.write(f"drx: syntax error: {exc}\n")
        return USAGE
    except ResourceLimitError as exc:
        sys.stderr.write(f"drx: resource limit: {exc}\n")
        return RESOURCE
    except (PreconditionError, UnsupportedConstructionError) as exc:
        sys.stderr.write(f"drx: {exc}\n")
        return REJECT
    except (DrxError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"drx: {exc}\n")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
