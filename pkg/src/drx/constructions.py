"""Derived constructions: deterministic regexes for unary regular languages,
the word-equation reduction to intersection, and bounded intersection search."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from . import syntax as sx
from .errors import DrxError
from .tmfa import DEFAULT_CONFIG_CAP, Tmfa, bounded_language, member_oracle


def _seq(*parts):
    return sx.concat(*(p for p in parts if p != sx.Epsilon()))


# ---------------------------------------------------------------- unary languages

@dataclass(frozen=True)
class UnaryDfa:
    """Lollipop DFA over {a}: a chain p_0..p_{m-1} followed by a cycle of n states.

    Position i < m is chain state p_i; a^i for i >= m lands on cycle position
    (i - m) mod n.
    """

    chain: int
    cycle: int
    accept_chain: frozenset
    accept_cycle: frozenset

    def __post_init__(self):
        if self.chain < 0 or self.cycle < 1:
            raise DrxError("a lollipop needs chain >= 0 and cycle >= 1")
        if any(not 0 <= i < self.chain for i in self.accept_chain):
            raise DrxError("accepting chain position out of range")
        if any(not 0 <= i < self.cycle for i in self.accept_cycle):
            raise DrxError("accepting cycle position out of range")

    def accepts(self, i: int) -> bool:
        if i < self.chain:
            return i in self.accept_chain
        return (i - self.chain) % self.cycle in self.accept_cycle

    def to_json(self) -> str:
        return json.dumps({"chain": self.chain, "cycle": self.cycle,
                           "accept_chain": sorted(self.accept_chain),
                           "accept_cycle": sorted(self.accept_cycle)})

    @staticmethod
    def from_json(text: str) -> "UnaryDfa":
        try:
            data = json.loads(text)
            return UnaryDfa(int(data["chain"]), int(data["cycle"]),
                            frozenset(data.get("accept_chain", ())),
                            frozenset(data.get("accept_cycle", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise DrxError(f"malformed unary DFA: {exc}") from exc


def _gaps(points):
    prev, out = 0, []
    for p in points:
        out.append(p - prev)
        prev = p
    return out


def unary_dfa_to_drx(d: UnaryDfa, symbol: str = "a") -> sx.RegexAst:
    a = sx.Terminal(symbol)
    body = _nonempty_part(d, a)
    if not d.accepts(0):
        return body
    if body == sx.Empty():
        return sx.Epsilon()
    return sx.Disjunction(body, sx.Epsilon())


def _nonempty_part(d: UnaryDfa, a) -> sx.RegexAst:
    """Deterministic regex for L(d) minus ε."""
    if not d.accept_cycle:
        points = [i for i in range(1, d.chain) if d.accepts(i)]
        if not points:
            return sx.Empty()
        return _chain([sx.power(a, c) for c in _gaps(points)])

    n = d.cycle
    entry = next(i for i in range(max(d.chain, 1), max(d.chain, 1) + n) if d.accepts(i))
    offsets = [j for j in range(1, n + 1) if d.accepts(entry + j)]
    if all(b == 1 for b in _gaps(offsets)):
        points = [i for i in range(1, entry + 1) if d.accepts(i)]
        gaps = _gaps(points)
        return _chain([sx.power(a, c) for c in gaps[:-1]] + [_seq(sx.power(a, gaps[-1]), sx.star(a))])
    while _gaps(offsets)[0] == 1:
        entry += offsets[0]
        offsets = [j for j in range(1, n + 1) if d.accepts(entry + j)]
    points = [i for i in range(1, entry + 1) if d.accepts(i)]
    c = _gaps(points)
    b = _gaps(offsets)
    ell = len(b)
    names = [f"x{i}" for i in range(ell + 1)]
    ref = [sx.Reference(x) for x in names]
    shift = [sx.Binding(names[0], ref[ell])]
    shift += [sx.Binding(names[i], ref[i - 1]) for i in range(ell, 0, -1)]
    cont = [sx.power(ref[1], b[0] - 2)] + [sx.power(ref[j], b[j - 1] - 1) for j in range(2, ell + 1)]
    cycle = sx.Plus(_seq(*shift, *cont))
    last = _seq(sx.Binding(names[ell], a), sx.power(a, c[-1] - 1), sx.Disjunction(sx.Epsilon(), cycle))
    return _chain([sx.power(a, g) for g in c[:-1]] + [last])


def _chain(blocks):
    """blocks[0] (ε | blocks[1] (ε | ...)); the last block stands alone."""
    result = blocks[-1]
    for block in reversed(blocks[:-1]):
        result = _seq(block, sx.Disjunction(sx.Epsilon(), result))
    return result


# ---------------------------------------------------------------- word equations

SEPARATOR = "%"
_TOKEN = re.compile(r"\s*(?:([A-Z][0-9]*)|([a-z]))")


@dataclass(frozen=True)
class WordEquation:
    """lhs = rhs; each side a tuple of ('var', name) or ('char', letter)."""

    lhs: tuple
    rhs: tuple

    def variables(self) -> tuple:
        return tuple(dict.fromkeys(v for kind, v in self.lhs + self.rhs if kind == "var"))

    def terminals(self) -> tuple:
        return tuple(sorted({v for kind, v in self.lhs + self.rhs if kind == "char"}))

    def substitute(self, assignment: dict) -> tuple:
        def side(items):
            return "".join(assignment[v] if kind == "var" else v for kind, v in items)
        return side(self.lhs), side(self.rhs)


def _parse_side(text: str, offset: int) -> tuple:
    items, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DrxError(f"unexpected character {text[pos]!r} at position {offset + pos}")
        items.append(("var", m.group(1)) if m.group(1) else ("char", m.group(2)))
        pos = m.end()
    if not items:
        raise DrxError("both sides of an equation must be nonempty")
    return tuple(items)


def parse_equation(text: str) -> WordEquation:
    """Parse ``lhs = rhs``: uppercase variables (optionally numbered), lowercase letters."""
    if text.count("=") != 1:
        raise DrxError("an equation needs exactly one '='")
    left, right = text.split("=")
    return WordEquation(_parse_side(left, 0), _parse_side(right, len(left) + 1))


def word_equation_to_drx(eq: WordEquation, alphabet=None) -> tuple:
    """Regexes whose intersection is nonempty iff the equation has a solution.

    Both regexes first guess every variable value, separated by ``%``, and
    then spell out their side of the equation with references.
    """
    sigma = tuple(sorted(set(alphabet or ()) | set(eq.terminals())))
    if SEPARATOR in sigma:
        raise DrxError(f"{SEPARATOR!r} is reserved as separator")
    any_word = sx.star(sx.disjunction(*map(sx.Terminal, sigma))) if sigma else sx.Epsilon()
    guesses = []
    for x in eq.variables():
        guesses += [sx.Binding(x, any_word), sx.Terminal(SEPARATOR)]

    def side(items):
        return [sx.Reference(v) if kind == "var" else sx.Terminal(v) for kind, v in items]

    return _seq(*guesses, *side(eq.lhs)), _seq(*guesses, *side(eq.rhs))


# ---------------------------------------------------------------- intersection

def bounded_intersection(ms: list, max_len: int, alphabet=None,
                         cap: int = DEFAULT_CONFIG_CAP) -> Optional[str]:
    """Shortest, then lexicographically least, word of length <= max_len in every L(m)."""
    if not ms:
        raise ValueError("need at least one automaton")
    sigma = sorted(set(alphabet or ()).union(*(m.alphabet for m in ms)))
    ms = [m.with_alphabet(sigma) for m in ms]
    candidates = bounded_language(ms[0], max_len, sigma, cap=cap)
    for w in sorted(candidates, key=lambda w: (len(w), w)):
        if all(member_oracle(m, w, cap) for m in ms[1:]):
            return w
    return None
