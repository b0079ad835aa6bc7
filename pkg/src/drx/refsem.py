"""Ref-word semantics.

A ref-word spells out where variables are captured (``[x`` ... ``]x``) and
where they are recalled (``x``).  Dereferencing replaces every recall by the
nearest capture to its left.  This module also hosts two independent bounded
oracles: ``enumerate_ref_words`` over the ref-regex, and
``language_by_refwords`` which evaluates the regex directly under ref-word
semantics without building any automaton.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from . import syntax as sx
from .errors import ResourceLimitError

CHAR, VAR, OPEN, CLOSE = "char", "var", "open", "close"


@dataclass(frozen=True)
class RefSymbol:
    kind: str
    value: str
    mark: Optional[int] = None

    def unmarked(self) -> "RefSymbol":
        return RefSymbol(self.kind, self.value) if self.mark is not None else self

    def is_bracket(self) -> bool:
        return self.kind in (OPEN, CLOSE)

    def __str__(self):
        text = {CHAR: "{}", VAR: "&{}", OPEN: "[{}", CLOSE: "]{}"}[self.kind].format(self.value)
        return text if self.mark is None else f"{text}({self.mark})"


def char(a, mark=None):
    return RefSymbol(CHAR, a, mark)


def var(x, mark=None):
    return RefSymbol(VAR, x, mark)


def open_(x, mark=None):
    return RefSymbol(OPEN, x, mark)


def close(x, mark=None):
    return RefSymbol(CLOSE, x, mark)


def format_refword(r: Iterable[RefSymbol]) -> str:
    r = tuple(r)
    return " ".join(str(s) for s in r) if r else "ε"


@dataclass(frozen=True)
class Symbol:
    """Leaf of a ref-regex: one ref-symbol."""

    sym: RefSymbol


def to_ref_regex(ast: sx.RegexAst, marked: bool = False):
    """α_R: bindings become bracket pairs, references become variable symbols.

    With ``marked`` every symbol occurrence gets its left-to-right index,
    starting at 1.
    """
    counter = [0]

    def mark():
        if not marked:
            return None
        counter[0] += 1
        return counter[0]

    def walk(node):
        if isinstance(node, (sx.Empty, sx.Epsilon)):
            return node
        if isinstance(node, sx.Terminal):
            return Symbol(char(node.symbol, mark()))
        if isinstance(node, sx.Reference):
            return Symbol(var(node.name, mark()))
        if isinstance(node, sx.Binding):
            opening = Symbol(open_(node.name, mark()))
            body = walk(node.child)
            return sx.Concat(opening, sx.Concat(body, Symbol(close(node.name, mark()))))
        if isinstance(node, sx.Concat):
            left = walk(node.left)
            return sx.Concat(left, walk(node.right))
        if isinstance(node, sx.Disjunction):
            left = walk(node.left)
            return sx.Disjunction(left, walk(node.right))
        if isinstance(node, sx.Plus):
            return sx.Plus(walk(node.child))
        raise TypeError(f"not a regex node: {node!r}")

    return walk(ast)


def format_ref_regex(node) -> str:
    if isinstance(node, Symbol):
        return str(node.sym)
    if isinstance(node, sx.Empty):
        return "∅"
    if isinstance(node, sx.Epsilon):
        return "()"
    if isinstance(node, sx.Concat):
        parts = []
        for side in (node.left, node.right):
            text = format_ref_regex(side)
            parts.append(f"({text})" if isinstance(side, sx.Disjunction) and not sx.is_star(side) else text)
        return " ".join(parts)
    if isinstance(node, sx.Disjunction):
        if sx.is_star(node):
            return f"({format_ref_regex(node.right.child)})*"
        return f"{format_ref_regex(node.left)}|{format_ref_regex(node.right)}"
    if isinstance(node, sx.Plus):
        return f"({format_ref_regex(node.child)})+"
    raise TypeError(f"not a ref-regex node: {node!r}")


# ---------------------------------------------------------------- ε-NFA of a ref-regex

@dataclass(frozen=True)
class RefNfa:
    """Thompson ε-NFA; ``edges`` holds (source, RefSymbol or None for ε, target)."""

    num_states: int
    start: int
    accept: int
    edges: tuple

    def successors(self):
        out = [[] for _ in range(self.num_states)]
        for src, sym, dst in self.edges:
            out[src].append((sym, dst))
        return out


def thompson(ref_regex) -> RefNfa:
    edges = []
    count = [0]

    def fresh():
        count[0] += 1
        return count[0] - 1

    def build(node):
        s, t = fresh(), fresh()
        if isinstance(node, sx.Empty):
            pass
        elif isinstance(node, sx.Epsilon):
            edges.append((s, None, t))
        elif isinstance(node, Symbol):
            edges.append((s, node.sym, t))
        elif isinstance(node, sx.Concat):
            ls, lt = build(node.left)
            rs, rt = build(node.right)
            edges.extend([(s, None, ls), (lt, None, rs), (rt, None, t)])
        elif isinstance(node, sx.Disjunction):
            for side in (node.left, node.right):
                cs, ct = build(side)
                edges.extend([(s, None, cs), (ct, None, t)])
        elif isinstance(node, sx.Plus):
            cs, ct = build(node.child)
            edges.extend([(s, None, cs), (ct, None, t), (ct, None, cs)])
        else:
            raise TypeError(f"not a ref-regex node: {node!r}")
        return s, t

    start, accept = build(ref_regex)
    return RefNfa(count[0], start, accept, tuple(edges))


# ---------------------------------------------------------------- dereference

def dereference(r: Iterable[RefSymbol]) -> str:
    out = []
    values = {}
    starts = {}
    for sym in r:
        if sym.kind == CHAR:
            out.append(sym.value)
        elif sym.kind == VAR:
            out.append(values.get(sym.value, ""))
        elif sym.kind == OPEN:
            starts[sym.value] = len(out)
        else:
            begin = starts.pop(sym.value, len(out))
            values[sym.value] = "".join(out[begin:])
    return "".join(out)


# ---------------------------------------------------------------- bounded oracles

def enumerate_ref_words(ast: sx.RegexAst, max_len: int, cap: int = 200_000,
                        marked: bool = False) -> set:
    """All ref-words of α (of the marked α with ``marked``) with at most ``max_len`` symbols."""
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    nfa = thompson(to_ref_regex(ast, marked))
    succ = nfa.successors()
    seen = {(nfa.start, ())}
    queue = deque(seen)
    found = set()
    while queue:
        state, r = queue.popleft()
        if state == nfa.accept:
            found.add(r)
        for sym, dst in succ[state]:
            nxt = r if sym is None else r + (sym,)
            if len(nxt) > max_len or (dst, nxt) in seen:
                continue
            seen.add((dst, nxt))
            if len(seen) > cap:
                raise ResourceLimitError(f"ref-word enumeration exceeded {cap} search nodes")
            queue.append((dst, nxt))
    return found


def language_by_refwords(ast: sx.RegexAst, max_word_len: int, cap: int = 2_000_000) -> set:
    """Words of L(α) up to ``max_word_len``, evaluated directly on the AST.

    Each search item is the dereferenced output so far plus the current value
    of every variable; bindings record what their body appended.  This shares
    no code with the automaton side and serves as the independent oracle.
    """
    order = sx.variable_order(ast)
    index = {name: i for i, name in enumerate(order)}
    budget = [cap]

    def spend(n):
        budget[0] -= n
        if budget[0] < 0:
            raise ResourceLimitError(f"ref-word evaluation exceeded {cap} items")

    def ev(node, items):
        if not items:
            return items
        if isinstance(node, sx.Empty):
            return frozenset()
        if isinstance(node, sx.Epsilon):
            return items
        if isinstance(node, sx.Terminal):
            result = frozenset((out + node.symbol, vals) for out, vals in items
                               if len(out) < max_word_len)
        elif isinstance(node, sx.Reference):
            i = index[node.name]
            result = frozenset((out + vals[i], vals) for out, vals in items
                               if len(out) + len(vals[i]) <= max_word_len)
        elif isinstance(node, sx.Concat):
            return ev(node.right, ev(node.left, items))
        elif isinstance(node, sx.Disjunction):
            return ev(node.left, items) | ev(node.right, items)
        elif isinstance(node, sx.Binding):
            i = index[node.name]
            collected = set()
            for out, vals in items:
                for out2, vals2 in ev(node.child, frozenset([(out, vals)])):
                    captured = out2[len(out):]
                    collected.add((out2, vals2[:i] + (captured,) + vals2[i + 1:]))
            result = frozenset(collected)
        elif isinstance(node, sx.Plus):
            total = set()
            frontier = ev(node.child, items)
            while frontier:
                fresh = frontier - total
                total |= fresh
                frontier = ev(node.child, frozenset(fresh)) if fresh else frozenset()
            result = frozenset(total)
        else:
            raise TypeError(f"not a regex node: {node!r}")
        spend(len(result))
        return result

    start = frozenset([("", ("",) * len(order))])
    return {out for out, _ in ev(ast, start)}


def enumerate_language(ast: sx.RegexAst, max_word_len: int, alphabet=None,
                       cap: int = 1_000_000) -> set:
    """Words of L(α) up to ``max_word_len`` via the naive automaton."""
    from .tmfa import bounded_language, compile_naive

    return bounded_language(compile_naive(ast, alphabet), max_word_len, cap=cap)
