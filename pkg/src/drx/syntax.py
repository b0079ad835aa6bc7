"""Regex AST, parser, printer and structural predicates.

Concrete syntax::

    regex := alt
    alt   := cat ('|' cat)*
    cat   := rep+
    rep   := atom ('+' | '*')*
    atom  := CHAR | '\\' ANY | '()' | '(' alt ')' | '{' NAME ':' alt '}' | '&' NAME | '#'

``()`` is the empty word, ``#`` the empty language (only as the whole regex),
``{x:...}`` binds ``x`` and ``&x`` recalls it.  Whitespace outside escapes is
ignored.  ``a*`` is sugar for ``(()|a+)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import RegexSyntaxError

RESERVED = frozenset("(){}|+*&\\:#")
NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NAME_CHARS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_")


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Terminal:
    symbol: str


@dataclass(frozen=True)
class Reference:
    name: str


@dataclass(frozen=True)
class Concat:
    left: "RegexAst"
    right: "RegexAst"


@dataclass(frozen=True)
class Disjunction:
    left: "RegexAst"
    right: "RegexAst"


@dataclass(frozen=True)
class Plus:
    child: "RegexAst"


@dataclass(frozen=True)
class Binding:
    name: str
    child: "RegexAst"


RegexAst = Union[Empty, Epsilon, Terminal, Reference, Concat, Disjunction, Plus, Binding]


# ---------------------------------------------------------------- builders

def star(child: RegexAst) -> RegexAst:
    return Disjunction(Epsilon(), Plus(child))


def is_star(node: RegexAst) -> bool:
    return isinstance(node, Disjunction) and node.left == Epsilon() and isinstance(node.right, Plus)


def concat(*parts: RegexAst) -> RegexAst:
    """Right-nested concatenation; no parts gives ε."""
    if not parts:
        return Epsilon()
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = Concat(part, result)
    return result


def disjunction(*parts: RegexAst) -> RegexAst:
    if not parts:
        raise ValueError("disjunction needs at least one alternative")
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = Disjunction(part, result)
    return result


def word(text: str) -> RegexAst:
    return concat(*(Terminal(ch) for ch in text))


def power(node: RegexAst, times: int) -> RegexAst:
    return concat(*([node] * times))


# ---------------------------------------------------------------- traversal

def iter_nodes(ast: RegexAst) -> Iterator[RegexAst]:
    """Pre-order, left to right."""
    stack = [ast]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Concat, Disjunction)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Plus, Binding)):
            stack.append(node.child)


def variables(ast: RegexAst) -> frozenset:
    return frozenset(
        n.name for n in iter_nodes(ast) if isinstance(n, (Binding, Reference))
    )


def variable_order(ast: RegexAst) -> tuple:
    """Bound variables by first binding, then reference-only variables by first use."""
    bound, referenced = [], []
    for node in iter_nodes(ast):
        if isinstance(node, Binding) and node.name not in bound:
            bound.append(node.name)
        elif isinstance(node, Reference) and node.name not in referenced:
            referenced.append(node.name)
    return tuple(bound) + tuple(n for n in referenced if n not in bound)


def terminals(ast: RegexAst) -> tuple:
    """Sorted terminal symbols; the inferred alphabet."""
    return tuple(sorted({n.symbol for n in iter_nodes(ast) if isinstance(n, Terminal)}))


def occurrence_count(ast: RegexAst) -> int:
    return sum(isinstance(n, (Terminal, Reference)) for n in iter_nodes(ast))


def is_vstar_free(ast: RegexAst) -> bool:
    for node in iter_nodes(ast):
        if isinstance(node, Plus) and variables(node.child):
            return False
    return True


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        raise RegexSyntaxError(message, self.pos if pos is None else pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else None

    def expect(self, ch):
        if self.peek() != ch:
            found = "end of input" if self.peek() is None else repr(self.peek())
            self.error(f"expected {ch!r}, found {found}")
        self.pos += 1

    def name(self):
        self.skip_ws()
        match = NAME_RE.match(self.text, self.pos)
        if not match:
            self.error("expected a variable name")
        self.pos = match.end()
        return match.group()

    def alt(self):
        node = self.cat()
        parts = [node]
        while self.peek() == "|":
            self.pos += 1
            parts.append(self.cat())
        return disjunction(*parts)

    def cat(self):
        parts = []
        while True:
            ch = self.peek()
            if ch is None or ch in "|)}":
                break
            parts.append(self.rep())
        if not parts:
            self.error("expected an expression")
        return concat(*parts)

    def rep(self):
        node = self.atom()
        while self.peek() in ("+", "*"):
            node = Plus(node) if self.text[self.pos] == "+" else star(node)
            self.pos += 1
        return node

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "\\":
            if self.pos + 1 >= len(self.text):
                self.error("dangling escape at end of input")
            esc = self.text[self.pos + 1]
            if esc not in RESERVED and not esc.isspace():
                self.error(f"unknown escape \\{esc}")
            self.pos += 2
            return Terminal(esc)
        if ch == "(":
            self.pos += 1
            if self.peek() == ")":
                self.pos += 1
                return Epsilon()
            node = self.alt()
            self.expect(")")
            return node
        if ch == "{":
            self.pos += 1
            name = self.name()
            self.expect(":")
            child = self.alt()
            self.expect("}")
            if name in variables(child):
                inner = {n.name for n in iter_nodes(child) if isinstance(n, Binding)}
                what = "rebinding" if name in inner else "reference"
                self.error(f"{what} of {name} inside its own binding", start)
            return Binding(name, child)
        if ch == "&":
            self.pos += 1
            return Reference(self.name())
        if ch == "#":
            self.error("'#' (empty language) is only allowed as the entire regex")
        if ch in ("+", "*"):
            self.error(f"nothing to repeat before {ch!r}")
        if ch in RESERVED:
            self.error(f"unexpected {ch!r}")
        self.pos += 1
        return Terminal(ch)


def parse(text: str) -> RegexAst:
    """Parse regex text; raises RegexSyntaxError with a position on failure."""
    if text.strip() == "#":
        return Empty()
    parser = _Parser(text)
    node = parser.alt()
    if parser.peek() is not None:
        parser.error(f"unexpected {parser.peek()!r}")
    return node


# ---------------------------------------------------------------- printer

_ALT, _CAT, _REP, _ATOM = range(4)


def _level(node):
    if isinstance(node, Disjunction):
        return _REP if is_star(node) else _ALT
    if isinstance(node, Concat):
        return _CAT
    if isinstance(node, Plus):
        return _REP
    return _ATOM


def _escape(symbol):
    return "\\" + symbol if symbol in RESERVED or symbol.isspace() else symbol


def _tokens(node, need):
    if _level(node) < need:
        return ["("] + _tokens(node, _ALT) + [")"]
    if isinstance(node, Empty):
        return ["#"]
    if isinstance(node, Epsilon):
        return ["()"]
    if isinstance(node, Terminal):
        return [_escape(node.symbol)]
    if isinstance(node, Reference):
        return ["&" + node.name]
    if isinstance(node, Binding):
        return ["{" + node.name + ":"] + _tokens(node.child, _ALT) + ["}"]
    if isinstance(node, Plus):
        return _tokens(node.child, _REP) + ["+"]
    if isinstance(node, Concat):
        return _tokens(node.left, _REP) + _tokens(node.right, _CAT)
    if is_star(node):
        return _tokens(node.right.child, _REP) + ["*"]
    return _tokens(node.left, _CAT) + ["|"] + _tokens(node.right, _ALT)


def to_text(ast: RegexAst) -> str:
    """Render an AST so that ``parse(to_text(ast)) == ast``."""
    out = []
    prev = ""
    for tok in _tokens(ast, _ALT):
        if prev.startswith("&") and tok[0] in _NAME_CHARS:
            out.append(" ")
        out.append(tok)
        prev = tok
    return "".join(out)
