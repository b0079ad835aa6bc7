"""Memory occurrence graphs: Glushkov-style compilation of regexes with back-references.

Every terminal or reference occurrence becomes a node; edges carry the
bracket symbols passed between two occurrences.  The graph decides
determinism directly and converts to an automaton with one state per
occurrence, plus the source and the trap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from . import refsem
from . import syntax as sx
from .dtmfa import compose
from .errors import PreconditionError, ResourceLimitError
from .refsem import CLOSE, OPEN, RefSymbol, Symbol
from .tmfa import Tmfa, Transition, char_label, recall_label

SRC = 0
SNK = -1
DEFAULT_EDGE_CAP = 200_000


# ---------------------------------------------------------------- net actions

def net_action(nu: Iterable[RefSymbol]) -> dict:
    """Variable -> the single instruction equivalent to the bracket word ``nu``.

    Variables not mentioned map to ``d`` and are left out of the dict.
    """
    result = {}
    for sym in nu:
        if not sym.is_bracket():
            raise PreconditionError(f"{sym} is not a bracket symbol")
        x = sym.value
        if sym.kind == OPEN:
            result[x] = "o"
        else:
            result[x] = "r" if result.get(x) in ("o", "r") else "c"
    return result


def action_vector(nu: Iterable[RefSymbol], order: tuple) -> tuple:
    acts = net_action(nu)
    return tuple(acts.get(x, "d") for x in order)


_PIECES = {"o": (OPEN,), "c": (CLOSE,), "r": (OPEN, CLOSE), "d": ()}


def gmin_of_vector(vector: tuple, order: tuple) -> tuple:
    return tuple(RefSymbol(kind, x) for x, act in zip(order, vector) for kind in _PIECES[act])


def gmin(nu: Iterable[RefSymbol], order: tuple = None) -> tuple:
    """Shortest bracket word with the same net action; variables in ``order``."""
    nu = tuple(nu)
    if order is None:
        order = tuple(dict.fromkeys(s.value for s in nu))
    return gmin_of_vector(action_vector(nu, order), order)


# ---------------------------------------------------------------- graph

@dataclass(frozen=True)
class Edge:
    source: int
    label: tuple
    target: int

    def label_text(self) -> str:
        return refsem.format_refword(self.label)


@dataclass(frozen=True)
class MemoryOccurrenceGraph:
    """``occurrences`` maps each mark to its terminal or reference symbol."""

    occurrences: tuple
    edges: frozenset
    variables: tuple
    alphabet: tuple

    def symbol(self, node: int) -> RefSymbol:
        return dict(self.occurrences)[node]

    def node_order(self) -> tuple:
        return (SRC,) + tuple(mark for mark, _ in self.occurrences)

    def out_edges(self, node: int) -> list:
        return sorted((e for e in self.edges if e.source == node), key=_edge_key)


def node_name(node: int, graph: MemoryOccurrenceGraph = None) -> str:
    if node == SRC:
        return "src"
    if node == SNK:
        return "snk"
    if graph is None:
        return str(node)
    return str(graph.symbol(node))


def _edge_key(e: Edge):
    target = (1, 0) if e.target == SNK else (0, e.target)
    return (e.source, target, tuple(str(s) for s in e.label))


class _EarlyViolation(Exception):
    def __init__(self, witness):
        self.witness = witness


def build_graph(ast: sx.RegexAst, edge_cap: int = DEFAULT_EDGE_CAP,
                stop_at_violation: bool = False) -> MemoryOccurrenceGraph:
    """Memory occurrence graph of ``ast``.

    With ``stop_at_violation``, construction stops at the first violation of
    conditions 1-3 at an occurrence node of a subgraph; such edges are copied
    unchanged into every enclosing graph, so the violation is final.  The
    witness is raised inside ``_EarlyViolation``.
    """
    order = sx.variable_order(ast)
    alphabet = sx.terminals(ast)
    if isinstance(ast, sx.Empty):
        return MemoryOccurrenceGraph((), frozenset(), order, alphabet)
    marked = refsem.to_ref_regex(ast, marked=True)
    occurrences = {}
    count = [0]

    def charge(edges):
        count[0] += len(edges)
        if stop_at_violation:
            _check_internal(edges, occurrences)
        if count[0] > edge_cap:
            raise ResourceLimitError(f"occurrence graph exceeded {edge_cap} edges")
        return edges

    def build(node):
        if isinstance(node, sx.Epsilon):
            return {(SRC, (), SNK)}
        if isinstance(node, Symbol):
            sym = node.sym
            if sym.is_bracket():
                return {(SRC, (sym,), SNK)}
            occurrences[sym.mark] = sym
            return {(SRC, (), sym.mark), (sym.mark, (), SNK)}
        if isinstance(node, sx.Disjunction):
            return charge(build(node.left) | build(node.right))
        if isinstance(node, sx.Concat):
            left, right = build(node.left), build(node.right)
            edges = {e for e in left if e[2] != SNK} | {e for e in right if e[0] != SRC}
            outs = [(u, nu) for u, nu, v in left if v == SNK]
            ins = [(nu, v) for u, nu, v in right if u == SRC]
            edges |= {(u, n1 + n2, v) for u, n1 in outs for n2, v in ins}
            return charge(edges)
        if isinstance(node, sx.Plus):
            inner = build(node.child)
            loops = _star_closure([nu for u, nu, v in inner if u == SRC and v == SNK], order)
            outs = [(u, nu) for u, nu, v in inner if v == SNK]
            ins = [(nu, v) for u, nu, v in inner if u == SRC and v != SNK]
            edges = set(inner)
            edges |= {(SRC, hat + nu, v) for hat in loops for nu, v in ins}
            edges |= {(u, nu + hat, SNK) for u, nu in outs for hat in loops}
            edges |= {(u, n1 + hat + n2, v) for u, n1 in outs for hat in loops for n2, v in ins}
            return charge(edges)
        raise TypeError(f"unexpected ref-regex node {node!r}")

    edges = build(marked)
    return MemoryOccurrenceGraph(
        occurrences=tuple(sorted(occurrences.items())),
        edges=frozenset(Edge(u, nu, v) for u, nu, v in edges),
        variables=order,
        alphabet=alphabet,
    )


def _check_internal(edges, occurrences):
    by_source = {}
    for u, nu, v in edges:
        if u != SRC and v != SNK:
            by_source.setdefault(u, []).append(Edge(u, nu, v))
    for u in sorted(by_source):
        out = sorted(by_source[u], key=_edge_key)
        witness = _node_violation(u, out, occurrences)
        if witness is not None:
            raise _EarlyViolation(witness)


def _star_closure(labels, order):
    """gmin renderings of every net action reachable by composing labels (ε included)."""
    generators = {action_vector(nu, order) for nu in labels}
    identity = ("d",) * len(order)
    closure = {identity}
    frontier = [identity]
    while frontier:
        vec = frontier.pop()
        for g in generators:
            nxt = tuple(compose(a, b) for a, b in zip(vec, g))
            if nxt not in closure:
                closure.add(nxt)
                frontier.append(nxt)
    return sorted({gmin_of_vector(v, order) for v in closure}, key=lambda w: [str(s) for s in w])


# ---------------------------------------------------------------- determinism

@dataclass(frozen=True)
class NondeterminismWitness:
    condition: int
    node: int
    edges: tuple

    def describe(self, graph: MemoryOccurrenceGraph = None) -> str:
        parts = [f"{node_name(e.source, graph)} -[{e.label_text()}]-> {node_name(e.target, graph)}"
                 for e in self.edges]
        return f"condition={self.condition} node={node_name(self.node, graph)} edges: " + "; ".join(parts)


@dataclass(frozen=True)
class Deterministic:
    pass


Verdict = Union[Deterministic, NondeterminismWitness]


def _node_violation(node, out, symbols):
    # condition 1: two different occurrences of the same terminal
    by_char = {}
    for e in out:
        sym = symbols.get(e.target)
        if sym is not None and sym.kind == refsem.CHAR:
            by_char.setdefault(sym.value, [])
            if all(f.target != e.target for f in by_char[sym.value]):
                by_char[sym.value].append(e)
    for edges in by_char.values():
        if len(edges) > 1:
            return NondeterminismWitness(1, node, tuple(edges[:2]))
    # condition 2: a reference competing with any other occurrence
    refs = [e for e in out if e.target != SNK and symbols[e.target].kind == refsem.VAR]
    for ref in refs:
        for e in out:
            if e.target != SNK and e.target != ref.target:
                return NondeterminismWitness(2, node, (ref, e))
    # conditions 3 and 4: one successor reached with two different bracket words
    for condition, wanted in ((3, lambda t: t != SNK), (4, lambda t: t == SNK)):
        seen = {}
        for e in out:
            if not wanted(e.target):
                continue
            if e.target in seen:
                return NondeterminismWitness(condition, node, (seen[e.target], e))
            seen[e.target] = e
    return None


def graph_determinism(g: MemoryOccurrenceGraph) -> Verdict:
    symbols = dict(g.occurrences)
    by_source = {}
    for e in g.edges:
        by_source.setdefault(e.source, []).append(e)
    for node in g.node_order():
        out = sorted(by_source.get(node, ()), key=_edge_key)
        witness = _node_violation(node, out, symbols)
        if witness is not None:
            return witness
    return Deterministic()


# ---------------------------------------------------------------- automaton

def graph_to_tmfa(g: MemoryOccurrenceGraph) -> Tmfa:
    """State 0 is src, state i is the i-th occurrence by mark, the trap comes last."""
    marks = [mark for mark, _ in g.occurrences]
    ids = {SRC: 0}
    ids.update({mark: i + 1 for i, mark in enumerate(marks)})
    trap = len(marks) + 1
    index = {x: i for i, x in enumerate(g.variables)}
    symbols = dict(g.occurrences)
    transitions, finals = [], set()
    for e in g.edges:
        if e.target == SNK:
            finals.add(ids[e.source])
            continue
        actions = list(action_vector((s.unmarked() for s in e.label), g.variables))
        sym = symbols[e.target]
        if sym.kind == refsem.CHAR:
            label = char_label(sym.value)
        else:
            i = index[sym.value]
            label = recall_label(i)
            actions[i] = "r" if actions[i] == "r" else "c"
        transitions.append(Transition(ids[e.source], label, ids[e.target], tuple(actions)))
    return Tmfa(trap + 1, g.alphabet, len(g.variables), 0, frozenset(finals), trap, False,
                tuple(transitions), g.variables)


def compile_deterministic(ast: sx.RegexAst, edge_cap: int = DEFAULT_EDGE_CAP):
    """The automaton of a deterministic regex, or the witness of its nondeterminism."""
    try:
        g = build_graph(ast, edge_cap, stop_at_violation=True)
    except _EarlyViolation as stop:
        return stop.witness
    verdict = graph_determinism(g)
    if isinstance(verdict, NondeterminismWitness):
        return verdict
    return graph_to_tmfa(g)


def compile_glushkov(ast: sx.RegexAst, edge_cap: int = DEFAULT_EDGE_CAP) -> Tmfa:
    """The occurrence-graph automaton regardless of determinism."""
    return graph_to_tmfa(build_graph(ast, edge_cap))
