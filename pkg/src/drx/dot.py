"""Graphviz export with stable ids, so that diffs of the output stay meaningful."""

from __future__ import annotations

from .glushkov import SNK, SRC, MemoryOccurrenceGraph, node_name
from .tmfa import Tmfa


def _quote(s: str) -> str:
    return '"{}"'.format(str(s).replace("\\", "\\\\").replace('"', r"\""))


def _instruction_text(actions) -> str:
    """Only the memories that change, 1-based: ``o1 c2``."""
    return " ".join(f"{act}{i + 1}" for i, act in enumerate(actions) if act != "d")


def tmfa_to_dot(m: Tmfa, name: str = "tmfa") -> str:
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for q in range(m.num_states):
        if q == m.trap:
            shape = "doubleoctagon" if m.trap_accepting else "octagon"
            lines.append(f'  q{q} [shape={shape}, label="trap"];')
        else:
            shape = "doublecircle" if q in m.finals else "circle"
            lines.append(f'  q{q} [shape={shape}, label="{q}"];')
    lines.append(f"  __start -> q{m.initial};")
    for t in m.transitions:
        label = str(t.label)
        acts = _instruction_text(t.actions)
        if acts:
            label += " / " + acts
        lines.append(f"  q{t.source} -> q{t.target} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _node_id(node: int) -> str:
    return {SRC: "src", SNK: "snk"}.get(node, f"n{node}")


def graph_to_dot(g: MemoryOccurrenceGraph, name: str = "occurrences") -> str:
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;",
             '  src [shape=box, label="src"];', '  snk [shape=box, label="snk"];']
    for mark, sym in g.occurrences:
        lines.append(f"  n{mark} [shape=circle, label={_quote(node_name(mark, g))}];")
    for node in g.node_order():
        for e in g.out_edges(node):
            lines.append(f"  {_node_id(e.source)} -> {_node_id(e.target)} [label={_quote(e.label_text())}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
