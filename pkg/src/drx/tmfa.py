"""Memory automata with a trap state.

Each transition carries a label (a character, ε, or the recall of memory i)
and one instruction per memory:

* ``o`` open: clear the memory and start recording,
* ``c`` close: stop recording and keep the content,
* ``r`` reset: clear the memory and leave it closed,
* ``d`` leave it as it is.

Instructions are applied first, then the consumed factor is appended to
every memory that is open afterwards.  A recall that does not match the
remaining input sends the run to the trap, which consumes everything and is
either accepting or rejecting.

Memory indices are 0-based in the library and 1-based in JSON and DOT output.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Optional

from . import refsem
from . import syntax as sx
from .errors import PreconditionError, ResourceLimitError

INSTRUCTIONS = ("o", "c", "r", "d")
CHAR, EPS, RECALL = "char", "eps", "recall"
DEFAULT_CONFIG_CAP = 1_000_000
DEFAULT_STATE_CAP = 250_000


@dataclass(frozen=True, order=True)
class Label:
    kind: str
    value: object = None

    def __str__(self):
        if self.kind == CHAR:
            return str(self.value)
        if self.kind == EPS:
            return "ε"
        return f"&{self.value + 1}"


EPSILON = Label(EPS)


def char_label(a: str) -> Label:
    return Label(CHAR, a)


def recall_label(i: int) -> Label:
    return Label(RECALL, i)


@dataclass(frozen=True)
class Transition:
    source: int
    label: Label
    target: int
    actions: tuple

    def sort_key(self):
        kind = {CHAR: 0, RECALL: 1, EPS: 2}[self.label.kind]
        value = "" if self.label.value is None else str(self.label.value)
        return (self.source, kind, value, self.target, self.actions)


@dataclass(frozen=True)
class Tmfa:
    num_states: int
    alphabet: tuple
    num_memories: int
    initial: int
    finals: frozenset
    trap: int
    trap_accepting: bool
    transitions: tuple
    memory_names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "finals", frozenset(self.finals))
        unique = {t: None for t in self.transitions}
        object.__setattr__(self, "transitions", tuple(sorted(unique, key=Transition.sort_key)))
        self._validate()

    def _validate(self):
        n, k = self.num_states, self.num_memories
        for q in (self.initial, self.trap, *self.finals):
            if not 0 <= q < n:
                raise PreconditionError(f"state {q} out of range 0..{n - 1}")
        if self.trap in self.finals:
            raise PreconditionError("the trap's acceptance is set by trap_accepting, not finals")
        alphabet = set(self.alphabet)
        for t in self.transitions:
            if not (0 <= t.source < n and 0 <= t.target < n):
                raise PreconditionError(f"transition {t} uses a state out of range")
            if t.source == self.trap:
                raise PreconditionError("the trap's self-loops are implicit; no transitions may leave it")
            if len(t.actions) != k or any(a not in INSTRUCTIONS for a in t.actions):
                raise PreconditionError(f"transition {t} needs {k} instructions from o,c,r,d")
            if t.label.kind == CHAR and t.label.value not in alphabet:
                raise PreconditionError(f"symbol {t.label.value!r} is not in the alphabet")
            if t.label.kind == RECALL:
                i = t.label.value
                if not (isinstance(i, int) and 0 <= i < k):
                    raise PreconditionError(f"recall of unknown memory {i}")
                if t.actions[i] not in ("c", "r"):
                    raise PreconditionError("a recall must close (or reset) the recalled memory")

    # ------------------------------------------------------------ views

    @cached_property
    def outgoing(self) -> tuple:
        out = [[] for _ in range(self.num_states)]
        for t in self.transitions:
            out[t.source].append(t)
        return tuple(tuple(ts) for ts in out)

    def identity(self) -> tuple:
        return ("d",) * self.num_memories

    def names(self) -> tuple:
        if len(self.memory_names) == self.num_memories:
            return self.memory_names
        return tuple(str(i + 1) for i in range(self.num_memories))

    def with_trap_accepting(self, accepting: bool) -> "Tmfa":
        return Tmfa(self.num_states, self.alphabet, self.num_memories, self.initial, self.finals,
                    self.trap, accepting, self.transitions, self.memory_names)

    def with_alphabet(self, alphabet: Iterable[str]) -> "Tmfa":
        return Tmfa(self.num_states, tuple(sorted(set(alphabet) | set(self.alphabet))),
                    self.num_memories, self.initial, self.finals, self.trap,
                    self.trap_accepting, self.transitions, self.memory_names)


class TmfaBuilder:
    """Collects states under arbitrary hashable keys and numbers them densely.

    States are numbered in order of first mention, so a deterministic
    worklist gives reproducible ids.  The trap gets the last id.
    """

    def __init__(self, alphabet, num_memories, memory_names=()):
        self.alphabet = tuple(alphabet)
        self.num_memories = num_memories
        self.memory_names = tuple(memory_names)
        self.ids = {}
        self.keys = []
        self.finals = set()
        self.edges = []
        self.initial_key = None
        self.trap_accepting = False
        self.trap_key = ("__trap__",)

    def state(self, key: Hashable) -> int:
        if key not in self.ids:
            self.ids[key] = len(self.keys)
            self.keys.append(key)
        return self.ids[key]

    def add(self, src_key, label: Label, dst_key, actions=None):
        if actions is None:
            actions = ("d",) * self.num_memories
        self.edges.append((src_key, label, dst_key, tuple(actions)))

    def build(self) -> Tmfa:
        order = [k for k in self.keys if k != self.trap_key]
        for src, _, dst, _ in self.edges:
            for key in (src, dst):
                if key != self.trap_key and key not in self.ids:
                    self.state(key)
                    order.append(key)
        if self.initial_key is not None and self.initial_key not in self.ids:
            self.state(self.initial_key)
            order.append(self.initial_key)
        ids = {key: i for i, key in enumerate(order)}
        trap = len(order)
        ids[self.trap_key] = trap
        transitions = [Transition(ids[s], label, ids[d], acts) for s, label, d, acts in self.edges]
        return Tmfa(
            num_states=trap + 1,
            alphabet=self.alphabet,
            num_memories=self.num_memories,
            initial=ids[self.initial_key],
            finals=frozenset(ids[k] for k in self.finals if k != self.trap_key),
            trap=trap,
            trap_accepting=self.trap_accepting,
            transitions=tuple(transitions),
            memory_names=self.memory_names,
        )


# ---------------------------------------------------------------- configurations
#
# A memory is a pair (start, end) of offsets into the input; end == OPEN marks
# a memory that is recording, whose content runs up to the current position.

OPEN = -1
EMPTY_MEMORY = (0, 0)


def apply_actions(mems: tuple, actions: tuple, pos: int) -> tuple:
    out = list(mems)
    for i, act in enumerate(actions):
        if act == "d":
            continue
        if act == "o":
            out[i] = (pos, OPEN)
        elif act == "c":
            if out[i][1] == OPEN:
                out[i] = (out[i][0], pos)
        else:
            out[i] = (pos, pos)
    return tuple(out)


def memory_content(mems: tuple, i: int, w: str, pos: int) -> str:
    start, end = mems[i]
    return w[start:(pos if end == OPEN else end)]


@dataclass(frozen=True)
class Configuration:
    state: int
    pos: int
    memories: tuple

    def contents(self, w: str) -> tuple:
        return tuple(memory_content(self.memories, i, w, self.pos) for i in range(len(self.memories)))

    def statuses(self) -> tuple:
        return tuple("open" if end == OPEN else "closed" for _, end in self.memories)


def initial_configuration(m: Tmfa) -> Configuration:
    return Configuration(m.initial, 0, (EMPTY_MEMORY,) * m.num_memories)


def _lcp(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def step(m: Tmfa, c: Configuration, w: str) -> set:
    """All successors of ``c`` on input ``w`` (one step of the run relation)."""
    succ = set()
    if c.state == m.trap:
        if c.pos < len(w):
            succ.add(Configuration(m.trap, c.pos + 1, c.memories))
        succ.add(c)
        return succ
    for t in m.outgoing[c.state]:
        kind = t.label.kind
        if kind == CHAR:
            if c.pos < len(w) and w[c.pos] == t.label.value:
                succ.add(Configuration(t.target, c.pos + 1, apply_actions(c.memories, t.actions, c.pos)))
        elif kind == EPS:
            succ.add(Configuration(t.target, c.pos, apply_actions(c.memories, t.actions, c.pos)))
        else:
            mems = apply_actions(c.memories, t.actions, c.pos)
            content = memory_content(mems, t.label.value, w, c.pos)
            if w.startswith(content, c.pos):
                succ.add(Configuration(t.target, c.pos + len(content), mems))
            else:
                common = _lcp(content, w[c.pos:])
                succ.add(Configuration(m.trap, c.pos + common, c.memories))
    return succ


def member_oracle(m: Tmfa, w: str, cap: int = DEFAULT_CONFIG_CAP) -> bool:
    """Exhaustive breadth-first search over configurations."""
    n = len(w)
    finals, trap, out = m.finals, m.trap, m.outgoing
    start = (m.initial, 0, (EMPTY_MEMORY,) * m.num_memories)
    seen = {start}
    queue = deque([start])
    while queue:
        state, pos, mems = queue.popleft()
        if state == trap:
            if m.trap_accepting:
                return True
            continue
        if pos == n and state in finals:
            return True
        for t in out[state]:
            kind = t.label.kind
            if kind == CHAR:
                if pos < n and w[pos] == t.label.value:
                    nxt = (t.target, pos + 1, apply_actions(mems, t.actions, pos))
                else:
                    continue
            elif kind == EPS:
                nxt = (t.target, pos, apply_actions(mems, t.actions, pos))
            else:
                new = apply_actions(mems, t.actions, pos)
                content = memory_content(new, t.label.value, w, pos)
                if w.startswith(content, pos):
                    nxt = (t.target, pos + len(content), new)
                elif m.trap_accepting:
                    return True
                else:
                    continue
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > cap:
                    raise ResourceLimitError(f"membership search exceeded {cap} configurations")
                queue.append(nxt)
    return False


def bounded_language(m: Tmfa, max_len: int, alphabet=None, cap: int = DEFAULT_CONFIG_CAP) -> set:
    """Every accepted word of length at most ``max_len``.

    Runs the automaton generatively: consuming transitions choose the next
    symbol, recalls emit the memory content, and (with an accepting trap)
    every way of diverging from a recalled factor is added together with all
    its continuations.  Equivalent to calling ``member_oracle`` on every word
    of Σ^≤max_len, without enumerating Σ^≤max_len.
    """
    sigma = tuple(sorted(set(alphabet if alphabet is not None else m.alphabet)))
    found = set()

    def add_all_extensions(prefix):
        for extra in range(max_len - len(prefix) + 1):
            for tail in itertools.product(sigma, repeat=extra):
                found.add(prefix + "".join(tail))

    start = (m.initial, "", (EMPTY_MEMORY,) * m.num_memories)
    seen = {start}
    queue = deque([start])
    trap_prefixes = set()
    while queue:
        state, w, mems = queue.popleft()
        if state in m.finals:
            found.add(w)
        pos = len(w)
        for t in m.outgoing[state]:
            kind = t.label.kind
            new = apply_actions(mems, t.actions, pos)
            if t.target == m.trap:
                if m.trap_accepting:
                    # a recall into the trap ends there whether or not it matches
                    if kind != CHAR:
                        trap_prefixes.add(w)
                    elif pos < max_len:
                        trap_prefixes.add(w + t.label.value)
                continue
            if kind == CHAR:
                if pos >= max_len:
                    continue
                nxts = [(t.target, w + t.label.value, new)]
            elif kind == EPS:
                nxts = [(t.target, w, new)]
            else:
                content = memory_content(new, t.label.value, w, pos)
                if m.trap_accepting:
                    for i, expected in enumerate(content):
                        diverge = w + content[:i]
                        if len(diverge) > max_len:
                            break
                        # input ends inside the factor: only this exact word fails there
                        found.add(diverge)
                        _add_divergences(trap_prefixes, diverge, expected, sigma, max_len)
                if pos + len(content) > max_len:
                    continue
                nxts = [(t.target, w + content, new)]
            for nxt in nxts:
                if nxt not in seen:
                    seen.add(nxt)
                    if len(seen) > cap:
                        raise ResourceLimitError(f"language enumeration exceeded {cap} configurations")
                    queue.append(nxt)
    for prefix in trap_prefixes:
        add_all_extensions(prefix)
    return found


def _add_divergences(prefixes, diverge, expected, sigma, max_len):
    # input continues with a symbol other than the expected one
    if len(diverge) < max_len:
        for a in sigma:
            if a != expected:
                prefixes.add(diverge + a)


# ---------------------------------------------------------------- naive compilation

def compile_naive(ast: sx.RegexAst, alphabet=None) -> Tmfa:
    """Thompson automaton of the ref-regex; brackets become open/close ε-moves."""
    order = sx.variable_order(ast)
    index = {name: i for i, name in enumerate(order)}
    k = len(order)
    sigma = tuple(sorted(set(alphabet or ()) | set(sx.terminals(ast))))
    nfa = refsem.thompson(refsem.to_ref_regex(ast))
    transitions = []
    for src, sym, dst in nfa.edges:
        actions = ["d"] * k
        if sym is None:
            label = EPSILON
        elif sym.kind == refsem.CHAR:
            label = char_label(sym.value)
        elif sym.kind == refsem.VAR:
            label = recall_label(index[sym.value])
            actions[index[sym.value]] = "c"
        else:
            label = EPSILON
            actions[index[sym.value]] = "o" if sym.kind == refsem.OPEN else "c"
        transitions.append(Transition(src, label, dst, tuple(actions)))
    trap = nfa.num_states
    return Tmfa(trap + 1, sigma, k, nfa.start, frozenset([nfa.accept]), trap, False,
                tuple(transitions), order)


# ---------------------------------------------------------------- structural predicates

def is_deterministic(m: Tmfa) -> bool:
    for q, ts in enumerate(m.outgoing):
        if q == m.trap or not ts:
            continue
        if any(t.label.kind != CHAR for t in ts):
            if len(ts) > 1:
                return False
            continue
        symbols = [t.label.value for t in ts]
        if len(symbols) != len(set(symbols)):
            return False
    return True


def is_memory_cycle_free(m: Tmfa) -> bool:
    import networkx as nx

    graph = nx.DiGraph()
    graph.add_nodes_from(range(m.num_states))
    for t in m.transitions:
        graph.add_edge(t.source, t.target)
    component = {}
    for i, scc in enumerate(nx.strongly_connected_components(graph)):
        for q in scc:
            component[q] = i
    for t in m.transitions:
        if component[t.source] != component[t.target]:
            continue
        if t.label.kind == RECALL or any(a != "d" for a in t.actions):
            return False
    return True


# ---------------------------------------------------------------- normal form

def _emit_instruction(status, act):
    """Normal-form ε-steps for one instruction, and the resulting (open, empty)."""
    is_open, empty = status
    if act == "o":
        return (["c", "o"] if is_open else ["o"]), (True, True)
    if act == "c":
        return (["c"] if is_open else []), (False, empty)
    if act == "r":
        return (["c", "o", "c"] if is_open else ["o", "c"]), (False, True)
    return [], status


def normalize(m: Tmfa, cap: int = DEFAULT_STATE_CAP) -> Tmfa:
    """Equivalent automaton in normal form.

    States are paired with the status and emptiness of every memory, so that
    recalls of empty memories turn into ε-moves, opening an open memory
    becomes close-then-open, and resets become close/open/close.  Each
    remaining instruction gets its own ε-transition; consuming transitions
    carry no instructions except the close on a recalled memory.
    """
    k = m.num_memories
    b = TmfaBuilder(m.alphabet, k, m.memory_names)
    b.trap_accepting = m.trap_accepting
    start = ("q", m.initial, ((False, True),) * k)
    b.initial_key = start
    b.state(start)
    queue = deque([start])
    seen = {start}

    def target_key(q, cfg):
        return b.trap_key if q == m.trap else ("q", q, cfg)

    def visit(key):
        if key != b.trap_key and key not in seen:
            seen.add(key)
            b.state(key)
            if len(seen) > cap:
                raise ResourceLimitError(f"normal form exceeded {cap} states")
            queue.append(key)

    while queue:
        key = queue.popleft()
        _, q, cfg = key
        if q in m.finals:
            b.finals.add(key)
        for ti, t in enumerate(m.outgoing[q]):
            steps = []
            status = list(cfg)
            for i, act in enumerate(t.actions):
                emitted, status[i] = _emit_instruction(status[i], act)
                steps.extend((i, e) for e in emitted)
            kind = t.label.kind
            if kind == CHAR:
                final_label = t.label
                final_actions = None
                status = [(o, e and not o) for o, e in status]
            elif kind == RECALL:
                r = t.label.value
                if status[r][1]:
                    final_label, final_actions = EPSILON, None
                else:
                    final_label = t.label
                    final_actions = tuple("c" if i == r else "d" for i in range(k))
                    status = [(o, e and not o) for o, e in status]
            else:
                final_label, final_actions = EPSILON, None
            dst = target_key(t.target, tuple(status))
            visit(dst)
            node = key
            for n, (i, act) in enumerate(steps):
                acts = tuple(act if j == i else "d" for j in range(k))
                last = n == len(steps) - 1 and kind == EPS
                nxt = dst if last else ("mid", key, ti, n)
                b.add(node, EPSILON, nxt, acts)
                node = nxt
            if not (steps and kind == EPS):
                b.add(node, final_label, dst, final_actions)
    return b.build()


def is_normal_form(m: Tmfa) -> bool:
    """Structural part of the normal form (instruction placement only)."""
    for t in m.transitions:
        non_d = [i for i, a in enumerate(t.actions) if a != "d"]
        if t.label.kind == EPS:
            if len(non_d) > 1 or any(t.actions[i] == "r" for i in non_d):
                return False
        elif t.label.kind == CHAR:
            if non_d:
                return False
        elif non_d != [t.label.value] or t.actions[t.label.value] != "c":
            return False
    return True


# ---------------------------------------------------------------- accepting trap to rejecting trap

def acc_to_rej(m: Tmfa, cap: int = DEFAULT_STATE_CAP) -> Tmfa:
    """Equivalent automaton whose trap rejects.

    Memory i is split into halves (i,1) and (i,2) (new indices 2i and 2i+1).
    While recording, the run may guess the point where (i,2) starts, and the
    control state remembers the first symbol x_i of (i,2).  A recall of i
    may stop after (i,1) and jump to an accepting sink q_t when the next
    input symbol differs from x_i, or when the input ends there; that is
    precisely a recall failure of the original automaton.
    """
    if not m.trap_accepting:
        return m
    n = normalize(m, cap)
    k = n.num_memories
    names = tuple(f"{name}.{half}" for name in n.names() for half in (1, 2))
    b = TmfaBuilder(n.alphabet, 2 * k, names)
    sink = ("sink",)

    def vec(pairs):
        out = ["d"] * (2 * k)
        for idx, a in pairs:
            out[idx] = a
        return tuple(out)

    start = ("s", n.initial, (0,) * k, ("",) * k)
    b.initial_key = start
    b.state(start)
    seen = {start}
    queue = deque([start])
    sink_used = False

    def visit(key):
        if key not in seen:
            seen.add(key)
            b.state(key)
            if len(seen) > cap:
                raise ResourceLimitError(f"acc-to-rej conversion exceeded {cap} states")
            queue.append(key)

    while queue:
        key = queue.popleft()
        if key[0] == "check":
            b.finals.add(key)
            expected = key[1]
            for a in n.alphabet:
                if a != expected:
                    b.add(key, char_label(a), sink)
                    sink_used = True
            continue
        _, q, st, xs = key
        if q in n.finals:
            b.finals.add(key)
        for ti, t in enumerate(n.outgoing[q]):
            kind = t.label.kind
            if t.target == n.trap:
                # reaching the accepting trap accepts, whatever the recall outcome
                sink_used = True
                b.add(key, t.label if kind == CHAR else EPSILON, sink)
                continue
            if kind == EPS:
                new_st, new_xs, pairs = list(st), list(xs), []
                for i, a in enumerate(t.actions):
                    if a == "o":
                        pairs += [(2 * i, "o"), (2 * i + 1, "r")]
                        new_st[i], new_xs[i] = 1, ""
                    elif a == "c":
                        pairs += [(2 * i, "c"), (2 * i + 1, "c")]
                        new_st[i] = 0
                    elif a == "r":
                        pairs += [(2 * i, "r"), (2 * i + 1, "r")]
                        new_st[i], new_xs[i] = 0, ""
                dst = ("s", t.target, tuple(new_st), tuple(new_xs))
                visit(dst)
                b.add(key, EPSILON, dst, vec(pairs))
            elif kind == CHAR:
                a = t.label.value
                first_halves = [i for i in range(k) if st[i] == 1]
                for r in range(len(first_halves) + 1):
                    for switch in itertools.combinations(first_halves, r):
                        new_st, new_xs, pairs = list(st), list(xs), []
                        for i in switch:
                            pairs += [(2 * i, "c"), (2 * i + 1, "o")]
                            new_st[i], new_xs[i] = 2, a
                        dst = ("s", t.target, tuple(new_st), tuple(new_xs))
                        visit(dst)
                        b.add(key, t.label, dst, vec(pairs))
            else:
                r_mem = t.label.value
                closed_st = list(st)
                closed_st[r_mem] = 0
                closing = [(2 * r_mem, "c"), (2 * r_mem + 1, "c")]
                middle = ("mid", key, ti)
                b.add(key, recall_label(2 * r_mem), middle, vec(closing))
                x = xs[r_mem]
                if x:
                    check = ("check", x)
                    visit(check)
                    b.add(key, recall_label(2 * r_mem), check, vec(closing))
                first_halves = [i for i in range(k) if closed_st[i] == 1] if x else []
                for r in range(len(first_halves) + 1):
                    for switch in itertools.combinations(first_halves, r):
                        new_st, new_xs = list(closed_st), list(xs)
                        pairs = [(2 * r_mem + 1, "c")]
                        for i in switch:
                            pairs += [(2 * i, "c"), (2 * i + 1, "o")]
                            new_st[i], new_xs[i] = 2, x
                        dst = ("s", t.target, tuple(new_st), tuple(new_xs))
                        visit(dst)
                        b.add(middle, recall_label(2 * r_mem + 1), dst, vec(pairs))
    if sink_used:
        b.finals.add(sink)
        for a in n.alphabet:
            b.add(sink, char_label(a), sink)
    return b.build()


# ---------------------------------------------------------------- JSON

def to_json_dict(m: Tmfa) -> dict:
    transitions = []
    for t in m.transitions:
        if t.label.kind == CHAR:
            label = {"kind": "char", "value": t.label.value}
        elif t.label.kind == EPS:
            label = {"kind": "eps", "value": None}
        else:
            label = {"kind": "recall", "value": t.label.value + 1}
        transitions.append({"from": t.source, "label": label, "to": t.target,
                            "actions": list(t.actions)})
    return {
        "states": m.num_states,
        "alphabet": list(m.alphabet),
        "memories": m.num_memories,
        "initial": m.initial,
        "finals": sorted(m.finals),
        "trap": {"id": m.trap, "accepting": m.trap_accepting},
        "transitions": transitions,
    }


def to_json(m: Tmfa, indent: Optional[int] = 2) -> str:
    return json.dumps(to_json_dict(m), indent=indent, ensure_ascii=False)


def from_json_dict(data: dict) -> Tmfa:
    try:
        k = data["memories"]
        transitions = []
        for t in data["transitions"]:
            kind, value = t["label"]["kind"], t["label"].get("value")
            if kind == "char":
                label = char_label(value)
            elif kind == "eps":
                label = EPSILON
            elif kind == "recall":
                label = recall_label(int(value) - 1)
            else:
                raise PreconditionError(f"unknown label kind {kind!r}")
            transitions.append(Transition(t["from"], label, t["to"], tuple(t["actions"])))
        return Tmfa(
            num_states=data["states"],
            alphabet=tuple(data["alphabet"]),
            num_memories=k,
            initial=data["initial"],
            finals=frozenset(data["finals"]),
            trap=data["trap"]["id"],
            trap_accepting=bool(data["trap"]["accepting"]),
            transitions=tuple(transitions),
        )
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed automaton JSON: {exc}") from exc


def from_json(text: str) -> Tmfa:
    return from_json_dict(json.loads(text))
