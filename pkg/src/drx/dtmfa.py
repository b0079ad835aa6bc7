"""Deterministic memory automata: ε-removal, completion, complement, matching.

A deterministic automaton has at most one transition per (state, label), and
a state with an ε- or recall transition has no other outgoing transition.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import NotDeterministicError, ResourceLimitError
from .tmfa import (
    CHAR,
    DEFAULT_STATE_CAP,
    EPS,
    EPSILON,
    OPEN,
    RECALL,
    Tmfa,
    TmfaBuilder,
    Transition,
    apply_actions,
    char_label,
    is_deterministic,
)


# ---------------------------------------------------------------- instruction algebra

def compose(x: str, y: str) -> str:
    """The single instruction equivalent to ``x`` followed by ``y`` with no input in between."""
    if y == "d":
        return x
    if y == "c":
        return "r" if x in ("o", "r") else "c"
    return y


def compose_vectors(first: tuple, second: tuple) -> tuple:
    return tuple(compose(x, y) for x, y in zip(first, second))


def compose_all(vectors, k: int) -> tuple:
    result = ("d",) * k
    for vec in vectors:
        result = compose_vectors(result, vec)
    return result


def _require_deterministic(m: Tmfa):
    if not is_deterministic(m):
        raise NotDeterministicError("the automaton is not deterministic")


# ---------------------------------------------------------------- ε-removal

def _follow_epsilons(m: Tmfa, p: int):
    """Walk the ε-chain from p.

    Returns (end, prefix, accepting) where end is the first state without an
    ε-transition, the trap, or None when the chain runs into a cycle.
    """
    prefix = m.identity()
    accepting = p in m.finals
    seen = {p}
    cur = p
    while True:
        ts = m.outgoing[cur]
        if len(ts) != 1 or ts[0].label.kind != EPS:
            return cur, prefix, accepting
        t = ts[0]
        prefix = compose_vectors(prefix, t.actions)
        cur = t.target
        if cur == m.trap:
            return cur, prefix, accepting or m.trap_accepting
        accepting = accepting or cur in m.finals
        if cur in seen:
            return None, prefix, accepting
        seen.add(cur)


def _reachable(m: Tmfa, transitions, initial):
    out = {}
    for t in transitions:
        out.setdefault(t.source, []).append(t.target)
    seen = {initial}
    queue = deque([initial])
    while queue:
        q = queue.popleft()
        for r in out.get(q, ()):
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return seen


def _renumber(m: Tmfa, transitions, finals, initial, trap_accepting=None) -> Tmfa:
    """Keep states reachable from ``initial`` (plus the trap), renumbered in id order."""
    live = _reachable(m, transitions, initial) | {m.trap}
    order = sorted(q for q in live if q != m.trap)
    ids = {q: i for i, q in enumerate(order)}
    ids[m.trap] = len(order)
    kept = [Transition(ids[t.source], t.label, ids[t.target], t.actions)
            for t in transitions if t.source in ids]
    return Tmfa(len(order) + 1, m.alphabet, m.num_memories, ids[initial],
                frozenset(ids[q] for q in finals if q in ids and q != m.trap), ids[m.trap],
                m.trap_accepting if trap_accepting is None else trap_accepting,
                tuple(kept), m.memory_names)


def remove_epsilon(m: Tmfa) -> Tmfa:
    _require_deterministic(m)
    transitions, finals = [], set()
    for p in range(m.num_states):
        if p == m.trap:
            continue
        end, prefix, accepting = _follow_epsilons(m, p)
        if accepting:
            finals.add(p)
        if end is None:
            continue
        if end == m.trap:
            transitions.extend(Transition(p, char_label(a), m.trap, prefix) for a in m.alphabet)
            continue
        for t in m.outgoing[end]:
            transitions.append(Transition(p, t.label, t.target, compose_vectors(prefix, t.actions)))
    return _renumber(m, transitions, finals, m.initial)


# ---------------------------------------------------------------- completion

def complete(m: Tmfa) -> Tmfa:
    """Route every missing symbol of a consuming state to a fresh rejecting sink."""
    _require_deterministic(m)
    sink = m.num_states
    transitions = list(m.transitions)
    used = False
    for q in range(m.num_states):
        if q == m.trap:
            continue
        ts = m.outgoing[q]
        if any(t.label.kind != CHAR for t in ts):
            continue
        present = {t.label.value for t in ts}
        for a in m.alphabet:
            if a not in present:
                transitions.append(Transition(q, char_label(a), sink, m.identity()))
                used = True
    if not used:
        return m
    transitions.extend(Transition(sink, char_label(a), sink, m.identity()) for a in m.alphabet)
    # the trap keeps the last id
    remap = {m.trap: sink, sink: m.trap}

    def rn(q):
        return remap.get(q, q)

    moved = tuple(Transition(rn(t.source), t.label, rn(t.target), t.actions) for t in transitions)
    return Tmfa(m.num_states + 1, m.alphabet, m.num_memories, rn(m.initial),
                frozenset(rn(q) for q in m.finals), sink, m.trap_accepting, moved, m.memory_names)


def is_complete(m: Tmfa) -> bool:
    for q, ts in enumerate(m.outgoing):
        if q == m.trap:
            continue
        if any(t.label.kind != CHAR for t in ts):
            continue
        if {t.label.value for t in ts} != set(m.alphabet):
            return False
    return True


# ---------------------------------------------------------------- complement

def _track_memories(m: Tmfa, cap: int) -> Tmfa:
    """Pair states with per-memory (open, empty) flags; empty recalls become ε."""
    k = m.num_memories
    b = TmfaBuilder(m.alphabet, k, m.memory_names)
    b.trap_accepting = m.trap_accepting
    start = (m.initial, ((False, True),) * k)
    b.initial_key = start
    b.state(start)
    seen = {start}
    queue = deque([start])
    while queue:
        key = queue.popleft()
        q, cfg = key
        if q in m.finals:
            b.finals.add(key)
        for t in m.outgoing[q]:
            status = list(cfg)
            for i, act in enumerate(t.actions):
                is_open, empty = status[i]
                if act == "o":
                    status[i] = (True, True)
                elif act == "c":
                    status[i] = (False, empty)
                elif act == "r":
                    status[i] = (False, True)
            label = t.label
            if label.kind == RECALL and status[label.value][1]:
                label = EPSILON
            if label.kind != EPS:
                status = [(o, e and not o) for o, e in status]
            dst = b.trap_key if t.target == m.trap else (t.target, tuple(status))
            b.add(key, label, dst, t.actions)
            if dst != b.trap_key and dst not in seen:
                seen.add(dst)
                b.state(dst)
                if len(seen) > cap:
                    raise ResourceLimitError(f"complement exceeded {cap} states")
                queue.append(dst)
    return b.build()


def complement(m: Tmfa, cap: int = DEFAULT_STATE_CAP) -> Tmfa:
    """Deterministic automaton for Σ* minus L(m)."""
    from .ldet import l_determinize

    _require_deterministic(m)
    # Moving the first symbol of every memory into the finite control turns each
    # recall of a nonempty buffer into consuming steps.  The recalls that remain
    # sit in states that accept iff the trap does, so a word ending there gets
    # the same verdict from the recall failure as from the state itself.
    buffered = l_determinize(complete(m), 1, cap)
    tracked = _track_memories(complete(buffered), cap)
    # ε-cycles collapse into dead states, so complete once more before toggling
    total = complete(remove_epsilon(tracked))
    finals = frozenset(q for q in range(total.num_states) if q != total.trap and q not in total.finals)
    return Tmfa(total.num_states, total.alphabet, total.num_memories, total.initial, finals,
                total.trap, not total.trap_accepting, total.transitions, total.memory_names)


# ---------------------------------------------------------------- direct matching

def _empty_flags(mems, pos):
    return tuple((end == OPEN, start == (pos if end == OPEN else end)) for start, end in mems)


def match_direct(m: Tmfa, w: str) -> bool:
    """Follow the unique run; no preprocessing."""
    _require_deterministic(m)
    n = len(w)
    out = m.outgoing
    chars = [{t.label.value: t for t in ts if t.label.kind == CHAR} for ts in out]
    state, pos = m.initial, 0
    mems = ((0, 0),) * m.num_memories
    stalled = set()
    while True:
        if state == m.trap:
            return m.trap_accepting
        if pos == n and state in m.finals:
            return True
        ts = out[state]
        if not ts:
            return False
        t = ts[0]
        if t.label.kind == CHAR:
            if pos == n:
                return False
            t = chars[state].get(w[pos])
            if t is None:
                return False
            mems = apply_actions(mems, t.actions, pos)
            state, pos = t.target, pos + 1
            stalled.clear()
            continue
        mems = apply_actions(mems, t.actions, pos)
        if t.label.kind == RECALL:
            start, end = mems[t.label.value]
            length = end - start
            if length:
                if w.startswith(w[start:end], pos):
                    state, pos = t.target, pos + length
                    stalled.clear()
                    continue
                return m.trap_accepting
        state = t.target
        key = (state, _empty_flags(mems, pos))
        if key in stalled:
            return False
        stalled.add(key)


# ---------------------------------------------------------------- preprocessing for fast matching

@dataclass(frozen=True)
class RecallEntry:
    state: int
    memory: int
    prefix: tuple
    accept_if_skipped: bool


@dataclass(frozen=True)
class RecallList:
    entries: tuple
    end_kind: str                 # "fall" | "trap" | "loop"
    end_state: Optional[int]
    end_prefix: tuple
    loop_accepting: bool = False
    head_accepting: bool = False


@dataclass(frozen=True)
class MatchTable:
    """A deterministic automaton with ε-chains contracted and recall chains precomputed.

    ``kinds[q]`` is one of ``consume``, ``eps``, ``recall`` or ``dead``.
    ``steps[q]`` holds the symbol map, the single ε-transition, or the
    recall list respectively.
    """

    automaton: Tmfa
    kinds: tuple
    steps: tuple
    finals: frozenset


def _contract_epsilons(m: Tmfa) -> Tmfa:
    transitions, finals = [], set(m.finals)
    for p in range(m.num_states):
        if p == m.trap:
            continue
        ts = m.outgoing[p]
        if len(ts) != 1 or ts[0].label.kind != EPS:
            transitions.extend(ts)
            continue
        end, prefix, accepting = _follow_epsilons(m, p)
        if accepting:
            finals.add(p)
        if end is not None:
            transitions.append(Transition(p, EPSILON, end, prefix))
    return Tmfa(m.num_states, m.alphabet, m.num_memories, m.initial, frozenset(finals), m.trap,
                m.trap_accepting, tuple(transitions), m.memory_names)


def _recall_list(m: Tmfa, q: int) -> RecallList:
    k = m.num_memories
    entries = []
    seen_memories = set()
    prefix = ("d",) * k
    visited = {q}
    cur = q
    head = False
    while True:
        t = m.outgoing[cur][0]
        mem = t.label.value
        if mem not in seen_memories and prefix[mem] not in ("o", "r") and t.actions[mem] != "r":
            entries.append([cur, mem, prefix, False])
        seen_memories.add(mem)
        # skipping this recall: the memory is empty, only the instructions apply
        prefix = compose_vectors(prefix, t.actions)
        nxt = t.target
        passed_final = nxt in m.finals
        if nxt != m.trap:
            ts = m.outgoing[nxt]
            if len(ts) == 1 and ts[0].label.kind == EPS:
                prefix = compose_vectors(prefix, ts[0].actions)
                nxt = ts[0].target
                passed_final = passed_final or nxt in m.finals
        if passed_final:
            if entries:
                entries[-1][3] = True
            else:
                head = True
        if nxt == m.trap:
            return RecallList(_freeze(entries), "trap", None, prefix, False, head)
        if nxt in visited:
            return RecallList(_freeze(entries), "loop", nxt, prefix, nxt in m.finals, head)
        ts = m.outgoing[nxt]
        if len(ts) == 1 and ts[0].label.kind == RECALL:
            visited.add(nxt)
            cur = nxt
            continue
        return RecallList(_freeze(entries), "fall", nxt, prefix, False, head)


def _freeze(entries):
    return tuple(RecallEntry(s, mem, pre, acc) for s, mem, pre, acc in entries)


def preprocess(m: Tmfa) -> MatchTable:
    _require_deterministic(m)
    c = _contract_epsilons(m)
    kinds, steps = [], []
    for q in range(c.num_states):
        ts = c.outgoing[q]
        if q == c.trap or not ts:
            kinds.append("dead")
            steps.append(None)
        elif ts[0].label.kind == CHAR:
            kinds.append("consume")
            steps.append({t.label.value: (t.target, t.actions) for t in ts})
        elif ts[0].label.kind == EPS:
            kinds.append("eps")
            steps.append((ts[0].target, ts[0].actions))
        else:
            kinds.append("recall")
            steps.append(_recall_list(c, q))
    return MatchTable(c, tuple(kinds), tuple(steps), c.finals)


def match_fast(table: MatchTable, w: str) -> bool:
    m = table.automaton
    kinds, steps, finals = table.kinds, table.steps, table.finals
    trap, trap_accepting = m.trap, m.trap_accepting
    n = len(w)
    state, pos = m.initial, 0
    mems = [(0, 0)] * m.num_memories
    while True:
        if state == trap:
            return trap_accepting
        if pos == n and state in finals:
            return True
        kind = kinds[state]
        if kind == "consume":
            if pos == n:
                return False
            step = steps[state].get(w[pos])
            if step is None:
                return False
            state, actions = step
            if any(a != "d" for a in actions):
                mems = list(apply_actions(mems, actions, pos))
            pos += 1
        elif kind == "eps":
            state, actions = steps[state]
            mems = list(apply_actions(mems, actions, pos))
        elif kind == "recall":
            rl = steps[state]
            if rl.head_accepting and pos == n:
                return True
            for entry in rl.entries:
                start, end = mems[entry.memory]
                if start != (pos if end == OPEN else end):
                    mems = apply_actions(mems, entry.prefix, pos)
                    t = m.outgoing[entry.state][0]
                    mems = list(apply_actions(mems, t.actions, pos))
                    start, end = mems[entry.memory]
                    if not w.startswith(w[start:end], pos):
                        return trap_accepting
                    state, pos = t.target, pos + end - start
                    break
                if entry.accept_if_skipped and pos == n:
                    return True
            else:
                if rl.end_kind == "trap":
                    return trap_accepting
                if rl.end_kind == "loop":
                    return pos == n and rl.loop_accepting
                mems = list(apply_actions(mems, rl.end_prefix, pos))
                state = rl.end_state
        else:
            return False
