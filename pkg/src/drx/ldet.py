"""ℓ-determinism: parallel recalls that the next ℓ input symbols can tell apart.

Two words are ℓ-prefix equivalent when one is a prefix of the other or they
share a prefix of length ℓ.  An automaton is ℓ-deterministic when its only
nondeterminism is states with recalls of several distinct memories whose
contents are never pairwise ℓ-prefix equivalent in a reachable configuration.

Throughout, a memory is abstracted by its first ℓ symbols: u and v are
ℓ-prefix equivalent exactly when one of u[:ℓ], v[:ℓ] is a prefix of the other.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations

from .dtmfa import compose_vectors
from .errors import PreconditionError, ResourceLimitError, UnsupportedConstructionError
from .tmfa import (
    CHAR,
    DEFAULT_CONFIG_CAP,
    DEFAULT_STATE_CAP,
    EPS,
    EPSILON,
    RECALL,
    Tmfa,
    TmfaBuilder,
    char_label,
    is_deterministic,
    recall_label,
)


def prefix_equivalent(u: str, v: str, ell: int) -> bool:
    return u.startswith(v) or v.startswith(u) or (len(u) >= ell and len(v) >= ell and u[:ell] == v[:ell])


def _comparable(a: str, b: str) -> bool:
    return a.startswith(b) or b.startswith(a)


def _recall_groups(m: Tmfa):
    """Map state -> recall transitions when the state is a legal parallel-recall state.

    Returns None if the automaton has a violation other than parallel recalls
    of distinct memories.
    """
    groups = {}
    for q, ts in enumerate(m.outgoing):
        if q == m.trap or not ts:
            continue
        kinds = {t.label.kind for t in ts}
        if kinds == {CHAR}:
            symbols = [t.label.value for t in ts]
            if len(symbols) != len(set(symbols)):
                return None
        elif kinds == {RECALL}:
            memories = [t.label.value for t in ts]
            if len(memories) != len(set(memories)):
                return None
            if len(ts) > 1:
                groups[q] = ts
        elif len(ts) > 1:
            return None
    return groups


def _abstract_step(cfg, actions, consumed, ell):
    """cfg holds (prefix, is_open) per memory; apply instructions, then append."""
    out = []
    for (prefix, is_open), act in zip(cfg, actions):
        if act == "o":
            prefix, is_open = "", True
        elif act == "c":
            is_open = False
        elif act == "r":
            prefix, is_open = "", False
        if is_open and len(prefix) < ell:
            prefix = (prefix + consumed)[:ell]
        out.append((prefix, is_open))
    return tuple(out)


def is_l_deterministic(m: Tmfa, ell: int, cap: int = DEFAULT_CONFIG_CAP) -> bool:
    if ell < 0:
        raise ValueError("ℓ must be nonnegative")
    if ell == 0 or is_deterministic(m):
        return is_deterministic(m)
    groups = _recall_groups(m)
    if groups is None:
        return False
    start = (m.initial, (("", False),) * m.num_memories)
    seen = {start}
    queue = deque([start])
    while queue:
        q, cfg = queue.popleft()
        if q in groups:
            contents = {}
            for t in groups[q]:
                j = t.label.value
                after = _abstract_step(cfg, t.actions, "", ell)
                contents[j] = after[j][0]
            for a, b in combinations(contents.values(), 2):
                if _comparable(a, b):
                    return False
        for t in m.outgoing[q]:
            if t.target == m.trap:
                continue
            if t.label.kind == CHAR:
                succ = [_abstract_step(cfg, t.actions, t.label.value, ell)]
            elif t.label.kind == EPS:
                succ = [_abstract_step(cfg, t.actions, "", ell)]
            else:
                j = t.label.value
                content = _abstract_step(cfg, t.actions, "", ell)[j][0]
                succ = [_abstract_step(cfg, t.actions, content, ell)]
            for new in succ:
                key = (t.target, new)
                if key not in seen:
                    seen.add(key)
                    if len(seen) > cap:
                        raise ResourceLimitError(f"ℓ-determinism check exceeded {cap} configurations")
                    queue.append(key)
    return True


# ---------------------------------------------------------------- construction
#
# A state of the result pairs a state of m with, per memory i, a triple
# (buffer, recording, real): the first ℓ symbols of memory i live in the
# finite control ("buffer"), the rest in the real memory i, which is opened
# only when the buffer overflows.  ``real`` is EMPTY, OPEN or KEPT (closed
# with content).

EMPTY, OPEN, KEPT = 0, 1, 2


def _instructions(cfg, actions):
    """Apply m's instructions to the buffers; return the new cfg and the real-memory vector."""
    new, real = [], []
    for (buf, rec, state), act in zip(cfg, actions):
        if act in ("o", "r"):
            new.append(("", act == "o", EMPTY))
            real.append("r")
        elif act == "c":
            new.append((buf, False, KEPT if state == OPEN else state))
            real.append("c" if state == OPEN else "d")
        else:
            new.append((buf, rec, state))
            real.append("d")
    return tuple(new), tuple(real)


def _consume(cfg, symbols, ell, only=None):
    """Append consumed symbols to recording buffers, opening real memories lazily.

    ``only`` restricts the update to a set of memories.  Returns the new cfg
    and the instruction vector for the transition consuming the last symbol;
    earlier symbols are replayed and must fit in the buffers.
    """
    new, lazy = [], []
    for i, (buf, rec, state) in enumerate(cfg):
        act = "d"
        if rec and (only is None or i in only):
            for n, a in enumerate(symbols):
                if len(buf) < ell:
                    buf += a
                elif state != OPEN:
                    if n != len(symbols) - 1:
                        raise UnsupportedConstructionError(
                            "deferred recall resolution would have to write symbols into a real memory")
                    act, state = "o", OPEN
        new.append((buf, rec, state))
        lazy.append(act)
    return tuple(new), tuple(lazy)


def l_determinize(m: Tmfa, ell: int, cap: int = DEFAULT_STATE_CAP) -> Tmfa:
    """Equivalent deterministic automaton for an ℓ-deterministic ``m``."""
    if not is_l_deterministic(m, ell):
        raise PreconditionError(f"the automaton is not {ell}-deterministic")
    if ell == 0:
        return m
    k = m.num_memories
    identity = ("d",) * k
    b = TmfaBuilder(m.alphabet, k, m.memory_names)
    b.trap_accepting = m.trap_accepting
    trap = b.trap_key
    start = ("run", m.initial, (("", False, EMPTY),) * k)
    b.initial_key = start
    b.state(start)
    seen = {start}
    queue = deque([start])

    def visit(key):
        if key != trap and key not in seen:
            seen.add(key)
            b.state(key)
            if len(seen) > cap:
                raise ResourceLimitError(f"ℓ-determinization exceeded {cap} states")
            queue.append(key)
        return key

    def run_key(q, cfg):
        return trap if q == m.trap else ("run", q, cfg)

    def mismatch_edges(key, expected):
        for a in m.alphabet:
            if a not in expected:
                b.add(key, char_label(a), trap)

    while queue:
        key = queue.popleft()
        kind = key[0]

        if kind == "run":
            _, q, cfg = key
            if q in m.finals:
                b.finals.add(key)
            ts = m.outgoing[q]
            recalls = [t for t in ts if t.label.kind == RECALL]
            if len(recalls) > 1:
                if m.trap_accepting:
                    # all but at most one recall fails, and failing accepts
                    b.add(key, EPSILON, trap)
                    continue
                vectors = [t.actions for t in recalls]
                common = tuple(acts[0] if len(set(acts)) == 1 else "d" for acts in zip(*vectors))
                deferred = frozenset(i for i, acts in enumerate(zip(*vectors)) if len(set(acts)) > 1)
                base, real = _instructions(cfg, common)
                cands = []
                for t in recalls:
                    residual = tuple("d" if i not in deferred else act for i, act in enumerate(t.actions))
                    j = t.label.value
                    cands.append((j, t.target, residual, _instructions(base, residual)[0][j][0]))
                for (_, _, _, u), (_, _, _, v) in combinations(cands, 2):
                    if _comparable(u, v):
                        raise PreconditionError("parallel recalls with ℓ-prefix-equivalent contents")
                node = visit(("trie", base, "", tuple(cands), deferred))
                b.add(key, EPSILON, node, real)
                continue
            for t in ts:
                after, real = _instructions(cfg, t.actions)
                if t.label.kind == CHAR:
                    new, lazy = _consume(after, t.label.value, ell)
                    b.add(key, t.label, visit(run_key(t.target, new)), compose_vectors(real, lazy))
                elif t.label.kind == EPS:
                    b.add(key, EPSILON, visit(run_key(t.target, after)), real)
                elif t.target == m.trap:
                    b.add(key, EPSILON, trap)
                else:
                    j = t.label.value
                    b.add(key, EPSILON, visit(("match", t.target, j, after[j][0], after)), real)

        elif kind == "match":
            _, p, j, rest, cfg = key
            # input ending here fails the recall unless nothing is left to match
            if m.trap_accepting and (rest or cfg[j][2] != EMPTY):
                b.finals.add(key)
            if rest:
                new, lazy = _consume(cfg, rest[0], ell)
                b.add(key, char_label(rest[0]), visit(("match", p, j, rest[1:], new)), lazy)
                mismatch_edges(key, rest[0])
            else:
                # a nonempty real memory j means the recall consumes input, which
                # overflows every full recording buffer
                consumes = cfg[j][2] != EMPTY
                lazy = []
                new = []
                for i, (buf, rec, state) in enumerate(cfg):
                    if consumes and rec and len(buf) == ell and state != OPEN:
                        lazy.append("o")
                        new.append((buf, rec, OPEN))
                    else:
                        lazy.append("c" if i == j else "d")
                        new.append((buf, rec, state))
                b.add(key, recall_label(j), visit(run_key(p, tuple(new))), tuple(lazy))

        else:
            _, base, seen_prefix, alive, deferred = key
            if m.trap_accepting:
                b.finals.add(key)
            for u in (c[3] for c in alive):
                if u == seen_prefix:
                    raise PreconditionError("parallel recalls with ℓ-prefix-equivalent contents")
            eager_part = frozenset(range(k)) - deferred
            successors = {}
            for c in alive:
                successors.setdefault(c[3][len(seen_prefix)], []).append(c)
            for a, group in sorted(successors.items()):
                consumed = seen_prefix + a
                if len(group) > 1:
                    new, lazy = _consume(base, a, ell, eager_part)
                    b.add(key, char_label(a), visit(("trie", new, consumed, tuple(group), deferred)), lazy)
                    continue
                j, p, residual, u = group[0]
                after, real = _instructions(base, residual)
                if seen_prefix and any(act == "c" and base[i][2] == OPEN for i, act in enumerate(real)):
                    raise UnsupportedConstructionError(
                        "deferred recall resolution would close a memory after it recorded input")
                after, _ = _consume(after, seen_prefix, ell, deferred) if seen_prefix else (after, None)
                new, lazy = _consume(after, a, ell)
                b.add(key, char_label(a), visit(("match", p, j, u[len(consumed):], new)),
                      compose_vectors(real, lazy))
            mismatch_edges(key, successors)
    return b.build()
