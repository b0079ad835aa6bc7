"""Acceptance criteria, one marked group per criterion; see the summary at the end of a run."""

import itertools
import random
import time

import pytest

from corpus import (
    ABIGAIL,
    ALPHA_SQ,
    FIBONACCI,
    NONDET_BY_CONDITION,
    POWERS_OF_FOUR,
    RELAXED,
    WCW,
    deterministic_corpus,
    mixed_corpus,
    parallel_recall_corpus,
    with_epsilon_detours,
    words,
)
from drx import dtmfa
from drx import syntax as sx
from drx import tmfa as tm
from drx.constructions import (
    UnaryDfa,
    bounded_intersection,
    parse_equation,
    unary_dfa_to_drx,
    word_equation_to_drx,
)
from drx.glushkov import (
    Deterministic,
    NondeterminismWitness,
    build_graph,
    compile_deterministic,
    compile_glushkov,
    graph_determinism,
)
from drx.ldet import is_l_deterministic, l_determinize
from drx.tmfa import EPS, OPEN

CORPUS = deterministic_corpus(200)
WORDS_8 = words(8)
WORDS_10 = words(10)


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def oracle_language(m, sample=WORDS_8):
    return {w for w in sample if tm.member_oracle(m, w)}


# ---------------------------------------------------------------- 1

@criterion(1, "determinism fixtures")
def test_determinism_fixtures():
    start = time.perf_counter()
    for condition, text in sorted(NONDET_BY_CONDITION.items()):
        verdict = graph_determinism(build_graph(sx.parse(text)))
        assert isinstance(verdict, NondeterminismWitness) and verdict.condition == condition, text
        assert compile_deterministic(sx.parse(text)).condition == condition, text
    for text in (WCW, ALPHA_SQ):
        assert isinstance(graph_determinism(build_graph(sx.parse(text))), Deterministic), text
        assert isinstance(compile_deterministic(sx.parse(text)), tm.Tmfa), text
    assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------- 2

@criterion(2, "Glushkov automata agree with the naive compiler")
def test_glushkov_correctness():
    start = time.perf_counter()
    assert len(CORPUS) >= 200
    for text, ast, m in CORPUS:
        assert len(sx.variables(ast)) <= 3 and sx.occurrence_count(ast) <= 10
        naive = tm.compile_naive(ast, "ab")
        for w in WORDS_8:
            assert tm.member_oracle(m, w) == tm.member_oracle(naive, w), (text, w)
    assert time.perf_counter() - start < 300


# ---------------------------------------------------------------- 3

@criterion(3, "semantic fixtures")
def test_squares():
    m = compile_deterministic(sx.parse(ALPHA_SQ))
    assert tm.bounded_language(m, 30) == {"a" * (n * n) for n in range(6)}


@criterion(3, "semantic fixtures")
def test_fibonacci():
    m = compile_deterministic(sx.parse(FIBONACCI))
    assert tm.bounded_language(m, 25) == {"aba", "abaababaabaababaababa"}


@criterion(3, "semantic fixtures")
def test_powers_of_four():
    m = compile_deterministic(sx.parse(POWERS_OF_FOUR))
    assert tm.bounded_language(m, 20) == {"a" * 4, "a" * 16}


@criterion(3, "semantic fixtures")
def test_composite_lengths():
    m = tm.compile_naive(sx.parse(ABIGAIL))
    composite = {i for i in range(4, 13) if any(i % d == 0 for d in range(2, i))}
    assert {i for i in range(4, 13) if tm.member_oracle(m, "a" * i)} == composite


# ---------------------------------------------------------------- 4

@criterion(4, "complement")
def test_complement():
    for text, ast, m in CORPUS[:50]:
        co = dtmfa.complement(m)
        for w in WORDS_8:
            assert tm.member_oracle(m, w) != tm.member_oracle(co, w), (text, w)


# ---------------------------------------------------------------- 5

@criterion(5, "transformation soundness")
@pytest.mark.parametrize("name", ["normalize", "acc_to_rej", "remove_epsilon", "complete"])
def test_transformations(name):
    for text, ast, m in CORPUS:
        if name == "normalize":
            naive = tm.compile_naive(ast, "ab")
            pairs = [(m, tm.normalize(m)), (naive, tm.normalize(naive))]
        elif name == "acc_to_rej":
            accepting = m.with_trap_accepting(True)
            pairs = [(accepting, tm.acc_to_rej(accepting))]
        elif name == "remove_epsilon":
            pairs = []
            for source in (with_epsilon_detours(m), with_epsilon_detours(m).with_trap_accepting(True)):
                free = dtmfa.remove_epsilon(source)
                assert not any(t.label.kind == EPS for t in free.transitions), text
                pairs.append((source, free))
        else:
            accepting = m.with_trap_accepting(True)
            pairs = [(m, dtmfa.complete(m)), (accepting, dtmfa.complete(accepting))]
        for before, after in pairs:
            assert oracle_language(after) == oracle_language(before), (name, text)


# ---------------------------------------------------------------- 6

@criterion(6, "matching engines and instruction algebra")
def test_matching_engines():
    for text, ast, m in CORPUS:
        table = dtmfa.preprocess(m)
        for w in WORDS_10:
            expected = tm.member_oracle(m, w)
            assert dtmfa.match_direct(m, w) == expected, (text, w)
            assert dtmfa.match_fast(table, w) == expected, (text, w)


@criterion(6, "matching engines and instruction algebra")
def test_instruction_algebra():
    w, pos = "abcdef", 2
    # closed empty, closed nonempty, open empty, open nonempty
    configurations = [(pos, pos), (0, 1), (pos, OPEN), (0, OPEN)]

    def observe(memories):
        return (tm.memory_content(memories, 0, w, pos), memories[0][1] == OPEN,
                tm.memory_content(memories, 0, w, pos + 1))

    for triple in itertools.product("ocrd", repeat=3):
        composed = dtmfa.compose_all([(a,) for a in triple], 1)
        for mem in configurations:
            sequential = (mem,)
            for act in triple:
                sequential = tm.apply_actions(sequential, (act,), pos)
            assert observe(sequential) == observe(tm.apply_actions((mem,), composed, pos)), (triple, mem)


# ---------------------------------------------------------------- 7

@criterion(7, "unary construction")
def test_unary_construction():
    rng = random.Random(7)
    for _ in range(100):
        chain, cycle = rng.randint(0, 4), rng.randint(1, 5)
        d = UnaryDfa(chain, cycle,
                     frozenset(i for i in range(chain) if rng.random() < 0.4),
                     frozenset(i for i in range(cycle) if rng.random() < 0.4))
        ast = unary_dfa_to_drx(d)
        m = compile_deterministic(ast)
        assert isinstance(m, tm.Tmfa), sx.to_text(ast)
        m = m.with_alphabet("a")
        for i in range(41):
            assert tm.member_oracle(m, "a" * i) == d.accepts(i), (d, i)


# ---------------------------------------------------------------- 8

@criterion(8, "l-determinism")
def test_relaxed_example():
    m = compile_glushkov(sx.parse(RELAXED))
    assert is_l_deterministic(m, 1) and not is_l_deterministic(m, 0)


@criterion(8, "l-determinism")
def test_zero_lookahead_is_determinism():
    automata = [m for _, _, m in CORPUS]
    for _, ast in mixed_corpus(150):
        automata += [compile_glushkov(ast), tm.compile_naive(ast)]
    automata += [compile_glushkov(sx.parse(text)) for text in parallel_recall_corpus(100)]
    for m in automata:
        assert is_l_deterministic(m, 0) == tm.is_deterministic(m)


@criterion(8, "l-determinism")
def test_l_determinization():
    determinized = 0
    sources = [compile_glushkov(sx.parse(text)).with_alphabet("abc") for text in parallel_recall_corpus(100)]
    sources += [m for _, _, m in CORPUS[:40]]
    for m in sources:
        for trap_accepting in (False, True):
            m = m.with_trap_accepting(trap_accepting)
            ell = next((e for e in range(4) if is_l_deterministic(m, e)), None)
            if ell is None:
                continue
            d = l_determinize(m, ell)
            assert tm.is_deterministic(d)
            assert tm.bounded_language(d, 10) == tm.bounded_language(m, 10)
            determinized += 1
    assert determinized >= 100


# ---------------------------------------------------------------- 9

@criterion(9, "word-equation reduction")
def test_word_equations():
    left, right = word_equation_to_drx(parse_equation("Xa = aX"))
    ms = [compile_deterministic(left), compile_deterministic(right)]
    assert all(isinstance(m, tm.Tmfa) for m in ms)
    assert sx.is_vstar_free(left) and sx.is_vstar_free(right)
    assert bounded_intersection(ms, 4) == "%a"
    ground = [compile_deterministic(r) for r in word_equation_to_drx(parse_equation("a = b"))]
    for bound in range(7):
        assert bounded_intersection(ground, bound) is None


# ---------------------------------------------------------------- 10

@criterion(10, "linear-time matching")
def test_matching_time():
    table = dtmfa.preprocess(compile_deterministic(sx.parse(WCW)))

    def best_time(word, repeats=3):
        times = []
        for _ in range(repeats):
            start = time.perf_counter()
            assert dtmfa.match_fast(table, word)
            times.append(time.perf_counter() - start)
        return min(times)

    half = "ab" * 50_000
    short = half + "c" + half
    long = half * 2 + "c" + half * 2
    assert len(short) > 200_000 and len(long) == 2 * len(short) - 1
    small, large = best_time(short), best_time(long)
    assert small < 1.0
    assert large <= 2.5 * small
