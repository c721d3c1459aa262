import pytest
from hypothesis import given, settings, strategies as st

from mpdsverify.mpds import (BOTTOM, Configuration, GuardMismatch, MpdsSystem, NonChainable,
                             PopOnBottom, StateMismatch, Transition, context_count, dump_mpds,
                             load_mpds, phase_count, step, successors, validate)
from mpdsverify.oracles import min_blocks_brute

A, B = "a", "b"


def system(*ts, states=("q", "r"), game=False):
    kw = {}
    if game:
        kw = {"owner": {q: 0 for q in states}, "priority": {q: 0 for q in states}}
    return MpdsSystem(tuple(states), 2, (A, B), states[0], tuple(ts), **kw)


def test_internal_keeps_stacks():
    t = Transition.internal("q", "r")
    c = step(system(t), Configuration.make("q", (), ()), t)
    assert c == Configuration.make("r", (), ())


def test_push_puts_symbol_on_top():
    t = Transition.push("q", A, "r", 1, B)
    c = step(system(t), Configuration.make("q", (A,), ()), t)
    assert c.stacks == ((B, A, BOTTOM), (BOTTOM,))


def test_pop_removes_top():
    t = Transition.pop("q", A, "r", 1)
    c = step(system(t), Configuration.make("q", (A,), ()), t)
    assert c == Configuration.make("r", (), ())


def test_noop_needs_matching_guard():
    t = Transition.noop("q", BOTTOM, 2, "r")
    sys = system(t)
    assert step(sys, Configuration.make("q", (A,), ()), t).state == "r"
    with pytest.raises(GuardMismatch):
        step(sys, Configuration.make("q", (), (A,)), t)


def test_step_errors():
    pop = Transition.pop("q", A, "r", 1)
    sys = system(pop)
    with pytest.raises(PopOnBottom):
        step(sys, Configuration.make("q", (), ()), pop)
    with pytest.raises(GuardMismatch):
        step(sys, Configuration.make("q", (B,), ()), pop)
    with pytest.raises(StateMismatch):
        step(sys, Configuration.make("r", (A,), ()), pop)


def test_successors_in_declaration_order():
    assert successors(system(), Configuration.make("q", (), ())) == []
    ts = (Transition.internal("q", "r"), Transition.push("q", A, "r", 1, B))
    out = successors(system(*ts), Configuration.make("q", (), ()))
    assert [t for t, _ in out] == [ts[0]]


def word(*spec):
    out = []
    for kind, j in spec:
        if kind == "push":
            out.append(Transition.push("q", "_", "q", j, A))
        elif kind == "pop":
            out.append(Transition.pop("q", A, "q", j))
        else:
            out.append(Transition.internal("q", "q"))
    return out


def test_context_count_examples():
    sys = system()
    assert context_count(sys, []) == 0
    assert context_count(sys, word(("push", 1), ("push", 2), ("push", 1))) == 3
    assert context_count(sys, word(("int", 0), ("pop", 1), ("int", 0), ("pop", 1))) == 1


def test_phase_count_examples():
    sys = system()
    assert phase_count(sys, word(("pop", 1), ("push", 2), ("pop", 2), ("pop", 1))) == 3
    assert phase_count(sys, word(("pop", 1), ("push", 2), ("pop", 1), ("pop", 1))) == 1
    assert phase_count(sys, word(("push", 1), ("push", 2))) == 1


def test_non_chainable_word():
    with pytest.raises(NonChainable):
        context_count(system(), [Transition.internal("q", "r"), Transition.internal("q", "r")])


LETTER = st.sampled_from([("push", 1), ("push", 2), ("pop", 1), ("pop", 2), ("int", 0)])


@settings(max_examples=200, deadline=None)
@given(st.lists(LETTER, max_size=7))
def test_greedy_counts_are_minimal(spec):
    w = word(*spec)
    stub = [(k if k != "int" else "internal", j) for k, j in spec]
    assert context_count(system(), w) == min_blocks_brute(stub, phases=False)
    assert phase_count(system(), w) == min_blocks_brute(stub, phases=True)
    assert phase_count(system(), w) <= context_count(system(), w)


def test_validate():
    assert validate(system(Transition.internal("q", "r"))) == []
    assert len(validate(system(Transition.internal("q", "nowhere")))) == 1
    partial = MpdsSystem(("q", "r"), 2, (A,), "q", (), owner={"q": 0}, priority={"q": 0, "r": 0})
    assert len(validate(partial)) == 1


def test_document_round_trip():
    sys = system(Transition.push("q", "_", "r", 2, A), Transition.pop("r", A, "q", 2),
                 Transition.noop("q", BOTTOM, 1, "r"), Transition.internal("r", "r"), game=True)
    assert load_mpds(dump_mpds(sys)) == sys


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([A, B]), max_size=4), st.lists(st.sampled_from([A, B]), max_size=4),
       st.sampled_from([Transition.push("q", "_", "q", 1, A), Transition.pop("q", A, "q", 1),
                        Transition.push("q", "_", "q", 2, B), Transition.pop("q", B, "q", 2),
                        Transition.noop("q", "_", 1, "q")]))
def test_step_leaves_other_stack_alone(w1, w2, t):
    c = Configuration.make("q", w1, w2)
    for u, d in successors(system(t), c):
        other = 2 - u.stack
        assert d.stacks[other] == c.stacks[other]
