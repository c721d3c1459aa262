import random

import pytest
from hypothesis import given, settings, strategies as st

from criteria import random_ctl, random_mpds
from mpdsverify.ctl import (And, CtlSyntaxError, EFf, EGf, EUf, EXf, LabeledGraph, LocalChecker,
                            Not, Or, Prop, check, check_mask, holds, parse_ctl, to_text)
from mpdsverify.explorer import ExplorationBounds, explore
from mpdsverify.oracles import ctl_eval_naive

CHAIN = LabeledGraph(["a", "a", "b"], [[1], [2], []])


def test_parse_examples():
    assert parse_ctl("EX (qerr & EF qwin)") == EXf(And(Prop("qerr"), EFf(Prop("qwin"))))
    assert parse_ctl("!EF qerr") == Not(EFf(Prop("qerr")))
    assert parse_ctl("E[ a U b ]") == EUf(Prop("a"), Prop("b"))
    assert parse_ctl("a | b & c") == Or(Prop("a"), And(Prop("b"), Prop("c")))
    assert parse_ctl('"tm:start" & EG x') == And(Prop("tm:start"), EGf(Prop("x")))


@pytest.mark.parametrize("text", ["", "EX", "a &", "(a", "E[ a b ]", "a b"])
def test_parse_errors(text):
    with pytest.raises(CtlSyntaxError):
        parse_ctl(text)


def test_text_round_trip():
    rng = random.Random(4)
    for _ in range(50):
        f = random_ctl(rng, 4, ("p", "q:1"))
        assert parse_ctl(to_text(f)) == f


def test_chain_examples():
    assert check(CHAIN, Prop("a")) == [0, 1]
    assert check(CHAIN, EXf(Prop("a"))) == [0]
    assert check(CHAIN, EUf(Prop("a"), Prop("b"))) == [0, 1, 2]
    assert check(CHAIN, EGf(Prop("a"))) == []
    assert check(CHAIN, EGf(Prop("b"))) == [2]
    assert holds(CHAIN, 0, Prop("a"))
    assert not holds(CHAIN, 1, And(Prop("a"), Not(Prop("a"))))
    with pytest.raises(IndexError):
        holds(CHAIN, 7, Prop("a"))


def test_de_morgan():
    f, g = Prop("a"), EXf(Prop("b"))
    lhs = check_mask(CHAIN, Not(And(f, g)))
    assert list(lhs) == list(check_mask(CHAIN, Or(Not(f), Not(g))))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_against_naive_labeller(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 20)
    labels = [rng.choice("pq") for _ in range(n)]
    succ = [sorted(rng.sample(range(n), rng.randint(0, min(2, n)))) for _ in range(n)]
    phi = random_ctl(rng, 3, ("p", "q"))
    assert set(check(LabeledGraph(labels, succ), phi)) == ctl_eval_naive(labels, succ, phi)


def test_local_checker_agrees_with_global_labelling():
    rng = random.Random(11)
    for _ in range(60):
        sys = random_mpds(rng)
        b = ExplorationBounds(context_bound=rng.randint(0, 3), stack_cap=rng.randint(0, 4))
        g = explore(sys, sys.initial_configuration(), b)
        phi = random_ctl(rng, 3, sys.states)
        lc = LocalChecker(sys, b)
        assert lc.holds(sys.initial_configuration(), phi) == bool(check_mask(g, phi)[0])
