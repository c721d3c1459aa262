from pathlib import Path

from mpdsverify.ctl import EGf, EUf, Prop
from mpdsverify.fo import parse_fo
from mpdsverify.mpds import MpdsSystem, Transition
from mpdsverify.oracles import (ctl_eval_naive, explore_naive, fo_eval, min_blocks_brute,
                                parity_brute, tm_accepts)
from mpdsverify.tm import load_tm

FIX = Path(__file__).parent / "fixtures"


def test_fo_eval_examples():
    least = parse_fo("E x. A y. (x=y | x<y)", sentence=True)
    assert all(fo_eval(least, n) for n in range(5))
    assert not fo_eval(parse_fo("A x. E y. y<x", sentence=True), 3)
    pair = parse_fo("E x. E y. x<y", sentence=True)
    assert (fo_eval(pair, 0), fo_eval(pair, 1)) == (False, True)


def test_ctl_naive_examples():
    labels, succ = ["a", "a", "b"], [[1], [2], []]
    assert ctl_eval_naive(labels, succ, EUf(Prop("a"), Prop("b"))) == {0, 1, 2}
    assert ctl_eval_naive(labels, succ, EGf(Prop("a"))) == set()
    assert ctl_eval_naive(labels, succ, Prop("b")) == {2}


def test_parity_brute_examples():
    assert parity_brute([1], [0], [[]])[0] == [0]
    assert parity_brute([1], [0], [[0]])[0] == [0]
    assert parity_brute([0, 1], [1, 2], [[1], [0]])[0] == [0, 0]


def test_block_brute_force():
    assert min_blocks_brute([], False) == 0
    assert min_blocks_brute([("push", 1), ("push", 2), ("push", 1)], False) == 3
    assert min_blocks_brute([("pop", 1), ("push", 2), ("pop", 1)], True) == 1


def test_naive_exploration_of_a_push_loop():
    sys = MpdsSystem(("q",), 2, ("a",), "q", (Transition.push("q", "_", "q", 1, "a"),))
    keys, edges, frontier = explore_naive(sys, sys.initial_configuration(), 3, 3)
    assert (len(keys), len(edges), len(frontier)) == (4, 3, 1)


def test_tm_examples():
    assert tm_accepts(load_tm(FIX / "tm_accept.json"), "1", 1) == "accept"
    assert tm_accepts(load_tm(FIX / "tm_reject.json"), "1", 3) == "reject"
    assert tm_accepts(load_tm(FIX / "tm_flip.json"), "1", 2) == "accept"
    assert tm_accepts(load_tm(FIX / "tm_walk.json"), "1", 3, step_cap=1) == "bound_exceeded"
