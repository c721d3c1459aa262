import pytest

from mpdsverify import counters as cnt
from mpdsverify.counters import CounterParams, encode_counter as enc
from mpdsverify.ctl import LocalChecker
from mpdsverify.explorer import ExplorationBounds
from mpdsverify.mpds import ZETA, Configuration

P13, P22 = CounterParams(1, 3), CounterParams(2, 2)


def test_sizes():
    assert cnt.tower(3) == 4
    assert cnt.max_value(P13) == 7
    assert cnt.max_value(CounterParams(1, 2)) == 3
    assert cnt.max_value(P22) == 15
    assert cnt.bit_length(P22) == 4


def test_encode_examples():
    assert enc(P13, 0) == ("a1", "a1", "a1")
    assert enc(P13, 5) == ("b1", "a1", "b1")
    # top-first: address 3 holds bit 0, ..., address 0 holds bit 1
    assert enc(P22, 5) == ("b1", "b1", "a2", "b1", "a1", "b2", "a1", "b1", "a2", "a1", "a1", "b2")


def test_overflow_and_scale_guard():
    with pytest.raises(cnt.CounterError):
        enc(P13, 8)
    with pytest.raises(cnt.ScaleError):
        CounterParams(4, 3)


@pytest.mark.parametrize("k, n", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)])
def test_round_trip(k, n):
    p = CounterParams(k, n)
    for v in range(cnt.max_value(p) + 1):
        w = enc(p, v)
        assert cnt.is_valid_counter(p, w)
        assert cnt.decode_counter(p, w) == v
        if v < cnt.max_value(p):
            assert cnt.increment_counter(p, w) == enc(p, v + 1)


def test_round_trip_sampled_at_level_three():
    p = CounterParams(3, 1)
    top = cnt.max_value(p)
    for v in (0, 1, 2, top // 3, top - 1, top):
        assert cnt.decode_counter(p, enc(p, v)) == v


def test_increment_flips_the_trailing_ones():
    assert cnt.increment_counter(P13, enc(P13, 3)) == enc(P13, 4)
    with pytest.raises(cnt.CounterError):
        cnt.increment_counter(P13, enc(P13, 7))


def test_corrupted_address_is_invalid():
    w = list(enc(P22, 5))
    w[0] = "a1"
    assert not cnt.is_valid_counter(P22, w)


def holds(p, gadget, stack1, stack2=()):
    lib = cnt.GadgetLibrary(p)
    sys, phi = cnt.host_system(lib, getattr(lib, gadget)(p.level, 1))
    w1, w2 = tuple(stack1), tuple(stack2)
    lc = LocalChecker(sys, ExplorationBounds(context_bound=2 * p.level,
                                             stack_cap=max(len(w1), len(w2)) + 4))
    return lc.holds(Configuration.make("host", w1, w2), phi)


def test_equal_gadget():
    five = enc(P22, 5) + (ZETA,)
    assert holds(P22, "equal", five, five) is False
    assert holds(P22, "equal", five, enc(P22, 6) + (ZETA,)) is True


def test_succ_gadget_orientation():
    five, six = enc(P22, 5) + (ZETA,), enc(P22, 6) + (ZETA,)
    assert holds(P22, "succ", five, six) is False
    assert holds(P22, "succ", six, five) is True


def test_max_and_min_gadgets():
    top = enc(P22, 15) + (ZETA,)
    assert holds(P22, "last", top) is False
    assert holds(P22, "last", enc(P22, 3) + (ZETA,)) is True
    assert holds(P22, "first", enc(P22, 0) + (ZETA,)) is False
    assert holds(P22, "first", enc(P22, 1) + (ZETA,)) is True


def test_valid_gadget_on_mutants():
    p = CounterParams(1, 2)
    good = enc(p, 2) + (ZETA,)
    assert holds(p, "valid", good) is False
    assert holds(p, "valid", ("b1",) + good) is True
    assert holds(p, "valid", (ZETA,)) is True


def test_library_metadata():
    lib = cnt.build_counter_gadgets(P22)
    for level in (1, 2):
        for stack in (1, 2):
            assert lib.equal(level, stack).contexts <= 2 * level
            assert lib.succ(level, stack).contexts <= 2 * level
    assert {"q_err", "q_win", "q_eq", "q_neq"} <= set(lib.builder.build("q_err").states)
