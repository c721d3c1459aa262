import pytest

from mpdsverify.counters import CounterParams, GadgetLibrary, encode_counter, host_system
from mpdsverify.explorer import ExplorationBounds, answer_with_stability, explore, reachable
from mpdsverify.mpds import ZETA, Configuration, MpdsSystem, Transition, context_count
from mpdsverify.parallel import pmap


def sys_of(*ts, states=("q", "r")):
    return MpdsSystem(states, 2, ("a",), states[0], tuple(ts))


def test_transition_free_system():
    g = explore(sys_of(), sys_of().initial_configuration(), ExplorationBounds())
    assert (len(g), g.edge_count, g.frontier) == (1, 0, set())


def test_push_loop_is_cut_by_the_stack_cap():
    sys = sys_of(Transition.push("q", "_", "q", 1, "a"))
    g = explore(sys, sys.initial_configuration(), ExplorationBounds(stack_cap=3))
    assert len(g) == 4
    assert g.frontier == {3}
    assert g.successors(3) == []


def test_context_bound_stops_alternation():
    sys = sys_of(Transition.push("q", "_", "r", 1, "a"), Transition.push("r", "_", "q", 2, "a"))
    g = explore(sys, sys.initial_configuration(), ExplorationBounds(context_bound=2, stack_cap=9))
    assert sorted({g.contexts(i) for i in range(len(g))}) == [0, 1, 2]
    assert g.max_contexts() == 2
    assert g.truncated


def test_reachable():
    sys = sys_of(Transition.push("q", "_", "r", 1, "a"), states=("q", "r", "lost"))
    g = explore(sys, sys.initial_configuration(), ExplorationBounds())
    assert reachable(g, "q") == (True, [])
    found, witness = reachable(g, "r")
    assert found and context_count(sys, witness) <= 8
    assert reachable(g, "lost") == (False, None)


def test_equal_gadget_does_not_reach_error_on_equal_counters():
    p = CounterParams(1, 2)
    lib = GadgetLibrary(p)
    sys, _ = host_system(lib, lib.equal(1, 1))
    w = encode_counter(p, 2) + (ZETA,)
    g = explore(sys, Configuration.make("host", w, w), ExplorationBounds(context_bound=2, stack_cap=8))
    assert reachable(g, "q_err") == (False, None)
    other = encode_counter(p, 3) + (ZETA,)
    g = explore(sys, Configuration.make("host", w, other), ExplorationBounds(context_bound=2, stack_cap=8))
    assert reachable(g, "q_err")[0]


def test_node_cap_marks_partial_graph():
    sys = sys_of(Transition.push("q", "_", "q", 1, "a"))
    g = explore(sys, sys.initial_configuration(), ExplorationBounds(stack_cap=50, node_cap=5))
    assert len(g) == 5 and g.capped and g.truncated


def test_bad_bounds_rejected():
    with pytest.raises(ValueError):
        ExplorationBounds(context_bound=-1)
    with pytest.raises(ValueError):
        ExplorationBounds(node_cap=0)


def test_stability_helper():
    run = lambda b: b.stack_cap >= 3  # noqa: E731
    assert answer_with_stability(run, ExplorationBounds(stack_cap=2), 1) == (False, False)
    assert answer_with_stability(run, ExplorationBounds(stack_cap=4), 2) == (True, True)


def test_exploration_does_not_depend_on_threads():
    sys = sys_of(Transition.push("q", "_", "r", 1, "a"), Transition.push("r", "_", "q", 2, "a"),
                 Transition.pop("q", "a", "r", 1))

    def dump(_):
        return explore(sys, sys.initial_configuration(), ExplorationBounds(context_bound=3, stack_cap=3)).export()

    assert pmap(dump, range(6), threads=1) == pmap(dump, range(6), threads=4)
