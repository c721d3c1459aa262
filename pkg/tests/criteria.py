"""Runnable acceptance checks.

Each ``criterion_N()`` returns ``(ok, report)``.  Reports hold only
deterministic data (no timings) so that runs under different thread counts
can be compared byte for byte.  ``python tests/criteria.py [N ...]`` runs them
standalone.
"""
from __future__ import annotations

import itertools
import json
import os
import random
import sys
from pathlib import Path

from mpdsverify import counters as cnt
from mpdsverify.ctl import EFf, EGf, EUf, EXf, And, LabeledGraph, Not, Or, Prop, check_mask
from mpdsverify.ctl import LocalChecker
from mpdsverify.explorer import ExplorationBounds, explore
from mpdsverify.fo import Eq, Exists, FAnd, FNot, FOr, Forall, Lt, compile_fo, to_nnf
from mpdsverify.games import PlainGame, build_phase_game, solve_parity
from mpdsverify.mpds import (BOTTOM, WILDCARD, ZETA, Configuration, MpdsSystem, Transition,
                             context_count, phase_count)
from mpdsverify.oracles import (ctl_eval_naive, explore_naive, fo_eval, min_blocks_brute,
                                parity_brute, tm_accepts)
from mpdsverify.parallel import pmap
from mpdsverify.tm import (accepting_run, build_config_gadgets, compile_tm, decode_tm_config,
                           encode_tm_config, is_valid_config, load_tm, tape_cells)

FIXTURES = Path(__file__).parent / "fixtures"


# -- 1. explorer against run enumeration -----------------------------------------

def random_mpds(rng: random.Random, max_states=6, max_transitions=10) -> MpdsSystem:
    states = tuple(f"q{i}" for i in range(rng.randint(1, max_states)))
    alphabet = ("a", "b")
    ts = []
    for _ in range(rng.randint(0, max_transitions)):
        # lean on the initial state so that most systems actually move
        src = states[0] if rng.random() < 0.4 else rng.choice(states)
        dst = rng.choice(states)
        j = rng.randint(1, 2)
        kind = rng.choice(("internal", "push", "push", "pop", "pop", "noop"))
        guard = rng.choice((WILDCARD, WILDCARD, BOTTOM) + alphabet)
        if kind == "internal":
            ts.append(Transition.internal(src, dst))
        elif kind == "push":
            ts.append(Transition.push(src, guard, dst, j, rng.choice(alphabet)))
        elif kind == "pop":
            ts.append(Transition.pop(src, rng.choice(alphabet), dst, j))
        else:
            ts.append(Transition.noop(src, guard, j, dst))
    return MpdsSystem(states, 2, alphabet, states[0], tuple(ts))


def _explorer_view(sys, bound, cap):
    g = explore(sys, sys.initial_configuration(), ExplorationBounds(context_bound=bound, stack_cap=cap))
    key = [(g.configuration(i), ctx, cur + 1) for i, (_, ctx, cur) in enumerate(g.nodes)]
    edges = {(key[i], t, key[d]) for i, out in enumerate(g.succ) for t, d in out}
    return set(key), edges, {key[i] for i in g.frontier}


def _c1_case(seed):
    rng = random.Random(seed)
    sys = random_mpds(rng)
    bound, cap = rng.randint(0, 3), rng.randint(0, 5)
    mine = _explorer_view(sys, bound, cap)
    ref = explore_naive(sys, sys.initial_configuration(), bound, cap)
    return {"seed": seed, "nodes": len(mine[0]), "edges": len(mine[1]), "agree": mine == ref}


def criterion_1(n=200):
    cases = pmap(_c1_case, range(n))
    bad = [c["seed"] for c in cases if not c["agree"]]
    return not bad, {"cases": cases, "disagreeing": bad}


# -- 2. greedy block counts against exhaustive decompositions ---------------------

LETTERS = (("internal", 0), ("noop", 1), ("push", 1), ("push", 2), ("pop", 1), ("pop", 2))


def _transition(kind, j):
    if kind == "internal":
        return Transition.internal("q", "q")
    if kind == "noop":
        return Transition.noop("q", WILDCARD, j, "q")
    if kind == "push":
        return Transition.push("q", WILDCARD, "q", j, "a")
    return Transition.pop("q", "a", "q", j)


def _projection(word, phases):
    # the brute-force block test only sees which stacks are accessed (or popped)
    if phases:
        return tuple(j if kind == "pop" else 0 for kind, j in word)
    return tuple(j if kind in ("push", "pop") else 0 for kind, j in word)


def criterion_2(max_len=8):
    sys = MpdsSystem(("q",), 2, ("a",), "q", ())
    ts = {x: _transition(*x) for x in LETTERS}
    memo = {}
    words = bad = 0
    for m in range(max_len + 1):
        for word in itertools.product(LETTERS, repeat=m):
            run = [ts[x] for x in word]
            for phases, count in ((False, context_count), (True, phase_count)):
                proj = _projection(word, phases)
                want = memo.get((proj, phases))
                if want is None:
                    stub = [("pop" if j else "internal", j) for j in proj]
                    want = memo[(proj, phases)] = min_blocks_brute(stub, phases)
                if count(sys, run) != want:
                    bad += 1
            words += 1
    return bad == 0, {"words": words, "distinct_projections": len(memo), "mismatches": bad}


# -- 3. CTL checker against the naive labeller ------------------------------------

def random_ctl(rng, depth, props):
    if depth == 0 or rng.random() < 0.2:
        return Prop(rng.choice(props))
    op = rng.choice(("not", "and", "or", "EX", "EF", "EG", "EU"))
    sub = lambda: random_ctl(rng, depth - 1, props)  # noqa: E731
    if op == "not":
        return Not(sub())
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "EU":
        return EUf(sub(), sub())
    return {"EX": EXf, "EF": EFf, "EG": EGf}[op](sub())


def _c3_case(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 50)
    props = ("p", "q", "r")
    labels = [rng.choice(props) for _ in range(n)]
    succ = [sorted(rng.sample(range(n), rng.randint(0, min(3, n)))) for _ in range(n)]
    phi = random_ctl(rng, 4, props)
    got = {int(i) for i, v in enumerate(check_mask(LabeledGraph(labels, succ), phi)) if v}
    return {"seed": seed, "size": n, "sat": len(got), "agree": got == ctl_eval_naive(labels, succ, phi)}


def criterion_3(n=500):
    cases = pmap(_c3_case, range(n))
    bad = [c["seed"] for c in cases if not c["agree"]]
    return not bad, {"cases": len(cases), "disagreeing": bad}


# -- 4. parity solver against strategy enumeration --------------------------------

def _replay_ok(owner, priority, succ, winner, strategy):
    # fix the winners' choices; the opponent must still lose everywhere in the region
    fixed = [[strategy[v]] if v in strategy else list(succ[v]) for v in range(len(owner))]
    again, _ = parity_brute(owner, priority, fixed)
    return all(again[v] == winner[v] for v in range(len(owner)))


def _c4_case(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 8)
    owner = [rng.randint(0, 1) for _ in range(n)]
    priority = [rng.randint(0, 3) for _ in range(n)]
    succ = [sorted(rng.sample(range(n), rng.randint(0, min(3, n)))) for _ in range(n)]
    sol = solve_parity(PlainGame(owner, priority, succ))
    ref, _ = parity_brute(owner, priority, succ)
    sound = all(sol.strategy[v] in succ[v] for v in sol.strategy) and \
        _replay_ok(owner, priority, succ, sol.winner, sol.strategy)
    return {"seed": seed, "agree": sol.winner == ref, "sound": sound}


def criterion_4(n=200):
    cases = pmap(_c4_case, range(n))
    bad = [c["seed"] for c in cases if not (c["agree"] and c["sound"])]
    return not bad, {"cases": len(cases), "failing": bad}


# -- 5. FO reduction ---------------------------------------------------------------

FO_STATE_FACTOR = 6  # pinned: max over the corpus of states / (|phi| * max(1, |V|))
FO_CAPS = (6, 8)


def random_fo(rng, depth, bound, pool=("x", "y", "z")):
    free = [v for v in pool if v in bound]
    if depth == 0 or (free and rng.random() < 0.25):
        if not free:
            v = pool[len(bound)]
            return Exists(v, random_fo(rng, 0, bound + [v], pool))
        x, y = rng.choice(free), rng.choice(free)
        return rng.choice((Lt, Eq))(x, y)
    r = rng.random()
    if r < 0.5 and len(bound) < len(pool):
        v = pool[len(bound)]
        body = random_fo(rng, depth - 1, bound + [v], pool)
        return (Exists if rng.random() < 0.5 else Forall)(v, body)
    if r < 0.8 and free:
        a, b = random_fo(rng, depth - 1, bound, pool), random_fo(rng, depth - 1, bound, pool)
        return (FAnd if rng.random() < 0.5 else FOr)(a, b)
    return FNot(random_fo(rng, depth, bound, pool)) if free else random_fo(rng, depth, bound, pool)


def fo_corpus(n=50, seed=7):
    rng = random.Random(seed)
    out, seen = [], set()
    while len(out) < n:
        phi = to_nnf(random_fo(rng, 3, []))
        if phi.depth() <= 3 and str(phi) not in seen:
            seen.add(str(phi))
            out.append(phi)
    return out


def _c5_case(phi):
    game = compile_fo(phi)
    row = {"formula": str(phi), "q": game.quantifiers, "states": len(game.system.states)}
    ok = True
    for cap in FO_CAPS:
        g = build_phase_game(game.system, game.initial(), game.phase_bound, game.bounds(cap))
        w = solve_parity(g).winner[g.initial]
        truth = fo_eval(phi, game.domain_max(cap))
        row[f"H{cap}"] = {"winner": w, "fo_eval": truth, "phases": g.max_phases_seen(),
                          "positions": len(g)}
        ok &= (w == 0) == truth and g.max_phases_seen() <= game.phase_bound
    size = phi.size() * max(1, len(game.variables))
    row["state_ratio"] = round(len(game.system.states) / size, 3)
    row["ok"] = bool(ok and len(game.system.states) <= FO_STATE_FACTOR * size)
    return row


def criterion_5():
    rows = pmap(_c5_case, fo_corpus())
    bad = [r["formula"] for r in rows if not r["ok"]]
    return not bad, {"rows": rows, "failing": bad,
                     "max_state_ratio": max(r["state_ratio"] for r in rows)}


# -- 6. counter gadgets -------------------------------------------------------------

COUNTER_PREDICATES = {
    # gadget, arity, predicate that the formula negates
    "eq": ("equal", 2, lambda p, u, v: u == v),
    "succ": ("succ", 2, lambda p, u, v: v == u + 1),
    "val": ("valid", 1, lambda p, u, v: True),
    "max": ("last", 1, lambda p, u, v: u == cnt.max_value(p)),
    "min": ("first", 1, lambda p, u, v: u == 0),
}


def _c6_row(job):
    (k, n), name = job
    p = cnt.CounterParams(k, n)
    top = cnt.max_value(p)
    gadget_name, arity, pred = COUNTER_PREDICATES[name]
    lib = cnt.GadgetLibrary(p)
    gadget = getattr(lib, gadget_name)(k, 1)
    sys, phi = cnt.host_system(lib, gadget)
    bad = contexts = nodes = pairs = 0
    for u in range(top + 1):
        for v in range(top + 1) if arity == 2 else (0,):
            w1, w2 = cnt.encode_counter(p, u) + (ZETA,), cnt.encode_counter(p, v) + (ZETA,)
            lc = LocalChecker(sys, ExplorationBounds(context_bound=2 * k,
                                                     stack_cap=max(len(w1), len(w2)) + 4))
            got = lc.holds(Configuration.make("host", w1, w2), phi)
            bad += got != (not pred(p, u, v))
            contexts = max(contexts, lc.max_contexts)
            nodes += len(lc.keys)
            pairs += 1
    return {"k": k, "n": n, "formula": name, "pairs": pairs, "mismatches": bad,
            "max_contexts": contexts, "bound": 2 * k, "nodes": nodes}


def criterion_6():
    jobs = [(kn, name) for kn in ((1, 2), (2, 2)) for name in COUNTER_PREDICATES]
    rows = pmap(_c6_row, jobs)
    ok = all(r["mismatches"] == 0 and r["max_contexts"] <= r["bound"] for r in rows)
    return ok, {"rows": rows}


# -- 7. Turing machine reduction -----------------------------------------------------

TM_FIXTURES = ("accept", "reject", "flip")
TM_NODE_CAP = 5_000_000


def _c7_row(job):
    name, k, eu = job
    m = load_tm(FIXTURES / f"tm_{name}.json")
    c = compile_tm(m, "1", k)
    cells = tape_cells(c.params)
    want = tm_accepts(m, "1", cells) == "accept"
    run = accepting_run(m, "1", cells)
    configs = len(run) if run else 1
    bound = c.report["max_context_switches"]["ctlaccept" if eu else "ctlaccept_prime"]
    answers, contexts, nodes = [], 0, 0
    # stability: one more configuration of room, except where the guessed run
    # space of the write-everything-first formula grows to 256**3
    extras = (0,) if (not eu and k >= 2 and configs >= 2) else (0, 1)
    for extra in extras:
        cap = c.stack_cap_for(configs + extra)
        # one spare context so that exceeding the bound would be observed, not cut
        lc = LocalChecker(c.system, ExplorationBounds(context_bound=bound + 1, stack_cap=cap,
                                                      node_cap=TM_NODE_CAP))
        answers.append(lc.holds(c.initial(eu), c.formula(eu)))
        contexts = max(contexts, lc.max_contexts)
        nodes += len(lc.keys)
    return {"machine": name, "k": k, "formula": "ctlaccept" if eu else "ctlaccept_prime",
            "tm_accepts": want, "holds": answers[0],
            "stable": answers[0] == answers[1] if len(answers) == 2 else None,
            "max_contexts": contexts, "bound": bound, "nodes": nodes,
            "ok": all(a == want for a in answers) and contexts <= bound}


def criterion_7(levels=(1, 2)):
    jobs = [(name, k, eu) for k in levels for name in TM_FIXTURES for eu in (False, True)]
    rows = pmap(_c7_row, jobs)
    return all(r["ok"] for r in rows), {"rows": rows}


# -- 8. round trips and mutations ---------------------------------------------------

def _mutate(rng, word, alphabet):
    w = list(word)
    i = rng.randrange(len(w))
    w[i] = rng.choice([x for x in alphabet if x != w[i]])
    return tuple(w)


def _counter_mutations(k, n, count, seed):
    p = cnt.CounterParams(k, n)
    rng = random.Random(seed)
    lib = cnt.GadgetLibrary(p)
    sys, phi = cnt.host_system(lib, lib.valid(k, 1))
    alphabet = cnt.letters_upto(k) + (ZETA,)
    bad = invalid = 0
    for _ in range(count):
        w = _mutate(rng, cnt.encode_counter(p, rng.randint(0, cnt.max_value(p))) + (ZETA,), alphabet)
        direct = cnt.valid_prefix(p, w)
        lc = LocalChecker(sys, ExplorationBounds(context_bound=2 * k, stack_cap=len(w) + 4))
        gadget = not lc.holds(Configuration.make("host", w, ()), phi)
        bad += gadget != direct
        invalid += not direct
    return bad, invalid


def _config_mutations(k, n, count, seed):
    m = load_tm(FIXTURES / "tm_walk.json")
    g = build_config_gadgets(m, cnt.CounterParams(k, n), "1" * n)
    g.builder.internal("hvalidconf", g.validconf(1).entry)
    sys = g.builder.build("hvalidconf")
    p, rng = g.params, random.Random(seed)
    cells = tape_cells(p)
    alphabet = g.config_letters + (ZETA,)
    bad = invalid = 0
    for _ in range(count):
        tape = tuple(rng.choice(m.tape_alphabet) for _ in range(cells))
        w = _mutate(rng, encode_tm_config(m, p, tape, rng.choice(m.states), rng.randrange(cells)), alphabet)
        direct = is_valid_config(m, p, w)
        lc = LocalChecker(sys, ExplorationBounds(context_bound=2 * k + 2, stack_cap=len(w) + 4))
        gadget = not lc.holds(Configuration.make("hvalidconf", w, ()), g.validconf(1).formula)
        bad += gadget != direct
        invalid += not direct
    return bad, invalid


CONFIG_SAMPLE = 2000


def criterion_8():
    trips = bad_trips = 0
    for k, n in ((1, 1), (1, 2), (2, 1), (2, 2)):
        p = cnt.CounterParams(k, n)
        for v in range(cnt.max_value(p) + 1):
            w = cnt.encode_counter(p, v)
            trips += 1
            bad_trips += cnt.decode_counter(p, w) != v or not cnt.is_valid_counter(p, w)
        m = load_tm(FIXTURES / "tm_walk.json")
        cells = tape_cells(p)
        configs = [(tape, q, h) for tape in itertools.product(m.tape_alphabet, repeat=cells)
                   for q in m.states for h in range(cells)] if cells <= 8 else None
        if configs is None:
            # 15 cells at (2, 2): about 10**6 configurations, so sample them
            rng = random.Random(3)
            configs = [(tuple(rng.choice(m.tape_alphabet) for _ in range(cells)),
                        rng.choice(m.states), rng.randrange(cells)) for _ in range(CONFIG_SAMPLE)]
        for tape, q, h in configs:
            w = encode_tm_config(m, p, tape, q, h)
            trips += 1
            bad_trips += decode_tm_config(m, p, w) != (tape, q, h) or not is_valid_config(m, p, w)
    jobs = [("counter", 1, 2, 250), ("counter", 2, 2, 250), ("config", 1, 1, 250), ("config", 1, 2, 250)]

    def run(job):
        kind, k, n, count = job
        fn = _counter_mutations if kind == "counter" else _config_mutations
        bad, invalid = fn(k, n, count, seed=k * 10 + n)
        return {"kind": kind, "k": k, "n": n, "mutations": count, "invalid": invalid, "mismatches": bad}

    rows = pmap(run, jobs)
    ok = bad_trips == 0 and all(r["mismatches"] == 0 for r in rows)
    return ok, {"round_trips": trips, "round_trip_failures": bad_trips, "mutations": rows}


# -- 9. determinism across thread counts ------------------------------------------

def criterion_9(runs=(criterion_1, criterion_5, criterion_7)):
    old = os.environ.get("MPDS_VERIFY_THREADS")
    digests = {}
    try:
        for threads in ("1", "4"):
            os.environ["MPDS_VERIFY_THREADS"] = threads
            digests[threads] = [json.dumps(fn()[1], sort_keys=True) for fn in runs]
    finally:
        if old is None:
            os.environ.pop("MPDS_VERIFY_THREADS", None)
        else:
            os.environ["MPDS_VERIFY_THREADS"] = old
    same = [a == b for a, b in zip(digests["1"], digests["4"])]
    return all(same), {"criteria": [fn.__name__ for fn in runs], "identical": same,
                       "bytes": [len(d) for d in digests["1"]]}


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 10)}


if __name__ == "__main__":
    for i in map(int, sys.argv[1:] or CRITERIA):
        ok, rep = CRITERIA[i]()
        print(f"criterion {i}: {'PASS' if ok else 'FAIL'}")
        print(json.dumps(rep, sort_keys=True)[:2000])
