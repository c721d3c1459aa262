"""Command-line entry point: ``mpds-verify <subcommand> ...``.

Exit codes: 0 true / player 0 / success, 1 false / player 1, 2 unstable or a
budget was exhausted, 3 input error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from . import counters as cnt
from .ctl import CtlSyntaxError, LocalChecker, NodeBudgetExceeded, check_mask, parse_ctl
from .explorer import ExplorationBounds, explore, reachable
from .fo import FoSyntaxError, compile_fo, parse_fo, to_nnf
from .games import build_phase_game, solve_parity
from .mpds import Configuration, MpdsError, dump_mpds, load_mpds, successors

EXIT_TRUE, EXIT_FALSE, EXIT_UNSTABLE, EXIT_INPUT = 0, 1, 2, 3

DEFAULT_CONTEXT_BOUND = 8
DEFAULT_STACK_CAP = 64
DEFAULT_NODE_CAP = 10**6
DEFAULT_DELTA = 8


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_system(path):
    try:
        return load_mpds(_load_json(path))
    except MpdsError as exc:
        raise InputError(str(exc)) from exc


def _bounds(a, stack_cap=None) -> ExplorationBounds:
    try:
        return ExplorationBounds(context_bound=getattr(a, "context_bound", DEFAULT_CONTEXT_BOUND),
                                 stack_cap=a.stack_cap if stack_cap is None else stack_cap,
                                 node_cap=a.node_cap)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _caps(a) -> dict:
    out = {"stack_cap": a.stack_cap, "node_cap": a.node_cap}
    for name in ("context_bound", "phase_bound", "stability_delta"):
        if hasattr(a, name):
            out[name] = getattr(a, name)
    return out


def _report(answer, truncated=False, stable=True, caps=None, **metrics) -> dict:
    base = {"nodes": 0, "edges": 0, "max_contexts_seen": 0, "max_phases_seen": 0, "states_emitted": 0}
    base.update(metrics)
    return {"answer": answer, "truncated": bool(truncated), "stable": bool(stable),
            "caps": caps or {}, "metrics": base}


def _emit(a, report: dict, extra_text=()):
    if a.json:
        print(json.dumps(report, sort_keys=True))
        return
    for line in extra_text:
        print(line)
    print(f"answer: {report['answer']}")
    print(f"truncated: {str(report['truncated']).lower()}  stable: {str(report['stable']).lower()}")
    if report["caps"]:
        print("caps: " + " ".join(f"{k}={v}" for k, v in sorted(report["caps"].items())))
    print("metrics: " + " ".join(f"{k}={v}" for k, v in sorted(report["metrics"].items())))


def _verdict(report) -> int:
    if report.get("budget_exceeded") or not report["stable"]:
        return EXIT_UNSTABLE
    ans = report["answer"]
    if isinstance(ans, bool):
        return EXIT_TRUE if ans else EXIT_FALSE
    return EXIT_TRUE if ans == 0 else EXIT_FALSE


# -- subcommands ------------------------------------------------------------------

def cmd_simulate(a) -> int:
    sys_ = _load_system(a.mpds)
    c = sys_.initial_configuration()
    rng = random.Random(a.seed)
    run = [str(c)]
    taken = []
    for _ in range(a.steps):
        options = successors(sys_, c)
        if not options:
            break
        t, c = options[0] if a.seed is None else rng.choice(options)
        taken.append(str(t))
        run.append(str(c))
    if a.json:
        print(json.dumps({"configurations": run, "transitions": taken, "deadlock": len(taken) < a.steps},
                         sort_keys=True))
    else:
        print(run[0])
        for t, c_ in zip(taken, run[1:]):
            print(f"  --{t}-->")
            print(c_)
    return EXIT_TRUE


def _reach_once(sys_, init, b, target):
    g = explore(sys_, init, b)
    found, witness = reachable(g, target)
    return g, found, witness


def cmd_reach(a) -> int:
    sys_ = _load_system(a.mpds)
    if a.target not in sys_.states:
        raise InputError(f"unknown target state {a.target!r}")
    init = sys_.initial_configuration()
    g, found, witness = _reach_once(sys_, init, _bounds(a), a.target)
    stable = True
    if a.stability_delta > 0:
        _, again, _ = _reach_once(sys_, init, _bounds(a, _widen(a.stack_cap, a.stability_delta)), a.target)
        stable = again == found
    rep = _report(found, g.truncated, stable, _caps(a), nodes=len(g), edges=g.edge_count,
                  max_contexts_seen=g.max_contexts())
    rep["witness"] = [str(t) for t in witness] if witness is not None else None
    if g.capped:
        rep["budget_exceeded"] = True
    if a.dump_graph:
        _dump(a.dump_graph, g.export())
    _emit(a, rep, [f"witness: {' ; '.join(rep['witness'])}"] if witness else [])
    return _verdict(rep)


def _widen(cap, delta):
    return cap + delta


def _dump(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)


def _formula_text(a):
    if a.formula_file:
        with open(a.formula_file) as fh:
            return fh.read()
    if a.formula is None:
        raise InputError("give --formula or --formula-file")
    return a.formula


def cmd_check_ctl(a) -> int:
    sys_ = _load_system(a.mpds)
    try:
        phi = parse_ctl(_formula_text(a))
    except CtlSyntaxError as exc:
        raise InputError(str(exc)) from exc
    init = sys_.initial_configuration()

    def run(b):
        g = explore(sys_, init, b)
        return g, bool(check_mask(g, phi)[g.initial])

    g, ans = run(_bounds(a))
    stable = True
    if a.stability_delta > 0:
        stable = run(_bounds(a, _widen(a.stack_cap, a.stability_delta)))[1] == ans
    rep = _report(ans, g.truncated, stable, _caps(a), nodes=len(g), edges=g.edge_count,
                  max_contexts_seen=g.max_contexts())
    if g.capped:
        rep["budget_exceeded"] = True
    if a.dump_graph:
        _dump(a.dump_graph, g.export())
    _emit(a, rep)
    return _verdict(rep)


def cmd_solve_game(a) -> int:
    sys_ = _load_system(a.mpds)
    if not sys_.game_mode:
        raise InputError("solve-game needs owner and priority maps")
    init = sys_.initial_configuration()

    def run(cap):
        b = ExplorationBounds(context_bound=10**9, stack_cap=cap, node_cap=a.node_cap)
        g = build_phase_game(sys_, init, a.phase_bound, b)
        return g, solve_parity(g).winner[g.initial]

    try:
        g, w = run(a.stack_cap)
        stable = True
        if a.stability_delta > 0:
            stable = run(_widen(a.stack_cap, a.stability_delta))[1] == w
    except MpdsError as exc:
        raise InputError(str(exc)) from exc
    rep = _report(w, g.truncated, stable, _caps(a), nodes=len(g), edges=g.edge_count,
                  max_phases_seen=g.max_phases_seen())
    if g.capped:
        rep["budget_exceeded"] = True
    _emit(a, rep, [f"winner: player {w}"])
    return _verdict(rep)


def cmd_compile_fo(a) -> int:
    try:
        phi = to_nnf(parse_fo(a.formula, sentence=a.solve))
        game = compile_fo(phi)
    except (FoSyntaxError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    sys_ = game.system
    report = {"states": len(sys_.states), "transitions": len(sys_.transitions),
              "quantifiers": game.quantifiers, "phase_bound": game.phase_bound,
              "formula": str(phi)}
    if a.output:
        _dump(a.output, dump_mpds(sys_))
    if not a.solve:
        if a.json:
            print(json.dumps(report, sort_keys=True))
        else:
            for k, v in report.items():
                print(f"{k}: {v}")
        return EXIT_TRUE

    def run(cap):
        g = build_phase_game(sys_, game.initial(), game.phase_bound, game.bounds(cap, a.node_cap))
        return g, solve_parity(g).winner[g.initial]

    try:
        g, w = run(a.stack_cap)
        stable = True
        if a.stability_delta > 0:
            stable = run(_widen(a.stack_cap, a.stability_delta))[1] == w
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    caps = {"stack_cap": a.stack_cap, "node_cap": a.node_cap, "phase_bound": game.phase_bound,
            "stability_delta": a.stability_delta, "domain_max": game.domain_max(a.stack_cap)}
    rep = _report(w, g.truncated, stable, caps, nodes=len(g), edges=g.edge_count,
                  max_phases_seen=g.max_phases_seen(), states_emitted=len(sys_.states))
    rep["compile"] = report
    if g.capped:
        rep["budget_exceeded"] = True
    _emit(a, rep, [f"winner: player {w}"])
    return _verdict(rep)


def cmd_compile_tm(a) -> int:
    from .tm import TmError, accepting_run, compile_tm, load_tm, tape_cells

    try:
        m = load_tm(a.tm)
        compiled = compile_tm(m, a.input, a.level, guess=a.guess)
    except (OSError, json.JSONDecodeError, TmError, cnt.ScaleError) as exc:
        raise InputError(str(exc)) from exc
    if a.output:
        _dump(a.output, dump_mpds(compiled.system))
    report = dict(compiled.report)
    if not a.check:
        if a.json:
            print(json.dumps(report, sort_keys=True))
        else:
            for k in ("level", "tape_cells", "positions", "config_length", "state_count",
                      "transition_count", "max_context_switches", "formula_size"):
                print(f"{k}: {report[k]}")
        return EXIT_TRUE
    run = accepting_run(m, a.input, tape_cells(compiled.params))
    configs = a.configs or (len(run) if run else 1)
    cap = a.stack_cap or compiled.stack_cap_for(configs)
    bound = report["max_context_switches"]["ctlaccept" if a.eu else "ctlaccept_prime"]

    def check(stack_cap):
        b = ExplorationBounds(context_bound=bound, stack_cap=stack_cap, node_cap=a.node_cap)
        lc = LocalChecker(compiled.system, b)
        return lc, lc.holds(compiled.initial(a.eu), compiled.formula(a.eu))

    lc, ans, stable, budget = None, None, False, None
    try:
        lc, ans = check(cap)
        stable = True
        if a.stability_delta > 0:
            stable = check(cap + a.stability_delta * compiled.config_length())[1] == ans
    except NodeBudgetExceeded:
        # the answer (if any) stands, but it is not confirmed
        budget = "check" if lc is None else "stability"
    caps = {"stack_cap": cap, "node_cap": a.node_cap, "context_bound": bound,
            "stability_delta_configs": a.stability_delta}
    rep = _report(ans, bool(lc and lc.frontier_hit), stable, caps,
                  nodes=len(lc.keys) if lc else 0,
                  max_contexts_seen=lc.max_contexts if lc else 0,
                  states_emitted=report["state_count"])
    rep["minimal_stack_cap"] = compiled.stack_cap_for(len(run)) if run else None
    rep["formula"] = "ctlaccept" if a.eu else "ctlaccept_prime"
    if budget:
        rep["budget_exceeded"] = budget
    _emit(a, rep)
    return _verdict(rep)


def cmd_counters(a) -> int:
    try:
        p = cnt.CounterParams(a.level, a.base)
        if a.action == "encode":
            if a.value is None:
                raise InputError("encode needs --value")
            print(" ".join(cnt.encode_counter(p, a.value)))
            return EXIT_TRUE
        if a.word is None:
            raise InputError(f"{a.action} needs --word")
        word = tuple(a.word.split())
        if a.action == "validate":
            ok = cnt.is_valid_counter(p, word)
            print("valid" if ok else "invalid")
            return EXIT_TRUE if ok else EXIT_FALSE
        if a.action == "decode":
            print(cnt.decode_counter(p, word))
        else:
            print(" ".join(cnt.increment_counter(p, word)))
        return EXIT_TRUE
    except (cnt.CounterError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def cmd_oracle(a) -> int:
    from . import oracles

    if a.what == "fo":
        phi = parse_fo(a.formula, sentence=True)
        ans = oracles.fo_eval(phi, a.domain_max)
        print(json.dumps({"answer": ans}))
        return EXIT_TRUE if ans else EXIT_FALSE
    from .tm import load_tm

    ans = oracles.tm_accepts(load_tm(a.tm), a.input, a.space)
    print(json.dumps({"answer": ans}))
    return {"accept": EXIT_TRUE, "reject": EXIT_FALSE}.get(ans, EXIT_UNSTABLE)


# -- parser ---------------------------------------------------------------------

def _caps_args(p, context=True, stack_default=DEFAULT_STACK_CAP):
    if context:
        p.add_argument("--context-bound", type=int, default=DEFAULT_CONTEXT_BOUND)
    p.add_argument("--stack-cap", type=int, default=stack_default)
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("--stability-delta", type=int, default=DEFAULT_DELTA)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="mpds-verify", description=__doc__.splitlines()[0])
    top.add_argument("--json", action="store_true", help="print one JSON object")
    sub = top.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", help="print one run of a system")
    p.add_argument("--mpds", required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, help="pick moves at random (default: first enabled move)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("reach", help="control-state reachability under the caps")
    p.add_argument("--mpds", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--dump-graph")
    _caps_args(p)
    p.set_defaults(fn=cmd_reach)

    p = sub.add_parser("check-ctl", help="CTL at the initial configuration")
    p.add_argument("--mpds", required=True)
    p.add_argument("--formula")
    p.add_argument("--formula-file")
    p.add_argument("--dump-graph")
    _caps_args(p)
    p.set_defaults(fn=cmd_check_ctl)

    p = sub.add_parser("solve-game", help="bounded-phase parity game")
    p.add_argument("--mpds", required=True)
    p.add_argument("--phase-bound", type=int, required=True)
    _caps_args(p, context=False)
    p.set_defaults(fn=cmd_solve_game)

    p = sub.add_parser("compile-fo", help="FO(<) sentence to a parity game")
    p.add_argument("--formula", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--solve", action="store_true")
    p.add_argument("--report", action="store_true", help="accepted for compatibility; the report is always printed")
    _caps_args(p, context=False, stack_default=6)
    p.set_defaults(fn=cmd_compile_fo)

    p = sub.add_parser("compile-tm", help="Turing machine to a system and CTL formulas")
    p.add_argument("--tm", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--eu", action="store_true", help="check the EU formula instead of the EF/EX one")
    p.add_argument("--check", action="store_true")
    p.add_argument("--guess", choices=("skeleton", "free"), default="skeleton")
    p.add_argument("--configs", type=int, help="configurations the stack cap must hold")
    p.add_argument("--stack-cap", type=int, help="overrides --configs")
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("--stability-delta", type=int, default=1, help="extra configurations for the stability re-run")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_compile_tm)

    p = sub.add_parser("counters", help="nested counter utilities")
    p.add_argument("action", choices=("encode", "decode", "validate", "inc"))
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--value", type=int)
    p.add_argument("--word")
    p.set_defaults(fn=cmd_counters)

    p = sub.add_parser("oracle")  # debugging aid, deliberately undocumented
    p.add_argument("what", choices=("fo", "tm"))
    p.add_argument("--formula")
    p.add_argument("--domain-max", type=int, default=3)
    p.add_argument("--tm")
    p.add_argument("--input", default="")
    p.add_argument("--space", type=int, default=1)
    p.set_defaults(fn=cmd_oracle)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # --json is accepted anywhere on the line
    use_json = "--json" in argv
    argv = [x for x in argv if x != "--json"]
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_TRUE
    a.json = use_json
    try:
        return a.fn(a)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
