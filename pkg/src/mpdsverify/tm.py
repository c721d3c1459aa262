"""Space-bounded Turing machines as nested-counter configurations on a stack.

A configuration of a machine with ``Max(k, n)`` tape cells is the string
``c_0 .. c_{h-1} q c_h .. c_{Max-1}`` over tape letters and states: the state
letter sits in its own position, immediately left of the scanned cell.  Every
one of its ``Max + 1`` positions is prefixed by its address as a level-k
counter.  On a stack the right end of the tape is on top, so the word lists
positions from address ``Max`` down to 0, then ``zeta``.

The gadgets follow the counter convention: a formula holds at a host state
with an internal move into the gadget exactly when the property FAILS.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .counters import (
    Q_ERR,
    Q_WIN,
    CounterError,
    CounterParams,
    Gadget,
    GadgetLibrary,
    ScaleError,
    decode_counter,
    encode_counter,
    is_valid_counter,
    letters_upto,
    max_value,
)
from .ctl import And, EFf, EUf, EXf, Formula, Not, Or, Prop
from .mpds import BOTTOM, WILDCARD, ZETA, Configuration, MpdsSystem, SystemBuilder, is_reserved

END = None  # marks a window slot beyond the left end of the tape
POSITION_LIMIT = 4096


class TmError(ValueError):
    pass


@dataclass(frozen=True)
class TmTransition:
    src: str
    read: str
    dst: str
    write: Optional[str] = None
    move: Optional[str] = None


@dataclass(frozen=True)
class TmMachine:
    states: tuple
    tape_alphabet: tuple
    blank: str
    initial: str
    finals: frozenset
    transitions: tuple

    def __post_init__(self):
        q, g = set(self.states), set(self.tape_alphabet)
        if q & g:
            raise TmError(f"states and tape letters overlap: {sorted(q & g)}")
        for s in q | g:
            if is_reserved(s):
                raise TmError(f"{s!r} is a reserved stack symbol")
        if self.blank not in g:
            raise TmError("blank is not a tape letter")
        if self.initial not in q or not set(self.finals) <= q:
            raise TmError("initial and final states must be states")
        for t in self.transitions:
            if t.src not in q or t.dst not in q or t.read not in g:
                raise TmError(f"transition {t} uses unknown symbols")
            if (t.write is None) == (t.move is None):
                raise TmError(f"transition {t} must either write or move, not both")
            if t.write is not None and t.write not in g:
                raise TmError(f"transition {t} writes an unknown letter")
            if t.move is not None and t.move not in ("L", "R"):
                raise TmError(f"transition {t} moves {t.move!r}")

    @property
    def sigma(self) -> tuple:
        return tuple(self.tape_alphabet) + tuple(self.states)

    def window_moves(self, a, q, b) -> set:
        """Successor windows of tape-order window ``a q b`` (``a`` may be END)."""
        out = set()
        for t in self.transitions:
            if t.src != q or t.read != b:
                continue
            if t.write is not None:
                out.add((a, t.dst, t.write))
            elif t.move == "R":
                out.add((a, b, t.dst))
            elif a is not END:
                out.add((t.dst, a, b))
        return out


def load_tm(doc) -> TmMachine:
    """Machine from a dict (the JSON document form) or a path to one."""
    if isinstance(doc, (str, os.PathLike)):
        with open(doc) as fh:
            doc = json.load(fh)
    try:
        trans = []
        for t in doc["transitions"]:
            action = t["action"]
            if set(action) - {"write", "move"} or len(action) != 1:
                raise TmError(f"action must be exactly one of write/move: {action}")
            trans.append(TmTransition(str(t["from"]), str(t["read"]), str(t["to"]),
                                      action.get("write"), action.get("move")))
        return TmMachine(
            states=tuple(map(str, doc["states"])),
            tape_alphabet=tuple(map(str, doc["tape_alphabet"])),
            blank=str(doc["blank"]),
            initial=str(doc["initial"]),
            finals=frozenset(map(str, doc["finals"])),
            transitions=tuple(trans),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise TmError(f"malformed machine document: {exc}") from exc


def dump_tm(m: TmMachine) -> dict:
    return {
        "states": list(m.states),
        "tape_alphabet": list(m.tape_alphabet),
        "blank": m.blank,
        "initial": m.initial,
        "finals": sorted(m.finals),
        "transitions": [
            {"from": t.src, "read": t.read, "to": t.dst,
             "action": {"write": t.write} if t.write is not None else {"move": t.move}}
            for t in m.transitions
        ],
    }


# -- direct encoding -----------------------------------------------------------

def tape_cells(p: CounterParams) -> int:
    return max_value(p)


def positions(p: CounterParams) -> int:
    return max_value(p) + 1


def config_string(tape, state, head) -> tuple:
    tape = tuple(tape)
    return tape[:head] + (state,) + tape[head:]


def encode_tm_config(m: TmMachine, p: CounterParams, tape, state, head) -> tuple:
    tape = tuple(tape)
    if len(tape) != tape_cells(p):
        raise TmError(f"tape has {len(tape)} cells, expected {tape_cells(p)}")
    if state not in m.states:
        raise TmError(f"unknown state {state!r}")
    if any(c not in m.tape_alphabet for c in tape):
        raise TmError("tape holds a letter outside the tape alphabet")
    if not 0 <= head < len(tape):
        raise TmError(f"head {head} off the tape")
    s = config_string(tape, state, head)
    word = []
    for addr in range(len(s) - 1, -1, -1):
        word.extend(encode_counter(p, addr))
        word.append(s[addr])
    word.append(ZETA)
    return tuple(word)


def initial_config(m: TmMachine, p: CounterParams, w) -> tuple:
    w = tuple(w)
    if len(w) > tape_cells(p):
        raise TmError("input longer than the tape")
    if not w:
        raise TmError("empty input")
    tape = w + (m.blank,) * (tape_cells(p) - len(w))
    return encode_tm_config(m, p, tape, m.initial, 0)


def _config_blocks(m: TmMachine, p: CounterParams, word):
    """(address word, letter) pairs of the leading configuration, or None."""
    sigma = set(m.sigma)
    addr_letters = set(letters_upto(p.level))
    out, cur = [], []
    for i, s in enumerate(word):
        if s in addr_letters:
            cur.append(s)
        elif s in sigma:
            out.append((tuple(cur), s))
            cur = []
        else:
            if cur or s != ZETA:
                return None
            return out
    return None


def is_valid_config(m: TmMachine, p: CounterParams, word) -> bool:
    """Does ``word`` begin with a valid configuration followed by zeta?"""
    blocks = _config_blocks(m, p, tuple(word))
    top = tape_cells(p)
    if blocks is None or len(blocks) != top + 1:
        return False
    for i, (addr, _) in enumerate(blocks):
        if not is_valid_counter(p, addr) or decode_counter(p, addr) != top - i:
            return False
    states = [i for i, (_, s) in enumerate(blocks) if s in m.states]
    return len(states) == 1 and states[0] != 0


def decode_tm_config(m: TmMachine, p: CounterParams, word):
    """``(tape, state, head)`` of the leading configuration of ``word``."""
    word = tuple(word)
    if not is_valid_config(m, p, word):
        raise TmError("not a valid configuration")
    s = [sym for _, sym in reversed(_config_blocks(m, p, word))]
    head = next(i for i, x in enumerate(s) if x in m.states)
    return tuple(s[:head] + s[head + 1:]), s[head], head


def config_successors(m: TmMachine, tape, state, head) -> list:
    tape = tuple(tape)
    out = []
    for t in m.transitions:
        if t.src != state or t.read != tape[head]:
            continue
        if t.write is not None:
            out.append((tape[:head] + (t.write,) + tape[head + 1:], t.dst, head))
        else:
            nh = head + (1 if t.move == "R" else -1)
            if 0 <= nh < len(tape):
                out.append((tape, t.dst, nh))
    return out


def accepting_run(m: TmMachine, w, cells: int, step_cap: int = 10**6):
    """Shortest accepting run as a list of (tape, state, head), or None.

    Breadth-first over the machine's own configurations; used to size stack
    caps for the reduction, not to decide it.
    """
    w = tuple(w)
    start = (w + (m.blank,) * (cells - len(w)), m.initial, 0)
    parent = {start: None}
    layer = [start]
    for _ in range(step_cap + 1):
        nxt = []
        for cfg in layer:
            if cfg[1] in m.finals:
                run = []
                while cfg is not None:
                    run.append(cfg)
                    cfg = parent[cfg]
                return run[::-1]
            for succ in config_successors(m, *cfg):
                if succ not in parent:
                    parent[succ] = cfg
                    nxt.append(succ)
        if not nxt:
            return None
        layer = nxt
    return None


def is_move(m: TmMachine, p: CounterParams, older, newer) -> bool:
    """Direct check that the configuration ``older`` moves to ``newer``."""
    a, b = decode_tm_config(m, p, older), decode_tm_config(m, p, newer)
    return b in config_successors(m, *a)


# -- gadgets ---------------------------------------------------------------------

def _err_from(q):
    return EXf(And(Prop(q), EFf(Prop(Q_ERR))))


def _win_from(q):
    return EXf(And(Prop(q), EFf(Prop(Q_WIN))))


@dataclass
class ConfigGadgets:
    """Configuration gadgets for machine ``m`` at counter level ``params.level``.

    ``guess`` selects how configurations are guessed: "skeleton" writes the
    fixed address layout and guesses only the letters, "free" pushes any
    sequence of address and machine letters up to the stack cap.
    """

    machine: TmMachine
    params: CounterParams
    word: tuple
    guess: str = "skeleton"
    builder: SystemBuilder = field(default_factory=lambda: SystemBuilder(2))
    _memo: dict = field(default_factory=dict)

    def __post_init__(self):
        if positions(self.params) > POSITION_LIMIT:
            raise ScaleError(f"{positions(self.params)} positions exceed {POSITION_LIMIT}")
        if self.guess not in ("skeleton", "free"):
            raise ValueError(f"unknown guess mode {self.guess!r}")
        self.word = tuple(self.word)
        if len(self.word) > tape_cells(self.params):
            raise TmError("input longer than the tape")
        self.lib = GadgetLibrary(self.params, self.builder, (ZETA,), "cnt", tuple(self.machine.sigma))
        self.k = self.params.level
        self.addr = letters_upto(self.k)
        self.sigma = tuple(self.machine.sigma)
        self.gamma = tuple(self.machine.tape_alphabet)
        self.qm = tuple(self.machine.states)
        self.config_letters = self.addr + self.sigma

    def _name(self, *parts) -> str:
        return ":".join(["tm", *map(str, parts)])

    def _pops(self, src, syms, stack, dst):
        for s in syms:
            self.builder.pop(src, s, dst, stack)

    def _noops(self, src, syms, stack, dst):
        for s in syms:
            self.builder.noop(src, s, stack, dst)

    def _memoised(self, key, build):
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = build()
        return hit

    def _wrap(self, name, inner: Gadget) -> Gadget:
        q = self._name(name)
        self.builder.internal(q, inner.entry)
        return Gadget(q, EXf(And(Prop(q), inner.formula)), inner.contexts)

    # -- writers -----------------------------------------------------------------
    def writer(self, tag, stack, dst) -> str:
        """States pushing zeta and then a guessed configuration on ``stack``,
        ending in ``dst``; returns the entry state."""
        b = self.builder
        entry = self._name("write", tag)
        body = self._name("write", tag, "body")
        b.push(entry, WILDCARD, body, stack, ZETA)
        if self.guess == "free":
            for s in self.config_letters:
                b.push(body, WILDCARD, body, stack, s)
            b.internal(body, dst)
            return entry
        # bottom position first: letter, then its address bottom letter first
        here = body
        count = positions(self.params)
        step = 0
        for addr in range(count):
            nxt = self._name("write", tag, step + 1)
            for s in self.sigma:
                b.push(here, WILDCARD, nxt, stack, s)
            here, step = nxt, step + 1
            enc = encode_counter(self.params, addr)
            for sym in reversed(enc):
                nxt = self._name("write", tag, step + 1)
                b.push(here, WILDCARD, nxt, stack, sym)
                here, step = nxt, step + 1
        b.internal(here, dst)
        return entry

    # -- validity --------------------------------------------------------------------
    def validconf(self, stack: int = 1) -> Gadget:
        return self._memoised(("validconf", stack), lambda: self._build_validconf(stack))

    def _build_validconf(self, s):
        b = self.builder
        k = self.k
        entry = self._name("validconf", s)
        nm = lambda *parts: self._name("validconf", s, *parts)  # noqa: E731
        counter = self.lib.valid(k + 1, s)
        b.internal(entry, counter.entry)

        # zeta follows the last block
        zeta = self.lib._skip_blocks(("tm", "validconf", s, "zeta"), k + 1, s)
        zchk = nm("zeta", "chk")
        b.internal(entry, zchk)
        b.internal(zchk, zeta)
        self._noops(zeta, tuple(x for x in self.lib.symbols if x not in self.config_letters
                                and x != ZETA) + (BOTTOM,), s, Q_ERR)

        # exactly one state letter
        c0, c1 = nm("count", 0), nm("count", 1)
        b.internal(entry, c0)
        self._pops(c0, self.addr + self.gamma, s, c0)
        self._pops(c1, self.addr + self.gamma, s, c1)
        self._pops(c0, self.qm, s, c1)
        self._pops(c1, self.qm, s, Q_ERR)
        self._noops(c0, tuple(x for x in self.lib.symbols if x not in self.config_letters) + (BOTTOM,),
                    s, Q_ERR)

        # the state is not the rightmost position
        top = nm("top")
        b.internal(entry, top)
        self._pops(top, self.addr, s, top)
        self._pops(top, self.qm, s, Q_ERR)

        phi = EXf(And(Prop(entry), Or(counter.formula, _err_from(zchk), _err_from(c0), _err_from(top))))
        return Gadget(entry, phi, counter.contexts)

    # -- init / final / equality ---------------------------------------------------
    def init(self) -> Gadget:
        return self._memoised(("init",), self._build_init)

    def _build_init(self):
        b = self.builder
        m, p = self.machine, self.params
        s = config_string(self.word + (m.blank,) * (tape_cells(p) - len(self.word)), m.initial, 0)
        entry = self._name("init")
        here = entry
        for addr in range(len(s) - 1, -1, -1):
            b.state(here)
            self._pops(here, self.addr, 1, here)
            nxt = self._name("init", addr) if addr else self._name("init", "done")
            b.pop(here, s[addr], nxt, 1)
            self._pops(here, tuple(x for x in self.sigma if x != s[addr]), 1, Q_ERR)
            here = nxt
        b.state(here)
        return Gadget(entry, _err_from(entry), 1)

    def final(self) -> Gadget:
        return self._memoised(("final",), self._build_final)

    def _build_final(self):
        q = self._name("final")
        self.builder.state(q)
        self._pops(q, self.addr + self.gamma, 1, q)
        self._pops(q, tuple(x for x in self.qm if x not in self.machine.finals), 1, Q_ERR)
        return Gadget(q, _err_from(q), 1)

    def eqconf(self) -> Gadget:
        return self._memoised(("eqconf",), lambda: self._wrap("eqconf", self.lib.equal(self.k + 1, 1)))

    # -- one machine move between stack 1 (older) and stack 2 (newer) ---------------
    def _simple(self):
        """Some position whose neighbourhood in the older configuration holds
        no state letter differs between the two stacks."""
        b = self.builder
        nm = lambda *parts: self._name("simple", *parts)  # noqa: E731
        entry, mid, afterq, final = nm(), nm("addr"), nm("afterq"), nm("f")
        b.state(entry)
        self._pops(entry, self.addr, 1, mid)
        self._pops(afterq, self.addr, 1, mid)
        self._pops(mid, self.addr, 1, mid)
        self._pops(mid, self.gamma, 1, entry)
        self._pops(mid, self.qm, 1, afterq)
        b.internal(entry, final)

        # the position below the compared one holds no state letter either
        nf0, nf1, nf2 = nm("notfromq"), nm("notfromq", 1), nm("notfromq", 2)
        b.internal(final, nf0)
        self._pops(nf0, self.addr, 1, nf0)
        self._pops(nf0, self.sigma, 1, nf1)
        self._pops(nf1, self.addr, 1, nf2)
        self._pops(nf2, self.addr, 1, nf2)
        self._pops(nf2, self.gamma, 1, Q_WIN)
        b.noop(nf1, ZETA, 1, Q_WIN)

        rs = self.lib._skip_blocks(("tm", "rsimple"), self.k + 1, 2)
        rsf = nm("r", "f")
        b.internal(final, rs)
        b.internal(rs, rsf)
        eq = self.lib.equal(self.k, 1)
        b.internal(rsf, eq.entry)
        rc = nm("rcchkn")
        b.internal(rsf, rc)
        self._pops(rc, self.addr, 2, rc)
        for e in self.sigma:
            mid2 = nm("rcchkn", e)
            b.pop(rc, e, mid2, 2)
            self._pops(mid2, self.addr, 1, mid2)
            self._pops(mid2, tuple(d for d in self.gamma if d != e), 1, Q_ERR)
        phi = EFf(And(Prop(final), _win_from(nf0), EXf(And(
            Prop(rs), EFf(And(Prop(rsf), Not(eq.formula), _err_from(rc)))))))
        return entry, phi, 2 + eq.contexts

    def _window(self, side, stack, win):
        """State reaching q_win iff the next three letters on ``stack`` are ``win``."""
        tag = "-".join("END" if x is END else x for x in win)
        q = self._name(side, tag)
        if q in self._memo:
            return q
        b = self.builder
        here = q
        for i, x in enumerate(win):
            b.state(here)
            self._pops(here, self.addr, stack, here)
            nxt = Q_WIN if i == 2 else self._name(side, tag, i + 1)
            if x is END:
                b.noop(here, ZETA, stack, nxt)
            else:
                b.pop(here, x, nxt, stack)
            here = nxt
        self._memo[q] = q
        return q

    def _hard(self):
        """The window around the state letter is not transformed by any move."""
        b = self.builder
        m = self.machine
        entry = self._name("hard")
        rh = self.lib._skip_blocks(("tm", "qhard"), self.k + 1, 1)
        b.internal(entry, rh)
        rhard = self.lib._skip_blocks(("tm", "rhard"), self.k + 1, 2)
        b.internal(rh, rhard)
        final = self._name("hard", "f")
        b.internal(rhard, final)
        eq = self.lib.equal(self.k, 1)
        b.internal(final, eq.entry)
        # windows are read top-first: right neighbour, state, left neighbour
        lefts = self.gamma + (END,)
        newer = [w for w in product(self.sigma, self.sigma, self.sigma + (END,))
                 if sum(x in m.states for x in w) == 1]
        cases = []
        for x, y, z in product(self.gamma, self.qm, lefts):
            ok = {tuple(reversed(t)) for t in m.window_moves(z, y, x)}
            bad = [w for w in newer if (w[2] is END) == (z is END) and w not in ok]
            if not bad:
                continue
            qw = self._window("qwin", 1, (x, y, z))
            b.internal(final, qw)
            rws = []
            for w in bad:
                rw = self._window("rwin", 2, w)
                b.internal(final, rw)
                rws.append(_win_from(rw))
            cases.append(And(_win_from(qw), Or(*rws)))
        if cases:
            phi = EFf(And(Prop(final), Not(eq.formula), Or(*cases)))
        else:  # every window pair is a legal move
            phi = And(Prop(final), Not(Prop(final)))
        return entry, phi, 2 + eq.contexts

    def move(self) -> Gadget:
        """Holds at a host iff stack 1's configuration does not move to stack 2's."""
        return self._memoised(("move",), self._build_move)

    def _build_move(self):
        b = self.builder
        q = self._name("move")
        s_entry, s_phi, s_ctx = self._simple()
        h_entry, h_phi, h_ctx = self._hard()
        b.internal(q, s_entry)
        b.internal(q, h_entry)
        phi = EXf(And(Prop(q), Or(EXf(And(Prop(s_entry), s_phi)), EXf(And(Prop(h_entry), h_phi)))))
        return Gadget(q, phi, max(s_ctx, h_ctx))

    def step(self) -> Gadget:
        """Holds iff the top configuration of stack 1 is not reached by one
        move from the configuration below it."""
        return self._memoised(("step",), self._build_step)

    def _build_step(self):
        b = self.builder
        q = self._name("step")
        clear, chk = self._name("step", "clear"), self._name("guessconfchk")
        b.state(q)
        b.internal(q, clear)
        self._pops(clear, self.lib.symbols, 2, clear)
        w = self.writer("copy", 2, chk)
        b.noop(clear, BOTTOM, 2, w)
        valid2, eq = self.validconf(2), self.eqconf()
        b.internal(chk, valid2.entry)
        b.internal(chk, eq.entry)
        rc, rc2, rcf = self._name("rcmove"), self._name("rcmove", "z"), self._name("rcmovef")
        b.internal(chk, rc)
        self._pops(rc, self.config_letters, 1, rc)
        b.pop(rc, ZETA, rc2, 1)
        self._noops(rc2, self.config_letters, 1, rcf)
        mv = self.move()
        b.internal(rcf, mv.entry)
        phi = EXf(And(Prop(q), EFf(And(Prop(chk), Not(eq.formula), Not(valid2.formula), EXf(And(
            Prop(rc), EFf(And(Prop(rcf), mv.formula))))))))
        contexts = max(1 + valid2.contexts, 1 + eq.contexts, 2 + mv.contexts)
        return Gadget(q, phi, contexts)

    def all(self) -> dict:
        return {
            "validconf": self.validconf(1),
            "validconf2": self.validconf(2),
            "init": self.init(),
            "final": self.final(),
            "eqconf": self.eqconf(),
            "move": self.move(),
            "step": self.step(),
        }

    def metadata(self) -> dict:
        return {name: {"entry": g.entry, "max_context_switches": g.contexts,
                       "formula_size": g.formula.size()} for name, g in self.all().items()}


def build_config_gadgets(m: TmMachine, p: CounterParams, w, guess="skeleton",
                         builder: Optional[SystemBuilder] = None) -> ConfigGadgets:
    g = ConfigGadgets(m, p, tuple(w), guess, builder or SystemBuilder(2))
    g.all()
    return g


# -- the full reduction ----------------------------------------------------------

Q_START, Q_START_EF = "tm:start", "tm:start_ef"


@dataclass
class CompiledTm:
    system: MpdsSystem
    ctlaccept: Formula
    ctlaccept_prime: Formula
    params: CounterParams
    gadgets: ConfigGadgets
    report: dict

    def initial(self, eu: bool = False) -> Configuration:
        return Configuration.make(Q_START if eu else Q_START_EF, (), ())

    def formula(self, eu: bool = False) -> Formula:
        return self.ctlaccept if eu else self.ctlaccept_prime

    def config_length(self) -> int:
        return len(initial_config(self.gadgets.machine, self.params, self.gadgets.word))

    def stack_cap_for(self, configs: int) -> int:
        """Smallest stack cap that holds ``configs`` written configurations."""
        return configs * self.config_length()


def compile_tm(m: TmMachine, w, k: int, guess: str = "skeleton") -> CompiledTm:
    w = tuple(w)
    try:
        p = CounterParams(k, len(w))
    except ValueError as exc:
        raise TmError(str(exc)) from exc
    g = build_config_gadgets(m, p, w, guess)
    b = g.builder
    nm = g._name
    valid, init, final, step = g.validconf(1), g.init(), g.final(), g.step()

    # written one configuration at a time, each checked as it appears
    initcheck, movecheck = nm("initcheck"), nm("movecheck")
    b.internal(Q_START, g.writer("first", 1, initcheck))
    write = g.writer("next", 1, movecheck)
    for dst in (valid.entry, init.entry, final.entry, write):
        b.internal(initcheck, dst)
    for dst in (valid.entry, step.entry, final.entry, write):
        b.internal(movecheck, dst)
    good = And(Not(valid.formula), Not(step.formula))
    eu = EUf(Or(Not(Prop(movecheck)), good),
             And(Prop(movecheck), Not(final.formula), good))
    ctlaccept = And(Prop(Q_START), EFf(And(
        Prop(initcheck), Not(init.formula), Not(valid.formula), Or(Not(final.formula), eu))))

    # the whole run written first, then checked block by block
    more, runcheck, remove = nm("more"), nm("runcheck"), nm("removeconf")
    b.internal(Q_START_EF, g.writer("run", 1, more))
    b.internal(more, nm("write", "run"))
    b.internal(more, runcheck)
    for dst in (valid.entry, final.entry, step.entry, remove):
        b.internal(runcheck, dst)
    mid = nm("removeconf", "mid")
    b.pop(remove, ZETA, remove, 1)
    g._pops(remove, g.config_letters, 1, mid)
    g._pops(mid, g.config_letters, 1, mid)
    b.pop(mid, ZETA, remove, 1)
    one, two = nm("onemore"), nm("twomore")
    for dst in (valid.entry, step.entry, init.entry, one, two):
        b.internal(remove, dst)
    for src, count in ((one, 1), (two, 2)):
        here = src
        for i in range(count):
            body = nm(src.split(":")[-1], i)
            g._pops(here, g.config_letters, 1, body)
            g._pops(body, g.config_letters, 1, body)
            nxt = Q_WIN if i == count - 1 else nm(src.split(":")[-1], i, "next")
            b.pop(body, ZETA, nxt, 1)
            here = nxt
    has_one = EXf(And(Prop(one), EFf(Prop(Q_WIN))))
    has_two = EXf(And(Prop(two), EFf(Prop(Q_WIN))))
    lacks_two = EXf(And(Prop(two), Not(EFf(Prop(Q_WIN)))))
    # conjuncts run left to right, so the cheap ones go first to prune guesses
    ctlaccept_prime = And(Prop(Q_START_EF), EFf(And(
        Prop(runcheck), Not(final.formula),
        Not(EFf(And(Prop(remove), has_one, lacks_two, init.formula))),
        Not(valid.formula),
        Not(EFf(And(Prop(remove), has_one, valid.formula))),
        Not(step.formula),
        Not(EFf(And(Prop(remove), has_two, step.formula))))))

    system = b.build(Q_START_EF)
    report = {
        "level": k,
        "input_length": len(w),
        "tape_cells": tape_cells(p),
        "positions": positions(p),
        "config_length": len(initial_config(m, p, w)),
        "guess": guess,
        "state_count": len(system.states),
        "transition_count": len(system.transitions),
        "max_context_switches": {"ctlaccept": 5 + 2 * k, "ctlaccept_prime": 4 + 2 * k},
        "formula_size": {"ctlaccept": ctlaccept.size(), "ctlaccept_prime": ctlaccept_prime.size()},
        "gadgets": g.metadata(),
    }
    return CompiledTm(system, ctlaccept, ctlaccept_prime, p, g, report)
