"""Nested (level-k) binary counters: direct algorithms and MPDS gadgets.

A level-1 counter is n bits over {a1, b1}.  A level-k counter lists every bit
position, from the highest address down to 0, as a level-(k-1) counter holding
the address followed by one bit in {ak, bk}.  Words are top-first with the
most significant part on top.

Each gadget is a fragment of a two-stack system plus a CTL formula to be
evaluated at a host state that has an internal move into the gadget entry.
The formula holds exactly when the property it checks FAILS.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .ctl import And, EFf, EXf, Formula, Not, Or, Prop
from .mpds import BOTTOM, WILDCARD, ZETA, SystemBuilder, counter_bit, parse_counter_bit

Q_ERR, Q_WIN, Q_EQ, Q_NEQ = "q_err", "q_win", "q_eq", "q_neq"
SINKS = (Q_ERR, Q_WIN, Q_EQ, Q_NEQ)
BIT_LIMIT = 1 << 16


class ScaleError(ValueError):
    pass


class CounterError(ValueError):
    pass


def _max_chain(level: int, base: int, limit: Optional[int] = BIT_LIMIT) -> list:
    """[Max(1), ..., Max(level)], refusing to build numbers past ``limit`` bits."""
    out = [(1 << base) - 1]
    for _ in range(level - 1):
        bits = out[-1] + 1
        if limit is not None and bits > limit:
            raise ScaleError(f"level-{len(out) + 1} counter would need {bits} bits")
        out.append((1 << bits) - 1)
    return out


@dataclass(frozen=True)
class CounterParams:
    level: int
    base: int

    def __post_init__(self):
        if self.level < 1 or self.base < 1:
            raise ValueError("level and base must be at least 1")
        _max_chain(self.level, self.base)

    def lower(self) -> "CounterParams":
        return CounterParams(self.level - 1, self.base)


def tower(k: int) -> int:
    return 1 if k == 1 else 2 ** tower(k - 1)


def max_value(p: CounterParams) -> int:
    return _max_chain(p.level, p.base)[-1]


def bit_length(p: CounterParams) -> int:
    """Number of bit positions of a counter at this level."""
    return p.base if p.level == 1 else max_value(p.lower()) + 1


def letters(level: int) -> tuple:
    return (counter_bit(level, False), counter_bit(level, True))


def letters_upto(level: int) -> tuple:
    return tuple(s for j in range(1, level + 1) for s in letters(j))


def _lvl(sym) -> int:
    parsed = parse_counter_bit(sym)
    return parsed[0] if parsed else 0


# -- direct algorithms -----------------------------------------------------------

def encode_counter(p: CounterParams, v: int) -> tuple:
    top = max_value(p)
    if not 0 <= v <= top:
        raise CounterError(f"value {v} outside [0, {top}]")
    if p.level == 1:
        return tuple(counter_bit(1, bool(v >> i & 1)) for i in range(p.base - 1, -1, -1))
    low = p.lower()
    word: list = []
    for addr in range(max_value(low), -1, -1):
        word.extend(encode_counter(low, addr))
        word.append(counter_bit(p.level, bool(v >> addr & 1)))
    return tuple(word)


def _blocks(p: CounterParams, w) -> Optional[list]:
    """Split a level-k word into (address word, bit) pairs, or None if malformed."""
    out, cur = [], []
    for s in w:
        lv = _lvl(s)
        if lv == p.level:
            out.append((tuple(cur), s))
            cur = []
        elif 1 <= lv < p.level:
            cur.append(s)
        else:
            return None
    return None if cur else out


def is_valid_counter(p: CounterParams, w) -> bool:
    w = tuple(w)
    if p.level == 1:
        return len(w) == p.base and all(_lvl(s) == 1 for s in w)
    blocks = _blocks(p, w)
    low = p.lower()
    top = max_value(low)
    if blocks is None or len(blocks) != top + 1:
        return False
    for i, (addr, _) in enumerate(blocks):
        if not is_valid_counter(low, addr) or decode_counter(low, addr) != top - i:
            return False
    return True


def decode_counter(p: CounterParams, w) -> int:
    w = tuple(w)
    if not is_valid_counter(p, w):
        raise CounterError(f"not a valid level-{p.level} counter: {' '.join(w)}")
    if p.level == 1:
        return sum(1 << (p.base - 1 - i) for i, s in enumerate(w) if s == counter_bit(1, True))
    blocks = _blocks(p, w)
    top = len(blocks) - 1
    return sum(1 << (top - i) for i, (_, bit) in enumerate(blocks) if bit == counter_bit(p.level, True))


def increment_counter(p: CounterParams, w) -> tuple:
    """Flip the trailing run of ones and the zero above it."""
    if not is_valid_counter(p, w):
        raise CounterError("increment of an invalid counter")
    w = list(w)
    one, zero = counter_bit(p.level, True), counter_bit(p.level, False)
    positions = [i for i, s in enumerate(w) if s in (one, zero)]
    for i in reversed(positions):  # least significant first
        if w[i] == one:
            w[i] = zero
        else:
            w[i] = one
            return tuple(w)
    raise CounterError("increment overflow")


def counter_prefix(level: int, word) -> tuple:
    """Longest top prefix of ``word`` made of counter bits of level <= ``level``."""
    out = []
    for s in word:
        if not 1 <= _lvl(s) <= level:
            break
        out.append(s)
    return tuple(out)


def valid_prefix(p: CounterParams, word) -> bool:
    """Does ``word`` begin with a valid counter followed by a non-counter letter?"""
    return is_valid_counter(p, counter_prefix(p.level, word))


# -- gadgets -------------------------------------------------------------------

class Gadget(NamedTuple):
    entry: str
    formula: Formula
    contexts: int  # bound on contexts used by any run from the entry


@dataclass
class GadgetLibrary:
    """Counter gadgets for all levels up to ``params.level`` on one builder.

    ``symbols`` must list every stack letter the host will use; tests for
    "a letter outside the counter alphabet" enumerate them.
    """

    params: CounterParams
    builder: SystemBuilder = field(default_factory=lambda: SystemBuilder(2))
    extra: tuple = (ZETA,)
    prefix: str = "cnt"
    top_letters: tuple = ()  # replaces the bit pair one level above ``params.level``
    _memo: dict = field(default_factory=dict)

    def __post_init__(self):
        b = self.builder
        self.symbols = tuple(dict.fromkeys(
            letters_upto(self.params.level) + tuple(self.top_letters) + tuple(self.extra)))
        b.symbols(self.symbols)
        b.state(*SINKS)
        for s in SINKS:
            b.internal(s, s)

    # -- small helpers ---------------------------------------------------------
    def _bits(self, level: int) -> tuple:
        if self.top_letters and level == self.params.level + 1:
            return self.top_letters
        return letters(level)

    def _upto(self, level: int) -> tuple:
        out = letters_upto(min(level, self.params.level))
        if self.top_letters and level > self.params.level:
            out += self.top_letters
        return out

    def _name(self, *parts) -> str:
        return ":".join([self.prefix, *map(str, parts)])

    def _outside(self, level: int) -> tuple:
        inside = set(self._upto(level))
        return tuple(s for s in self.symbols if s not in inside) + (BOTTOM,)

    def _noops(self, src, syms, stack, dst):
        for s in syms:
            self.builder.noop(src, s, stack, dst)

    def _pops(self, src, syms, stack, dst):
        for s in syms:
            self.builder.pop(src, s, dst, stack)

    def _skip_blocks(self, tag, level, stack):
        """State looping over blocks (Σ^{level-1})* Σ_level on ``stack``; it is
        at a block boundary exactly when control is in the returned state."""
        blk, mid = self._name(*tag, "blk"), self._name(*tag, "mid")
        self._pops(blk, self._bits(level), stack, blk)
        self._pops(blk, self._upto(level - 1), stack, mid)
        self._pops(mid, self._upto(level - 1), stack, mid)
        self._pops(mid, self._bits(level), stack, blk)
        return blk

    def _memoised(self, key, build):
        hit = self._memo.get(key)
        if hit is None:
            hit = build()
            self._memo[key] = hit
        return hit

    def params_at(self, level: int) -> CounterParams:
        return CounterParams(level, self.params.base)

    def attach(self, host: str, gadget: Gadget) -> Formula:
        self.builder.internal(host, gadget.entry)
        return gadget.formula

    def state_count(self) -> int:
        return self.builder.state_count

    # -- first / last ----------------------------------------------------------
    def last(self, level: int, stack: int = 1) -> Gadget:
        return self._extreme(level, stack, True)

    def first(self, level: int, stack: int = 1) -> Gadget:
        return self._extreme(level, stack, False)

    def _extreme(self, level, stack, top):
        def build():
            q = self._name("max" if top else "min", level, stack)
            good, bad = counter_bit(level, top), counter_bit(level, not top)
            self.builder.state(q)
            self.builder.pop(q, good, q, stack)
            self.builder.pop(q, bad, Q_ERR, stack)
            self._pops(q, self._upto(level - 1), stack, q)
            return Gadget(q, EXf(And(Prop(q), EFf(Prop(Q_ERR)))), 1)
        return self._memoised(("max" if top else "min", level, stack), build)

    # -- equality ------------------------------------------------------------------
    def equal(self, level: int, stack: int = 1) -> Gadget:
        return self._memoised(("eq", level, stack), lambda: self._build_equal(level, stack))

    def _build_equal(self, level, s):
        t = 3 - s
        b = self.builder
        if level == 1:
            n = self.params.base
            entry = self._name("eq", 1, s)
            bits = self._bits(1)
            for i in range(n):
                here = entry if i == 0 else self._name("eq", 1, s, "pop", i)
                b.state(here)
                if i + 1 < n:
                    self._pops(here, bits, s, self._name("eq", 1, s, "pop", i + 1))
                for sym in bits:
                    b.pop(here, sym, self._name("eq", 1, s, "cmp", sym, i), s)
            for sym in bits:
                for r in range(n - 1, 0, -1):
                    self._pops(self._name("eq", 1, s, "cmp", sym, r), bits, t,
                               self._name("eq", 1, s, "cmp", sym, r - 1))
                last = self._name("eq", 1, s, "cmp", sym, 0)
                b.state(last)
                for other in bits:
                    if other != sym:
                        b.pop(last, other, Q_ERR, t)
                self._noops(last, self._outside(1), t, Q_ERR)
            return Gadget(entry, EXf(And(Prop(entry), EFf(Prop(Q_ERR)))), 2)
        entry = self._name("eq", level, s)
        final = self._name("eq", level, s, "skipfinal")
        b.state(entry)
        skip_s = self._skip_blocks(("eq", level, s, "skip1"), level, s)
        skip_t = self._skip_blocks(("eq", level, s, "skip2"), level, t)
        b.internal(entry, skip_s)
        b.internal(skip_s, skip_t)
        b.internal(skip_t, final)
        lower = self.equal(level - 1, s)
        b.internal(final, lower.entry)
        rc = self._rcchk(level, s, equal_is_error=False)
        b.internal(final, rc)
        phi = EXf(And(Prop(entry), EFf(And(
            Prop(final), Not(lower.formula), EXf(And(Prop(rc), EFf(Prop(Q_ERR))))))))
        return Gadget(entry, phi, 2 + lower.contexts)

    def _rcchk(self, level, s, equal_is_error):
        """Pop an address then a level bit from the other stack, then from
        ``s``; q_err when the two bits differ (or agree, if ``equal_is_error``)."""
        t = 3 - s
        tag = "rcchkneq" if equal_is_error else "rcchk"
        key = (tag, level, s)
        if key in self._memo:
            return self._memo[key]
        b = self.builder
        entry = self._name(tag, level, s)
        b.state(entry)
        addr = self._upto(level - 1)
        self._pops(entry, addr, t, entry)
        for sym in self._bits(level):
            mid = self._name(tag, level, s, sym)
            b.pop(entry, sym, mid, t)
            self._pops(mid, addr, s, mid)
            for other in self._bits(level):
                if (other == sym) == equal_is_error:
                    b.pop(mid, other, Q_ERR, s)
        self._memo[key] = entry
        return entry

    # -- successor -------------------------------------------------------------------
    def succ(self, level: int, stack: int = 1) -> Gadget:
        """Fails unless the counter on the other stack is one more than the
        counter on ``stack``."""
        return self._memoised(("succ", level, stack), lambda: self._build_succ(level, stack))

    def _build_succ(self, level, s):
        b = self.builder
        entry = self._name("succ", level, s)
        b.state(entry)
        top = self.last(level, s)
        b.internal(entry, top.entry)
        if level == 1:
            base = self._succ_base(s)
            b.internal(entry, base)
            body = EXf(And(Prop(base), EFf(Prop(Q_ERR))))
            contexts = 2
        else:
            t = 3 - s
            final = self._name("succ", level, s, "skipfinal")
            skip_s = self._skip_blocks(("succ", level, s, "skip1"), level, s)
            skip_t = self._skip_blocks(("succ", level, s, "skip2"), level, t)
            b.internal(entry, skip_s)
            b.internal(skip_s, skip_t)
            b.internal(skip_t, final)
            lower = self.equal(level - 1, s)
            rc = self._rcchk(level, s, equal_is_error=False)
            rcn = self._rcchk(level, s, equal_is_error=True)
            scan = self._scantype(level, s)
            for dst in (lower.entry, rc, rcn, scan):
                b.internal(final, dst)
            err_via = lambda q: EXf(And(Prop(q), EFf(Prop(Q_ERR))))  # noqa: E731
            body = EFf(And(Prop(final), Not(lower.formula), Or(
                And(EFf(Prop(Q_EQ)), err_via(rc)),
                And(EFf(Prop(Q_NEQ)), err_via(rcn)))))
            contexts = 2 + lower.contexts
        phi = EXf(And(Prop(entry), Or(Not(top.formula), body)))
        return Gadget(entry, phi, contexts)

    def _succ_base(self, s):
        """Guess a bit position p (from the top) on ``s``, note whether every
        lower bit is one, then compare with bit p on the other stack."""
        t = 3 - s
        n = self.params.base
        b = self.builder
        bits = self._bits(1)
        one = counter_bit(1, True)
        name = lambda *parts: self._name("succbase", s, *parts)  # noqa: E731
        entry = name("pre", 0)
        b.state(entry)
        for p in range(n):
            pre = name("pre", p)
            if p + 1 < n:
                self._pops(pre, bits, s, name("pre", p + 1))
            for sym in bits:
                b.pop(pre, sym, name("post", sym, p, 1, p + 1), s)
        for sym in bits:
            for p in range(n):
                for ones in (0, 1):
                    for c in range(p + 1, n + 1):
                        here = name("post", sym, p, ones, c)
                        if c < n:
                            for bit in bits:
                                keep = ones and bit == one
                                b.pop(here, bit, name("post", sym, p, int(keep), c + 1), s)
                        else:
                            b.internal(here, name("cmp", sym, ones, p))
                    for r in range(p, 0, -1):
                        self._pops(name("cmp", sym, ones, r), bits, t, name("cmp", sym, ones, r - 1))
                    last = name("cmp", sym, ones, 0)
                    b.state(last)
                    for other in bits:
                        # inside the flipped run the bits must differ, elsewhere agree
                        if (other == sym) == bool(ones):
                            b.pop(last, other, Q_ERR, t)
        return entry

    def _scantype(self, level, s):
        """Pop the current block on ``s``, then report q_eq if a lower block
        holds a zero bit and q_neq otherwise."""
        key = ("scan", level, s)
        if key in self._memo:
            return self._memo[key]
        b = self.builder
        entry = self._name("scan", level, s)
        rest = self._name("scan", level, s, "rest")
        b.state(entry, rest)
        addr = self._upto(level - 1)
        zero, one = self._bits(level)
        self._pops(entry, addr, s, entry)
        self._pops(entry, (zero, one), s, rest)
        self._pops(rest, addr, s, rest)
        b.pop(rest, one, rest, s)
        b.pop(rest, zero, Q_EQ, s)
        self._noops(rest, self._outside(level), s, Q_NEQ)
        self._memo[key] = entry
        return entry

    # -- validity --------------------------------------------------------------------
    def valid(self, level: int, stack: int = 1) -> Gadget:
        return self._memoised(("valid", level, stack), lambda: self._build_valid(level, stack))

    def _build_valid(self, level, s):
        b = self.builder
        if level == 1:
            n = self.params.base
            entry = self._name("valid", 1, s)
            for i in range(n + 1):
                here = entry if i == 0 else self._name("valid", 1, s, i)
                b.state(here)
                if i < n:
                    self._pops(here, self._bits(1), s, self._name("valid", 1, s, i + 1))
                    self._noops(here, self._outside(1), s, Q_ERR)
                else:
                    self._noops(here, self._bits(1), s, Q_ERR)
            return Gadget(entry, EXf(And(Prop(entry), EFf(Prop(Q_ERR)))), 1)

        u = 3 - s
        entry = self._name("valid", level, s)
        b.state(entry)
        nm = lambda *parts: self._name("valid", level, s, *parts)  # noqa: E731
        counter = self._upto(level)
        addr = self._upto(level - 1)
        err_from = lambda q: EXf(And(Prop(q), EFf(Prop(Q_ERR))))  # noqa: E731

        # the prefix must be a non-empty sequence of blocks ending with a level bit
        shape0, shape1, shape2 = nm("shape"), nm("shape", "addr"), nm("shape", "bit")
        b.state(shape0)
        b.internal(entry, shape0)
        for src in (shape0, shape1, shape2):
            self._pops(src, addr, s, shape1)
            self._pops(src, self._bits(level), s, shape2)
        self._noops(shape0, self._outside(level), s, Q_ERR)
        self._noops(shape1, self._outside(level), s, Q_ERR)
        shape = err_from(shape0)

        # every address is a valid lower counter
        lower_valid = self.valid(level - 1, s)
        skip = self._skip_blocks(("valid", level, s, "skip"), level, s)
        induct = nm("induct")
        b.internal(entry, skip)
        self._noops(skip, counter, s, induct)
        b.internal(induct, lower_valid.entry)
        ind = EXf(And(Prop(skip), EFf(And(Prop(induct), lower_valid.formula))))

        # the top address is maximal
        top = self.last(level - 1, s)
        b.internal(entry, top.entry)

        # the bottom address is zero
        low = self.first(level - 1, s)
        skipp = self._skip_blocks(("valid", level, s, "skipp"), level, s)
        inductp, chk, chk2 = nm("inductp"), nm("chklast"), nm("chklast", "bit")
        b.internal(entry, skipp)
        b.internal(skipp, inductp)
        b.internal(inductp, low.entry)
        b.internal(inductp, chk)
        self._pops(chk, addr, s, chk)
        self._pops(chk, self._bits(level), s, chk2)
        self._noops(chk2, self._outside(level), s, Q_WIN)
        first = EXf(And(Prop(skipp), EFf(And(
            Prop(inductp), low.formula, EXf(And(Prop(chk), EFf(Prop(Q_WIN))))))))

        # consecutive addresses differ by one: copy l_j to the other stack by
        # guessing, then compare l_j's copy with l_{j-1}
        skipr = self._skip_blocks(("valid", level, s, "skipr"), level, s)
        guess, write, chkguess = nm("guess"), nm("write"), nm("chkguess")
        remove, remove2, before = nm("removelj"), nm("removelj", "bit"), nm("beforesucc")
        b.internal(entry, skipr)
        b.internal(skipr, guess)
        self._pops(guess, self.symbols, u, guess)
        # only words laid out like a valid lower counter can pass the copy
        # check, so the guess writes exactly that layout, bottom letter first
        layout = [_lvl(x) for x in encode_counter(self.params_at(level - 1), 0)]
        b.noop(guess, BOTTOM, u, write)
        here = write
        for i, lv in enumerate(reversed(layout)):
            nxt = chkguess if i == len(layout) - 1 else nm("write", i + 1)
            for sym in self._bits(lv):
                b.push(here, WILDCARD, nxt, u, sym)
            here = nxt
        copy_valid = self.valid(level - 1, u)
        copy_eq = self.equal(level - 1, s)
        lower_succ = self.succ(level - 1, s)
        b.internal(chkguess, copy_valid.entry)
        b.internal(chkguess, copy_eq.entry)
        b.internal(chkguess, remove)
        self._pops(remove, addr, s, remove)
        self._pops(remove, self._bits(level), s, remove2)
        self._noops(remove2, addr, s, before)
        b.internal(before, lower_succ.entry)
        succ = EXf(And(Prop(skipr), EFf(And(Prop(guess), EFf(And(
            Prop(chkguess), Not(copy_valid.formula), Not(copy_eq.formula),
            EXf(And(Prop(remove), EFf(And(Prop(before), lower_succ.formula))))))))))

        phi = EXf(And(Prop(entry), Or(shape, ind, top.formula, first, succ)))
        contexts = max(lower_valid.contexts, 2 + copy_eq.contexts,
                       1 + copy_valid.contexts, 2 + lower_succ.contexts)
        return Gadget(entry, phi, contexts)

    # -- bookkeeping -------------------------------------------------------------------
    def metadata(self) -> dict:
        out = {}
        for key, g in self._memo.items():
            if isinstance(g, Gadget):
                out[":".join(map(str, key))] = {
                    "entry": g.entry,
                    "max_context_switches": g.contexts,
                    "formula_size": g.formula.size(),
                }
        return out


def build_counter_gadgets(p: CounterParams, builder: Optional[SystemBuilder] = None,
                          extra=(ZETA,)) -> GadgetLibrary:
    """Library with every gadget of every level up to ``p.level``, in both orientations."""
    lib = GadgetLibrary(p, builder or SystemBuilder(2), tuple(extra))
    for level in range(1, p.level + 1):
        for stack in (1, 2):
            lib.first(level, stack)
            lib.last(level, stack)
            lib.equal(level, stack)
            lib.succ(level, stack)
            lib.valid(level, stack)
    return lib


def host_system(lib: GadgetLibrary, gadget: Gadget, host: str = "host"):
    """Close the library into a system whose initial state calls ``gadget``."""
    formula = lib.attach(host, gadget)
    return lib.builder.build(host), formula

