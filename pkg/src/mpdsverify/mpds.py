"""Multi-pushdown systems: transitions, configurations and the one-step move.

Stack words are tuples stored top-first and always end with ``BOTTOM``.
Stacks are numbered from 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

BOTTOM = "bot"
WILDCARD = "_"
ZETA = "zeta"
FILLER = "a"

INTERNAL = "internal"
PUSH = "push"
POP = "pop"
NOOP = "noop"
KINDS = (INTERNAL, PUSH, POP, NOOP)

PLAYER0 = 0
PLAYER1 = 1


class MpdsError(Exception):
    pass


class StepError(MpdsError):
    pass


class GuardMismatch(StepError):
    pass


class PopOnBottom(StepError):
    pass


class StateMismatch(StepError):
    pass


class NonChainable(MpdsError):
    pass


def counter_bit(level: int, one: bool) -> str:
    return f"{'b' if one else 'a'}{level}"


def parse_counter_bit(sym: str) -> Optional[tuple[int, bool]]:
    """Return ``(level, is_one)`` for a counter letter such as ``b2``, else None."""
    if len(sym) >= 2 and sym[0] in "ab" and sym[1:].isdigit() and sym[1] != "0":
        return int(sym[1:]), sym[0] == "b"
    return None


def is_reserved(sym: str) -> bool:
    return sym in (BOTTOM, WILDCARD, ZETA, FILLER, "⊥") or parse_counter_bit(sym) is not None


@dataclass(frozen=True)
class Transition:
    kind: str
    src: str
    dst: str
    stack: int = 0
    guard: Optional[str] = None
    symbol: Optional[str] = None

    @staticmethod
    def internal(src, dst):
        return Transition(INTERNAL, src, dst)

    @staticmethod
    def push(src, guard, dst, stack, symbol):
        return Transition(PUSH, src, dst, stack, guard, symbol)

    @staticmethod
    def pop(src, symbol, dst, stack):
        return Transition(POP, src, dst, stack, None, symbol)

    @staticmethod
    def noop(src, guard, stack, dst):
        return Transition(NOOP, src, dst, stack, guard, None)

    @property
    def accesses_stack(self) -> bool:
        return self.kind in (PUSH, POP)

    def __str__(self):
        if self.kind == INTERNAL:
            return f"{self.src}->{self.dst}"
        if self.kind == PUSH:
            return f"{self.src}-[{self.guard}/push {self.symbol}@{self.stack}]->{self.dst}"
        if self.kind == POP:
            return f"{self.src}-[pop {self.symbol}@{self.stack}]->{self.dst}"
        return f"{self.src}-[{self.guard}?@{self.stack}]->{self.dst}"


@dataclass(frozen=True)
class Configuration:
    state: str
    stacks: tuple

    @staticmethod
    def make(state: str, *words: Sequence[str]) -> "Configuration":
        """Build a configuration from top-first words; a missing bottom is appended."""
        stacks = []
        for w in words:
            w = tuple(w)
            if not w or w[-1] != BOTTOM:
                w = w + (BOTTOM,)
            stacks.append(w)
        return Configuration(state, tuple(stacks))

    def top(self, j: int) -> str:
        return self.stacks[j - 1][0]

    def well_formed(self) -> bool:
        return all(w and w[-1] == BOTTOM and BOTTOM not in w[:-1] for w in self.stacks)

    def __str__(self):
        inner = ", ".join("·".join(w) for w in self.stacks)
        return f"{self.state}({inner})"


@dataclass(frozen=True)
class MpdsSystem:
    states: tuple
    stacks: int
    alphabet: tuple
    initial: str
    transitions: tuple
    owner: Optional[dict] = None
    priority: Optional[dict] = None
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        index = {}
        for t in self.transitions:
            index.setdefault(t.src, []).append(t)
        object.__setattr__(self, "_index", index)

    @property
    def game_mode(self) -> bool:
        return self.owner is not None

    def outgoing(self, state: str) -> list:
        return self._index.get(state, [])

    def initial_configuration(self) -> Configuration:
        return Configuration(self.initial, tuple((BOTTOM,) for _ in range(self.stacks)))


class SystemBuilder:
    """Mutable accumulator for systems built by the reduction compilers."""

    def __init__(self, stacks: int = 2):
        self.stacks = stacks
        self._states: dict = {}
        self._alphabet: dict = {}
        self._transitions: dict = {}
        self.owner: dict = {}
        self.priority: dict = {}

    def state(self, *names: str) -> None:
        for n in names:
            self._states.setdefault(n, None)

    def symbols(self, syms: Iterable[str]) -> None:
        for s in syms:
            if s not in (BOTTOM, WILDCARD):
                self._alphabet.setdefault(s, None)

    def add(self, t: Transition) -> Transition:
        self.state(t.src, t.dst)
        self.symbols(x for x in (t.guard, t.symbol) if x is not None)
        self._transitions.setdefault(t, None)
        return t

    def internal(self, src, dst):
        return self.add(Transition.internal(src, dst))

    def push(self, src, guard, dst, stack, symbol):
        return self.add(Transition.push(src, guard, dst, stack, symbol))

    def pop(self, src, symbol, dst, stack):
        return self.add(Transition.pop(src, symbol, dst, stack))

    def noop(self, src, guard, stack, dst):
        return self.add(Transition.noop(src, guard, stack, dst))

    @property
    def state_count(self) -> int:
        return len(self._states)

    @property
    def transition_count(self) -> int:
        return len(self._transitions)

    def build(self, initial: str, game: bool = False) -> MpdsSystem:
        self.state(initial)
        owner = priority = None
        if game:
            owner = {q: self.owner.get(q, PLAYER0) for q in self._states}
            priority = {q: self.priority.get(q, 0) for q in self._states}
        return MpdsSystem(
            states=tuple(self._states),
            stacks=self.stacks,
            alphabet=tuple(self._alphabet),
            initial=initial,
            transitions=tuple(self._transitions),
            owner=owner,
            priority=priority,
        )


def _guard_ok(guard: Optional[str], top: str) -> bool:
    return guard is None or guard == WILDCARD or guard == top


def enabled(c: Configuration, t: Transition) -> bool:
    if t.src != c.state:
        return False
    if t.kind == INTERNAL:
        return True
    top = c.stacks[t.stack - 1][0]
    if t.kind == POP:
        return top == t.symbol and top != BOTTOM
    return _guard_ok(t.guard, top)


def step(sys: MpdsSystem, c: Configuration, t: Transition) -> Configuration:
    """Apply one move; raises a StepError subclass when ``t`` is not enabled at ``c``."""
    if t.src != c.state:
        raise StateMismatch(f"transition {t} leaves {t.src}, configuration is in {c.state}")
    if t.kind == INTERNAL:
        return Configuration(t.dst, c.stacks)
    j = t.stack - 1
    word = c.stacks[j]
    top = word[0]
    if t.kind == POP:
        if top == BOTTOM:
            raise PopOnBottom(f"{t} on empty stack {t.stack}")
        if top != t.symbol:
            raise GuardMismatch(f"{t}: top of stack {t.stack} is {top}")
        new = word[1:]
    else:
        if not _guard_ok(t.guard, top):
            raise GuardMismatch(f"{t}: top of stack {t.stack} is {top}")
        new = (t.symbol,) + word if t.kind == PUSH else word
    stacks = c.stacks[:j] + (new,) + c.stacks[j + 1:]
    return Configuration(t.dst, stacks)


def successors(sys: MpdsSystem, c: Configuration) -> list:
    return [(t, step(sys, c, t)) for t in sys.outgoing(c.state) if enabled(c, t)]


def _check_chain(w: Sequence[Transition]) -> None:
    for a, b in zip(w, w[1:]):
        if a.dst != b.src:
            raise NonChainable(f"{a} does not chain into {b}")


def context_blocks(w: Sequence[Transition]) -> list:
    """Greedy split of ``w`` into single-stack blocks (internal moves and noops join any block)."""
    _check_chain(w)
    blocks: list = []
    current = None
    for t in w:
        if t.accesses_stack and t.stack != current:
            if current is not None or not blocks:
                blocks.append([])
            current = t.stack
        if not blocks:
            blocks.append([])
        blocks[-1].append(t)
    return blocks


def phase_blocks(w: Sequence[Transition]) -> list:
    """Greedy split of ``w`` into blocks whose pops all target one stack."""
    _check_chain(w)
    blocks: list = []
    current = None
    for t in w:
        if t.kind == POP and t.stack != current:
            if current is not None or not blocks:
                blocks.append([])
            current = t.stack
        if not blocks:
            blocks.append([])
        blocks[-1].append(t)
    return blocks


def context_count(sys: MpdsSystem, w: Sequence[Transition]) -> int:
    return len(context_blocks(w))


def phase_count(sys: MpdsSystem, w: Sequence[Transition]) -> int:
    return len(phase_blocks(w))


def validate(sys: MpdsSystem) -> list:
    diags = []
    states = set(sys.states)
    alphabet = set(sys.alphabet)
    if sys.stacks < 1:
        diags.append(f"stack count must be positive, got {sys.stacks}")
    if sys.initial not in states:
        diags.append(f"initial state {sys.initial!r} is not declared")
    if BOTTOM in alphabet:
        diags.append("alphabet must not contain the bottom symbol")
    for i, t in enumerate(sys.transitions):
        where = f"transition #{i} ({t})"
        if t.kind not in KINDS:
            diags.append(f"{where}: unknown kind {t.kind!r}")
            continue
        for q in (t.src, t.dst):
            if q not in states:
                diags.append(f"{where}: undeclared state {q!r}")
        if t.kind == INTERNAL:
            continue
        if not 1 <= t.stack <= sys.stacks:
            diags.append(f"{where}: stack index {t.stack} outside [1..{sys.stacks}]")
        if t.kind in (PUSH, POP):
            if t.symbol == BOTTOM:
                diags.append(f"{where}: bottom symbol cannot be pushed or popped")
            elif t.symbol not in alphabet:
                diags.append(f"{where}: symbol {t.symbol!r} not in alphabet")
        if t.kind in (PUSH, NOOP):
            if t.guard not in (WILDCARD, BOTTOM) and t.guard not in alphabet:
                diags.append(f"{where}: guard {t.guard!r} not in alphabet")
    for name, mapping in (("owner", sys.owner), ("priority", sys.priority)):
        if mapping is None:
            continue
        missing = [q for q in sys.states if q not in mapping]
        if missing:
            diags.append(f"{name} map is partial: missing {missing[:5]}")
        if name == "owner":
            bad = [q for q, v in mapping.items() if v not in (PLAYER0, PLAYER1)]
            if bad:
                diags.append(f"owner map has non-player values at {bad[:5]}")
        else:
            bad = [q for q, v in mapping.items() if not isinstance(v, int) or v < 0]
            if bad:
                diags.append(f"priority map has invalid values at {bad[:5]}")
    if (sys.owner is None) != (sys.priority is None):
        diags.append("game mode needs both owner and priority maps")
    return diags


# -- document format ---------------------------------------------------------

def _sym_in(s):
    return BOTTOM if s == "⊥" else s


def load_mpds(doc: dict) -> MpdsSystem:
    """Read the JSON document form; raises MpdsError on structural problems."""
    try:
        transitions = []
        for t in doc["transitions"]:
            kind = t["kind"]
            if kind == "guarded-noop":
                kind = NOOP
            guard = t.get("guard")
            transitions.append(
                Transition(
                    kind,
                    str(t["from"]),
                    str(t["to"]),
                    int(t.get("stack", 0)),
                    _sym_in(guard) if guard is not None else (WILDCARD if kind in (PUSH, NOOP) else None),
                    _sym_in(t["symbol"]) if t.get("symbol") is not None else None,
                )
            )
        owner = doc.get("owner")
        priority = doc.get("priority")
        return MpdsSystem(
            states=tuple(str(q) for q in doc["states"]),
            stacks=int(doc["stacks"]),
            alphabet=tuple(_sym_in(s) for s in doc["alphabet"]),
            initial=str(doc["initial"]),
            transitions=tuple(transitions),
            owner={str(k): int(v) for k, v in owner.items()} if owner is not None else None,
            priority={str(k): int(v) for k, v in priority.items()} if priority is not None else None,
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MpdsError(f"malformed MPDS document: {exc!r}") from exc


def dump_mpds(sys: MpdsSystem) -> dict:
    doc = {
        "states": list(sys.states),
        "stacks": sys.stacks,
        "alphabet": list(sys.alphabet),
        "initial": sys.initial,
        "transitions": [],
    }
    for t in sys.transitions:
        entry = {"kind": t.kind, "from": t.src, "to": t.dst}
        if t.kind != INTERNAL:
            entry["stack"] = t.stack
        if t.guard is not None:
            entry["guard"] = t.guard
        if t.symbol is not None:
            entry["symbol"] = t.symbol
        doc["transitions"].append(entry)
    if sys.owner is not None:
        doc["owner"] = dict(sys.owner)
        doc["priority"] = dict(sys.priority)
    return doc
