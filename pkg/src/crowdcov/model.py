"""Template automata, the crowd-file format, and well-formedness checks."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

OMEGA = math.inf
"""Stands for "arbitrarily many processes". ``OMEGA - k == OMEGA + k == OMEGA``."""


def is_omega(x) -> bool:
    return x == OMEGA


def format_count(x) -> str:
    return "omega" if is_omega(x) else str(int(x))


class SemanticsKind(enum.Enum):
    BROADCAST = "broadcast"
    RENDEZVOUS = "rendezvous"
    STORE = "store"
    LOCKSTORE = "lockstore"

    @property
    def has_store(self) -> bool:
        return self in (SemanticsKind.STORE, SemanticsKind.LOCKSTORE)


class LabelKind(enum.Enum):
    TAU = "tau"
    SEND = "send"
    RECV = "recv"
    BCAST_SEND = "bcast_send"
    BCAST_RECV = "bcast_recv"
    WRITE = "write"
    READ = "read"
    LOCK = "lock"
    UNLOCK = "unlock"


# label kinds permitted under each semantics, besides TAU
_ALLOWED = {
    SemanticsKind.BROADCAST: {LabelKind.BCAST_SEND, LabelKind.BCAST_RECV},
    SemanticsKind.RENDEZVOUS: {LabelKind.SEND, LabelKind.RECV},
    SemanticsKind.STORE: {LabelKind.WRITE, LabelKind.READ},
    SemanticsKind.LOCKSTORE: {
        LabelKind.WRITE, LabelKind.READ, LabelKind.LOCK, LabelKind.UNLOCK
    },
}


@dataclass(frozen=True)
class Label:
    kind: LabelKind
    value: str | None = None

    def __str__(self) -> str:
        v = self.value
        return {
            LabelKind.TAU: "tau",
            LabelKind.SEND: f"{v}!",
            LabelKind.RECV: f"{v}?",
            LabelKind.BCAST_SEND: f"{v}!!",
            LabelKind.BCAST_RECV: f"{v}??",
            LabelKind.WRITE: f"w({v})",
            LabelKind.READ: f"r({v})",
            LabelKind.LOCK: "lock",
            LabelKind.UNLOCK: "unlock",
        }[self.kind]


@dataclass(frozen=True)
class Transition:
    source: str
    label: Label
    target: str

    def __str__(self) -> str:
        return f"{self.source} {self.label} {self.target}"


@dataclass(frozen=True)
class InitialSpec:
    counts: Mapping[str, float] = field(default_factory=dict)
    store0: str | None = None

    def count(self, state: str):
        return self.counts.get(state, 0)


@dataclass(frozen=True)
class TargetSpec:
    demand: Mapping[str, int] = field(default_factory=dict)

    def count(self, state: str) -> int:
        return self.demand.get(state, 0)


@dataclass(frozen=True)
class TemplateAutomaton:
    kind: SemanticsKind
    states: tuple[str, ...]
    values: tuple[str, ...]
    transitions: tuple[Transition, ...]
    init: InitialSpec
    target: TargetSpec

    @cached_property
    def index(self) -> dict[str, int]:
        return {q: i for i, q in enumerate(self.states)}

    @cached_property
    def held_states(self) -> frozenset[str]:
        """States whose occupant holds the lock (LockStore only; empty otherwise)."""
        if self.kind is not SemanticsKind.LOCKSTORE:
            return frozenset()
        status = lock_status(self)
        return frozenset(q for q in self.states if "held" in status[q])

    def replace(self, **changes) -> "TemplateAutomaton":
        fields = dict(
            kind=self.kind, states=self.states, values=self.values,
            transitions=self.transitions, init=self.init, target=self.target,
        )
        fields.update(changes)
        return TemplateAutomaton(**fields)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_ID = r"[A-Za-z_][A-Za-z0-9_.\-]*"
_LABEL_PATTERNS = [
    (re.compile(rf"^({_ID})!!$"), LabelKind.BCAST_SEND),
    (re.compile(rf"^({_ID})\?\?$"), LabelKind.BCAST_RECV),
    (re.compile(rf"^({_ID})!$"), LabelKind.SEND),
    (re.compile(rf"^({_ID})\?$"), LabelKind.RECV),
    (re.compile(rf"^w\(({_ID})\)$"), LabelKind.WRITE),
    (re.compile(rf"^r\(({_ID})\)$"), LabelKind.READ),
]
_ID_RE = re.compile(rf"^{_ID}$")


def parse_label(text: str) -> Label:
    if text == "tau":
        return Label(LabelKind.TAU)
    if text == "lock":
        return Label(LabelKind.LOCK)
    if text == "unlock":
        return Label(LabelKind.UNLOCK)
    for pattern, kind in _LABEL_PATTERNS:
        match = pattern.match(text)
        if match:
            return Label(kind, match.group(1))
    raise ValueError(f"bad transition label {text!r}")


def _declare(names, seen: dict, what: str, lineno: int) -> None:
    for name in names:
        if not _ID_RE.match(name):
            raise ParseError(f"bad {what} identifier {name!r}", lineno)
        if name in seen:
            raise ParseError(f"duplicate {what} declaration {name!r}", lineno)
        seen[name] = lineno


def parse_template(text: str) -> TemplateAutomaton:
    """Parse crowd-file contents into a template, keeping it exactly as written."""
    kind = None
    states: dict[str, int] = {}
    values: dict[str, int] = {}
    init_items: list[tuple[str, str, int]] = []
    target_items: list[tuple[str, str | None, int]] = []
    trans_items: list[tuple[list[str], int]] = []
    store_init: tuple[str, int] | None = None
    seen_sections = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *args = line.split()
        if directive == "semantics":
            if kind is not None:
                raise ParseError("semantics declared twice", lineno)
            if len(args) != 1:
                raise ParseError("semantics takes exactly one argument", lineno)
            try:
                kind = SemanticsKind(args[0])
            except ValueError:
                raise ParseError(f"unknown semantics {args[0]!r}", lineno) from None
        elif directive == "values":
            _declare(args, values, "value", lineno)
        elif directive == "states":
            _declare(args, states, "state", lineno)
        elif directive == "init":
            for tok in args:
                name, eq, count = tok.partition("=")
                if not eq or not count:
                    raise ParseError(f"expected <state>=<count>, got {tok!r}", lineno)
                init_items.append((name, count, lineno))
        elif directive == "store_init":
            if store_init is not None:
                raise ParseError("store_init declared twice", lineno)
            if len(args) != 1:
                raise ParseError("store_init takes exactly one value", lineno)
            store_init = (args[0], lineno)
        elif directive == "target":
            for tok in args:
                name, ge, count = tok.partition(">=")
                target_items.append((name, count if ge else None, lineno))
        elif directive == "trans":
            if len(args) != 3:
                raise ParseError("trans expects <state> <label> <state>", lineno)
            trans_items.append((args, lineno))
        else:
            raise ParseError(f"unknown directive {directive!r}", lineno)
        seen_sections.add(directive)

    for section in ("semantics", "states", "init", "target"):
        if section not in seen_sections:
            raise ParseError(f"missing mandatory section {section!r}")
    if kind.has_store and store_init is None:
        raise ParseError(f"store_init is required for semantics {kind.value}")
    if not kind.has_store and store_init is not None:
        raise ParseError(f"store_init is not allowed for semantics {kind.value}",
                         store_init[1])

    def state_ref(name, lineno):
        if name not in states:
            raise ParseError(f"unknown state {name!r}", lineno)
        return name

    init: dict[str, float] = {}
    for name, count, lineno in init_items:
        state_ref(name, lineno)
        if name in init:
            raise ParseError(f"state {name!r} initialised twice", lineno)
        if count in ("omega", "ω"):
            init[name] = OMEGA
        elif count.isdigit():
            init[name] = int(count)
        else:
            raise ParseError(f"bad initial count {count!r}", lineno)

    demand: dict[str, int] = {}
    for name, count, lineno in target_items:
        state_ref(name, lineno)
        if name in demand:
            raise ParseError(f"state {name!r} targeted twice", lineno)
        if count is None:
            demand[name] = 1
        elif count.isdigit():
            demand[name] = int(count)
        else:
            raise ParseError(f"bad target count {count!r}", lineno)

    store0 = None
    if store_init is not None:
        store0, lineno = store_init
        if store0 not in values:
            raise ParseError(f"unknown value {store0!r}", lineno)

    transitions = []
    for (src, lab, dst), lineno in trans_items:
        state_ref(src, lineno)
        state_ref(dst, lineno)
        try:
            label = parse_label(lab)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if label.value is not None and label.value not in values:
            raise ParseError(f"unknown value {label.value!r}", lineno)
        transitions.append(Transition(src, label, dst))

    return TemplateAutomaton(
        kind=kind,
        states=tuple(states),
        values=tuple(values),
        transitions=tuple(transitions),
        init=InitialSpec(init, store0),
        target=TargetSpec(demand),
    )


def to_text(t: TemplateAutomaton) -> str:
    """Serialize a template back to the crowd-file format."""
    lines = [f"semantics {t.kind.value}"]
    if t.values:
        lines.append("values " + " ".join(t.values))
    lines.append("states " + " ".join(t.states))
    lines.append("init " + " ".join(f"{q}={format_count(k)}" for q, k in t.init.counts.items()))
    if t.init.store0 is not None:
        lines.append(f"store_init {t.init.store0}")
    lines.append("target " + " ".join(f"{q}>={k}" for q, k in t.target.demand.items()))
    lines.extend(f"trans {tr}" for tr in t.transitions)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def __iter__(self):
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


class InvalidTemplate(ValueError):
    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(str(v) for v in report))


def lock_status(t: TemplateAutomaton) -> dict[str, set[str]]:
    """Propagate lock status ("free"/"held") from the initially occupied states.

    Lock moves free to held, unlock moves held to free, every other label keeps
    the status.  Lock from a held state and unlock from a free state do not
    propagate.  The result is a least fixed point, so it does not depend on the
    order in which transitions are visited.
    """
    status: dict[str, set[str]] = {q: set() for q in t.states}
    work = [(q, "free") for q in t.states if t.init.count(q) != 0]
    for q, s in work:
        status[q].add(s)
    out: dict[str, list[Transition]] = {q: [] for q in t.states}
    for tr in t.transitions:
        out[tr.source].append(tr)
    while work:
        q, s = work.pop()
        for tr in out[q]:
            kind = tr.label.kind
            if kind is LabelKind.LOCK:
                if s != "free":
                    continue
                nxt = "held"
            elif kind is LabelKind.UNLOCK:
                if s != "held":
                    continue
                nxt = "free"
            else:
                nxt = s
            if nxt not in status[tr.target]:
                status[tr.target].add(nxt)
                work.append((tr.target, nxt))
    return status


def validate(t: TemplateAutomaton) -> ValidationReport:
    out: list[Violation] = []

    allowed = _ALLOWED[t.kind] | {LabelKind.TAU}
    for tr in t.transitions:
        if tr.label.kind not in allowed:
            out.append(Violation(
                "label-kind", f"label {tr.label} not allowed under {t.kind.value}: {tr}"))

    if not any(k != 0 for k in t.init.counts.values()):
        out.append(Violation("empty-init", "no state has a nonzero initial count"))
    if not any(k > 0 for k in t.target.demand.values()):
        out.append(Violation("empty-demand", "target demand is all zero"))

    if t.kind is SemanticsKind.BROADCAST:
        has_recv = {(tr.source, tr.label.value) for tr in t.transitions
                    if tr.label.kind is LabelKind.BCAST_RECV}
        for q in t.states:
            for v in t.values:
                if (q, v) not in has_recv:
                    out.append(Violation(
                        "receive-totality", f"state {q} has no {v}?? transition"))

    if t.kind is SemanticsKind.LOCKSTORE:
        status = lock_status(t)
        for q in t.states:
            if len(status[q]) > 1:
                out.append(Violation(
                    "lock-inconsistent", f"state {q} is reachable both lock-free and lock-holding"))
        for tr in t.transitions:
            st = status[tr.source]
            kind = tr.label.kind
            if kind in (LabelKind.WRITE, LabelKind.READ) and "free" in st:
                out.append(Violation("rw-without-lock", f"{tr} starts in a lock-free state"))
            elif kind is LabelKind.LOCK and "held" in st:
                out.append(Violation("lock-from-held", f"{tr} starts in a lock-holding state"))
            elif kind is LabelKind.UNLOCK and "free" in st:
                out.append(Violation("unlock-from-free", f"{tr} starts in a lock-free state"))
        for q, k in t.init.counts.items():
            if k != 0 and "held" in status[q]:
                out.append(Violation(
                    "init-on-held", f"state {q} holds the lock but has initial count {format_count(k)}"))

    return ValidationReport(tuple(out))


def complete_receives(t: TemplateAutomaton) -> TemplateAutomaton:
    """Add a ``q v?? q`` self-loop for every (state, value) pair lacking a receive."""
    if t.kind is not SemanticsKind.BROADCAST:
        raise ValueError(f"complete_receives needs a broadcast template, got {t.kind.value}")
    has_recv = {(tr.source, tr.label.value) for tr in t.transitions
                if tr.label.kind is LabelKind.BCAST_RECV}
    extra = [Transition(q, Label(LabelKind.BCAST_RECV, v), q)
             for q in t.states for v in t.values if (q, v) not in has_recv]
    if not extra:
        return t
    return t.replace(transitions=t.transitions + tuple(extra))


def iter_transitions(t: TemplateAutomaton, *kinds: LabelKind) -> Iterable[Transition]:
    """Distinct transitions with the given label kinds, in template order."""
    return dict.fromkeys(tr for tr in t.transitions if tr.label.kind in kinds)
