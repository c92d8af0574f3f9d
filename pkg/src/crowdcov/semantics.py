"""Concrete one-step semantics over the counting abstraction, plus witness replay.

A configuration records how many processes sit in each template state, plus
the store value for the store semantics.  Whether the lock is taken is not
stored: it is taken exactly when some process occupies a lock-holding state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .model import (
    LabelKind,
    SemanticsKind,
    TemplateAutomaton,
    Transition,
    is_omega,
    iter_transitions,
    parse_label,
)


@dataclass(frozen=True, order=True)
class Config:
    counts: tuple[int, ...]
    store: str | None = None

    @property
    def size(self) -> int:
        return sum(self.counts)


def make_config(t: TemplateAutomaton, counts: Mapping[str, int], store: str | None = None) -> Config:
    idx = t.index
    vec = [0] * len(t.states)
    for q, k in counts.items():
        vec[idx[q]] = k
    if store is None and t.kind.has_store:
        store = t.init.store0
    return Config(tuple(vec), store)


def config_dict(t: TemplateAutomaton, c: Config) -> dict[str, int]:
    return {q: k for q, k in zip(t.states, c.counts) if k}


def format_config(t: TemplateAutomaton, c: Config) -> str:
    body = ", ".join(f"{q}:{k}" for q, k in config_dict(t, c).items())
    if c.store is not None:
        return f"({{{body}}}, store={c.store})"
    return f"{{{body}}}"


class InvalidConfig(ValueError):
    pass


class StepNotEnabled(ValueError):
    pass


def check_config(t: TemplateAutomaton, c: Config) -> None:
    if len(c.counts) != len(t.states):
        raise InvalidConfig(f"config has {len(c.counts)} entries, template has {len(t.states)} states")
    if any(k < 0 for k in c.counts):
        raise InvalidConfig("negative process count")
    if t.kind.has_store:
        if c.store not in t.values:
            raise InvalidConfig(f"store value {c.store!r} is not a declared value")
    elif c.store is not None:
        raise InvalidConfig(f"{t.kind.value} configurations carry no store")
    if t.kind is SemanticsKind.LOCKSTORE and held_count(t, c) > 1:
        raise InvalidConfig("more than one process holds the lock")


def held_count(t: TemplateAutomaton, c: Config) -> int:
    idx = t.index
    return sum(c.counts[idx[q]] for q in t.held_states)


def meets_demand(t: TemplateAutomaton, c: Config) -> bool:
    idx = t.index
    return all(c.counts[idx[q]] >= k for q, k in t.target.demand.items())


# ---------------------------------------------------------------------------
# steps


@dataclass(frozen=True)
class Move:
    """One process takes a tau, store (read/write) or lock (lock/unlock) transition."""

    transition: Transition

    @property
    def kind(self) -> str:
        k = self.transition.label.kind
        if k in (LabelKind.WRITE, LabelKind.READ):
            return "store"
        if k in (LabelKind.LOCK, LabelKind.UNLOCK):
            return "lock"
        return "tau"

    def __str__(self) -> str:
        return str(self.transition)


@dataclass(frozen=True)
class RendezVous:
    send: Transition
    recv: Transition

    def __str__(self) -> str:
        return f"{self.send} + {self.recv}"


@dataclass(frozen=True)
class Broadcast:
    """The sender takes ``send``; every other process takes the receive it is assigned.

    ``assignment`` lists (receive transition, number of processes) pairs with
    positive counts, in template order.
    """

    send: Transition
    assignment: tuple[tuple[Transition, int], ...] = ()

    def __str__(self) -> str:
        parts = [str(self.send)] + [f"{tr} *{k}" for tr, k in self.assignment]
        return " | ".join(parts)


Step = Union[Move, RendezVous, Broadcast]


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` naturals summing to ``total``, lexicographically."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _receivers(t: TemplateAutomaton, value: str) -> dict[str, list[Transition]]:
    recv: dict[str, list[Transition]] = {q: [] for q in t.states}
    for tr in iter_transitions(t, LabelKind.BCAST_RECV):
        if tr.label.value == value:
            recv[tr.source].append(tr)
    return recv


def broadcast_assignments(t: TemplateAutomaton, c: Config, send: Transition) -> Iterator[Broadcast]:
    """Lazily enumerate every way the non-senders can answer ``send`` at ``c``."""
    idx = t.index
    recv = _receivers(t, send.label.value)
    per_state = []
    for q in t.states:
        k = c.counts[idx[q]] - (1 if q == send.source else 0)
        if k == 0:
            continue
        if not recv[q]:
            return
        per_state.append([list(zip(recv[q], split)) for split in compositions(k, len(recv[q]))])
    for choice in itertools.product(*per_state):
        yield Broadcast(send, tuple((tr, k) for part in choice for tr, k in part if k))


def iter_enabled_steps(t: TemplateAutomaton, c: Config) -> Iterator[Step]:
    check_config(t, c)
    idx = t.index

    def count(q):
        return c.counts[idx[q]]

    kind = t.kind
    for tr in dict.fromkeys(t.transitions):
        lk = tr.label.kind
        if count(tr.source) < 1:
            continue
        if lk is LabelKind.TAU:
            yield Move(tr)
        elif lk is LabelKind.SEND and kind is SemanticsKind.RENDEZVOUS:
            for rv in iter_transitions(t, LabelKind.RECV):
                if rv.label.value != tr.label.value:
                    continue
                need = 2 if rv.source == tr.source else 1
                if count(rv.source) >= need:
                    yield RendezVous(tr, rv)
        elif lk is LabelKind.BCAST_SEND and kind is SemanticsKind.BROADCAST:
            yield from broadcast_assignments(t, c, tr)
        elif lk is LabelKind.WRITE and kind.has_store:
            yield Move(tr)
        elif lk is LabelKind.READ and kind.has_store:
            if c.store == tr.label.value:
                yield Move(tr)
        elif lk is LabelKind.LOCK and kind is SemanticsKind.LOCKSTORE:
            if held_count(t, c) == 0:
                yield Move(tr)
        elif lk is LabelKind.UNLOCK and kind is SemanticsKind.LOCKSTORE:
            yield Move(tr)


def enabled_steps(t: TemplateAutomaton, c: Config) -> list[Step]:
    return list(iter_enabled_steps(t, c))


def _check_enabled(t: TemplateAutomaton, c: Config, s: Step) -> None:
    idx = t.index
    kind = t.kind

    def need(cond, why):
        if not cond:
            raise StepNotEnabled(f"{s}: {why}")

    def known(tr):
        need(tr in t.transitions, f"{tr} is not a transition of the template")

    if isinstance(s, Move):
        tr = s.transition
        known(tr)
        lk = tr.label.kind
        need(lk in (LabelKind.TAU, LabelKind.WRITE, LabelKind.READ, LabelKind.LOCK, LabelKind.UNLOCK),
             "not a single-process transition")
        need(lk is LabelKind.TAU or (kind.has_store and lk in (LabelKind.WRITE, LabelKind.READ))
             or kind is SemanticsKind.LOCKSTORE, f"label {tr.label} unsupported by {kind.value}")
        need(c.counts[idx[tr.source]] >= 1, f"no process in {tr.source}")
        if lk is LabelKind.READ:
            need(c.store == tr.label.value, f"store holds {c.store}, not {tr.label.value}")
        if lk is LabelKind.LOCK:
            need(held_count(t, c) == 0, "lock already taken")
    elif isinstance(s, RendezVous):
        known(s.send)
        known(s.recv)
        need(kind is SemanticsKind.RENDEZVOUS, f"rendez-vous under {kind.value}")
        need(s.send.label.kind is LabelKind.SEND and s.recv.label.kind is LabelKind.RECV
             and s.send.label.value == s.recv.label.value, "labels do not match")
        if s.send.source == s.recv.source:
            need(c.counts[idx[s.send.source]] >= 2, f"needs two processes in {s.send.source}")
        else:
            need(c.counts[idx[s.send.source]] >= 1, f"no process in {s.send.source}")
            need(c.counts[idx[s.recv.source]] >= 1, f"no process in {s.recv.source}")
    elif isinstance(s, Broadcast):
        known(s.send)
        need(kind is SemanticsKind.BROADCAST, f"broadcast under {kind.value}")
        need(s.send.label.kind is LabelKind.BCAST_SEND, "sender label is not v!!")
        need(c.counts[idx[s.send.source]] >= 1, f"no process in {s.send.source}")
        routed = [0] * len(t.states)
        for tr, k in s.assignment:
            known(tr)
            need(tr.label.kind is LabelKind.BCAST_RECV and tr.label.value == s.send.label.value,
                 f"{tr} does not receive {s.send.label.value}")
            need(k >= 0, "negative assignment count")
            routed[idx[tr.source]] += k
        for q in t.states:
            avail = c.counts[idx[q]] - (1 if q == s.send.source else 0)
            need(routed[idx[q]] == avail,
                 f"assignment routes {routed[idx[q]]} of the {avail} listeners in {q}")
    else:
        raise TypeError(f"not a step: {s!r}")


def apply_step(t: TemplateAutomaton, c: Config, s: Step) -> Config:
    check_config(t, c)
    _check_enabled(t, c, s)
    idx = t.index
    counts = list(c.counts)
    store = c.store
    if isinstance(s, Move):
        tr = s.transition
        counts[idx[tr.source]] -= 1
        counts[idx[tr.target]] += 1
        if tr.label.kind is LabelKind.WRITE:
            store = tr.label.value
    elif isinstance(s, RendezVous):
        for tr in (s.send, s.recv):
            counts[idx[tr.source]] -= 1
            counts[idx[tr.target]] += 1
    else:
        counts[idx[s.send.source]] -= 1
        counts[idx[s.send.target]] += 1
        for tr, k in s.assignment:
            counts[idx[tr.source]] -= k
            counts[idx[tr.target]] += k
    return Config(tuple(counts), store)


def successors(t: TemplateAutomaton, c: Config) -> Iterator[tuple[Step, Config]]:
    for s in iter_enabled_steps(t, c):
        yield s, apply_step(t, c, s)


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class Witness:
    n: int
    init: Config
    steps: tuple[Step, ...] = ()


class ReplayError(ValueError):
    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


def check_initial(t: TemplateAutomaton, c: Config) -> None:
    """Raise unless ``c`` is one of the initial configurations the template allows."""
    check_config(t, c)
    for q, k in zip(t.states, c.counts):
        want = t.init.count(q)
        if not is_omega(want) and k != want:
            raise ReplayError(f"initial count of {q} is {k}, template fixes {int(want)}")
    if t.kind.has_store and c.store != t.init.store0:
        raise ReplayError(f"initial store is {c.store}, template fixes {t.init.store0}")


def replay_witness(t: TemplateAutomaton, w: Witness) -> list[Config]:
    """Replay ``w`` and return the configuration trace; raise ReplayError on failure."""
    try:
        check_initial(t, w.init)
    except InvalidConfig as exc:
        raise ReplayError(str(exc)) from None
    if w.init.size != w.n:
        raise ReplayError(f"initial configuration has {w.init.size} processes, witness says {w.n}")
    trace = [w.init]
    for i, s in enumerate(w.steps):
        try:
            trace.append(apply_step(t, trace[-1], s))
        except (StepNotEnabled, TypeError) as exc:
            raise ReplayError(str(exc), step=i) from None
    if not meets_demand(t, trace[-1]):
        raise ReplayError(f"final configuration {format_config(t, trace[-1])} misses the target")
    return trace


def format_witness(t: TemplateAutomaton, w: Witness) -> str:
    """Text form: ``n``, ``init``, optional ``store``, then one ``step`` per line."""
    lines = [f"n {w.n}",
             "init " + " ".join(f"{q}={k}" for q, k in config_dict(t, w.init).items())]
    if w.init.store is not None:
        lines.append(f"store {w.init.store}")
    lines.extend(f"step {s}" for s in w.steps)
    return "\n".join(lines) + "\n"


def _parse_transition(text: str) -> Transition:
    parts = text.split()
    if len(parts) != 3:
        raise ValueError(f"expected '<state> <label> <state>', got {text!r}")
    return Transition(parts[0], parse_label(parts[1]), parts[2])


def parse_witness(t: TemplateAutomaton, text: str) -> Witness:
    n = None
    counts: dict[str, int] = {}
    store = None
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, _, rest = line.partition(" ")
        try:
            if directive == "n":
                n = int(rest)
            elif directive == "init":
                for tok in rest.split():
                    q, _, k = tok.partition("=")
                    if q not in t.index:
                        raise ValueError(f"unknown state {q!r}")
                    counts[q] = int(k)
            elif directive == "store":
                store = rest.strip()
            elif directive == "step":
                steps.append(_parse_step(rest))
            else:
                raise ValueError(f"unknown directive {directive!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    init = make_config(t, counts, store)
    if n is None:
        n = init.size
    return Witness(n, init, tuple(steps))


def _parse_step(text: str) -> Step:
    if "|" in text:
        head, *rest = (p.strip() for p in text.split("|"))
        assignment = []
        for part in rest:
            body, _, k = part.rpartition("*")
            assignment.append((_parse_transition(body), int(k)))
        return Broadcast(_parse_transition(head), tuple(assignment))
    if "+" in text:
        send, recv = (p.strip() for p in text.split("+"))
        return RendezVous(_parse_transition(send), _parse_transition(recv))
    tr = _parse_transition(text)
    if tr.label.kind is LabelKind.BCAST_SEND:
        return Broadcast(tr, ())
    return Move(tr)


def step_to_json(s: Step) -> dict:
    if isinstance(s, Move):
        return {"kind": s.kind, "transition": str(s.transition)}
    if isinstance(s, RendezVous):
        return {"kind": "rendezvous", "send": str(s.send), "recv": str(s.recv)}
    return {"kind": "broadcast", "send": str(s.send),
            "assignment": [[str(tr), k] for tr, k in s.assignment]}


def witness_to_json(t: TemplateAutomaton, w: Witness) -> dict:
    out = {"n": w.n, "init": config_dict(t, w.init)}
    if w.init.store is not None:
        out["store"] = w.init.store
    out["steps"] = [step_to_json(s) for s in w.steps]
    return out
