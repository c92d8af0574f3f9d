"""Compilation of templates into an extended Petri net.

Places are the template states, then one ``val_<v>`` place per value for the
store semantics, then ``lockfree`` for the locking store.  Markings are dense
tuples in that order; entries may be ``OMEGA``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

from .model import (
    InvalidTemplate,
    LabelKind,
    SemanticsKind,
    TemplateAutomaton,
    Transition,
    format_count,
    is_omega,
    iter_transitions,
    validate,
)
from .semantics import Broadcast, Config, Move, RendezVous, Step, compositions
from .verdict import BudgetExceeded

Vector = tuple  # tuple of int | OMEGA, one entry per place


@dataclass(frozen=True)
class OrdinaryTransition:
    pre: Vector
    post: Vector
    source: tuple[Transition, ...]
    note: str = ""

    @property
    def tag(self) -> str:
        tag = " + ".join(str(tr) for tr in self.source)
        return f"{tag} [{self.note}]" if self.note else tag


@dataclass(frozen=True)
class BroadcastTransition:
    sender_pre: int
    sender_post: int
    transfer: tuple[tuple[int, int], ...]  # sorted (from, to) place pairs
    source: Transition

    @property
    def tag(self) -> str:
        return str(self.source)


@dataclass(frozen=True, eq=False)
class ExtendedNet:
    template: TemplateAutomaton
    places: tuple[str, ...]
    ordinary: tuple[OrdinaryTransition, ...]
    broadcasts: tuple[BroadcastTransition, ...]
    init: Vector
    target: Vector
    bounded_groups: tuple[tuple[int, ...], ...] = ()
    """Place groups whose total is at most one in every reachable marking."""

    @property
    def n_states(self) -> int:
        return len(self.template.states)

    def place(self, name: str) -> int:
        return self.places.index(name)

    def vector(self, entries: dict[str, float]) -> Vector:
        vec = [0] * len(self.places)
        for name, k in entries.items():
            vec[self.place(name)] = k
        return tuple(vec)

    def as_dict(self, m: Vector) -> dict[str, float]:
        return {p: k for p, k in zip(self.places, m) if k}


class NotEnabled(ValueError):
    pass


def compile_template(t: TemplateAutomaton) -> ExtendedNet:
    report = validate(t)
    if not report.ok:
        raise InvalidTemplate(report)

    places = list(t.states)
    val = {}
    if t.kind.has_store:
        for v in t.values:
            val[v] = len(places)
            places.append(f"val_{v}")
    lockfree = None
    if t.kind is SemanticsKind.LOCKSTORE:
        lockfree = len(places)
        places.append("lockfree")
    if len(set(places)) != len(places):
        raise ValueError("a state name collides with a generated place name")
    size = len(places)
    idx = t.index

    def vec(*entries):
        out = [0] * size
        for p in entries:
            out[p] += 1
        return tuple(out)

    ordinary: list[OrdinaryTransition] = []
    broadcasts: list[BroadcastTransition] = []
    for tr in dict.fromkeys(t.transitions):
        q, q2, lk = idx[tr.source], idx[tr.target], tr.label.kind
        if lk is LabelKind.TAU:
            ordinary.append(OrdinaryTransition(vec(q), vec(q2), (tr,)))
        elif lk is LabelKind.SEND:
            for rv in iter_transitions(t, LabelKind.RECV):
                if rv.label.value == tr.label.value:
                    ordinary.append(OrdinaryTransition(
                        vec(q, idx[rv.source]), vec(q2, idx[rv.target]), (tr, rv)))
        elif lk is LabelKind.WRITE:
            for g in t.values:
                ordinary.append(OrdinaryTransition(
                    vec(q, val[g]), vec(q2, val[tr.label.value]), (tr,), note=f"store={g}"))
        elif lk is LabelKind.READ:
            v = val[tr.label.value]
            ordinary.append(OrdinaryTransition(vec(q, v), vec(q2, v), (tr,)))
        elif lk is LabelKind.LOCK:
            ordinary.append(OrdinaryTransition(vec(q, lockfree), vec(q2), (tr,)))
        elif lk is LabelKind.UNLOCK:
            ordinary.append(OrdinaryTransition(vec(q), vec(q2, lockfree), (tr,)))
        elif lk is LabelKind.BCAST_SEND:
            transfer = sorted({
                (idx[rv.source], idx[rv.target])
                for rv in iter_transitions(t, LabelKind.BCAST_RECV)
                if rv.label.value == tr.label.value
            })
            broadcasts.append(BroadcastTransition(q, q2, tuple(transfer), tr))

    init = [0] * size
    for s, k in t.init.counts.items():
        init[idx[s]] = k
    groups = []
    if t.kind.has_store:
        init[val[t.init.store0]] = 1
        groups.append(tuple(val.values()))
    if lockfree is not None:
        init[lockfree] = 1
        groups.append((lockfree,) + tuple(sorted(idx[s] for s in t.held_states)))
    target = [0] * size
    for s, k in t.target.demand.items():
        target[idx[s]] = k

    return ExtendedNet(
        template=t,
        places=tuple(places),
        ordinary=tuple(ordinary),
        broadcasts=tuple(broadcasts),
        init=tuple(init),
        target=tuple(target),
        bounded_groups=tuple(groups),
    )


def enabled(m: Vector, t: OrdinaryTransition) -> bool:
    return all(a >= b for a, b in zip(m, t.pre))


def fire_ordinary(net: ExtendedNet, m: Vector, t: OrdinaryTransition) -> Vector:
    if not enabled(m, t):
        raise NotEnabled(f"{t.tag} is not enabled")
    return tuple(a - b + c for a, b, c in zip(m, t.pre, t.post))


def fire_broadcast(net: ExtendedNet, m: Vector, b: BroadcastTransition,
                   assignment: dict[tuple[int, int], int]) -> Vector:
    """Fire ``b`` at a finite marking, routing listeners as ``assignment`` says.

    ``assignment`` maps transfer edges (from-place, to-place) to token counts;
    together with the sender it must account for every token on the state places.
    """
    if any(is_omega(k) for k in m):
        raise ValueError("fire_broadcast needs a finite marking")
    if m[b.sender_pre] < 1:
        raise NotEnabled(f"{b.tag}: no sender token")
    edges = set(b.transfer)
    routed = [0] * len(m)
    out = list(m)
    for (p, p2), k in assignment.items():
        if (p, p2) not in edges:
            raise ValueError(f"({net.places[p]}, {net.places[p2]}) is not a transfer edge")
        if k < 0:
            raise ValueError("negative routing count")
        routed[p] += k
    for p in range(net.n_states):
        avail = m[p] - (1 if p == b.sender_pre else 0)
        if routed[p] != avail:
            raise ValueError(f"routing moves {routed[p]} of {avail} tokens from {net.places[p]}")
        out[p] = 0
    out[b.sender_post] += 1
    for (p, p2), k in assignment.items():
        out[p2] += k
    return tuple(out)


def broadcast_successors(net: ExtendedNet, m: Vector, b: BroadcastTransition) -> Iterator[Vector]:
    """Every marking reachable by firing ``b`` once at the finite marking ``m``."""
    if m[b.sender_pre] < 1:
        return
    out_edges: dict[int, list[int]] = {}
    for p, p2 in b.transfer:
        out_edges.setdefault(p, []).append(p2)
    per_place = []
    for p in range(net.n_states):
        k = m[p] - (1 if p == b.sender_pre else 0)
        if k == 0:
            continue
        dests = out_edges.get(p)
        if not dests:
            return
        per_place.append([tuple(zip(dests, split)) for split in compositions(k, len(dests))])
    base = list(m)
    for p in range(net.n_states):
        base[p] = 0
    base[b.sender_post] += 1
    seen = set()
    for choice in itertools.product(*per_place):
        out = list(base)
        for part in choice:
            for p2, k in part:
                out[p2] += k
        out = tuple(out)
        if out not in seen:
            seen.add(out)
            yield out


def successors(net: ExtendedNet, m: Vector) -> Iterator[Vector]:
    for t in net.ordinary:
        if enabled(m, t):
            yield fire_ordinary(net, m, t)
    for b in net.broadcasts:
        yield from broadcast_successors(net, m, b)


def reachable_markings(net: ExtendedNet, start: Sequence[Vector], budget: int = 10**6) -> set[Vector]:
    seen = set(start)
    queue = deque(sorted(seen))
    while queue:
        m = queue.popleft()
        for m2 in successors(net, m):
            if m2 not in seen:
                seen.add(m2)
                if len(seen) > budget:
                    raise BudgetExceeded(f"more than {budget} markings")
                queue.append(m2)
    return seen


def initial_markings(net: ExtendedNet, n: int) -> list[Vector]:
    """Finite markings of the initial family with ``n`` processes on the state places."""
    omega = [p for p in range(net.n_states) if is_omega(net.init[p])]
    fixed = sum(net.init[p] for p in range(net.n_states) if not is_omega(net.init[p]))
    if n < fixed:
        raise ValueError(f"crowd size {n} is below the {fixed} fixed initial processes")
    if not omega:
        return [net.init] if n == fixed else []
    out = []
    for split in compositions(n - fixed, len(omega)):
        m = list(net.init)
        for p, k in zip(omega, split):
            m[p] = k
        out.append(tuple(m))
    return out


def config_to_marking(net: ExtendedNet, c: Config) -> Vector:
    t = net.template
    m = list(c.counts) + [0] * (len(net.places) - len(c.counts))
    if t.kind.has_store:
        m[net.place(f"val_{c.store}")] = 1
    if t.kind is SemanticsKind.LOCKSTORE:
        held = sum(c.counts[t.index[q]] for q in t.held_states)
        m[net.place("lockfree")] = 1 - held
    return tuple(m)


def marking_to_config(net: ExtendedNet, m: Vector) -> Config:
    t = net.template
    store = None
    if t.kind.has_store:
        (store,) = [v for v in t.values if m[net.place(f"val_{v}")] == 1]
    return Config(tuple(m[: net.n_states]), store)


def step_for(net: ExtendedNet, t: OrdinaryTransition) -> Step:
    if len(t.source) == 2:
        return RendezVous(*t.source)
    return Move(t.source[0])


def broadcast_step(net: ExtendedNet, b: BroadcastTransition,
                   assignment: dict[tuple[int, int], int]) -> Broadcast:
    """Translate an edge routing into a template-level broadcast step."""
    tmpl = net.template
    value = b.source.label.value
    by_edge: dict[tuple[int, int], Transition] = {}
    for rv in iter_transitions(tmpl, LabelKind.BCAST_RECV):
        if rv.label.value == value:
            by_edge.setdefault((tmpl.index[rv.source], tmpl.index[rv.target]), rv)
    counts: dict[Transition, int] = {}
    for edge, k in assignment.items():
        if k:
            tr = by_edge[edge]
            counts[tr] = counts.get(tr, 0) + k
    order = {tr: i for i, tr in enumerate(tmpl.transitions)}
    return Broadcast(b.source, tuple(sorted(counts.items(), key=lambda kv: order[kv[0]])))


def _multiset(net: ExtendedNet, v: Vector) -> str:
    return "{" + ", ".join(f"{p}:{format_count(k)}" for p, k in net.as_dict(v).items()) + "}"


def dump(net: ExtendedNet) -> str:
    """Human-readable text form of the net."""
    lines = ["places " + " ".join(net.places)]
    lines.append("init " + _multiset(net, net.init))
    lines.append("target " + _multiset(net, net.target))
    for i, t in enumerate(net.ordinary):
        lines.append(f"ordinary t{i} pre {_multiset(net, t.pre)} post {_multiset(net, t.post)}  # {t.tag}")
    for i, b in enumerate(net.broadcasts):
        edges = " ".join(f"{net.places[p]}->{net.places[p2]}" for p, p2 in b.transfer)
        lines.append(f"broadcast b{i} sender {net.places[b.sender_pre]}->{net.places[b.sender_post]}"
                     f" transfer {edges}  # {b.tag}")
    return "\n".join(lines) + "\n"

