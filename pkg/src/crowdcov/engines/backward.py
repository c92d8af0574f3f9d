"""Backward coverability over upward-closed sets, with witness extraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..model import is_omega
from ..net import (
    BroadcastTransition,
    ExtendedNet,
    OrdinaryTransition,
    Vector,
    broadcast_step,
    fire_broadcast,
    fire_ordinary,
    marking_to_config,
    step_for,
)
from ..semantics import ReplayError, Witness, replay_witness
from ..ucs import Basis, broadcast_preds, intersects_initial, leq, pred_basis_ordinary
from ..verdict import Outcome, Verdict

log = logging.getLogger(__name__)


class EngineError(RuntimeError):
    """An engine produced something inconsistent.  Always a bug."""


@dataclass(frozen=True)
class Link:
    """``vector`` reaches a marking covering ``parent`` by firing ``transition``."""

    transition: OrdinaryTransition | BroadcastTransition
    parent: Vector
    routing: tuple[tuple[int, int], ...] = ()


def _violates_bounds(net: ExtendedNet, d: Vector) -> bool:
    return any(sum(d[p] for p in group) > 1 for group in net.bounded_groups)


def backward_check(net: ExtendedNet, *, prune: bool = True, max_basis: int | None = None,
                   witness: bool = True) -> Verdict:
    """Saturate the predecessors of the target's upward closure, then test the initial family.

    With ``prune`` set, vectors that put more than one token on a group of
    places known to carry at most one token (store value places, lock places)
    are dropped: no reachable marking lies above them, nor above anything
    that can reach them.
    """
    target = tuple(net.target)
    active: list[Vector] = [target]
    alive = {target}
    links: dict[Vector, Link | None] = {target: None}
    frontier = [target]
    stats = {"iterations": 0, "candidates": 0, "pruned": 0, "max_frontier": 1}

    def consider(d: Vector, link: Link) -> None:
        stats["candidates"] += 1
        if prune and _violates_bounds(net, d):
            stats["pruned"] += 1
            return
        for e in active:
            if leq(e, d):
                return
        dominated = [e for e in active if leq(d, e)]
        for e in dominated:
            alive.discard(e)
        if dominated:
            active[:] = [e for e in active if e in alive]
        active.append(d)
        alive.add(d)
        links.setdefault(d, link)
        new.append(d)

    while frontier:
        stats["iterations"] += 1
        new: list[Vector] = []
        for m in frontier:
            if m not in alive:
                continue
            for t in net.ordinary:
                consider(pred_basis_ordinary(net, t, m), Link(t, m))
            for b in net.broadcasts:
                for d, routing in broadcast_preds(net, b, m, stats):
                    consider(d, Link(b, m, routing))
        frontier = sorted(d for d in new if d in alive)
        stats["max_frontier"] = max(stats["max_frontier"], len(frontier))
        if max_basis is not None and len(active) > max_basis:
            stats["basis_size"] = len(active)
            return Verdict(Outcome.BUDGET_EXCEEDED, stats=stats,
                           reason=f"basis grew beyond {max_basis} elements")
        log.debug("iteration %d: basis %d, frontier %d",
                  stats["iterations"], len(active), len(frontier))

    basis = Basis(tuple(sorted(active)))
    stats["basis_size"] = len(basis)
    hit = intersects_initial(basis, net.init)
    if hit is None:
        return Verdict(Outcome.SAFE, stats=stats)
    w = extract_witness(net, links, hit) if witness else None
    if w is not None:
        stats["witness_steps"] = len(w.steps)
    return Verdict(Outcome.COVERABLE, witness=w, stats=stats)


def extract_witness(net: ExtendedNet, links: dict[Vector, Link | None], hit: Vector) -> Witness:
    """Run the recorded backward chain forwards from a concrete initial marking.

    Omega entries of the initial family are instantiated with ``hit``'s counts;
    by monotonicity every marking along the way stays above the corresponding
    chain element, so the final marking covers the target.
    """
    chain: list[Link] = []
    v = hit
    while links[v] is not None:
        chain.append(links[v])
        v = links[v].parent
    if v != tuple(net.target):
        raise EngineError("backward chain does not end at the target")

    m = tuple(x if is_omega(i) else i for x, i in zip(hit, net.init))
    tmpl = net.template
    init_config = marking_to_config(net, m)
    steps = []
    for link in chain:
        t = link.transition
        if isinstance(t, OrdinaryTransition):
            m = fire_ordinary(net, m, t)
            steps.append(step_for(net, t))
        else:
            assignment = _route(net, m, t, link.routing)
            m = fire_broadcast(net, m, t, assignment)
            steps.append(broadcast_step(net, t, assignment))
        if not leq(link.parent, m):
            raise EngineError(f"marking {m} does not cover chain element {link.parent}")

    w = Witness(init_config.size, init_config, tuple(steps))
    try:
        replay_witness(tmpl, w)
    except ReplayError as exc:
        raise EngineError(f"extracted witness does not replay: {exc}") from exc
    return w


def _route(net: ExtendedNet, m: Vector, b: BroadcastTransition,
           routing: tuple[tuple[int, int], ...]) -> dict[tuple[int, int], int]:
    """Designated listeners follow ``routing``; the rest take their first transfer edge."""
    assignment: dict[tuple[int, int], int] = {}
    left = list(m[: net.n_states])
    left[b.sender_pre] -= 1
    for edge in routing:
        assignment[edge] = assignment.get(edge, 0) + 1
        left[edge[0]] -= 1
    first_edge = {}
    for p, p2 in b.transfer:
        first_edge.setdefault(p, (p, p2))
    for p, k in enumerate(left):
        if k < 0:
            raise EngineError(f"not enough tokens on {net.places[p]} for the recorded routing")
        if k == 0:
            continue
        if p not in first_edge:
            raise EngineError(f"tokens on {net.places[p]} have no transfer edge")
        edge = first_edge[p]
        assignment[edge] = assignment.get(edge, 0) + k
    return assignment
