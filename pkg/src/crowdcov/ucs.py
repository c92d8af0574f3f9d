"""Upward-closed sets of markings, kept as antichains of minimal elements.

A basis ``B`` stands for ``{c : c >= e for some e in B}``.  Vectors are dense
tuples over the net's places; ``OMEGA`` entries compare above every natural.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .model import is_omega
from .net import BroadcastTransition, ExtendedNet, OrdinaryTransition, Vector


def leq(a: Vector, b: Vector) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _key(v: Vector):
    return (sum(v), v)


@dataclass(frozen=True)
class Basis:
    elems: tuple[Vector, ...] = ()

    def __iter__(self) -> Iterator[Vector]:
        return iter(self.elems)

    def __len__(self) -> int:
        return len(self.elems)

    def __bool__(self) -> bool:
        return bool(self.elems)


def minimize(vs: Iterable[Vector]) -> Basis:
    """The minimal elements of ``vs``, deduplicated, in canonical order."""
    kept: list[Vector] = []
    # by total size first: nothing later can lie strictly below something earlier
    for v in sorted(set(map(tuple, vs)), key=_key):
        if not any(leq(e, v) for e in kept):
            kept.append(v)
    return Basis(tuple(sorted(kept)))


def contains(b: Basis, v: Vector) -> bool:
    return any(leq(e, v) for e in b)


def subsumed(b1: Basis, b2: Basis) -> bool:
    """True iff the set denoted by ``b2`` is included in the one denoted by ``b1``."""
    return all(contains(b1, e) for e in b2)


def pred_basis_ordinary(net: ExtendedNet, t: OrdinaryTransition, m: Vector) -> Vector:
    """Least marking from which firing ``t`` covers ``m``."""
    return tuple(a + max(x - c, 0) for a, x, c in zip(t.pre, m, t.post))


def broadcast_preds(net: ExtendedNet, b: BroadcastTransition, m: Vector,
                    stats: dict | None = None) -> Iterator[tuple[Vector, tuple[tuple[int, int], ...]]]:
    """Candidate predecessors of ``m`` under ``b``, each with the listener routing it relies on.

    The sender lands on its target place and pays one unit of demand there.  The
    rest of the demand on each state place ``p`` is met by listeners drawn, as a
    multiset, from the places that transfer into ``p``.  The routing lists one
    (from, to) edge per designated listener.
    """
    n = net.n_states
    residual = list(m)
    if residual[b.sender_post] > 0:
        residual[b.sender_post] -= 1
    preimage: dict[int, list[int]] = {}
    for p, p2 in b.transfer:
        preimage.setdefault(p2, []).append(p)

    demanded = [p for p in range(n) if residual[p] > 0]
    choices = []
    for p in demanded:
        sources = preimage.get(p)
        if not sources:
            return
        choices.append([(p, combo) for combo in
                        itertools.combinations_with_replacement(sources, residual[p])])
    base = [0] * len(m)
    base[b.sender_pre] = 1
    for p in range(n, len(m)):
        base[p] = m[p]
    for choice in itertools.product(*choices):
        if stats is not None:
            stats["broadcast_candidates"] = stats.get("broadcast_candidates", 0) + 1
        d = list(base)
        routing = []
        for p, combo in choice:
            for src in combo:
                d[src] += 1
                routing.append((src, p))
        yield tuple(d), tuple(routing)


def pred_basis_broadcast(net: ExtendedNet, b: BroadcastTransition, m: Vector,
                         stats: dict | None = None) -> Basis:
    """Minimal markings from which some firing of ``b`` covers ``m``."""
    if any(is_omega(x) for x in m):
        raise ValueError("demand vectors must be finite")
    return minimize(d for d, _ in broadcast_preds(net, b, m, stats))


def pred_basis(net: ExtendedNet, m: Vector) -> Basis:
    """Minimal one-step predecessors of the upward closure of ``m``, over all transitions."""
    cands = [pred_basis_ordinary(net, t, m) for t in net.ordinary]
    for b in net.broadcasts:
        cands.extend(pred_basis_broadcast(net, b, m))
    return minimize(cands)


def intersects_initial(b: Basis, init: Vector) -> Vector | None:
    """First element (canonical order) lying below some marking of the initial family."""
    for e in sorted(b.elems):
        if all(is_omega(i) or x <= i for x, i in zip(e, init)):
            return e
    return None

