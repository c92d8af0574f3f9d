"""Forward Karp-Miller exploration over generalized markings (entries in N or omega)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..model import OMEGA
from ..net import ExtendedNet, Vector, enabled, fire_ordinary
from ..ucs import leq
from ..verdict import BudgetExceeded, Outcome, Verdict


class Inapplicable(ValueError):
    pass


@dataclass
class KMGraph:
    root: Vector
    nodes: list[Vector] = field(default_factory=list)
    edges: list[tuple[int, int, int]] = field(default_factory=list)  # (src, transition index, dst)
    parent: list[int | None] = field(default_factory=list)

    def __contains__(self, v) -> bool:
        return tuple(v) in set(self.nodes)

    def path(self, i: int) -> list[Vector]:
        out = []
        while i is not None:
            out.append(self.nodes[i])
            i = self.parent[i]
        return out[::-1]


def km_build(net: ExtendedNet, *, budget: int = 10**6) -> KMGraph:
    """Build the Karp-Miller tree, sharing nodes with equal labels.

    A fresh successor is accelerated against every ancestor on its tree path:
    where an ancestor lies strictly below it, each strictly larger entry
    becomes omega.  A successor equal to an existing node gets an edge to that
    node and is not expanded again.
    """
    if net.broadcasts:
        raise Inapplicable("Karp-Miller does not handle broadcast transitions")
    root = tuple(net.init)
    g = KMGraph(root, [root], [], [None])
    index = {root: 0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        m = g.nodes[i]
        for ti, t in enumerate(net.ordinary):
            if not enabled(m, t):
                continue
            m2 = list(fire_ordinary(net, m, t))
            a = i
            while a is not None:
                anc = g.nodes[a]
                if leq(anc, m2) and anc != tuple(m2):
                    for p, (x, y) in enumerate(zip(anc, m2)):
                        if x < y:
                            m2[p] = OMEGA
                a = g.parent[a]
            m2 = tuple(m2)
            j = index.get(m2)
            if j is None:
                j = len(g.nodes)
                if j >= budget:
                    raise BudgetExceeded(f"Karp-Miller graph grew beyond {budget} nodes")
                index[m2] = j
                g.nodes.append(m2)
                g.parent.append(i)
                queue.append(j)
            g.edges.append((i, ti, j))
    return g


def km_coverable(g: KMGraph, target: Vector) -> bool:
    return any(leq(target, v) for v in g.nodes)


def km_check(net: ExtendedNet, *, budget: int = 10**6) -> Verdict:
    if net.broadcasts:
        return Verdict(Outcome.INAPPLICABLE,
                       reason="Karp-Miller does not handle broadcast transitions")
    try:
        g = km_build(net, budget=budget)
    except BudgetExceeded as exc:
        return Verdict(Outcome.BUDGET_EXCEEDED, reason=str(exc))
    stats = {"nodes": len(g.nodes), "edges": len(g.edges)}
    outcome = Outcome.COVERABLE if km_coverable(g, net.target) else Outcome.SAFE
    return Verdict(outcome, stats=stats)
