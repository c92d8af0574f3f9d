"""Brute-force ground truth: fixed-size exhaustive search and a predecessor oracle.

Nothing here is symbolic.  These functions exist to check the engines, so they
enumerate and fire rather than reason about upward-closed sets.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import TemplateAutomaton, is_omega
from .net import ExtendedNet, Vector, broadcast_successors, enabled, fire_ordinary
from .semantics import Config, Step, Witness, compositions, meets_demand, successors
from .verdict import BudgetExceeded, Outcome, Verdict

DEFAULT_BUDGET = 10**6


@dataclass
class ReachSet:
    n: int
    configs: set[Config]
    edges: dict[Config, list[tuple[Step, Config]]] | None = None

    def sorted(self) -> list[Config]:
        return sorted(self.configs)

    def __len__(self) -> int:
        return len(self.configs)


def initial_configs(t: TemplateAutomaton, n: int) -> list[Config]:
    """Every initial configuration of size ``n``: one per split of the free processes over omega states."""
    omega = [q for q in t.states if is_omega(t.init.count(q))]
    fixed = sum(int(t.init.count(q)) for q in t.states if q not in omega)
    if n < fixed:
        raise ValueError(f"crowd size {n} is below the {fixed} fixed initial processes")
    base = [0 if q in omega else int(t.init.count(q)) for q in t.states]
    store = t.init.store0 if t.kind.has_store else None
    if not omega:
        return [Config(tuple(base), store)] if n == fixed else []
    out = []
    idx = t.index
    for split in compositions(n - fixed, len(omega)):
        counts = list(base)
        for q, k in zip(omega, split):
            counts[idx[q]] = k
        out.append(Config(tuple(counts), store))
    return sorted(out)


def explore(t: TemplateAutomaton, n: int, *, budget: int = DEFAULT_BUDGET,
            keep_edges: bool = False) -> ReachSet:
    """All configurations reachable with exactly ``n`` processes."""
    start = initial_configs(t, n)
    seen = set(start)
    edges = {} if keep_edges else None
    queue = deque(start)
    while queue:
        c = queue.popleft()
        succ = list(successors(t, c))
        if keep_edges:
            edges[c] = succ
        for _, c2 in sorted(succ, key=lambda sc: sc[1]):
            if c2 not in seen:
                seen.add(c2)
                if len(seen) > budget:
                    raise BudgetExceeded(f"more than {budget} configurations at n={n}")
                queue.append(c2)
    return ReachSet(n, seen, edges)


def _bfs_to_target(t: TemplateAutomaton, n: int, budget: int):
    start = initial_configs(t, n)
    parent: dict[Config, tuple[Config, Step] | None] = {c: None for c in start}
    queue = deque(start)
    while queue:
        c = queue.popleft()
        if meets_demand(t, c):
            steps = []
            cur = c
            while parent[cur] is not None:
                prev, s = parent[cur]
                steps.append(s)
                cur = prev
            return Witness(n, cur, tuple(reversed(steps))), len(parent)
        for s, c2 in sorted(successors(t, c), key=lambda sc: sc[1]):
            if c2 not in parent:
                parent[c2] = (c, s)
                if len(parent) > budget:
                    raise BudgetExceeded(f"more than {budget} configurations at n={n}")
                queue.append(c2)
    return None, len(parent)


def oracle_coverable(t: TemplateAutomaton, nmax: int, *, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Bounded check: try every crowd size up to ``nmax``.  Never answers plain SAFE."""
    stats = {"explored": 0}
    fixed = sum(int(k) for k in t.init.counts.values() if not is_omega(k))
    for n in range(fixed, nmax + 1):
        try:
            witness, explored = _bfs_to_target(t, n, budget)
        except BudgetExceeded as exc:
            return Verdict(Outcome.BUDGET_EXCEEDED, stats=stats, reason=str(exc))
        stats["explored"] += explored
        if witness is not None:
            stats["n"] = n
            return Verdict(Outcome.COVERABLE, witness=witness, stats=stats)
    return Verdict(Outcome.SAFE_UP_TO, stats=stats, bound=nmax)


# ---------------------------------------------------------------------------
# predecessor oracle


def _net_successors(net: ExtendedNet, d: Vector):
    for t in net.ordinary:
        if enabled(d, t):
            yield fire_ordinary(net, d, t)
    for b in net.broadcasts:
        yield from broadcast_successors(net, d, b)


def brute_pred(net: ExtendedNet, m: Vector, bound: int | Vector) -> set[Vector]:
    """Every ``d`` with entries within ``bound`` having a one-step successor covering ``m``."""
    caps = [bound] * len(net.places) if isinstance(bound, int) else list(bound)
    out = set()
    for d in itertools.product(*(range(c + 1) for c in caps)):
        if any(all(x >= y for x, y in zip(c, m)) for c in _net_successors(net, d)):
            out.add(d)
    return out


@dataclass
class PredTable:
    """Brute-force predecessor sets for every demand vector in a box, all at once.

    ``covers[i, code]`` says that box marking ``i`` has a one-step successor
    covering the demand vector with index ``code``.  Demands range over
    ``demand_places`` with entries up to ``demand_cap`` and are zero elsewhere.
    """

    cap: int
    shape: tuple[int, ...]
    demand_places: tuple[int, ...]
    demand_cap: int
    covers: np.ndarray = field(repr=False)

    def demands(self):
        size = len(self.shape)
        for code, entries in enumerate(itertools.product(range(self.demand_cap + 1),
                                                         repeat=len(self.demand_places))):
            m = [0] * size
            for p, k in zip(self.demand_places, entries):
                m[p] = k
            yield code, tuple(m)

    def pred_set(self, code: int) -> np.ndarray:
        """Boolean array over the box (shape ``self.shape``)."""
        return self.covers[:, code].reshape(self.shape)


def brute_pred_table(net: ExtendedNet, cap: int, demand_cap: int,
                     demand_places: tuple[int, ...] | None = None) -> PredTable:
    """Fire every transition from every box marking and record which demands get covered."""
    if demand_places is None:
        demand_places = tuple(range(net.n_states))
    size = len(net.places)
    shape = (cap + 1,) * size
    box = np.indices(shape).reshape(size, -1).T  # C order, matches reshape(shape)
    dp = list(demand_places)
    weights = (demand_cap + 1) ** np.arange(len(dp))[::-1]
    n_codes = (demand_cap + 1) ** len(dp)
    covers = np.zeros((box.shape[0], n_codes), dtype=bool)

    def mark(rows, succ):
        clipped = np.minimum(succ[:, dp], demand_cap)
        covers[rows, clipped @ weights] = True

    for t in net.ordinary:
        pre = np.array(t.pre)
        post = np.array(t.post)
        rows = np.nonzero((box >= pre).all(axis=1))[0]
        mark(rows, box[rows] - pre + post)
    if net.broadcasts:
        rows, succ = [], []
        for i, d in enumerate(map(tuple, box.tolist())):
            for b in net.broadcasts:
                for s in broadcast_successors(net, d, b):
                    rows.append(i)
                    succ.append(s)
        if rows:
            mark(np.array(rows), np.array(succ))

    # a successor covering m also covers every smaller demand
    grid = covers.reshape((box.shape[0],) + (demand_cap + 1,) * len(dp))
    for axis in range(1, len(dp) + 1):
        flipped = np.flip(grid, axis=axis)
        np.logical_or.accumulate(flipped, axis=axis, out=flipped)
    return PredTable(cap, shape, tuple(demand_places), demand_cap, covers)
