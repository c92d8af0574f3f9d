"""Fixed-point engines for crowds that start with omega processes and no leader.

With unboundedly many processes in every state seen so far, a state is
coverable as soon as some move can put one process there: arbitrarily many
others can repeat the move right after.  So the engines track only the set of
populated states (plus the store value for the store semantics).
"""

from __future__ import annotations

from collections import deque

from ..model import LabelKind, SemanticsKind, TemplateAutomaton, is_omega
from ..verdict import Outcome, Verdict


def is_leaderless(t: TemplateAutomaton) -> bool:
    return all(k == 0 or is_omega(k) for k in t.init.counts.values())


def _demanded(t: TemplateAutomaton) -> list[str]:
    return [q for q in t.states if t.target.count(q) > 0]


def rv_fixpoint(t: TemplateAutomaton) -> tuple[set[str], int]:
    """Grow the set of omega-populated states until nothing new appears.

    Returns the final set and the number of rounds, the last one included.
    """
    omega = {q for q in t.states if is_omega(t.init.count(q))}
    sends = [tr for tr in t.transitions if tr.label.kind is LabelKind.SEND]
    recvs = [tr for tr in t.transitions if tr.label.kind is LabelKind.RECV]
    rounds = 0
    while True:
        rounds += 1
        new = set()
        for tr in t.transitions:
            if tr.label.kind is LabelKind.TAU and tr.source in omega:
                new.add(tr.target)
        for s in sends:
            if s.source not in omega:
                continue
            for r in recvs:
                # same source is fine: omega supplies both partners
                if r.label.value == s.label.value and r.source in omega:
                    new.add(s.target)
                    new.add(r.target)
        if new <= omega:
            return omega, rounds
        omega |= new


def leaderless_rv(t: TemplateAutomaton) -> Verdict:
    if t.kind is not SemanticsKind.RENDEZVOUS or not is_leaderless(t):
        return Verdict(Outcome.INAPPLICABLE,
                       reason="needs a rendez-vous template whose initial states are all omega")
    omega, rounds = rv_fixpoint(t)
    stats = {"iterations": rounds, "omega": [q for q in t.states if q in omega]}
    ok = all(q in omega for q in _demanded(t))
    return Verdict(Outcome.COVERABLE if ok else Outcome.SAFE, stats=stats)


def leaderless_store(t: TemplateAutomaton, *, budget: int = 10**6) -> Verdict:
    if t.kind is not SemanticsKind.STORE or not is_leaderless(t):
        return Verdict(Outcome.INAPPLICABLE,
                       reason="needs a store template whose initial states are all omega")
    idx = t.index
    demanded = {idx[q] for q in _demanded(t)}
    start = (frozenset(idx[q] for q in t.states if is_omega(t.init.count(q))), t.init.store0)
    moves = [(idx[tr.source], idx[tr.target], tr.label) for tr in dict.fromkeys(t.transitions)]
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        omega, store = node
        if demanded <= omega:
            stats = {"nodes": len(seen), "omega": [q for q in t.states if idx[q] in omega],
                     "store": store}
            return Verdict(Outcome.COVERABLE, stats=stats)
        for src, dst, label in moves:
            if src not in omega:
                continue
            if label.kind is LabelKind.READ and label.value != store:
                continue
            new_store = label.value if label.kind is LabelKind.WRITE else store
            nxt = (omega | {dst}, new_store)
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > budget:
                    return Verdict(Outcome.BUDGET_EXCEEDED, stats={"nodes": len(seen)},
                                   reason=f"more than {budget} abstract nodes")
                queue.append(nxt)
    return Verdict(Outcome.SAFE, stats={"nodes": len(seen)})
