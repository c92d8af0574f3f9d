"""Explicit-process simulator used as an independent check of the counting semantics.

Every process is an individual entry in a list, so "exactly two processes",
"all other processes" and the lock rules are applied literally.
"""

import itertools

from crowdcov.model import LabelKind


def _to_counts(t, procs):
    counts = [0] * len(t.states)
    for q in procs:
        counts[t.index[q]] += 1
    return tuple(counts)


def successor_counts(t, counts, store):
    """Set of (counts, store) reachable in one step from the given configuration."""
    procs = [q for q, k in zip(t.states, counts) for _ in range(k)]
    held = t.held_states
    out = set()
    trans = t.transitions
    for i, q in enumerate(procs):
        for tr in trans:
            if tr.source != q:
                continue
            lk = tr.label.kind
            if lk in (LabelKind.TAU, LabelKind.WRITE, LabelKind.READ, LabelKind.LOCK, LabelKind.UNLOCK):
                if lk is LabelKind.READ and store != tr.label.value:
                    continue
                if lk is LabelKind.LOCK and any(p in held for p in procs):
                    continue
                new = list(procs)
                new[i] = tr.target
                s2 = tr.label.value if lk is LabelKind.WRITE else store
                out.add((_to_counts(t, new), s2))
            elif lk is LabelKind.SEND:
                for j, q2 in enumerate(procs):
                    if j == i:
                        continue
                    for rv in trans:
                        if (rv.source == q2 and rv.label.kind is LabelKind.RECV
                                and rv.label.value == tr.label.value):
                            new = list(procs)
                            new[i] = tr.target
                            new[j] = rv.target
                            out.add((_to_counts(t, new), store))
            elif lk is LabelKind.BCAST_SEND:
                others = [j for j in range(len(procs)) if j != i]
                options = []
                for j in others:
                    opts = [rv.target for rv in trans
                            if rv.source == procs[j] and rv.label.kind is LabelKind.BCAST_RECV
                            and rv.label.value == tr.label.value]
                    options.append(opts)
                for choice in itertools.product(*options):
                    new = list(procs)
                    new[i] = tr.target
                    for j, target in zip(others, choice):
                        new[j] = target
                    out.add((_to_counts(t, new), store))
    return out
