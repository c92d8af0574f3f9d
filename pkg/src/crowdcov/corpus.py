"""Seeded random templates for cross-checking the engines."""

from __future__ import annotations

import random

from .model import (
    OMEGA,
    InitialSpec,
    Label,
    LabelKind,
    SemanticsKind,
    TargetSpec,
    TemplateAutomaton,
    Transition,
    complete_receives,
)

KINDS = tuple(SemanticsKind)


def _init(rng: random.Random, candidates: list[str]) -> dict[str, float]:
    shape = rng.choice(["leaderless", "leaderless", "leader", "two-omega", "finite"])
    if shape == "leader" and len(candidates) >= 2:
        a, b = rng.sample(candidates, 2)
        return {a: 1, b: OMEGA}
    if shape == "two-omega" and len(candidates) >= 2:
        a, b = rng.sample(candidates, 2)
        return {a: OMEGA, b: OMEGA}
    if shape == "finite":
        return {rng.choice(candidates): rng.randint(1, 3)}
    return {rng.choice(candidates): OMEGA}


def _target(rng: random.Random, states: list[str]) -> dict[str, int]:
    picked = rng.sample(states, rng.choice([1, 1, 1, 2]) if len(states) > 1 else 1)
    return {q: rng.choice([1, 1, 2]) for q in picked}


def random_template(rng: random.Random, kind: SemanticsKind, *, max_states: int = 5,
                    max_values: int = 2, max_transitions: int = 8, min_states: int = 1,
                    min_transitions: int = 0) -> TemplateAutomaton:
    """A random template of the given kind that passes validation.

    Broadcast templates get their missing receives completed with self-loops,
    so they may end up with more than ``max_transitions`` transitions.
    """
    nq = rng.randint(min_states, max_states)
    nv = rng.randint(1, max_values)
    states = [f"q{i}" for i in range(nq)]
    values = ["a", "b", "c", "d"][:nv]
    ntrans = rng.randint(min_transitions, max_transitions)
    trans: list[Transition] = []

    def lab(k, v=None):
        return Label(k, v)

    if kind is SemanticsKind.LOCKSTORE:
        n_free = rng.randint(1, nq)
        free, held = states[:n_free], states[n_free:]
        init_candidates = free
        for _ in range(ntrans):
            options = ["tau"]
            if held:
                options += ["lock", "unlock", "rw", "rw"]
            op = rng.choice(options)
            if op == "tau":
                side = free if not held or rng.random() < 0.5 else held
                trans.append(Transition(rng.choice(side), lab(LabelKind.TAU), rng.choice(side)))
            elif op == "lock":
                trans.append(Transition(rng.choice(free), lab(LabelKind.LOCK), rng.choice(held)))
            elif op == "unlock":
                trans.append(Transition(rng.choice(held), lab(LabelKind.UNLOCK), rng.choice(free)))
            else:
                k = rng.choice([LabelKind.WRITE, LabelKind.READ])
                trans.append(Transition(rng.choice(held), lab(k, rng.choice(values)), rng.choice(held)))
    else:
        kinds = {
            SemanticsKind.BROADCAST: [LabelKind.BCAST_SEND, LabelKind.BCAST_RECV, LabelKind.BCAST_RECV],
            SemanticsKind.RENDEZVOUS: [LabelKind.SEND, LabelKind.RECV],
            SemanticsKind.STORE: [LabelKind.WRITE, LabelKind.READ],
        }[kind] + [LabelKind.TAU]
        init_candidates = states
        for _ in range(ntrans):
            k = rng.choice(kinds)
            v = None if k is LabelKind.TAU else rng.choice(values)
            trans.append(Transition(rng.choice(states), lab(k, v), rng.choice(states)))

    t = TemplateAutomaton(
        kind=kind,
        states=tuple(states),
        values=tuple(values),
        transitions=tuple(trans),
        init=InitialSpec(_init(rng, init_candidates),
                         rng.choice(values) if kind.has_store else None),
        target=TargetSpec(_target(rng, states)),
    )
    if kind is SemanticsKind.BROADCAST:
        t = complete_receives(t)
    return t


def random_corpus(seed: int, per_kind: int, kinds=KINDS, **shape) -> list[TemplateAutomaton]:
    """``per_kind`` templates of each kind; ``shape`` is passed on to :func:`random_template`."""
    rng = random.Random(seed)
    return [random_template(rng, kind, **shape) for kind in kinds for _ in range(per_kind)]
