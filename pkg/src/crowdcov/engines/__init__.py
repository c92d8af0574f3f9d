"""Decision procedures and engine selection."""

from __future__ import annotations

from ..model import InvalidTemplate, SemanticsKind, TemplateAutomaton, validate
from ..net import compile_template
from ..oracle import DEFAULT_BUDGET, oracle_coverable
from ..verdict import Outcome, Verdict
from .backward import EngineError, Link, backward_check, extract_witness
from .karp_miller import Inapplicable, KMGraph, km_build, km_check, km_coverable
from .leaderless import is_leaderless, leaderless_rv, leaderless_store, rv_fixpoint

ENGINES = ("auto", "backward", "km", "leaderless", "oracle")


def auto_select(t: TemplateAutomaton) -> str:
    """Leaderless fixed point when it applies, backward search otherwise.

    Karp-Miller is never picked automatically.
    """
    if t.kind in (SemanticsKind.RENDEZVOUS, SemanticsKind.STORE) and is_leaderless(t):
        return "leaderless"
    return "backward"


def run_engine(t: TemplateAutomaton, engine: str = "auto", *, oracle_n: int = 5,
               witness: bool = False, budget: int = DEFAULT_BUDGET) -> tuple[str, Verdict]:
    """Decide coverability of ``t``'s target with the requested engine.

    Returns the engine actually used and its verdict.  With ``witness`` set, a
    COVERABLE answer from an engine that gives no trace is backed by a second
    run of the backward engine.
    """
    report = validate(t)
    if not report.ok:
        raise InvalidTemplate(report)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "auto":
        engine = auto_select(t)

    if engine == "oracle":
        return engine, oracle_coverable(t, oracle_n, budget=budget)
    if engine == "leaderless":
        if t.kind is SemanticsKind.RENDEZVOUS:
            verdict = leaderless_rv(t)
        elif t.kind is SemanticsKind.STORE:
            verdict = leaderless_store(t, budget=budget)
        else:
            verdict = Verdict(Outcome.INAPPLICABLE,
                              reason=f"no leaderless engine for {t.kind.value}")
    elif engine == "km":
        verdict = km_check(compile_template(t), budget=budget)
    else:
        verdict = backward_check(compile_template(t), witness=witness)

    if witness and verdict.coverable and verdict.witness is None:
        backed = backward_check(compile_template(t), witness=True)
        if not backed.coverable:
            raise EngineError(f"{engine} says COVERABLE but the backward engine disagrees")
        verdict.witness = backed.witness
    return engine, verdict


__all__ = [
    "ENGINES", "EngineError", "Inapplicable", "KMGraph", "Link", "auto_select",
    "backward_check", "extract_witness", "is_leaderless", "km_build", "km_check",
    "km_coverable", "leaderless_rv", "leaderless_store", "run_engine", "rv_fixpoint",
]
