import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdcov.corpus import random_template
from crowdcov.model import (
    OMEGA,
    Label,
    LabelKind,
    ParseError,
    SemanticsKind,
    Transition,
    complete_receives,
    lock_status,
    parse_template,
    to_text,
    validate,
)

from conftest import LEADER_TEXT


def test_parse_leader_template(leader_raw):
    t = leader_raw
    assert t.kind is SemanticsKind.BROADCAST
    assert t.states == ("q1", "q2", "q3")
    assert t.transitions == (
        Transition("q1", Label(LabelKind.BCAST_SEND, "a"), "q2"),
        Transition("q1", Label(LabelKind.BCAST_RECV, "a"), "q3"),
    )
    assert t.init.count("q1") == OMEGA
    assert t.init.count("q2") == 0
    assert dict(t.target.demand) == {"q2": 1}


def test_parse_without_transitions():
    t = parse_template("semantics rendezvous\nstates a b\ninit a=omega\ntarget b\n")
    assert t.transitions == ()
    assert t.values == ()


def test_label_kind_mismatch_parses_but_fails_validation():
    text = "semantics rendezvous\nvalues v\nstates a b\ninit a=omega\ntarget b\ntrans a w(v) b\n"
    t = parse_template(text)
    assert validate(t).codes() == ["label-kind"]


@pytest.mark.parametrize("label,kind,value", [
    ("tau", LabelKind.TAU, None),
    ("v!", LabelKind.SEND, "v"),
    ("v?", LabelKind.RECV, "v"),
    ("v!!", LabelKind.BCAST_SEND, "v"),
    ("v??", LabelKind.BCAST_RECV, "v"),
    ("w(v)", LabelKind.WRITE, "v"),
    ("r(v)", LabelKind.READ, "v"),
    ("lock", LabelKind.LOCK, None),
    ("unlock", LabelKind.UNLOCK, None),
])
def test_every_label_form(label, kind, value):
    t = parse_template(
        f"semantics store\nvalues v\nstates a b\ninit a=1\nstore_init v\ntarget b\ntrans a {label} b\n")
    assert t.transitions[0].label == Label(kind, value)
    assert str(t.transitions[0].label) == label


@pytest.mark.parametrize("text,line,fragment", [
    ("semantics broadcast\nstates a a\ninit a=1\ntarget a\n", 2, "duplicate state"),
    ("semantics broadcast\nvalues x x\nstates a\ninit a=1\ntarget a\n", 2, "duplicate value"),
    ("semantics broadcast\nstates a\ninit b=1\ntarget a\n", 3, "unknown state"),
    ("semantics broadcast\nstates a\ninit a=1\ntarget a\ntrans a z!! a\n", 5, "unknown value"),
    ("semantics broadcast\nstates a\ninit a=1\ntarget a\ntrans a ?! a\n", 5, "bad transition label"),
    ("semantics broadcast\nstates a\ninit a=x\ntarget a\n", 3, "bad initial count"),
    ("semantics broadcast\nstates a\ninit a=1\ntarget a>=z\n", 4, "bad target count"),
    ("semantics nope\n", 1, "unknown semantics"),
    ("semantics broadcast\nstates a\nfrobnicate\n", 3, "unknown directive"),
    ("semantics broadcast\nstates a\ninit a=1\ntarget a\ntrans a tau\n", 5, "trans expects"),
])
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse_template(text)
    assert info.value.line == line
    assert fragment in str(info.value)


@pytest.mark.parametrize("missing", ["semantics", "states", "init", "target"])
def test_missing_mandatory_section(missing):
    lines = [l for l in LEADER_TEXT.splitlines() if not l.startswith(missing)]
    with pytest.raises(ParseError, match="missing mandatory section"):
        parse_template("\n".join(lines))


def test_store_init_iff_store_kind():
    base = "values f\nstates a\ninit a=1\ntarget a\n"
    with pytest.raises(ParseError, match="store_init is required"):
        parse_template("semantics store\n" + base)
    with pytest.raises(ParseError, match="not allowed"):
        parse_template("semantics rendezvous\n" + base + "store_init f\n")
    assert parse_template("semantics lockstore\n" + base + "store_init f\n").init.store0 == "f"


def test_comments_and_blank_lines_are_ignored():
    text = "# header\n\nsemantics broadcast   # trailing\nstates a\ninit a=omega\n\ntarget a>=2\n"
    t = parse_template(text)
    assert dict(t.target.demand) == {"a": 2}


def test_totality_violations_for_leader_template(leader_raw):
    report = validate(leader_raw)
    assert report.codes() == ["receive-totality", "receive-totality"]
    assert "q2" in report.violations[0].message
    assert "q3" in report.violations[1].message


def test_complete_receives_adds_self_loops(leader_raw):
    t = complete_receives(leader_raw)
    added = t.transitions[len(leader_raw.transitions):]
    assert added == (
        Transition("q2", Label(LabelKind.BCAST_RECV, "a"), "q2"),
        Transition("q3", Label(LabelKind.BCAST_RECV, "a"), "q3"),
    )
    assert validate(t).ok


def test_complete_receives_identity_on_total(leader):
    assert complete_receives(leader) is leader


def test_complete_receives_two_values():
    t = parse_template(
        "semantics broadcast\nvalues a b\nstates p s\ninit p=omega\ntarget s\n"
        "trans p a?? p\ntrans p b?? s\n")
    done = complete_receives(t)
    assert len(done.transitions) == len(t.transitions) + 2
    assert all(tr.source == tr.target == "s" for tr in done.transitions[2:])


def test_complete_receives_rejects_other_kinds(rv_pair):
    with pytest.raises(ValueError):
        complete_receives(rv_pair)


LOCK_OK = """\
semantics lockstore
values v
states q1 l1 l2 q2
init q1=omega
store_init v
target q2
trans q1 lock l1
trans l1 w(v) l2
trans l2 unlock q2
"""


def test_lockstore_valid_template():
    t = parse_template(LOCK_OK)
    assert validate(t).ok
    assert lock_status(t) == {"q1": {"free"}, "l1": {"held"}, "l2": {"held"}, "q2": {"free"}}
    assert t.held_states == {"l1", "l2"}


def test_lock_from_held_state():
    t = parse_template("semantics lockstore\nvalues v\nstates q1\ninit q1=omega\n"
                       "store_init v\ntarget q1\ntrans q1 lock q1\n")
    codes = validate(t).codes()
    assert "lock-from-held" in codes
    assert "lock-inconsistent" in codes


def test_lockstore_other_violations():
    t = parse_template("semantics lockstore\nvalues v\nstates a b c\ninit a=omega b=1\n"
                       "store_init v\ntarget c\ntrans a r(v) c\ntrans a unlock c\ntrans a lock b\n")
    codes = validate(t).codes()
    assert "rw-without-lock" in codes
    assert "unlock-from-free" in codes
    assert "init-on-held" in codes


def test_empty_init_and_demand():
    t = parse_template("semantics rendezvous\nstates a\ninit a=0\ntarget a>=0\n")
    assert validate(t).codes() == ["empty-init", "empty-demand"]


def test_lock_status_independent_of_transition_order():
    rng = random.Random(11)
    for _ in range(50):
        t = random_template(rng, SemanticsKind.LOCKSTORE)
        shuffled = list(t.transitions)
        rng.shuffle(shuffled)
        assert lock_status(t) == lock_status(t.replace(transitions=tuple(shuffled)))


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), kind=st.sampled_from(list(SemanticsKind)))
def test_round_trip(seed, kind):
    t = random_template(random.Random(seed), kind)
    assert parse_template(to_text(t)) == t


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_completion_always_total(seed):
    rng = random.Random(seed)
    t = random_template(rng, SemanticsKind.BROADCAST)
    # drop a few receives, then repair
    kept = tuple(tr for tr in t.transitions if rng.random() < 0.6)
    repaired = complete_receives(t.replace(transitions=kept))
    assert "receive-totality" not in validate(repaired).codes()


def test_random_corpus_templates_are_valid():
    rng = random.Random(5)
    for kind in SemanticsKind:
        for _ in range(100):
            assert validate(random_template(rng, kind)).ok
