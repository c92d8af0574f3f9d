from __future__ import annotations

from pathlib import Path

import pytest

from crowdcov.model import TargetSpec, complete_receives, parse_template

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

ACCEPTANCE_LINES: list[str] = []

LEADER_TEXT = """\
semantics broadcast
values a
states q1 q2 q3
init q1=omega
target q2>=1
trans q1 a!! q2
trans q1 a?? q3
"""

RV_PAIR_TEXT = """\
semantics rendezvous
values v
states q1 q3 q4
init q1=omega
target q4>=1
trans q1 v! q3
trans q1 v? q4
"""

RV_LEADER_TEXT = """\
semantics rendezvous
values v
states q1 q2 q3 q4
init q1=1 q2=omega
target q4>=1
trans q1 v! q3
trans q2 v? q4
"""


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.crowd"))


def load(name: str):
    return parse_template((CORPUS / name).read_text())


def with_target(t, **demand):
    return t.replace(target=TargetSpec(demand))


@pytest.fixture
def leader_raw():
    return parse_template(LEADER_TEXT)


@pytest.fixture
def leader(leader_raw):
    return complete_receives(leader_raw)


@pytest.fixture
def rv_pair():
    return parse_template(RV_PAIR_TEXT)


@pytest.fixture
def rv_leader():
    return parse_template(RV_LEADER_TEXT)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
