"""Coverability for crowds of anonymous finite-state processes."""

from .model import OMEGA, SemanticsKind, TemplateAutomaton, parse_template, validate
from .net import compile_template
from .engines import auto_select, run_engine
from .verdict import Outcome, Verdict

__version__ = "0.1.0"
