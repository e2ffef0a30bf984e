"""Belief dynamics for agents acting on propositional fluents.

Submodules:

* :mod:`logic` formulas, parsing, truth tables and forgetting
* :mod:`core` explicit states, actions, progression, filtering and scenarios
* :mod:`actionlang` causal-rule domains compiled to two-slice formulas
* :mod:`sitcalc` successor state axioms and regression
* :mod:`update` belief update operators and their postulates
* :mod:`bayes` survival persistence, Markov chains and two-slice networks
"""

from . import actionlang, bayes, core, logic, sitcalc, update
from .errors import ActionLogicError, DomainError, ParseError
from .logic import Atom, Formula, parse_formula

__all__ = ["actionlang", "bayes", "core", "logic", "sitcalc", "update",
           "ActionLogicError", "DomainError", "ParseError", "Atom", "Formula", "parse_formula"]
__version__ = "0.1.0"
