"""Exception hierarchy shared by all modules.

Errors split into two families, which the command-line front end maps to
distinct exit codes: :class:`DomainError` (the input was well formed but the
requested reasoning step has no answer) and :class:`ParseError` (the input
text itself is malformed).
"""


class ActionLogicError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ActionLogicError):
    """A well-formed request whose answer does not exist under the model."""


class ParseError(ActionLogicError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ResolutionError(ParseError):
    """A name (fluent, action, observation) could not be resolved."""


class SizeLimit(DomainError):
    pass


class EmptyResult(DomainError):
    """Progression produced no state: the action is inexecutable on the belief."""


class Inexecutable(DomainError):
    pass


class Inconsistent(DomainError):
    """Filtering produced an empty belief: the observation is impossible."""


class UnknownObservation(DomainError):
    pass


class ZeroProbabilityObservation(DomainError):
    pass


class NoExplanation(DomainError):
    pass


class PreconditionFailure(DomainError):
    pass


class UndefinedProgression(DomainError):
    """Rules with complementary effects fire together."""


class IncompleteLaws(DomainError):
    """Static laws do not determine the derived fluents uniquely."""


class NonExplicitSSA(DomainError):
    pass


class CyclicSlice(DomainError):
    pass


class NonMarkovian(ParseError):
    """An edge of a two-slice network spans more than one time step."""


class NoFaithfulFamily(DomainError):
    """No faithful preorder family reproduces the given update operator."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
