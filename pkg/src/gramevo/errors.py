"""Exception hierarchy shared by every module of the package."""


class GramevoError(Exception):
    """Base class for all errors raised by gramevo."""


# grammar --------------------------------------------------------------------

class GrammarError(GramevoError):
    """A grammar file could not be turned into an analyzed rule table."""


class MalformedRule(GrammarError):
    pass


class UndefinedNonTerminal(GrammarError):
    pass


class NonTerminatingRule(GrammarError):
    pass


class EmptyGrammar(GrammarError):
    pass


class DuplicateRule(GrammarError):
    pass


class MissingDatasetContext(GrammarError):
    pass


class NonPositiveRange(GrammarError):
    pass


# trees and operators --------------------------------------------------------

class RangeTooSmall(GramevoError):
    pass


class DepthInfeasible(GramevoError):
    pass


class EmptyCandidatePool(GramevoError):
    pass


class SizeMismatch(GramevoError):
    pass


# problems -------------------------------------------------------------------

class FitnessError(GramevoError):
    """Evaluating one phenotype failed; the engine assigns the worst fitness."""


class ExpressionParseError(FitnessError):
    pass


class InterpreterError(FitnessError):
    pass


class DatasetError(GramevoError):
    pass


class MissingFile(DatasetError):
    pass


class RaggedRows(DatasetError):
    pass


class NonNumericCell(DatasetError):
    pass


# configuration --------------------------------------------------------------

class ConfigurationError(GramevoError):
    """Raised for inconsistent or unknown run parameters.

    ``key`` names the offending parameter so the CLI can report it.
    """

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownKey(ConfigurationError):
    pass


class MalformedLine(ConfigurationError):
    def __init__(self, line, column, message):
        super().__init__(f"line {line}", f"column {column}: {message}")
        self.line = line
        self.column = column
