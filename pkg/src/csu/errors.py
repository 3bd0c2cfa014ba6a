"""Exception hierarchy shared by every module of the package."""


class CSUError(Exception):
    """Base class for all errors raised by csu."""


class GrammarSyntaxError(CSUError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotDGNFError(CSUError, ValueError):
    """An operation that needs double Greibach normal form got something else."""

    def __init__(self, offenders):
        self.offenders = tuple(offenders)
        listed = ", ".join(str(p) for p in self.offenders[:5])
        super().__init__(f"grammar is not in double Greibach normal form: {listed}")


class PreconditionError(CSUError, ValueError):
    pass


class NormalizationDiverged(CSUError, RuntimeError):
    """A grammar rewriting loop exceeded its production cap."""


class UnknownSymbolError(CSUError, ValueError):
    pass


class CyclicGrammarError(CSUError, ValueError):
    """Raised when a word has infinitely many derivation trees (unit or epsilon cycles)."""


class TreeLimitExceeded(CSUError):
    """More derivation trees exist than the requested limit.

    ``trees`` holds the first ``limit`` trees in canonical order and
    ``total`` the exact number of trees.
    """

    def __init__(self, trees, total):
        self.trees = trees
        self.total = total
        super().__init__(f"{total} derivation trees exceed the limit of {len(trees)}")


class MalformedTreeError(CSUError, ValueError):
    pass


class DecodeError(CSUError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"position {position}: {message}"
        super().__init__(message)


class EnumerationBoundExceeded(CSUError, ValueError):
    pass


class UnboundVariableError(CSUError, KeyError):
    pass
