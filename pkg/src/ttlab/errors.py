"""Exception types shared across the package."""


class TTLabError(Exception):
    """Base class.  The CLI exits with 2 on these, except InvalidParams (1)."""


class InvalidParams(TTLabError, ValueError):
    pass


class BudgetExceeded(TTLabError):
    """A sampled tree outgrew ``SampleBudget.node_cap``."""


class DepthCapMissing(TTLabError, ValueError):
    pass


class InvalidTree(TTLabError):
    pass


class DomainError(TTLabError, ValueError):
    pass


class TailBoundTooLarge(TTLabError):
    pass


class GenerationTooLarge(TTLabError, ValueError):
    pass


class UnknownExperiment(TTLabError, KeyError):
    pass
