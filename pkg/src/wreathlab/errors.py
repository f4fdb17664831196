"""Shared exception types."""


class WreathlabError(Exception):
    pass


class BudgetExceededError(WreathlabError):
    """A configured work budget (ball size, recursion nodes, table size) ran out.

    Raised instead of returning a possibly wrong answer.
    """


class InvalidConfigError(WreathlabError):
    pass
