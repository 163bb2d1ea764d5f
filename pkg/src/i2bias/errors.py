"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class InsufficientDataError(ValueError):
    """Too few studies for the requested statistic."""


class QuadratureError(ArithmeticError):
    """Adaptive integration ran out of budget before reaching its tolerance."""
