"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class QlatError(Exception):
    exit_code = 2


class InvalidLatticeError(QlatError):
    pass


class PrecisionError(QlatError):
    pass


class DomainError(QlatError):
    pass


class UnsupportedSizeError(QlatError):
    pass


class BudgetExceededError(QlatError):
    exit_code = 3

    def __init__(self, what, estimate, budget):
        super().__init__(f"{what}: estimated {estimate:.3g} exceeds budget {budget:.3g}")
        self.estimate = estimate
        self.budget = budget


class NonGenericPointError(QlatError):
    pass


class GenericityViolationError(QlatError):
    pass
