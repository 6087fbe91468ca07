"""Exception hierarchy shared by all modules."""


class PerDecompError(Exception):
    """Base class for every error raised by this package."""


class FieldMismatch(PerDecompError, TypeError):
    pass


class DivisionByZero(PerDecompError, ZeroDivisionError):
    pass


class NotMonic(PerDecompError, ValueError):
    pass


class NotSplitOverField(PerDecompError):
    """Characteristic polynomial has a factor outside x^a * (roots of unity)."""


class NotPeriodicError(PerDecompError):
    pass


class RankTooLow(PerDecompError):
    def __init__(self, rank, n):
        super().__init__(f"2*rank = {2 * rank} < n = {n}")
        self.rank = rank
        self.n = n


class SolverExhausted(PerDecompError):
    """The best-effort solver gave up; ``trace`` records what was tried."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class Derogatory(PerDecompError):
    pass


class TraceMismatch(PerDecompError):
    pass


class NotTorsion(PerDecompError):
    pass


class InternalInconsistency(PerDecompError, AssertionError):
    """An exact identity that must hold did not; always a bug."""
