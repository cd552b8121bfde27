"""Exception hierarchy shared by all qlime modules."""


class QlimeError(Exception):
    """Base class for every error raised by this package."""


class SizeError(QlimeError, ValueError):
    pass


class QubitIndexError(QlimeError, IndexError):
    pass


class FlipError(QlimeError, ValueError):
    def __init__(self, k, mode, msg=None):
        self.k = k
        self.mode = mode
        super().__init__(msg or f"cannot apply {mode.name} flip to feature {k}")


class IngestionError(QlimeError):
    def __init__(self, msg, row=None):
        self.row = row
        if row is not None:
            msg = f"row {row}: {msg}"
        super().__init__(msg)


class CorpusError(QlimeError, ValueError):
    pass


class TrainingError(QlimeError, ValueError):
    pass


class ShapeError(QlimeError, ValueError):
    pass


class ExplanationError(QlimeError, ValueError):
    pass


class ExperimentError(QlimeError):
    pass


class InvariantError(QlimeError, AssertionError):
    """An internal consistency check failed; always a bug, never bad input."""
