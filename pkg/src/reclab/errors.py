"""Exception types shared across the package."""


class ReclabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ReclabError, ValueError):
    """Malformed input: empty word, bad symbol index, bad length, etc."""


class PreconditionError(ReclabError, ValueError):
    """An operation's stated precondition does not hold for these inputs."""


class ConditioningError(ReclabError, ValueError):
    """Conditioning on an event of probability zero."""


class HypothesisError(ReclabError, ValueError):
    """A bound's hypothesis fails for the given inputs.

    Carries ``detail`` describing the violated condition (including the
    numeric threshold when one exists).
    """

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class WrongModelError(ReclabError, TypeError):
    """The operation requires a different measure family (e.g. i.i.d. only)."""


class HorizonCapError(ReclabError, ValueError):
    """The requested horizon exceeds the configured cap.

    Shrink the word length ``n`` or the intensity ``t``, or raise the cap
    (``RECLAB_MAX_HORIZON``).
    """

    def __init__(self, horizon: float, cap: int):
        super().__init__(
            f"horizon {horizon:.6g} exceeds cap {cap}; shrink n or t, "
            "or raise RECLAB_MAX_HORIZON"
        )
        self.horizon = horizon
        self.cap = cap


class EnumerationCapError(ReclabError, ValueError):
    """Exact enumeration would touch too many positions to be feasible."""


class NoPositiveRateError(ReclabError, ValueError):
    """The model is degenerate (some symbol has probability 1), so no
    positive per-symbol decay rate exists."""


class DegenerateParametersError(ReclabError, ValueError):
    """Experiment parameters degenerate to an uninformative configuration."""


class SupportExitWarning(RuntimeWarning):
    """A periodic extension of the word leaves the support of the measure."""
