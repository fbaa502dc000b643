"""Exception hierarchy shared by all engines."""


class PdmCavityError(Exception):
    """Base class; ``code`` is the machine-readable tag used in CSV/CLI output."""

    code = "error"


class InvalidParameterError(PdmCavityError, ValueError):
    code = "invalid-params"


class DegenerateCouplingError(PdmCavityError, ValueError):
    """Dressed quantities requested at zero coupling, where the mixing angle is 0/0."""

    code = "degenerate-coupling"


class TruncationError(PdmCavityError, IndexError):
    code = "truncation"


class NearDegeneracyError(PdmCavityError, ArithmeticError):
    """An energy denominator of the perturbation series is (numerically) zero."""

    code = "near-degeneracy"

    def __init__(self, message, pair=None, gap=None):
        super().__init__(message)
        self.pair = pair
        self.gap = gap


class ConvergenceError(PdmCavityError, RuntimeError):
    code = "non-convergence"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AmbiguousMatchError(PdmCavityError, RuntimeError):
    code = "ambiguous-match"


class InvalidRecordError(PdmCavityError, ValueError):
    code = "invalid-record"
