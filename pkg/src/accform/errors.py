"""Exception hierarchy shared by all toolkit modules."""


class AccformError(Exception):
    """Base class for all toolkit errors."""


class InputError(AccformError):
    """Malformed or inconsistent input data (bad file, bad matrix, bad parameters)."""


class DimensionMismatchError(InputError):
    """Operands whose dimensions are incompatible."""


class PreconditionError(AccformError):
    """An operation was invoked on inputs that violate its mathematical preconditions."""


class NumericalDegeneracyError(AccformError):
    """Two independent computations of the same quantity disagree beyond tolerance.

    This signals that a rank or containment decision sits on a knife edge for
    the given tolerances; results would not be trustworthy.
    """
