"""Exception hierarchy.

Two families matter to callers: ``ConfigurationError`` for bad inputs
(counts, files, meshes) and ``NumericalError`` for breakdowns during
assembly or solves.  The CLI maps them to exit codes 2 and 3.
"""

from contextlib import contextmanager


class AmsError(Exception):
    stage = None


class ConfigurationError(AmsError, ValueError):
    pass


class NumericalError(AmsError, ArithmeticError):
    pass


class InvalidCount(ConfigurationError):
    pass


class TooCoarse(ConfigurationError):
    pass


class ShapeMismatch(ConfigurationError):
    pass


class LengthError(ConfigurationError):
    pass


class ParseError(ConfigurationError):
    pass


class SignStructureError(ConfigurationError):
    pass


class NoHomogenizedReference(ConfigurationError):
    pass


class SingularSystem(NumericalError):
    pass


class NotTridiagonal(NumericalError):
    pass


class NonpositiveCoefficient(NumericalError):
    pass


class DegenerateCoefficient(NumericalError):
    pass


class DegenerateInterval(NumericalError):
    pass


class ZeroReference(NumericalError):
    pass


@contextmanager
def stage(name: str):
    """Tag an AmsError escaping this block with the pipeline stage (innermost wins)."""
    try:
        yield
    except AmsError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise
