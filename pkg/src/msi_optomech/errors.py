"""Exception hierarchy shared by all modules."""


class OptomechError(Exception):
    """Base class for model-domain failures."""


class DegenerateOperatingPoint(OptomechError):
    """Interferometer transmissivity is (numerically) zero, so the
    dissipative coupling and the cavity linewidth are undefined."""


class ImaginaryEta(OptomechError):
    """The requested transmission cannot be reached with a real membrane
    position: the cosine of the operating-point phase would be imaginary,
    which happens when the beam-splitter imbalance exceeds its maximum."""


class Unsolvable(OptomechError):
    """No membrane offset produces the requested interferometer
    transmission for the given mirror and beam splitter."""


class UnstableSpring(OptomechError):
    """Radiation-pressure rigidity drove the effective oscillator
    frequency squared or the effective damping below zero."""


class VerificationFailed(OptomechError):
    """A closed-form result disagreed with its independent numeric oracle
    beyond the documented tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(OptomechError):
    """Configuration text is malformed or uses an unknown key."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnitError(OptomechError):
    """A configuration value is outside its physical range."""
