"""Corrnum Exceptions.

Errors come in three families. Each family carries the exit code the
command line front-end returns when an error of that family escapes.
"""

__all__ = [
    "CorrError",
    "InvalidArgumentError",
    "ConfigError",
    "IdentityWordError",
    "DegenerateAxesError",
    "InvalidRepresentationError",
    "CutoffTooLargeError",
    "CheckFailedError",
    "PilotValidationFailedError",
    "CountMismatchError",
    "SpectrumFormatError",
    "NumericalError",
    "MatrixOverflowError",
    "NotLoxodromicError",
    "InsufficientDataError",
    "WindowDegenerateError",
    "NonPositiveMixError",
    "EmptySpectrumError",
    "ProportionalSpectraError",
    "EndpointFitUnstableError",
    "SlopeNotBracketedError",
    "FlatObjectiveError",
    "EmptyWindowsError",
]


class CorrError(Exception):
    """Base class of all errors in corrnum."""

    exit_code = 1


class InvalidArgumentError(CorrError):
    """Invalid arguments."""

    exit_code = 2


class ConfigError(InvalidArgumentError):
    """Run configuration rejected."""

    def __init__(self, path: str, reason: str) -> None:
        """Run configuration rejected."""

        self.path = path
        self.reason = reason

    def __str__(self) -> str:
        return f"Invalid config at {self.path or '<root>'}: {self.reason}"


class IdentityWordError(InvalidArgumentError):
    """Word reduces to the identity."""

    def __str__(self) -> str:
        return "Word reduces to the identity, it has no conjugacy class."


class DegenerateAxesError(InvalidArgumentError):
    """Axis angle too close to 0 or pi."""

    def __init__(self, angle: float) -> None:
        """Axis angle too close to 0 or pi."""

        self.angle = angle

    def __str__(self) -> str:
        return f"Axis angle {self.angle!r} must stay 1e-3 away from 0 and pi."


class InvalidRepresentationError(InvalidArgumentError):
    """Generator images violate the representation invariants."""


class CutoffTooLargeError(InvalidArgumentError):
    """Projected class count over budget."""

    def __init__(self, projected: int, budget: int) -> None:
        """Projected class count over budget."""

        self.projected = projected
        self.budget = budget

    def __str__(self) -> str:
        return f"{self.projected} classes projected, budget is {self.budget}."


class CheckFailedError(CorrError):
    """Check failed."""

    exit_code = 3


class PilotValidationFailedError(CheckFailedError):
    """Representation failed the pilot loxodromy validation."""

    def __init__(self, label: str, slope: float, min_gap: float) -> None:
        """Representation failed the pilot loxodromy validation."""

        self.label = label
        self.slope = slope
        self.min_gap = min_gap

    def __str__(self) -> str:
        return (f"Representation {self.label} is not empirically Anosov "
                f"(gap slope {self.slope:.4g}, minimal gap {self.min_gap:.4g}); use --force to override.")


class CountMismatchError(CheckFailedError):
    """Enumeration tally disagrees with the count oracle."""

    def __init__(self, n: int, expected: int, given: int) -> None:
        """Enumeration tally disagrees with the count oracle."""

        self.n = n
        self.expected = expected
        self.given = given

    def __str__(self) -> str:
        return f"{self.expected} classes expected at length {self.n}, {self.given} enumerated."


class SpectrumFormatError(CheckFailedError):
    """Persisted spectrum table is corrupted."""

    def __init__(self, path: str, row: int, reason: str) -> None:
        """Persisted spectrum table is corrupted."""

        self.path = path
        self.row = row
        self.reason = reason

    def __str__(self) -> str:
        return f"{self.path}: row {self.row}: {self.reason}"


class NumericalError(CorrError):
    """Numerical procedure cannot produce a trustworthy result."""

    exit_code = 4


class MatrixOverflowError(NumericalError):
    """Matrix entries over the overflow guard."""

    def __init__(self, word: str, magnitude: float) -> None:
        """Matrix entries over the overflow guard."""

        self.word = word
        self.magnitude = magnitude

    def __str__(self) -> str:
        return f"Product along {self.word} reached {self.magnitude:.3g}, use the rescaled path."


class NotLoxodromicError(NumericalError):
    """Eigenvalue moduli not separated."""

    def __init__(self, word: str, gap: float) -> None:
        """Eigenvalue moduli not separated."""

        self.word = word
        self.gap = gap

    def __str__(self) -> str:
        return f"Class {self.word} is not loxodromic (relative gap {self.gap:.3g})."


class InsufficientDataError(NumericalError):
    """Too few items inside the estimation window."""

    def __init__(self, count: int, required: int) -> None:
        """Too few items inside the estimation window."""

        self.count = count
        self.required = required

    def __str__(self) -> str:
        return f"{self.required} items required inside the window, {self.count} given."


class WindowDegenerateError(NumericalError):
    """Estimation window is empty or inverted."""

    def __init__(self, lo: float, hi: float) -> None:
        """Estimation window is empty or inverted."""

        self.lo = lo
        self.hi = hi

    def __str__(self) -> str:
        return f"Degenerate window [{self.lo!r}, {self.hi!r}]."


class NonPositiveMixError(NumericalError):
    """Linear combination of columns is not positive."""


class EmptySpectrumError(NumericalError):
    """Spectrum has no values."""


class ProportionalSpectraError(NumericalError):
    """Columns are proportional, the Manhattan curve is a line."""

    def __init__(self, kappa: float, residual: float) -> None:
        """Columns are proportional, the Manhattan curve is a line."""

        self.kappa = kappa
        self.residual = residual

    def __str__(self) -> str:
        return f"proportional spectra (factor {self.kappa:.12g}, residual {self.residual:.3g})"


class EndpointFitUnstableError(NumericalError):
    """Quadratic endpoint fit residual over threshold."""

    def __init__(self, where: str, residual: float, threshold: float) -> None:
        """Quadratic endpoint fit residual over threshold."""

        self.where = where
        self.residual = residual
        self.threshold = threshold

    def __str__(self) -> str:
        return f"Endpoint fit at {self.where} unstable: residual {self.residual:.3g} > {self.threshold:.3g}."


class SlopeNotBracketedError(NumericalError):
    """Target slope outside the sampled slope range."""

    def __init__(self, target: float, lo: float, hi: float) -> None:
        """Target slope outside the sampled slope range."""

        self.target = target
        self.lo = lo
        self.hi = hi

    def __str__(self) -> str:
        return f"Slope {self.target:.6g} not inside sampled range [{self.lo:.6g}, {self.hi:.6g}]."


class FlatObjectiveError(NumericalError):
    """Mixed growth objective too flat to locate a minimum."""

    def __init__(self, variation: float, stderr: float) -> None:
        """Mixed growth objective too flat to locate a minimum."""

        self.variation = variation
        self.stderr = stderr

    def __str__(self) -> str:
        return f"Objective variation {self.variation:.3g} below 2 x stderr ({self.stderr:.3g})."


class EmptyWindowsError(NumericalError):
    """Too few counting windows hold classes."""

    def __init__(self, nonzero: int) -> None:
        """Too few counting windows hold classes."""

        self.nonzero = nonzero

    def __str__(self) -> str:
        return f"Only {self.nonzero} counting windows are nonempty, 5 required."
