"""Collection of exceptions and helpers needed by multiple transforms."""

import logging

import numpy as np

logger = logging.getLogger(__name__)


class InvalidArgumentError(ValueError):
    """An exception for inputs or parameters outside of an operation's domain."""


class FormatError(ValueError):
    """An exception for files that do not follow their declared format.

    Args:
        message: the description of the problem.
        offset: the byte offset at which the problem was detected.
        path: the file being read or written, if known.
    """

    def __init__(self, message, offset=None, path=None):
        """Set up the error."""
        self.offset = offset
        self.path = path
        if offset is not None:
            message = f"{message} (at byte {offset})"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class DetectionError(RuntimeError):
    """An exception for spectra on which no boundary can be detected.

    Args:
        message: the description of the problem.
        geometry: which spectrum the detection ran on, e.g. "rows", "radial", "angular" or "scale 2".
    """

    def __init__(self, message, geometry=None):
        """Set up the error."""
        self.geometry = geometry
        if geometry is not None:
            message = f"[{geometry}] {message}"
        super().__init__(message)


class NumericalError(RuntimeError):
    """An exception for numerical results violating an expected property."""


def real_part(values, scale=1.0, tolerance=1e-10):
    """Drop the imaginary part of an inverse transform that should be real.

    Args:
        values: the complex array.
        scale: the magnitude of the data the array derives from, the tolerance is relative to it.
        tolerance: the largest admissible relative imaginary residue.

    Returns:
        The real part, as a new float array.
    """
    if not np.iscomplexobj(values):
        return np.asarray(values, dtype=float)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > tolerance * max(1.0, float(scale)):
        raise NumericalError(f"Imaginary residue {residue:.3e} exceeds tolerance {tolerance:.1e}.")
    return np.ascontiguousarray(values.real)


def point_reflection(plane):
    """Get the values of a DC-at-origin frequency plane at the mirrored frequencies -ω."""
    plane = np.asarray(plane)
    axes = tuple(range(plane.ndim - 2, plane.ndim))
    return np.roll(np.flip(plane, axis=axes), 1, axis=axes)


def check_positive_int(value, name, minimum=1):
    """Check that `value` is an integer not smaller than `minimum`."""
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidArgumentError(f"{name} must be an integer >= {minimum}, got {value}.")
    return int(value)
