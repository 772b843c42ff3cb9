"""Flat grayscale morphology on 1D sequences.

The structuring window is flat and given by its half-width ``h``: it covers the ``2h + 1`` samples centered on
each position, clipped to the valid indices at both ends. Clipping is exactly what replicating the edge samples
does for a sup or an inf, which is how scipy is asked to handle the borders.

Example:
    >>> opening([0, 0, 5, 0, 0], 1)
    array([0., 0., 0., 0., 0.])
"""

import numpy as np
from scipy.ndimage import grey_dilation, grey_erosion

from empirical_wavelets.arrays import as_signal
from empirical_wavelets.common import InvalidArgumentError


def _check_window(signal, half_width):
    if isinstance(half_width, bool) or int(half_width) != half_width or half_width < 0:
        raise InvalidArgumentError(f"Window half-width must be a nonnegative integer, got {half_width}.")
    half_width = int(half_width)
    if 2 * half_width + 1 > signal.size:
        raise InvalidArgumentError(f"Window of width {2 * half_width + 1} is wider than the signal ({signal.size}).")
    return half_width


def dilate(samples, half_width):
    """Take the sup of the signal over the window around each sample."""
    signal = as_signal(samples)
    half_width = _check_window(signal, half_width)
    return grey_dilation(signal, size=2 * half_width + 1, mode="nearest")


def erode(samples, half_width):
    """Take the inf of the signal over the window around each sample."""
    signal = as_signal(samples)
    half_width = _check_window(signal, half_width)
    return grey_erosion(signal, size=2 * half_width + 1, mode="nearest")


def opening(samples, half_width):
    """Erode then dilate, removing peaks narrower than the window."""
    return dilate(erode(samples, half_width), half_width)


def closing(samples, half_width):
    """Dilate then erode, filling holes narrower than the window."""
    return erode(dilate(samples, half_width), half_width)


def local_maxima(samples):
    """Get the indices of the local maxima of a sequence.

    A bin is a local maximum when its left neighbour is strictly lower and its right neighbour is not higher, so a
    plateau is reported once, at its leftmost bin. The end bins are never maxima.
    """
    values = np.asarray(samples, dtype=float)
    middle = values[1:-1]
    is_max = (values[:-2] < middle) & (middle >= values[2:])
    return np.flatnonzero(is_max) + 1


def local_minima(samples):
    """Get the indices of the local minima of a sequence, mirroring :func:`local_maxima`."""
    return local_maxima(-np.asarray(samples, dtype=float))
