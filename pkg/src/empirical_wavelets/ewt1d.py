"""The 1D empirical wavelet transform.

Given a :class:`~empirical_wavelets.boundaries.BoundarySet` ``{0, ω¹, ..., ω^{N-1}, π}``, the filter bank is made of
one scaling function φ₁ and N - 1 wavelets ψₙ, all defined by their Fourier transform:

- φ̂₁ is 1 up to ``(1 - γ)ω¹``, ramps down to 0 at ``(1 + γ)ω¹``,
- ψ̂ₙ ramps up around ωⁿ and down around ωⁿ⁺¹ the same way,
- the last wavelet ψ̂_{N-1} ramps up around ω^{N-1} and stays at 1 up to π.

The ramps are ``cos(π/2 β(·))`` and ``sin(π/2 β(·))`` with β the polynomial of Meyer's wavelet, so the squares of
all masks sum to 1 at every frequency: the bank is a tight frame and the inverse transform is its adjoint.

Example:
    >>> boundary_set = BoundarySet.from_interior([np.pi / 2])
    >>> bank = build_bank_1d(boundary_set, choose_gamma(boundary_set), signal.size)
    >>> coefficients = ewt1d_forward(signal, bank)
    >>> np.allclose(ewt1d_inverse(coefficients, bank), signal)
    True
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft

from empirical_wavelets.arrays import as_signal, bin_frequencies
from empirical_wavelets.common import InvalidArgumentError, real_part

logger = logging.getLogger(__name__)

GAMMA_RATIO = 0.99


def beta(x):
    """Evaluate the Meyer polynomial x⁴(35 - 84x + 70x² - 20x³), clamped to 0 below 0 and 1 above 1."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 4 * (35 - 84 * x + 70 * x ** 2 - 20 * x ** 3)


def ramp_up(x, center, half_width):
    """Rise from exactly 0 below ``center - half_width`` to exactly 1 above ``center + half_width``."""
    x = np.asarray(x, dtype=float)
    low, high = center - half_width, center + half_width
    inside = np.sin(np.pi / 2 * beta((x - low) / (2 * half_width)))
    return np.where(x <= low, 0.0, np.where(x >= high, 1.0, inside))


def ramp_down(x, center, half_width):
    """Fall from exactly 1 below ``center - half_width`` to exactly 0 above ``center + half_width``."""
    x = np.asarray(x, dtype=float)
    low, high = center - half_width, center + half_width
    inside = np.cos(np.pi / 2 * beta((x - low) / (2 * half_width)))
    return np.where(x <= low, 1.0, np.where(x >= high, 0.0, inside))


def choose_gamma(boundary_set, ratio=GAMMA_RATIO):
    """Get the largest transition ratio γ keeping the transition areas apart, scaled down by `ratio`.

    The transition areas ``[(1 - γ)ωⁿ, (1 + γ)ωⁿ]`` do not overlap as long as
    ``γ < (ωⁿ⁺¹ - ωⁿ) / (ωⁿ⁺¹ + ωⁿ)`` for n = 1, ..., N - 1.
    """
    boundaries = boundary_set.boundaries
    lower, upper = boundaries[1:-1], boundaries[2:]
    if lower.size == 0:
        return ratio
    return float(ratio * np.min((upper - lower) / (upper + lower)))


def check_transitions(boundary_set, gamma):
    """Check that the transition areas around the interior boundaries are pairwise disjoint.

    The pairs checked are those of :func:`choose_gamma`, π counting as the boundary after the last one.

    Raises:
        InvalidArgumentError: naming the first boundary whose transition area runs into the next one.
    """
    if not 0 < gamma < 1:
        raise InvalidArgumentError(f"γ must be in (0, 1), got {gamma}.")
    boundaries = boundary_set.boundaries
    for n, (current, following) in enumerate(zip(boundaries[1:-1], boundaries[2:], strict=True), start=1):
        if (1 + gamma) * current >= (1 - gamma) * following:
            raise InvalidArgumentError(f"Transition areas around ω^{n} and ω^{n + 1} overlap for γ={gamma}.")


def empirical_masks(modulus, boundary_set, gamma):
    """Evaluate φ̂₁, ψ̂₁, ..., ψ̂_{N-1} on an array of frequency moduli.

    Args:
        modulus: the |ω| values to evaluate the masks at, any shape.
        boundary_set: the boundaries.
        gamma: the transition ratio.

    Returns:
        An array of shape (N,) + modulus.shape.
    """
    if boundary_set.n_bands < 2:
        raise InvalidArgumentError("A filter bank needs at least 2 bands.")
    check_transitions(boundary_set, gamma)
    modulus = np.abs(np.asarray(modulus, dtype=float))
    interior = boundary_set.interior
    masks = [ramp_down(modulus, interior[0], gamma * interior[0])]
    for current, following in zip(interior[:-1], interior[1:], strict=True):
        masks.append(ramp_up(modulus, current, gamma * current) * ramp_down(modulus, following, gamma * following))
    masks.append(ramp_up(modulus, interior[-1], gamma * interior[-1]))
    return np.stack(masks)


@dataclass(frozen=True, eq=False)
class FilterBank1D:
    """An empirical wavelet filter bank sampled on a frequency axis.

    Args:
        boundary_set: the boundaries the bank is built on.
        gamma: the transition ratio.
        frequencies: the frequency of each sample of the axis.
        masks: the N masks, shape (N, K).
    """

    boundary_set: object
    gamma: float
    frequencies: np.ndarray
    masks: np.ndarray

    @property
    def size(self):
        """The number of frequency samples, K."""
        return self.frequencies.size

    @property
    def n_bands(self):
        """The number of filters, N."""
        return self.masks.shape[0]


def bank_on_frequencies(boundary_set, gamma, frequencies):
    """Build a filter bank sampled at arbitrary frequencies."""
    frequencies = np.asarray(frequencies, dtype=float)
    masks = empirical_masks(frequencies, boundary_set, gamma)
    return FilterBank1D(boundary_set, float(gamma), frequencies, masks)


def build_bank_1d(boundary_set, gamma, size):
    """Build a filter bank sampled on the DFT bins of a length `size` signal."""
    if size < 2:
        raise InvalidArgumentError(f"A filter bank needs at least 2 frequency bins, got {size}.")
    return bank_on_frequencies(boundary_set, gamma, bin_frequencies(size))


def _axis_shape(bank, ndim, axis):
    shape = [1] * ndim
    shape[axis] = bank.size
    return (bank.n_bands, *shape)


def ewt1d_forward(samples, bank, axis=-1):
    """Filter a signal with every mask of the bank.

    Args:
        samples: the signal, or an array of signals laid along `axis`.
        bank: the filter bank, sampled on as many bins as the signal has samples.
        axis: the axis to transform along.

    Returns:
        An array with the subbands along a new first axis, the approximation first.
    """
    values = as_signal(samples) if np.ndim(samples) == 1 else np.asarray(samples, dtype=float)
    axis = axis % values.ndim
    if values.shape[axis] != bank.size:
        raise InvalidArgumentError(f"Signal length {values.shape[axis]} does not match the bank size {bank.size}.")
    spectrum = scipy.fft.fft(values, axis=axis)
    masks = bank.masks.reshape(_axis_shape(bank, values.ndim, axis))
    filtered = scipy.fft.ifft(spectrum[np.newaxis] * np.conj(masks), axis=axis + 1)
    return real_part(filtered, np.max(np.abs(values), initial=0.0))


def ewt1d_inverse(coefficients, bank, axis=-1):
    """Rebuild a signal from its subbands.

    Args:
        coefficients: the subbands along the first axis, as returned by :func:`ewt1d_forward`.
        bank: the filter bank used for the decomposition.
        axis: the axis of the rebuilt signal to transform along.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim < 2 or coefficients.shape[0] != bank.n_bands:
        raise InvalidArgumentError(f"Expected {bank.n_bands} subbands, got shape {coefficients.shape}.")
    ndim = coefficients.ndim - 1
    axis = axis % ndim
    if coefficients.shape[axis + 1] != bank.size:
        raise InvalidArgumentError(f"Subband length {coefficients.shape[axis + 1]} does not match the bank size.")
    spectrum = scipy.fft.fft(coefficients, axis=axis + 1)
    masks = bank.masks.reshape(_axis_shape(bank, ndim, axis))
    rebuilt = scipy.fft.ifft(np.sum(spectrum * masks, axis=0), axis=axis)
    return real_part(rebuilt, np.max(np.abs(coefficients), initial=0.0) * bank.n_bands)
