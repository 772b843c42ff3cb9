"""Real and complex array types, and the discrete Fourier transform contract used by every transform.

Signals and images are plain numpy float arrays, validated on the way in by :func:`as_signal` and
:func:`as_image`. Spectra of 2D images are wrapped in a :class:`ComplexPlane` that remembers where the DC
coefficient sits.

The transforms follow the usual fast-transform convention: the forward transform is unnormalized and the
inverse divides by the number of samples, so that::

    >>> idft1(dft1(s)) == s  # to rounding

Internally, frequency index ``k`` of a length ``K`` axis stands for ``ω = 2πk/K`` folded into ``(-π, π]``
(see :func:`bin_frequencies`), with DC at index 0. :meth:`ComplexPlane.centered` gives the DC-centered view.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from empirical_wavelets.common import InvalidArgumentError

ORIGIN = "origin"
CENTERED = "centered"


def as_signal(samples):
    """Validate a 1D signal and return it as a float array.

    Raises:
        InvalidArgumentError: if the signal is not 1D, has less than 2 samples or non-finite samples.
    """
    signal = np.asarray(samples, dtype=float)
    if signal.ndim != 1:
        raise InvalidArgumentError(f"A signal must be one-dimensional, got shape {signal.shape}.")
    if signal.size < 2:
        raise InvalidArgumentError(f"A signal needs at least 2 samples, got {signal.size}.")
    if not np.all(np.isfinite(signal)):
        raise InvalidArgumentError("Signal contains non-finite samples.")
    return signal


def as_image(pixels):
    """Validate an image and return it as a float array.

    Raises:
        InvalidArgumentError: if the image is not 2D, has less than 4 pixels or non-finite pixels.
    """
    image = np.asarray(pixels, dtype=float)
    if image.ndim != 2:
        raise InvalidArgumentError(f"An image must be two-dimensional, got shape {image.shape}.")
    if image.size < 4 or min(image.shape) < 1:
        raise InvalidArgumentError(f"An image needs at least 4 pixels, got shape {image.shape}.")
    if not np.all(np.isfinite(image)):
        raise InvalidArgumentError("Image contains non-finite pixels.")
    return image


@dataclass(frozen=True, eq=False)
class ComplexPlane:
    """The 2D spectrum of an image.

    Args:
        values: the complex coefficients.
        layout: ``"origin"`` when DC is at index (0, 0), ``"centered"`` when it is at (rows // 2, cols // 2).
        hermitian: whether the content is claimed to satisfy F(-ω) = conj(F(ω)).
    """

    values: np.ndarray
    layout: str = ORIGIN
    hermitian: bool = field(default=False)

    def __post_init__(self):
        """Check the layout tag."""
        if self.layout not in (ORIGIN, CENTERED):
            raise InvalidArgumentError(f"Unknown frequency layout {self.layout}.")

    @property
    def shape(self):
        """The shape of the plane."""
        return self.values.shape

    def centered(self):
        """Get the DC-centered view of the plane."""
        if self.layout == CENTERED:
            return self
        return ComplexPlane(scipy.fft.fftshift(self.values), CENTERED, self.hermitian)

    def at_origin(self):
        """Get the DC-at-origin view of the plane."""
        if self.layout == ORIGIN:
            return self
        return ComplexPlane(scipy.fft.ifftshift(self.values), ORIGIN, self.hermitian)


def dft1(samples):
    """Compute the unnormalized discrete Fourier transform of a signal."""
    return scipy.fft.fft(as_signal(samples))


def idft1(spectrum):
    """Compute the inverse of :func:`dft1`, carrying the 1/K normalization."""
    spectrum = np.asarray(spectrum, dtype=complex)
    if spectrum.ndim != 1 or spectrum.size < 2:
        raise InvalidArgumentError(f"A spectrum needs at least 2 coefficients, got shape {spectrum.shape}.")
    return scipy.fft.ifft(spectrum)


def dft2(pixels):
    """Compute the unnormalized 2D discrete Fourier transform of an image.

    Returns:
        A DC-at-origin :class:`ComplexPlane`, flagged conjugate-symmetric since the input is real.
    """
    image = as_image(pixels)
    if min(image.shape) < 2:
        raise InvalidArgumentError(f"dft2 needs at least 2 rows and 2 columns, got shape {image.shape}.")
    return ComplexPlane(scipy.fft.fft2(image), ORIGIN, hermitian=True)


def idft2(plane):
    """Compute the inverse of :func:`dft2`.

    Args:
        plane: a :class:`ComplexPlane` (any layout) or a DC-at-origin complex array.

    Returns:
        The real image when the plane is flagged conjugate-symmetric, the complex one otherwise.
    """
    if isinstance(plane, ComplexPlane):
        values = plane.at_origin().values
        hermitian = plane.hermitian
    else:
        values = np.asarray(plane, dtype=complex)
        hermitian = False
    result = scipy.fft.ifft2(values)
    if hermitian:
        return np.ascontiguousarray(result.real)
    return result


def bin_frequencies(size):
    """Get the frequency in radians of every DFT bin of a length `size` axis, folded into (-π, π].

    Bins k and size - k give exactly opposite values, except the Nyquist bin of even sizes which is π.
    """
    k = np.arange(size)
    signed = np.where(k <= size // 2, k, k - size)
    return 2 * np.pi * signed / size


def frequency_grid(rows, cols):
    """Get the (ω₁, ω₂) frequencies of every bin of a DC-at-origin plane, ω₁ along the rows axis."""
    return np.meshgrid(bin_frequencies(rows), bin_frequencies(cols), indexing="ij")


def frequency_modulus(rows, cols):
    """Get |ω| for every bin of a DC-at-origin plane."""
    omega1, omega2 = frequency_grid(rows, cols)
    return np.hypot(omega1, omega2)


def central_square(pixels, even=True):
    """Crop the largest centered square out of an image.

    Args:
        pixels: the image.
        even: whether the side of the square must be even.
    """
    image = as_image(pixels)
    side = min(image.shape)
    if even:
        side -= side % 2
    top = (image.shape[0] - side) // 2
    left = (image.shape[1] - side) // 2
    return image[top:top + side, left:left + side]
