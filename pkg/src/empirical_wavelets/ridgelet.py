"""The empirical ridgelet transform.

A ridgelet transform is a 1D wavelet transform run along every line through the origin of the Fourier plane.
Here the lines are those of the pseudo-polar grid, and the 1D transform is an empirical one whose boundaries are
detected on the angle-averaged pseudo-polar spectrum. Each line holds 2N + 1 values at the signed radii
``r_j = πj/N``; the bank is sampled on those radii and filtering happens directly in the Fourier domain, so the
coefficients of band n along line i come from a single inverse 1D DFT.

The inverse filters every line back, which gives the pseudo-polar values again, and then solves a least-squares
problem to get back to the image (see :func:`~empirical_wavelets.pseudopolar.ppfft_inverse`). The
reconstruction is therefore only as good as the solver tolerance.

Subbands are saved as ``sub_R_{n}_{i}.ewtm``, one ray of 2N + 1 coefficients per file.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft

from empirical_wavelets import filterbank
from empirical_wavelets.arrays import as_image
from empirical_wavelets.boundaries import BoundarySet, detect_boundaries
from empirical_wavelets.common import InvalidArgumentError, check_positive_int, real_part
from empirical_wavelets.ewt1d import bank_on_frequencies, choose_gamma
from empirical_wavelets.filterbank import SubbandSet
from empirical_wavelets.pseudopolar import pp_grid, ppfft, ppfft_inverse, radial_mean_spectrum

logger = logging.getLogger(__name__)

FILE_PATTERNS = {"ridgelet": "sub_R_{n:d}_{i:d}.ewtm"}
LABEL_FIELDS = ("n", "i")
REAL_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class RidgeletCoeffs:
    """The ridgelet coefficients of an image.

    Args:
        coefficients: the real coefficients, indexed (band n, angle i, ray position t).
        bank: the 1D bank sampled on the signed radii of the grid.
        grid: the pseudo-polar grid.
        method: the evaluation method of the pseudo-polar transform.
    """

    coefficients: np.ndarray
    bank: object
    grid: object
    method: str = "direct"

    def __post_init__(self):
        """Check the coefficients match the bank and grid."""
        expected = (self.bank.n_bands, *self.grid.shape)
        if self.coefficients.shape != expected:
            raise InvalidArgumentError(f"Coefficients of shape {self.coefficients.shape} do not match {expected}.")

    @property
    def n_bands(self):
        """The number of bands."""
        return self.bank.n_bands


def _square_grid(image):
    rows, cols = image.shape
    if rows != cols or rows % 2:
        raise InvalidArgumentError(f"The ridgelet transform needs a square image of even side, got {image.shape}.")
    return pp_grid(rows)


def ridgelet_bank(boundary_set, gamma, grid):
    """Build the 1D bank sampled on the signed radii of a pseudo-polar grid."""
    return bank_on_frequencies(boundary_set, gamma, grid.radii)


def ridgelet_analyze(values, bank):
    """Filter every line of pseudo-polar values with every mask of the bank.

    Returns:
        The real coefficients, shape (N, 2N, 2N + 1).
    """
    lines = np.asarray(values, dtype=complex)
    if lines.shape[-1] != bank.size:
        raise InvalidArgumentError(f"Lines of {lines.shape[-1]} values do not match the bank size {bank.size}.")
    filtered = lines[np.newaxis] * bank.masks[:, np.newaxis, :]
    coefficients = scipy.fft.ifft(scipy.fft.ifftshift(filtered, axes=-1), axis=-1)
    return real_part(coefficients, np.max(np.abs(lines), initial=0.0), tolerance=REAL_TOLERANCE)


def ridgelet_lines(coefficients, bank):
    """Filter the coefficients back and sum them up into pseudo-polar values."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim != 3 or coefficients.shape[0] != bank.n_bands or coefficients.shape[-1] != bank.size:
        raise InvalidArgumentError(f"Coefficients of shape {coefficients.shape} do not match the bank.")
    spectra = scipy.fft.fftshift(scipy.fft.fft(coefficients, axis=-1), axes=-1)
    return np.sum(spectra * bank.masks[:, np.newaxis, :], axis=0)


def ridgelet_forward(pixels, n_bands, config, gamma=None, method="direct"):
    """Detect the bands of a square image and compute its ridgelet coefficients.

    Args:
        pixels: the square, even-sided image.
        n_bands: the number of bands N.
        config: the :class:`~empirical_wavelets.boundaries.DetectConfig` for the radial spectrum.
        gamma: the transition ratio, chosen automatically when not given.
        method: the evaluation method of the pseudo-polar transform.
    """
    check_positive_int(n_bands, "N", minimum=2)
    image = as_image(pixels)
    grid = _square_grid(image)
    values = ppfft(image, grid, method)
    boundary_set = detect_boundaries(radial_mean_spectrum(values), config.with_bands(n_bands), geometry="radial")
    bank = ridgelet_bank(boundary_set, choose_gamma(boundary_set) if gamma is None else gamma, grid)
    return RidgeletCoeffs(ridgelet_analyze(values, bank), bank, grid, method)


def ridgelet_inverse(coeffs, tol=1e-10, maxiter=300):
    """Rebuild an image from its ridgelet coefficients.

    Returns:
        The :class:`~empirical_wavelets.pseudopolar.InversionResult` of the least-squares inversion.
    """
    values = ridgelet_lines(coeffs.coefficients, coeffs.bank)
    return ppfft_inverse(values, coeffs.grid, tol=tol, maxiter=maxiter, method=coeffs.method)


def build_bank(image, config):
    """Detect the bands of an image and build its ridgelet bank."""
    image = as_image(image)
    grid = _square_grid(image)
    spectrum = radial_mean_spectrum(ppfft(image, grid, config.ppfft_method))
    boundary_set = detect_boundaries(spectrum, config.detect_config(), geometry="radial")
    gamma = choose_gamma(boundary_set) if config.gamma is None else config.gamma
    bank = ridgelet_bank(boundary_set, gamma, grid)
    logger.info(f"Built ridgelet bank with {bank.n_bands} bands on {grid.theta.size} lines")
    layout = dict(transform="ridgelet", boundaries=boundary_set.to_dict(), gamma=gamma,
                  ppfft_method=config.ppfft_method, detect=config.detect_config().to_dict())
    return bank, layout


def restore_bank(layout, shape):
    """Rebuild a ridgelet bank from a layout."""
    grid = _square_grid(np.zeros(shape))
    return ridgelet_bank(BoundarySet.from_dict(layout["boundaries"]), layout["gamma"], grid)


def analyze(image, bank, layout):
    """Compute the ridgelet coefficients of an image with an already built bank."""
    image = as_image(image)
    grid = _square_grid(image)
    coefficients = ridgelet_analyze(ppfft(image, grid, layout.get("ppfft_method", "direct")), bank)
    labels = tuple((n, i) for n in range(bank.n_bands) for i in range(grid.theta.size))
    approximation = tuple(n == 0 for n, _ in labels)
    return SubbandSet("ridgelet", labels, coefficients.reshape(len(labels), -1), approximation, bank, layout,
                      image.shape)


def synthesize(subbands, config):
    """Rebuild the image from its subbands, with the solver settings of `config`.

    Returns:
        The image and the summary of the solver run.
    """
    grid = _square_grid(np.zeros(subbands.shape))
    coefficients = subbands.planes.reshape(subbands.bank.n_bands, *grid.shape)
    coeffs = RidgeletCoeffs(coefficients, subbands.bank, grid, subbands.layout.get("ppfft_method", "direct"))
    result = ridgelet_inverse(coeffs, tol=config.tol, maxiter=config.maxiter)
    return result.image, result.to_dict()


def decompose(image, config):
    """Detect the bank of an image and compute its ridgelet coefficients."""
    return analyze(image, *build_bank(image, config))


frame_deviation = filterbank.frame_deviation


def tiling(bank):
    """Get the index of the dominant band at every signed radius."""
    return np.argmax(bank.masks, axis=0)
