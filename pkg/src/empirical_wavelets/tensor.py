"""The separable (tensor) 2D empirical wavelet transform.

One filter bank is detected on the mean spectrum of the rows and shared by every row, another one on the mean
spectrum of the columns and shared by every column. The image is filtered along its rows first, then each of
the resulting planes along its columns, giving N_R × N_C subbands indexed (n, m). Subband (0, 0) is the
approximation.

Subbands are saved as ``sub_T_{n}_{m}.ewtm``.

Example:
    >>> config = RunConfig(transform="tensor", bands_row=3, bands_col=3, use_log=True, trend="morpho")
    >>> subbands = decompose(image, config)
    >>> len(subbands)
    9
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft

from empirical_wavelets import filterbank
from empirical_wavelets.arrays import as_image
from empirical_wavelets.boundaries import BoundarySet, Spectrum1D, detect_boundaries
from empirical_wavelets.common import InvalidArgumentError, check_positive_int
from empirical_wavelets.ewt1d import build_bank_1d, choose_gamma, ewt1d_forward, ewt1d_inverse
from empirical_wavelets.filterbank import FilterBank2D, SubbandSet

logger = logging.getLogger(__name__)

FILE_PATTERNS = {"tensor": "sub_T_{n:d}_{m:d}.ewtm"}
LABEL_FIELDS = ("n", "m")


def _mean_spectrum(pixels, axis):
    image = as_image(pixels)
    size = image.shape[axis]
    if size < 4:
        raise InvalidArgumentError(f"Need at least 4 samples along axis {axis}, got {size}.")
    magnitude = np.abs(scipy.fft.fft(image, axis=axis))
    mean = np.mean(magnitude, axis=1 - axis)
    return Spectrum1D(mean[:size // 2 + 1], nyquist=2 * np.pi * (size // 2) / size)


def row_mean_spectrum(pixels):
    """Average the DFT magnitudes of all the rows of an image, over [0, π]."""
    return _mean_spectrum(pixels, axis=1)


def col_mean_spectrum(pixels):
    """Average the DFT magnitudes of all the columns of an image, over [0, π]."""
    return _mean_spectrum(pixels, axis=0)


@dataclass(frozen=True, eq=False)
class TensorBanks:
    """The row and column banks of a tensor transform.

    Args:
        bank_row: the bank applied along the rows, sampled on ``cols`` bins.
        bank_col: the bank applied along the columns, sampled on ``rows`` bins.
    """

    bank_row: object
    bank_col: object

    @property
    def shape(self):
        """The shape of the images the banks apply to."""
        return self.bank_col.size, self.bank_row.size

    @property
    def labels(self):
        """The (n, m) label of every subband, n running over the row bank."""
        return tuple((n, m) for n in range(self.bank_row.n_bands) for m in range(self.bank_col.n_bands))


def tensor_banks(boundaries_row, boundaries_col, shape, gamma_row=None, gamma_col=None):
    """Build the row and column banks for images of the given shape."""
    rows, cols = shape
    gamma_row = choose_gamma(boundaries_row) if gamma_row is None else gamma_row
    gamma_col = choose_gamma(boundaries_col) if gamma_col is None else gamma_col
    return TensorBanks(build_bank_1d(boundaries_row, gamma_row, cols), build_bank_1d(boundaries_col, gamma_col, rows))


def tensor_detect(pixels, n_row, n_col, config):
    """Detect the row and column boundaries of an image with the detection settings `config`."""
    check_positive_int(n_row, "N_R", minimum=2)
    check_positive_int(n_col, "N_C", minimum=2)
    boundaries_row = detect_boundaries(row_mean_spectrum(pixels), config.with_bands(n_row), geometry="rows")
    boundaries_col = detect_boundaries(col_mean_spectrum(pixels), config.with_bands(n_col), geometry="cols")
    return boundaries_row, boundaries_col


def tensor_analyze(pixels, banks):
    """Filter the rows of an image with the row bank, then the columns of every plane with the column bank.

    Returns:
        The coefficients, shape (N_R, N_C, rows, cols).
    """
    image = as_image(pixels)
    if image.shape != banks.shape:
        raise InvalidArgumentError(f"Image of shape {image.shape} does not match the banks shape {banks.shape}.")
    row_stage = ewt1d_forward(image, banks.bank_row, axis=1)
    return np.swapaxes(ewt1d_forward(row_stage, banks.bank_col, axis=1), 0, 1)


def tensor_forward(pixels, n_row, n_col, config):
    """Detect the banks of an image and decompose it.

    Returns:
        The :class:`TensorBanks` and the coefficients, shape (N_R, N_C, rows, cols).
    """
    image = as_image(pixels)
    banks = tensor_banks(*tensor_detect(image, n_row, n_col, config), image.shape)
    return banks, tensor_analyze(image, banks)


def tensor_inverse(coefficients, banks):
    """Rebuild an image from its tensor coefficients, inverting the columns first and then the rows."""
    coefficients = np.asarray(coefficients, dtype=float)
    expected = (banks.bank_row.n_bands, banks.bank_col.n_bands, *banks.shape)
    if coefficients.shape != expected:
        raise InvalidArgumentError(f"Coefficients of shape {coefficients.shape} do not match {expected}.")
    row_stage = ewt1d_inverse(np.swapaxes(coefficients, 0, 1), banks.bank_col, axis=1)
    return ewt1d_inverse(row_stage, banks.bank_row, axis=1)


def tensor_view(banks):
    """Get the 2D masks of the tensor banks, the outer products of the 1D masks."""
    masks = [col_mask[:, np.newaxis] * row_mask[np.newaxis, :]
             for row_mask in banks.bank_row.masks for col_mask in banks.bank_col.masks]
    return FilterBank2D("tensor_view", banks.labels, np.stack(masks), banks.bank_row.gamma)


def build_bank(image, config):
    """Detect the boundaries of an image and build the tensor banks."""
    image = as_image(image)
    boundaries_row, boundaries_col = tensor_detect(image, config.row_bands, config.col_bands, config.detect_config())
    banks = tensor_banks(boundaries_row, boundaries_col, image.shape, config.gamma, config.gamma)
    logger.info(f"Built tensor banks with {banks.bank_row.n_bands}×{banks.bank_col.n_bands} filters")
    layout = dict(transform="tensor",
                  boundaries_row=boundaries_row.to_dict(), boundaries_col=boundaries_col.to_dict(),
                  gamma_row=banks.bank_row.gamma, gamma_col=banks.bank_col.gamma,
                  detect=config.detect_config().to_dict())
    return banks, layout


def restore_bank(layout, shape):
    """Rebuild the tensor banks from a layout."""
    boundaries_row = BoundarySet.from_dict(layout["boundaries_row"])
    boundaries_col = BoundarySet.from_dict(layout["boundaries_col"])
    return tensor_banks(boundaries_row, boundaries_col, shape, layout["gamma_row"], layout["gamma_col"])


def analyze(image, bank, layout):
    """Decompose an image with already built banks."""
    coefficients = tensor_analyze(image, bank)
    planes = coefficients.reshape(-1, *bank.shape)
    approximation = tuple(label == (0, 0) for label in bank.labels)
    return SubbandSet("tensor", bank.labels, planes, approximation, bank, layout, bank.shape)


def synthesize(subbands, config=None):
    """Rebuild the image from its subbands."""
    bank = subbands.bank
    coefficients = subbands.planes.reshape(bank.bank_row.n_bands, bank.bank_col.n_bands, *bank.shape)
    return tensor_inverse(coefficients, bank), {}


def decompose(image, config):
    """Detect the banks of an image and decompose it."""
    return analyze(image, *build_bank(image, config))


def frame_deviation(bank):
    """Get the largest distance to 1 of the frame sum of the 2D tensor masks."""
    return filterbank.frame_deviation(tensor_view(bank))


def tiling(bank):
    """Get the tiling map of the tensor masks."""
    return filterbank.tiling_map(tensor_view(bank))
