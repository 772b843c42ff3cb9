"""The empirical Littlewood-Paley transform, an isotropic 2D empirical wavelet transform.

The scale boundaries are detected on the pseudo-polar spectrum of the image averaged over the angles, and the
masks are the 1D empirical masks evaluated on the modulus |ω| of every frequency bin: a disk for the
approximation, then rings. The last ring extends to the corners of the Fourier plane, where |ω| exceeds π.

Subbands are saved as ``sub_LP_{n}.ewtm``.
"""

import logging

from empirical_wavelets import filterbank
from empirical_wavelets.arrays import as_image, central_square, frequency_modulus
from empirical_wavelets.boundaries import BoundarySet, detect_boundaries
from empirical_wavelets.common import check_positive_int
from empirical_wavelets.ewt1d import choose_gamma, empirical_masks
from empirical_wavelets.filterbank import FilterBank2D, SubbandSet, multiplicative_forward, multiplicative_inverse
from empirical_wavelets.pseudopolar import ppfft, radial_mean_spectrum

logger = logging.getLogger(__name__)

FILE_PATTERNS = {"lp": "sub_LP_{n:d}.ewtm"}
LABEL_FIELDS = ("n",)


def lp_bank(boundary_set, gamma, rows, cols):
    """Build the Littlewood-Paley masks of a boundary set for images of shape (rows, cols)."""
    check_positive_int(rows, "rows", minimum=2)
    check_positive_int(cols, "cols", minimum=2)
    masks = empirical_masks(frequency_modulus(rows, cols), boundary_set, gamma)
    labels = tuple((n,) for n in range(boundary_set.n_bands))
    return FilterBank2D("littlewood_paley", labels, filterbank.check_masks(masks), gamma,
                        layout=dict(boundaries=boundary_set.to_dict(), gamma=gamma))


def lp_forward(pixels, bank):
    """Decompose an image into its rings.

    Returns:
        The subbands, shape (N, rows, cols), the approximation first.
    """
    return multiplicative_forward(pixels, bank)


def lp_inverse(planes, bank):
    """Rebuild an image from its rings."""
    return multiplicative_inverse(planes, bank)


def lp_detect(pixels, n_bands, config, method="direct"):
    """Detect the scale boundaries of an image on its angle-averaged pseudo-polar spectrum.

    Non-square images are cropped to their largest centered even square first.
    """
    check_positive_int(n_bands, "N", minimum=2)
    spectrum = radial_mean_spectrum(ppfft(central_square(pixels), method=method))
    return detect_boundaries(spectrum, config.with_bands(n_bands), geometry="radial")


def build_bank(image, config):
    """Detect the scales of an image and build its Littlewood-Paley bank."""
    image = as_image(image)
    boundary_set = lp_detect(image, config.bands, config.detect_config(), config.ppfft_method)
    gamma = choose_gamma(boundary_set) if config.gamma is None else config.gamma
    bank = lp_bank(boundary_set, gamma, *image.shape)
    logger.info(f"Built Littlewood-Paley bank with {len(bank)} rings")
    layout = dict(transform="lp", boundaries=boundary_set.to_dict(), gamma=gamma,
                  detect=config.detect_config().to_dict())
    return bank, layout


def restore_bank(layout, shape):
    """Rebuild a Littlewood-Paley bank from a layout."""
    return lp_bank(BoundarySet.from_dict(layout["boundaries"]), layout["gamma"], *shape)


def analyze(image, bank, layout):
    """Decompose an image with an already built bank."""
    planes = lp_forward(image, bank)
    approximation = tuple(label == (0,) for label in bank.labels)
    return SubbandSet("lp", bank.labels, planes, approximation, bank, layout, bank.shape)


def synthesize(subbands, config=None):
    """Rebuild the image from its subbands."""
    return lp_inverse(subbands.planes, subbands.bank), {}


def decompose(image, config):
    """Detect the bank of an image and decompose it."""
    return analyze(image, *build_bank(image, config))


frame_deviation = filterbank.frame_deviation
tiling = filterbank.tiling_map
