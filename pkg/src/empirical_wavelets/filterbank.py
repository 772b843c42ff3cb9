"""Filter banks defined in the 2D Fourier domain, and the subbands they produce.

All the 2D transforms filter an image by multiplying its spectrum with real masks, one per subband. As long as
the squares of the masks sum to 1 at every frequency, the family is a tight frame and the inverse transform is
the adjoint: each subband spectrum is multiplied by its mask again and everything is summed up.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft

from empirical_wavelets.arrays import as_image
from empirical_wavelets.common import InvalidArgumentError, real_part

logger = logging.getLogger(__name__)

KINDS = ("littlewood_paley", "curvelet_I", "curvelet_II", "tensor_view")


@dataclass(frozen=True, eq=False)
class FilterBank2D:
    """A bank of real masks on the DC-at-origin frequency grid of an image.

    Args:
        kind: the family of the bank, one of ``littlewood_paley``, ``curvelet_I``, ``curvelet_II`` and
            ``tensor_view``.
        labels: the index of each mask, (n,) or (n, m).
        masks: the masks, shape (M, rows, cols).
        gamma: the radial transition ratio.
        delta_theta: the angular transition half-width, for curvelet banks.
        layout: the JSON-ready description of the boundaries the bank is built on.
    """

    kind: str
    labels: tuple
    masks: np.ndarray
    gamma: float
    delta_theta: float = None
    layout: dict = field(default_factory=dict)

    def __post_init__(self):
        """Check the bank is consistent."""
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"Unknown filter bank kind {self.kind}.")
        if self.masks.ndim != 3 or self.masks.shape[0] != len(self.labels):
            raise InvalidArgumentError(f"Got {len(self.labels)} labels for masks of shape {self.masks.shape}.")
        object.__setattr__(self, "labels", tuple(tuple(int(i) for i in label) for label in self.labels))

    @property
    def shape(self):
        """The shape of the images the bank applies to."""
        return self.masks.shape[1:]

    def __len__(self):
        """Get the number of masks."""
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class SubbandSet:
    """The subbands of an image, with what is needed to invert the transform.

    Args:
        kind: the transform that produced the subbands, e.g. ``lp`` or ``curvelet1``.
        labels: the index of each subband.
        planes: the subbands, stacked along the first axis.
        approximation: for each subband, whether it belongs to the approximation (left out of thresholding).
        bank: the filter bank used, to synthesize the image back.
        layout: the JSON-ready description of the boundaries.
        shape: the shape of the analyzed image.
    """

    kind: str
    labels: tuple
    planes: np.ndarray
    approximation: tuple
    bank: object
    layout: dict
    shape: tuple

    def __post_init__(self):
        """Check the number of subbands is consistent."""
        if not len(self.labels) == len(self.planes) == len(self.approximation):
            raise InvalidArgumentError(f"Got {len(self.labels)} labels, {len(self.planes)} planes and "
                                       f"{len(self.approximation)} approximation flags.")
        if not np.all(np.isfinite(self.planes)):
            raise InvalidArgumentError("Subbands contain non-finite values.")

    def __len__(self):
        """Get the number of subbands."""
        return len(self.labels)

    def with_planes(self, planes):
        """Get a copy of the set holding other planes."""
        return replace(self, planes=np.asarray(planes, dtype=float))

    def energy(self):
        """Get the energy of every subband."""
        return np.sum(self.planes.reshape(len(self), -1) ** 2, axis=1)


def multiplicative_forward(pixels, bank):
    """Filter an image with every mask of a 2D bank.

    Returns:
        The real subbands, shape (M, rows, cols).
    """
    image = as_image(pixels)
    if image.shape != bank.shape:
        raise InvalidArgumentError(f"Image of shape {image.shape} does not match the bank shape {bank.shape}.")
    spectrum = scipy.fft.fft2(image)
    subbands = scipy.fft.ifft2(spectrum[np.newaxis] * np.conj(bank.masks), axes=(-2, -1))
    return real_part(subbands, np.max(np.abs(image)))


def multiplicative_inverse(planes, bank):
    """Rebuild an image from the subbands of :func:`multiplicative_forward`."""
    planes = np.asarray(planes, dtype=float)
    if planes.shape != bank.masks.shape:
        raise InvalidArgumentError(f"Subbands of shape {planes.shape} do not match the masks {bank.masks.shape}.")
    spectrum = np.sum(scipy.fft.fft2(planes, axes=(-2, -1)) * bank.masks, axis=0)
    return real_part(scipy.fft.ifft2(spectrum), np.max(np.abs(planes), initial=0.0) * len(bank))


def frame_sum(bank):
    """Sum the squares of the masks of a bank at every frequency.

    Works for 1D and 2D banks alike, it is 1 everywhere for a tight frame.
    """
    return np.sum(np.asarray(bank.masks) ** 2, axis=0)


def frame_deviation(bank):
    """Get the largest distance of the frame sum to 1."""
    deviation = float(np.max(np.abs(frame_sum(bank) - 1)))
    logger.debug(f"Frame sum deviation: {deviation:.3e}")
    return deviation


def tiling_map(bank):
    """Get the index of the dominant mask at every frequency, with DC at the center of the map."""
    return scipy.fft.fftshift(np.argmax(bank.masks, axis=0))


def check_masks(masks):
    """Check that masks lie in [0, 1]."""
    if np.min(masks) < 0 or np.max(masks) > 1 + 1e-12:
        raise InvalidArgumentError("Masks must take their values in [0, 1].")
    return masks
