"""The empirical curvelet transform, options I and II.

The Fourier plane is cut into scales like in the Littlewood-Paley transform, and every scale except the
approximation is cut further into angular sectors: wedge (n, m) is the product of the radial window Wₙ(|ω|) and
of the angular window Vₘ(θ). Filters are real and symmetric about the origin, so θ and θ + π are identified and
the angles live in the half-turn [-π/4, 3π/4) of the pseudo-polar grid.

- Option I detects a single set of angles on the angular profile of the whole spectrum, shared by all scales.
- Option II detects one set of angles per scale, on the angular profile restricted to the radii of that scale.

The angular windows use the same ramps as the radial ones, with a transition half-width Δθ common to the whole
bank. The angular profiles are detected with the ``middle`` rule and the ``tophat`` trend unless told otherwise.

Subbands are saved as ``sub_C1_{n}_{m}.ewtm`` or ``sub_C2_{n}_{m}.ewtm``, the approximation being ``(0, 0)``.

Example:
    >>> config = RunConfig(transform="curvelet2", scales=4, angles=4, use_log=True, trend="morpho")
    >>> subbands = decompose(image, config)
    >>> len(subbands)
    13
"""

import logging
from dataclasses import dataclass

import numpy as np

from empirical_wavelets import filterbank
from empirical_wavelets.arrays import as_image, central_square, frequency_grid
from empirical_wavelets.boundaries import BoundarySet, detect_boundaries
from empirical_wavelets.common import DetectionError, InvalidArgumentError, check_positive_int, point_reflection
from empirical_wavelets.ewt1d import GAMMA_RATIO, choose_gamma, empirical_masks, ramp_down, ramp_up
from empirical_wavelets.filterbank import FilterBank2D, SubbandSet, multiplicative_forward, multiplicative_inverse
from empirical_wavelets.pseudopolar import (
    angular_mean_spectrum,
    pp_grid,
    ppfft,
    profile_to_angles,
    radial_mean_spectrum,
)

logger = logging.getLogger(__name__)

FILE_PATTERNS = {"curvelet1": "sub_C1_{n:d}_{m:d}.ewtm", "curvelet2": "sub_C2_{n:d}_{m:d}.ewtm"}
LABEL_FIELDS = ("n", "m")
LOWEST_ANGLE = -np.pi / 4
FLAT_PROFILE = "flat_profile"
UNIFORM_FALLBACK = "uniform_fallback"
FLATNESS_TOLERANCE = 0.05


@dataclass(frozen=True, eq=False)
class AngularBoundarySet:
    """Angular boundaries θ¹ < ... < θ^{N_θ} within a half-turn, θ^{N_θ + 1} = θ¹ + π closing the loop.

    Args:
        angles: the strictly increasing angles, in radians.
        warnings: flags raised during the detection.
    """

    angles: np.ndarray
    warnings: tuple = ()

    def __post_init__(self):
        """Validate the angles."""
        angles = np.array(self.angles, dtype=float)
        if angles.ndim != 1 or angles.size < 2:
            raise InvalidArgumentError(f"At least 2 angles are needed, got {angles.size}.")
        if np.any(np.diff(angles) <= 0):
            raise InvalidArgumentError("Angles must be strictly increasing.")
        if angles[-1] - angles[0] >= np.pi:
            raise InvalidArgumentError("Angles must span less than a half-turn.")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def uniform(cls, n_angles, warnings=()):
        """Split the half-turn into `n_angles` equal sectors."""
        check_positive_int(n_angles, "N_θ", minimum=2)
        return cls(LOWEST_ANGLE + np.pi * np.arange(n_angles) / n_angles, warnings)

    @property
    def n_angles(self):
        """The number of angular sectors."""
        return self.angles.size

    @property
    def gaps(self):
        """The width of every sector, the last one wrapping around to θ¹ + π."""
        return np.diff(np.append(self.angles, self.angles[0] + np.pi))

    def to_dict(self):
        """Get a JSON-ready representation."""
        return dict(angles_radians=self.angles.tolist(), warning_flags=list(self.warnings))

    @classmethod
    def from_dict(cls, content):
        """Rebuild an angular set from :meth:`to_dict` output."""
        return cls(content["angles_radians"], content.get("warning_flags", ()))


def angle_of(omega1, omega2):
    """Get the angle of frequencies, taken modulo π within [-π/4, 3π/4)."""
    return np.mod(np.arctan2(omega2, omega1) - LOWEST_ANGLE, np.pi) + LOWEST_ANGLE


def choose_delta_theta(angular_set, ratio=GAMMA_RATIO):
    """Get the angular transition half-width, `ratio` times half the narrowest sector."""
    return float(ratio / 2 * np.min(angular_set.gaps))


def check_angular_transitions(angular_set, delta_theta):
    """Check the angular transition areas are pairwise disjoint.

    Raises:
        InvalidArgumentError: naming the first sector too narrow for `delta_theta`.
    """
    if delta_theta <= 0:
        raise InvalidArgumentError(f"Δθ must be positive, got {delta_theta}.")
    for m, gap in enumerate(angular_set.gaps):
        if not delta_theta < gap / 2:
            raise InvalidArgumentError(f"Angular transition areas overlap in sector m={m} for Δθ={delta_theta}.")


def angular_masks(theta, angular_set, delta_theta):
    """Evaluate the angular windows V₀, ..., V_{N_θ - 1} on an array of angles.

    Returns:
        An array of shape (N_θ,) + theta.shape.
    """
    check_angular_transitions(angular_set, delta_theta)
    theta = np.asarray(theta, dtype=float)
    masks = []
    for start, gap in zip(angular_set.angles, angular_set.gaps, strict=True):
        offset = np.mod(theta - (start - delta_theta), np.pi)
        masks.append(ramp_up(offset, delta_theta, delta_theta) * ramp_down(offset, gap + delta_theta, delta_theta))
    return np.stack(masks)


def _symmetrize(masks):
    """Make masks exactly symmetric about the origin of the discrete grid, keeping the sum of squares."""
    return np.sqrt((masks ** 2 + point_reflection(masks) ** 2) / 2)


def _angular_sets_per_scale(option, angles, n_scales):
    if option == 1:
        if not isinstance(angles, AngularBoundarySet):
            raise InvalidArgumentError("Option I takes a single set of angles.")
        return [angles] * (n_scales - 1)
    if option == 2:
        angles = list(angles)
        if len(angles) != n_scales - 1:
            raise InvalidArgumentError(f"Option II takes one set of angles per detail scale, {n_scales - 1} "
                                       f"expected, got {len(angles)}.")
        return angles
    raise InvalidArgumentError(f"Unknown curvelet option {option}, expected 1 or 2.")


def curvelet_bank(option, boundary_set, angles, gamma, delta_theta, rows, cols):
    """Build the wedge masks of a curvelet bank for images of shape (rows, cols).

    Args:
        option: 1 for shared angles, 2 for per-scale angles.
        boundary_set: the scale boundaries.
        angles: an :class:`AngularBoundarySet` for option I, one per detail scale for option II.
        gamma: the radial transition ratio.
        delta_theta: the angular transition half-width.
        rows: the number of rows of the images.
        cols: the number of columns of the images.
    """
    per_scale = _angular_sets_per_scale(option, angles, boundary_set.n_bands)
    omega1, omega2 = frequency_grid(rows, cols)
    radial = empirical_masks(np.hypot(omega1, omega2), boundary_set, gamma)
    theta = angle_of(omega1, omega2)
    masks = [radial[0]]
    labels = [(0, 0)]
    for n, angular_set in enumerate(per_scale, start=1):
        masks.extend(radial[n] * angular_masks(theta, angular_set, delta_theta))
        labels.extend((n, m) for m in range(angular_set.n_angles))
    masks = filterbank.check_masks(_symmetrize(np.stack(masks)))
    kind = "curvelet_I" if option == 1 else "curvelet_II"
    return FilterBank2D(kind, tuple(labels), masks, gamma, delta_theta)


def curvelet_forward(pixels, bank):
    """Decompose an image into its wedges, the approximation first."""
    return multiplicative_forward(pixels, bank)


def curvelet_inverse(planes, bank):
    """Rebuild an image from its wedges."""
    return multiplicative_inverse(planes, bank)


def _is_flat(profile):
    return np.ptp(profile) <= FLATNESS_TOLERANCE * np.max(np.abs(profile))


def is_isotropic(values, grid, spectrum):
    """Tell whether pseudo-polar values carry no orientation.

    Either the angular profile is flat as it is, for spectra of constant magnitude, or the means of the whole
    lines are flat once scaled by the stretch √(1 + s²) of their radii, for isotropic spectra decaying within the
    grid.
    """
    stretch = np.tile(np.hypot(1, grid.slopes), 2)
    return _is_flat(spectrum.values) or _is_flat(np.mean(np.abs(values), axis=1) * stretch)


def detect_angles(values, n_angles, config, radial_band=None, grid=None):
    """Detect the angles separating the orientations of pseudo-polar values.

    The angular profile is split into N_θ + 1 bands, whose N_θ interior boundaries are mapped back to angles.
    When the spectrum is isotropic, the detection fails or gives less than N_θ angles (2 for the ``ftc`` rule),
    the half-turn is split uniformly and a warning is logged.

    Args:
        values: the pseudo-polar values.
        n_angles: the number of angles N_θ.
        config: the :class:`~empirical_wavelets.boundaries.DetectConfig` for the angular profile.
        radial_band: the (low, high) radii to build the profile from, all radii by default.
        grid: the pseudo-polar grid of the values.
    """
    check_positive_int(n_angles, "N_θ", minimum=2)
    grid = grid or pp_grid(np.shape(values)[0] // 2)
    spectrum = angular_mean_spectrum(values, radial_band)
    if is_isotropic(values, grid, spectrum):
        logger.warning("Flat angular profile, falling back to a uniform angular split")
        return AngularBoundarySet.uniform(n_angles, (FLAT_PROFILE, UNIFORM_FALLBACK))
    try:
        boundary_set = detect_boundaries(spectrum, config.with_bands(n_angles + 1), geometry="angular")
    except DetectionError as err:
        logger.warning(f"Angular detection failed ({err}), falling back to a uniform angular split")
        return AngularBoundarySet.uniform(n_angles, (UNIFORM_FALLBACK,))
    angles = np.unique(profile_to_angles(grid, boundary_set.interior))
    if angles.size < (2 if config.rule == "ftc" else n_angles):
        logger.warning(f"Only {angles.size} angles detected, falling back to a uniform angular split")
        return AngularBoundarySet.uniform(n_angles, (*boundary_set.warnings, UNIFORM_FALLBACK))
    return AngularBoundarySet(angles, boundary_set.warnings)


def curvelet_detect(pixels, n_scales, n_angles, scale_config, angle_config, option, method="direct"):
    """Detect the scales and the angles of an image.

    Non-square images are cropped to their largest centered even square first.

    Returns:
        The scale :class:`~empirical_wavelets.boundaries.BoundarySet`, and a single
        :class:`AngularBoundarySet` for option I or a list of them, one per detail scale, for option II.
    """
    check_positive_int(n_scales, "N_s", minimum=2)
    square = central_square(pixels)
    grid = pp_grid(square.shape[0])
    values = ppfft(square, grid, method)
    boundary_set = detect_boundaries(radial_mean_spectrum(values), scale_config.with_bands(n_scales),
                                     geometry="radial")
    if option == 1:
        return boundary_set, detect_angles(values, n_angles, angle_config, grid=grid)
    if option != 2:
        raise InvalidArgumentError(f"Unknown curvelet option {option}, expected 1 or 2.")
    per_scale = []
    boundaries = boundary_set.boundaries
    for n in range(1, boundary_set.n_bands):
        band = (boundaries[n], boundaries[n + 1])
        try:
            angular_set = detect_angles(values, n_angles, angle_config, radial_band=band, grid=grid)
        except InvalidArgumentError:
            logger.warning(f"No radius in scale {n}, falling back to a uniform angular split")
            angular_set = AngularBoundarySet.uniform(n_angles, (UNIFORM_FALLBACK,))
        logger.info(f"Detected {angular_set.n_angles} angles for scale {n}: {np.round(angular_set.angles, 4)}")
        per_scale.append(angular_set)
    return boundary_set, per_scale


def option_of(transform):
    """Get the curvelet option of a transform name, 1 for ``curvelet1`` and 2 for ``curvelet2``."""
    if transform not in FILE_PATTERNS:
        raise InvalidArgumentError(f"{transform} is not a curvelet transform.")
    return int(transform[-1])


def build_bank(image, config):
    """Detect the scales and angles of an image and build its curvelet bank."""
    image = as_image(image)
    option = option_of(config.transform)
    boundary_set, angles = curvelet_detect(image, config.scales, config.angles, config.detect_config(),
                                           config.angle_config(), option, config.ppfft_method)
    per_scale = _angular_sets_per_scale(option, angles, boundary_set.n_bands)
    gamma = choose_gamma(boundary_set) if config.gamma is None else config.gamma
    delta_theta = min(choose_delta_theta(angular_set) for angular_set in per_scale)
    bank = curvelet_bank(option, boundary_set, angles, gamma, delta_theta, *image.shape)
    logger.info(f"Built curvelet bank (option {option}) with {len(bank)} wedges, Δθ={delta_theta:.4f}")
    angle_sets = [angles] if option == 1 else angles
    layout = dict(transform=config.transform, option=option, boundaries=boundary_set.to_dict(), gamma=gamma,
                  delta_theta=delta_theta, angles=[angular_set.to_dict() for angular_set in angle_sets],
                  detect=config.detect_config().to_dict(), detect_angles=config.angle_config().to_dict())
    return bank, layout


def restore_bank(layout, shape):
    """Rebuild a curvelet bank from a layout."""
    option = layout["option"]
    angle_sets = [AngularBoundarySet.from_dict(content) for content in layout["angles"]]
    angles = angle_sets[0] if option == 1 else angle_sets
    return curvelet_bank(option, BoundarySet.from_dict(layout["boundaries"]), angles, layout["gamma"],
                         layout["delta_theta"], *shape)


def analyze(image, bank, layout):
    """Decompose an image with an already built bank."""
    planes = curvelet_forward(image, bank)
    approximation = tuple(label == (0, 0) for label in bank.labels)
    return SubbandSet(f"curvelet{layout['option']}", bank.labels, planes, approximation, bank, layout, bank.shape)


def synthesize(subbands, config=None):
    """Rebuild the image from its subbands."""
    return curvelet_inverse(subbands.planes, subbands.bank), {}


def decompose(image, config):
    """Detect the bank of an image and decompose it."""
    return analyze(image, *build_bank(image, config))


frame_deviation = filterbank.frame_deviation
tiling = filterbank.tiling_map
