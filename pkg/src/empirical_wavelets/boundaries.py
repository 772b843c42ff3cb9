"""Detection of the Fourier boundaries of the modes of a magnitude spectrum.

A magnitude spectrum ``H`` sampled over ``[0, π]`` is optionally preprocessed (logarithm, then removal of a
global trend), and the interval is then partitioned into ``N`` segments, one per detected mode. The partition is
a :class:`BoundarySet` ``{ω⁰ = 0, ω¹, ..., ω^N = π}``.

Preprocessing options, chosen through :class:`DetectConfig`:

- ``use_log``: work on ``ln(1 + H)``,
- ``trend``: ``none``, ``plaw`` (power law ``ω^-s``), ``poly`` (least-squares polynomial of a given degree),
  ``morpho`` (mean of the morphological opening and closing) or ``tophat`` (the opening alone).

Boundary placement rules:

- ``middle``: the ``N - 1`` largest local maxima are kept and the boundaries are set midway between consecutive
  ones, the first one being taken against ``ω = 0``,
- ``lowestmin``: the same maxima, with the boundaries set at the lowest point between consecutive ones,
- ``ftc``: fine to coarse, all local minima are candidates and are merged away until each remaining one
  separates two significant modes. The number of bands is an output.

When two candidates compare equal, the lower frequency wins.

Example:
    >>> config = DetectConfig(use_log=True, trend="morpho", rule="lowestmin", n_bands=4)
    >>> boundary_set = detect_boundaries(spectrum, config)
    >>> boundary_set.boundaries
    array([0.        , 0.2454..., 0.8590..., 1.9634..., 3.1415...])
"""

import dataclasses
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial
from scipy.optimize import brute

from empirical_wavelets.common import DetectionError, InvalidArgumentError
from empirical_wavelets.morphology import closing, local_maxima, local_minima, opening

logger = logging.getLogger(__name__)

TRENDS = ("none", "plaw", "poly", "morpho", "tophat")
RULES = ("middle", "lowestmin", "ftc")
FEWER_MAXIMA = "fewer_maxima"
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class Spectrum1D:
    """A magnitude profile sampled on K equally spaced bins of [0, nyquist].

    Args:
        values: the samples, bin i standing for ω = i·nyquist/(K - 1).
        preprocessed: whether the profile went through :func:`preprocess`.
        recipe: the preprocessing steps applied so far.
        nyquist: the frequency of the last bin, π unless the profile comes from an odd-length transform.
    """

    values: np.ndarray
    preprocessed: bool = False
    recipe: tuple = ()
    nyquist: float = np.pi

    def __post_init__(self):
        """Validate the profile."""
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 3:
            raise InvalidArgumentError(f"A spectrum needs at least 3 bins, got shape {values.shape}.")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("Spectrum contains non-finite values.")
        if not self.preprocessed and np.any(values < 0):
            raise InvalidArgumentError("A raw spectrum must be nonnegative.")
        if not 0 < self.nyquist <= np.pi:
            raise InvalidArgumentError(f"Last bin frequency must be in (0, π], got {self.nyquist}.")
        object.__setattr__(self, "values", values)

    @property
    def size(self):
        """The number of bins."""
        return self.values.size

    @property
    def omega(self):
        """The frequency of every bin, in radians."""
        return np.linspace(0, self.nyquist, self.size)

    def replace(self, values, step):
        """Get a preprocessed copy of the profile with new values, recording `step` in the recipe."""
        return Spectrum1D(values, preprocessed=True, recipe=self.recipe + (step,), nyquist=self.nyquist)


def as_spectrum(spectrum):
    """Wrap raw values in a :class:`Spectrum1D`, leaving spectra untouched."""
    if isinstance(spectrum, Spectrum1D):
        return spectrum
    return Spectrum1D(np.asarray(spectrum, dtype=float))


@dataclass(frozen=True, eq=False)
class BoundarySet:
    """A partition of [0, π] into mode supports.

    Args:
        boundaries: the strictly increasing boundaries, starting at 0 and ending at π.
        selected_maxima: the bins of the spectrum maxima the boundaries were built around.
        warnings: flags raised during the detection, e.g. ``"fewer_maxima"``.
    """

    boundaries: np.ndarray
    selected_maxima: tuple = ()
    warnings: tuple = ()

    def __post_init__(self):
        """Validate the partition."""
        boundaries = np.array(self.boundaries, dtype=float)
        if boundaries.ndim != 1 or boundaries.size < 2:
            raise InvalidArgumentError("A boundary set needs at least the two endpoints 0 and π.")
        if boundaries[0] != 0 or not np.isclose(boundaries[-1], np.pi, rtol=0, atol=1e-12):
            raise InvalidArgumentError(f"Boundaries must run from 0 to π, got {boundaries[0]} to {boundaries[-1]}.")
        if np.any(np.diff(boundaries) <= 0):
            raise InvalidArgumentError("Boundaries must be strictly increasing.")
        boundaries[-1] = np.pi
        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "selected_maxima", tuple(int(i) for i in self.selected_maxima))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def from_interior(cls, interior, **kwargs):
        """Build a boundary set from its interior boundaries."""
        return cls(np.concatenate(([0.0], np.sort(np.asarray(interior, dtype=float)), [np.pi])), **kwargs)

    @property
    def n_bands(self):
        """The number of segments, N."""
        return self.boundaries.size - 1

    @property
    def interior(self):
        """The boundaries strictly between 0 and π."""
        return self.boundaries[1:-1]

    def to_dict(self):
        """Get a JSON-ready representation."""
        return dict(boundaries_radians=self.boundaries.tolist(),
                    selected_maxima_bins=list(self.selected_maxima),
                    warning_flags=list(self.warnings))

    @classmethod
    def from_dict(cls, content):
        """Rebuild a boundary set from :meth:`to_dict` output."""
        return cls(content["boundaries_radians"], content.get("selected_maxima_bins", ()),
                   content.get("warning_flags", ()))


@dataclass(frozen=True)
class DetectConfig:
    """The settings of a boundary detection.

    Args:
        use_log: whether to work on ln(1 + H).
        trend: the trend to remove, one of ``none``, ``plaw``, ``poly``, ``morpho`` and ``tophat``.
        degree: the polynomial degree for the ``poly`` trend.
        rule: the boundary placement rule, one of ``middle``, ``lowestmin`` and ``ftc``.
        n_bands: the requested number of bands N (ignored by ``ftc``).
        rho: the merge ratio of the ``ftc`` rule.
    """

    use_log: bool = False
    trend: str = "none"
    degree: int = 5
    rule: str = "lowestmin"
    n_bands: int = 3
    rho: float = 0.7

    def __post_init__(self):
        """Validate the settings."""
        if self.trend not in TRENDS:
            raise InvalidArgumentError(f"Unknown trend {self.trend}, expected one of {', '.join(TRENDS)}.")
        if self.rule not in RULES:
            raise InvalidArgumentError(f"Unknown rule {self.rule}, expected one of {', '.join(RULES)}.")
        if self.trend == "poly" and self.degree < 1:
            raise InvalidArgumentError(f"Polynomial degree must be at least 1, got {self.degree}.")
        if self.rule != "ftc" and self.n_bands < 2:
            raise InvalidArgumentError(f"At least 2 bands are needed, got {self.n_bands}.")
        if not 0 < self.rho <= 1:
            raise InvalidArgumentError(f"rho must be in (0, 1], got {self.rho}.")

    @property
    def trend_name(self):
        """The trend as written on the command line, e.g. ``poly:5``."""
        if self.trend == "poly":
            return f"poly:{self.degree}"
        return self.trend

    def with_bands(self, n_bands):
        """Get a copy of the config requesting another number of bands."""
        return dataclasses.replace(self, n_bands=n_bands)

    def to_dict(self):
        """Get the JSON-ready representation used in reports."""
        return dict(log=self.use_log, trend=self.trend_name, rule=self.rule, N=self.n_bands, rho=self.rho)


def parse_trend(text):
    """Parse a trend name, possibly carrying a polynomial degree as in ``poly:5``.

    Returns:
        The trend and the degree (5 unless given).
    """
    name, _, degree = text.partition(":")
    if name not in TRENDS or (degree and name != "poly"):
        raise InvalidArgumentError(f"Unknown trend {text}.")
    if not degree:
        return name, 5
    try:
        return name, int(degree)
    except ValueError as err:
        raise InvalidArgumentError(f"Invalid polynomial degree in {text}.") from err


def preprocess(spectrum, config):
    """Apply the logarithm and trend removal of `config` to a raw spectrum.

    Returns:
        The preprocessed spectrum, with the applied steps recorded in its recipe.
    """
    spectrum = as_spectrum(spectrum)
    if spectrum.preprocessed:
        raise InvalidArgumentError("The spectrum is already preprocessed.")
    result = Spectrum1D(spectrum.values, preprocessed=True, recipe=(), nyquist=spectrum.nyquist)
    if config.use_log:
        result = result.replace(np.log1p(spectrum.values), "log")
    if config.trend == "plaw":
        fit = fit_power_law(result)
        result = result.replace(result.values - fit.trend, f"plaw(s={fit.exponent:.6g})")
    elif config.trend == "poly":
        trend = fit_polynomial(result, config.degree)
        result = result.replace(result.values - trend, f"poly(d={config.degree})")
    elif config.trend == "morpho":
        result = result.replace(result.values - trend_morpho(result), f"morpho(h={se_size(result)})")
    elif config.trend == "tophat":
        result = result.replace(result.values - trend_tophat(result), f"tophat(h={se_size(result)})")
    logger.debug(f"Preprocessed spectrum with {result.recipe}")
    return result


@dataclass(frozen=True, eq=False)
class PowerLawFit:
    """The result of a power law fit.

    Args:
        exponent: the exponent s of the closed-form fit.
        trend: the trend ω^-s sampled on the spectrum bins (H(0) on the DC bin).
        grid_exponent: the exponent minimizing ‖H - ω^-s‖₂ by brute-force search, for diagnostics.
    """

    exponent: float
    trend: np.ndarray
    grid_exponent: float


def fit_power_law(spectrum):
    """Fit a power law ω^-s to a spectrum.

    The exponent is ``s = -Σ ln ω ln H / Σ (ln ω)²`` over the bins with ω > 0 and H > 0. The closed form leaves out
    any multiplicative constant, so the minimizer of the least-squares objective is computed by a grid search as
    well and returned alongside.

    Raises:
        DetectionError: when no bin can be used.
    """
    spectrum = as_spectrum(spectrum)
    values = spectrum.values
    omega = spectrum.omega
    usable = (omega > 0) & (values > 0)
    log_omega = np.log(omega[usable])
    denominator = np.sum(log_omega ** 2)
    if not np.any(usable) or denominator == 0:
        raise DetectionError("No usable bin to fit a power law.")
    exponent = -np.sum(log_omega * np.log(values[usable])) / denominator

    def objective(s):
        return np.linalg.norm(values[usable] - omega[usable] ** -np.asarray(s).item())

    grid_exponent = float(np.ravel(brute(objective, ((-10.0, 10.0),), Ns=2001, finish=None))[0])
    trend = np.empty_like(values)
    trend[0] = values[0]
    trend[1:] = omega[1:] ** -exponent
    return PowerLawFit(float(exponent), trend, grid_exponent)


def fit_polynomial(spectrum, degree):
    """Fit a least-squares polynomial of the given degree in ω to a spectrum.

    Returns:
        The polynomial trend sampled on the spectrum bins.

    Raises:
        InvalidArgumentError: when the degree is not smaller than the number of bins.
        DetectionError: when the least-squares system is too ill-conditioned.
    """
    spectrum = as_spectrum(spectrum)
    if degree < 1 or degree >= spectrum.size:
        raise InvalidArgumentError(f"Polynomial degree must be in [1, {spectrum.size - 1}], got {degree}.")
    vandermonde = polynomial.polyvander(spectrum.omega / np.pi, degree)
    condition = np.linalg.cond(vandermonde)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise DetectionError(f"Polynomial fit of degree {degree} is ill-conditioned (condition {condition:.3e}).")
    coefficients, *_ = np.linalg.lstsq(vandermonde, spectrum.values, rcond=None)
    return vandermonde @ coefficients


def se_size(spectrum):
    """Get the half-width of the structuring window used by the morphological trends.

    The window is as wide as the smallest gap between two consecutive local maxima. Without two maxima, the
    half-width falls back to max(1, K // 20).
    """
    spectrum = as_spectrum(spectrum)
    maxima = local_maxima(spectrum.values)
    if maxima.size < 2:
        half_width = max(1, spectrum.size // 20)
    else:
        half_width = int(np.min(np.diff(maxima))) // 2
    return min(half_width, (spectrum.size - 1) // 2)


def trend_morpho(spectrum):
    """Get the mean of the opening and closing of a spectrum."""
    spectrum = as_spectrum(spectrum)
    half_width = se_size(spectrum)
    return (opening(spectrum.values, half_width) + closing(spectrum.values, half_width)) / 2


def trend_tophat(spectrum):
    """Get the opening of a spectrum, so that removing it leaves the peaks narrower than the window."""
    spectrum = as_spectrum(spectrum)
    return opening(spectrum.values, se_size(spectrum))


def _select_maxima(values, n_bands):
    """Get the positions of the N - 1 largest maxima, in increasing order, and the detection warnings."""
    if n_bands < 2:
        raise InvalidArgumentError(f"At least 2 bands are needed, got {n_bands}.")
    maxima = local_maxima(values)
    if maxima.size == 0:
        raise DetectionError("The spectrum has no local maximum.")
    order = np.lexsort((maxima, -values[maxima]))
    kept = np.sort(maxima[order[:n_bands - 1]])
    warnings = ()
    if kept.size < n_bands - 1:
        logger.warning(f"Only {kept.size} maxima found, {n_bands - 1} requested: returning {kept.size + 1} bands.")
        warnings = (FEWER_MAXIMA,)
    return kept, warnings


def detect_middle(spectrum, n_bands):
    """Set the boundaries midway between consecutive selected maxima, with ω = 0 prepended."""
    spectrum = as_spectrum(spectrum)
    kept, warnings = _select_maxima(spectrum.values, n_bands)
    positions = np.concatenate(([0.0], spectrum.omega[kept]))
    interior = (positions[1:] + positions[:-1]) / 2
    return BoundarySet.from_interior(interior, selected_maxima=kept, warnings=warnings)


def detect_lowestmin(spectrum, n_bands):
    """Set the boundaries at the lowest point between consecutive selected maxima.

    The first segment runs from ω = 0 (excluded) to the first maximum. A segment without any bin strictly inside
    falls back to its midpoint.
    """
    spectrum = as_spectrum(spectrum)
    values, omega = spectrum.values, spectrum.omega
    kept, warnings = _select_maxima(values, n_bands)
    interior = []
    for left, right in zip(np.concatenate(([0], kept[:-1])), kept, strict=True):
        if right - left < 2:
            interior.append((omega[left] + omega[right]) / 2)
        else:
            interior.append(omega[left + 1 + np.argmin(values[left + 1:right])])
    return BoundarySet.from_interior(interior, selected_maxima=kept, warnings=warnings)


def detect_ftc(spectrum, rho=0.7):
    """Segment a spectrum from fine to coarse.

    Every interior local minimum starts as a boundary. A minimum m is merged away when its value exceeds ``rho``
    times the lower of the peaks of the supports on each side, or when one of these supports has no peak above it.
    Candidates are merged one at a time, highest first, until none qualifies.
    """
    spectrum = as_spectrum(spectrum)
    if spectrum.size < 5:
        raise InvalidArgumentError(f"Fine to coarse segmentation needs at least 5 bins, got {spectrum.size}.")
    values = spectrum.values
    minima = list(local_minima(values))
    while minima:
        edges = [0, *minima, values.size - 1]
        peaks = [values[start:stop + 1].max() for start, stop in itertools.pairwise(edges)]
        candidates = [index for index, position in enumerate(minima)
                      if _shallow(values[position], min(peaks[index], peaks[index + 1]), rho)]
        if not candidates:
            break
        merged = min(candidates, key=lambda index: (-values[minima[index]], minima[index]))
        logger.debug(f"Merging supports around bin {minima[merged]}")
        del minima[merged]
    return BoundarySet.from_interior(spectrum.omega[minima])


def _shallow(minimum, peak, rho):
    return minimum > rho * peak or minimum >= peak


def detect(spectrum, config):
    """Place the boundaries on an already preprocessed spectrum following the rule of `config`."""
    if config.rule == "middle":
        return detect_middle(spectrum, config.n_bands)
    if config.rule == "lowestmin":
        return detect_lowestmin(spectrum, config.n_bands)
    return detect_ftc(spectrum, config.rho)


def detect_boundaries(spectrum, config, geometry=None):
    """Preprocess a raw spectrum and detect its boundaries.

    Args:
        spectrum: the raw spectrum.
        config: the :class:`DetectConfig` to use.
        geometry: a tag naming the spectrum, added to detection errors.
    """
    try:
        boundary_set = detect(preprocess(spectrum, config), config)
    except DetectionError as err:
        if err.geometry is None and geometry is not None:
            raise DetectionError(str(err), geometry=geometry) from err
        raise
    logger.info(f"Detected {boundary_set.n_bands} bands{_tag(geometry)}: {np.round(boundary_set.boundaries, 4)}")
    return boundary_set


def _tag(geometry):
    return "" if geometry is None else f" on {geometry} spectrum"


def detection_sweep(spectrum, n_bands, rules=("middle", "lowestmin"), trends=TRENDS, logs=(False, True)):
    """Run the detection with every combination of logarithm, trend and rule.

    Combinations failing to detect anything are reported with their error instead of a boundary set.

    Returns:
        A list of (config, boundary set or error message) pairs.
    """
    results = []
    for use_log, trend, rule in itertools.product(logs, trends, rules):
        config = DetectConfig(use_log=use_log, trend=trend, rule=rule, n_bands=n_bands)
        try:
            results.append((config, detect(preprocess(spectrum, config), config)))
        except (DetectionError, InvalidArgumentError) as err:
            results.append((config, str(err)))
    return results
