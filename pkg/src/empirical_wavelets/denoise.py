"""Denoising by soft thresholding of the detail subbands, and image quality metrics.

The denoising runs in three steps: decompose the noisy image, shrink every detail coefficient towards zero by
the universal threshold ``τ = δ √(2 ln N_p)``, and synthesize the image back. The filter bank is detected once on
the noisy image, and δ is picked on a grid as the value giving the best PSNR against a reference image.

Example:
    >>> noisy = add_gaussian_noise(image, sigma=1.0, seed=0)
    >>> denoised, report = denoise(noisy, "lp", config, np.linspace(0, 4, 21), reference=image)
    >>> report.psnr_denoised > report.psnr_noisy
    True
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from empirical_wavelets.arrays import as_image
from empirical_wavelets.common import DetectionError, InvalidArgumentError, NumericalError
from empirical_wavelets.filterbank import SubbandSet

logger = logging.getLogger(__name__)


def add_gaussian_noise(pixels, sigma, seed=0):
    """Add white Gaussian noise of standard deviation `sigma` to an image.

    The noise is drawn from ``numpy.random.default_rng(seed)``, so the same seed always gives the same noise.
    """
    image = as_image(pixels)
    if sigma < 0:
        raise InvalidArgumentError(f"σ must be nonnegative, got {sigma}.")
    if sigma == 0:
        return image.copy()
    return image + sigma * np.random.default_rng(seed).standard_normal(image.shape)


def universal_threshold(delta, n_pixels):
    """Get the universal threshold δ√(2 ln N_p)."""
    if n_pixels < 1 or delta < 0:
        raise InvalidArgumentError(f"Need N_p >= 1 and δ >= 0, got {n_pixels} and {delta}.")
    return delta * math.sqrt(2 * math.log(n_pixels))


def soft_threshold(coefficients, tau):
    """Shrink coefficients towards zero by `tau`.

    Args:
        coefficients: an array, or a :class:`~empirical_wavelets.filterbank.SubbandSet` whose approximation
            subbands are left untouched.
        tau: the nonnegative threshold.
    """
    if tau < 0:
        raise InvalidArgumentError(f"The threshold must be nonnegative, got {tau}.")
    if isinstance(coefficients, SubbandSet):
        planes = coefficients.planes.copy()
        details = ~np.asarray(coefficients.approximation)
        planes[details] = soft_threshold(planes[details], tau)
        return coefficients.with_planes(planes)
    values = np.asarray(coefficients, dtype=float)
    return np.sign(values) * np.maximum(np.abs(values) - tau, 0.0)


def _same_shape(reference, test):
    reference = np.asarray(reference, dtype=float)
    test = np.asarray(test, dtype=float)
    if reference.shape != test.shape:
        raise InvalidArgumentError(f"Images of shapes {reference.shape} and {test.shape} cannot be compared.")
    return reference, test


def psnr(reference, test, max_value=255.0):
    """Get the peak signal to noise ratio in dB, infinite for identical images."""
    reference, test = _same_shape(reference, test)
    mse = np.mean((reference - test) ** 2)
    if mse == 0:
        return math.inf
    return float(10 * np.log10(max_value ** 2 / mse))


def ssim_global(reference, test, dynamic_range=255.0):
    """Get the structural similarity of two images, computed once over the whole images."""
    reference, test = _same_shape(reference, test)
    if dynamic_range <= 0:
        raise InvalidArgumentError(f"The dynamic range must be positive, got {dynamic_range}.")
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    mean_ref, mean_test = reference.mean(), test.mean()
    covariance = np.mean((reference - mean_ref) * (test - mean_test))
    numerator = (2 * mean_ref * mean_test + c1) * (2 * covariance + c2)
    denominator = (mean_ref ** 2 + mean_test ** 2 + c1) * (reference.var() + test.var() + c2)
    return float(numerator / denominator)


def _to_json_number(value):
    return "inf" if math.isinf(value) else value


def _from_json_number(value):
    return math.inf if value == "inf" else value


@dataclass
class DenoiseReport:
    """The outcome of a denoising run.

    PSNR values are infinite when the images compared are identical.
    """

    transform: str
    sigma: float
    seed: int
    delta: float
    tau: float
    psnr_noisy: float
    psnr_denoised: float
    ssim_noisy: float
    ssim_denoised: float
    runtime_ms: float
    failures: list = field(default_factory=list)

    def to_dict(self):
        """Get a JSON-ready representation, infinite PSNR values being written ``"inf"``."""
        content = asdict(self)
        content["psnr_noisy"] = _to_json_number(self.psnr_noisy)
        content["psnr_denoised"] = _to_json_number(self.psnr_denoised)
        return content

    @classmethod
    def from_dict(cls, content):
        """Rebuild a report from :meth:`to_dict` output."""
        content = dict(content)
        content["psnr_noisy"] = _from_json_number(content["psnr_noisy"])
        content["psnr_denoised"] = _from_json_number(content["psnr_denoised"])
        return cls(**content)


def _evaluate(subbands, plugin, config, delta, reference, max_value):
    tau = universal_threshold(delta, reference.size)
    image, _ = plugin.synthesize(soft_threshold(subbands, tau), config)
    return image, tau, psnr(reference, image, max_value)


def denoise(noisy, plugin, config, deltas, reference, max_value=255.0, workers=1):
    """Denoise an image with the δ giving the best PSNR against `reference`.

    Args:
        noisy: the noisy image, on which the bank is detected.
        plugin: the transform module, as returned by
            :func:`~empirical_wavelets.main_interface.get_transform`.
        config: the :class:`~empirical_wavelets.config.RunConfig` of the transform.
        deltas: the δ values to try.
        reference: the clean image to score against.
        max_value: the peak value for the PSNR and the dynamic range for the SSIM.
        workers: the number of threads evaluating the grid.

    Returns:
        The denoised image and the :class:`DenoiseReport`. Grid points failing are recorded in the report;
        the lowest δ wins ties.

    Raises:
        NumericalError: if every grid point failed.
    """
    deltas = [float(delta) for delta in deltas]
    if not deltas:
        raise InvalidArgumentError("The δ grid is empty.")
    noisy, reference = _same_shape(noisy, reference)
    start = time.perf_counter()
    subbands = plugin.decompose(noisy, config)

    def evaluate(delta):
        try:
            return _evaluate(subbands, plugin, config, delta, reference, max_value)
        except (InvalidArgumentError, DetectionError, NumericalError) as err:
            return err

    with ThreadPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(evaluate, deltas))
    best = None
    failures = []
    for delta, outcome in zip(deltas, outcomes, strict=True):
        if isinstance(outcome, Exception):
            logger.warning(f"Denoising with δ={delta} failed: {outcome}")
            failures.append(dict(delta=delta, reason=str(outcome)))
        elif best is None or outcome[2] > best[1][2]:
            best = delta, outcome
    if best is None:
        raise NumericalError("Denoising failed for every δ of the grid.")
    delta, (image, tau, best_psnr) = best
    logger.info(f"Best δ={delta:g} (τ={tau:.4g}), PSNR {best_psnr:.2f} dB")
    report = DenoiseReport(transform=config.transform, sigma=config.sigma, seed=config.seed, delta=delta, tau=tau,
                           psnr_noisy=psnr(reference, noisy, max_value), psnr_denoised=best_psnr,
                           ssim_noisy=ssim_global(reference, noisy, max_value),
                           ssim_denoised=ssim_global(reference, image, max_value),
                           runtime_ms=(time.perf_counter() - start) * 1000, failures=failures)
    return image, report
