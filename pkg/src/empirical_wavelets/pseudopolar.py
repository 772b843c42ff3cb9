"""The pseudo-polar Fourier transform.

The pseudo-polar grid of an N×N image samples the Fourier plane on concentric squares, along 2N lines through
the origin. With the slopes ``s_i = -1 + 2i/N`` (i = 0, ..., N - 1) and the signed radii ``r_j = πj/N``
(j = -N, ..., N), the nodes are:

- first the basically horizontal sector, ``(ω₁, ω₂) = (r_j, s_i r_j)``,
- then the basically vertical sector, ``(ω₁, ω₂) = (-s_i r_j, r_j)``,

so that the angle θ of the lines increases strictly over ``[-π/4, 3π/4)`` with the angle index, each diagonal
being sampled once. ω₁ pairs with the row index of the image.

The forward transform evaluates the Fourier sum of the image exactly at the nodes. Since a node's frequency is a
product of a radius and a slope, the double sum factors into two matrix products; a chirp-z evaluation is also
available (``method="czt"``). The adjoint is the exact dual of the forward sum, without any density weighting,
and the inverse is a least-squares fit solved by conjugate gradients.

Example:
    >>> grid = pp_grid(32)
    >>> values = ppfft(image, grid)
    >>> result = ppfft_inverse(values, grid, tol=1e-10, maxiter=300)
    >>> result.converged
    True
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from empirical_wavelets.arrays import as_image
from empirical_wavelets.boundaries import Spectrum1D
from empirical_wavelets.common import InvalidArgumentError

logger = logging.getLogger(__name__)

METHODS = ("direct", "czt")


@dataclass(frozen=True, eq=False)
class PPGrid:
    """The nodes of a pseudo-polar grid.

    Args:
        size: the side N of the images the grid applies to.
        slopes: the N slopes shared by both sectors.
        radii: the 2N + 1 signed radii.
        theta: the angle of each of the 2N lines.
        omega1: the first frequency coordinate of each node, shape (2N, 2N + 1).
        omega2: the second frequency coordinate of each node, shape (2N, 2N + 1).
    """

    size: int
    slopes: np.ndarray
    radii: np.ndarray
    theta: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray

    @property
    def shape(self):
        """The shape of the arrays of values on the grid."""
        return self.omega1.shape


def pp_grid(size):
    """Build the pseudo-polar grid for size×size images.

    Raises:
        InvalidArgumentError: if the size is odd or smaller than 4.
    """
    if isinstance(size, bool) or int(size) != size or size < 4 or size % 2:
        raise InvalidArgumentError(f"The pseudo-polar grid needs an even size of at least 4, got {size}.")
    size = int(size)
    slopes = -1 + 2 * np.arange(size) / size
    radii = np.pi * np.arange(-size, size + 1) / size
    horizontal = (np.broadcast_to(radii, (size, radii.size)), np.outer(slopes, radii))
    vertical = (np.outer(-slopes, radii), np.broadcast_to(radii, (size, radii.size)))
    omega1 = np.concatenate((horizontal[0], vertical[0]))
    omega2 = np.concatenate((horizontal[1], vertical[1]))
    theta = np.concatenate((np.arctan(slopes), np.arctan2(1, -slopes)))
    return PPGrid(size, slopes, radii, theta, omega1, omega2)


def _check_image(pixels, grid):
    image = as_image(pixels)
    if image.shape != (grid.size, grid.size):
        raise InvalidArgumentError(f"Image of shape {image.shape} does not match a grid of size {grid.size}.")
    return image


def _check_values(values, grid):
    values = np.asarray(values, dtype=complex)
    if values.shape != grid.shape:
        raise InvalidArgumentError(f"Values of shape {values.shape} do not match the grid shape {grid.shape}.")
    return values


def _radial_phases(grid, sign=-1):
    positions = np.arange(grid.size)
    return np.exp(sign * 1j * np.outer(grid.radii, positions))


def _sector_direct(image, slopes, grid):
    """Evaluate Σ f(a, b) exp(-i(a r_j + b s_i r_j)) for every slope and radius."""
    partial = _radial_phases(grid) @ image
    positions = np.arange(grid.size)
    values = np.empty((slopes.size, grid.radii.size), dtype=complex)
    for j, radius in enumerate(grid.radii):
        values[:, j] = np.exp(-1j * radius * np.outer(slopes, positions)) @ partial[j]
    return values


def _sector_direct_adjoint(values, slopes, grid):
    """Evaluate Σ P(i, j) exp(+i(a r_j + b s_i r_j)) for every position (a, b)."""
    positions = np.arange(grid.size)
    partial = np.empty((grid.radii.size, grid.size), dtype=complex)
    for j, radius in enumerate(grid.radii):
        partial[j] = values[:, j] @ np.exp(1j * radius * np.outer(slopes, positions))
    return _radial_phases(grid, sign=1).T @ partial


def _sector_czt(image, first_slope, slope_step, grid):
    """Evaluate the same sums as :func:`_sector_direct` with one chirp-z transform per radius."""
    partial = _radial_phases(grid) @ image
    values = np.empty((grid.size, grid.radii.size), dtype=complex)
    for j, radius in enumerate(grid.radii):
        values[:, j] = czt(partial[j], m=grid.size, w=np.exp(-1j * slope_step * radius),
                           a=np.exp(1j * first_slope * radius))
    return values


def _sector_czt_adjoint(values, first_slope, slope_step, grid):
    positions = np.arange(grid.size)
    partial = np.empty((grid.radii.size, grid.size), dtype=complex)
    for j, radius in enumerate(grid.radii):
        partial[j] = (czt(values[:, j], m=grid.size, w=np.exp(1j * slope_step * radius))
                      * np.exp(1j * first_slope * radius * positions))
    return _radial_phases(grid, sign=1).T @ partial


def ppfft(pixels, grid=None, method="direct"):
    """Compute the pseudo-polar Fourier transform of a square image.

    Args:
        pixels: the N×N image.
        grid: the grid to evaluate on, built for the image size when not provided.
        method: ``direct`` to evaluate the Fourier sums with matrix products, ``czt`` for chirp-z transforms.

    Returns:
        The complex values at the grid nodes, shape (2N, 2N + 1).
    """
    image = as_image(pixels)
    grid = grid or pp_grid(image.shape[0])
    image = _check_image(image, grid)
    step = 2 / grid.size
    if method == "direct":
        horizontal = _sector_direct(image, grid.slopes, grid)
        vertical = _sector_direct(image.T, -grid.slopes, grid)
    elif method == "czt":
        horizontal = _sector_czt(image, -1.0, step, grid)
        vertical = _sector_czt(image.T, 1.0, -step, grid)
    else:
        raise InvalidArgumentError(f"Unknown pseudo-polar method {method}, expected one of {', '.join(METHODS)}.")
    return np.concatenate((horizontal, vertical))


def ppfft_adjoint(values, grid, method="direct"):
    """Apply the adjoint of :func:`ppfft`.

    Returns:
        The complex N×N array Σ P(i, j) exp(+i(x₁ω₁ + x₂ω₂)), real up to rounding when P is conjugate-symmetric.
    """
    values = _check_values(values, grid)
    horizontal, vertical = values[:grid.size], values[grid.size:]
    step = 2 / grid.size
    if method == "direct":
        return (_sector_direct_adjoint(horizontal, grid.slopes, grid)
                + _sector_direct_adjoint(vertical, -grid.slopes, grid).T)
    if method == "czt":
        return (_sector_czt_adjoint(horizontal, -1.0, step, grid)
                + _sector_czt_adjoint(vertical, 1.0, -step, grid).T)
    raise InvalidArgumentError(f"Unknown pseudo-polar method {method}, expected one of {', '.join(METHODS)}.")


@dataclass(frozen=True, eq=False)
class InversionResult:
    """The outcome of a least-squares inversion.

    Args:
        image: the recovered image.
        iterations: the number of iterations run.
        residual: the final normal-equations residual, relative to its initial value.
        lsq_residual: the final norm of ppfft(image) - P, relative to the norm of P.
        converged: whether the tolerance was reached.
    """

    image: np.ndarray
    iterations: int
    residual: float
    lsq_residual: float
    converged: bool

    def to_dict(self):
        """Get a JSON-ready summary of the solver run."""
        return dict(iterations=self.iterations, residual=self.residual, lsq_residual=self.lsq_residual,
                    converged=self.converged)


def ppfft_inverse(values, grid, tol=1e-10, maxiter=300, method="direct"):
    """Find the real image whose pseudo-polar transform is closest to `values` in the least-squares sense.

    The normal equations are solved with conjugate gradients in their residual form (CGLS), which keeps the
    least-squares residual non-increasing from one iteration to the next.

    Args:
        values: the pseudo-polar values.
        grid: the grid of the values.
        tol: the relative tolerance on the normal-equations residual.
        maxiter: the largest number of iterations.
        method: the evaluation method of the forward and adjoint transforms.

    Returns:
        An :class:`InversionResult`. Reaching `maxiter` is reported in the result and logged, not raised.
    """
    values = _check_values(values, grid)
    if tol <= 0 or maxiter < 1:
        raise InvalidArgumentError(f"Need tol > 0 and maxiter >= 1, got {tol} and {maxiter}.")
    solution = np.zeros((grid.size, grid.size))
    residual = values.copy()
    gradient = ppfft_adjoint(residual, grid, method).real
    initial_norm = np.linalg.norm(gradient)
    values_norm = np.linalg.norm(values)
    if initial_norm == 0:
        return InversionResult(solution, 1, 0.0, 1.0 if values_norm else 0.0, True)
    direction = gradient.copy()
    gradient_norm2 = initial_norm ** 2
    converged = False
    iteration = 0
    for iteration in range(1, maxiter + 1):
        image_of_direction = ppfft(direction, grid, method)
        step = gradient_norm2 / np.vdot(image_of_direction, image_of_direction).real
        solution += step * direction
        residual -= step * image_of_direction
        gradient = ppfft_adjoint(residual, grid, method).real
        new_norm2 = np.vdot(gradient, gradient).real
        logger.debug(f"Iteration {iteration}: relative residual {np.sqrt(new_norm2) / initial_norm:.3e}")
        if np.sqrt(new_norm2) <= tol * initial_norm:
            converged = True
            gradient_norm2 = new_norm2
            break
        direction = gradient + (new_norm2 / gradient_norm2) * direction
        gradient_norm2 = new_norm2
    relative = float(np.sqrt(gradient_norm2) / initial_norm)
    lsq_residual = float(np.linalg.norm(residual) / values_norm)
    if not converged:
        logger.warning(f"Pseudo-polar inversion stopped after {iteration} iterations "
                       f"with relative residual {relative:.3e} > {tol:.1e}")
    return InversionResult(solution, iteration, relative, lsq_residual, converged)


def _side_of(values):
    values = np.asarray(values)
    side = values.shape[0] // 2
    if values.ndim != 2 or values.shape != (2 * side, 2 * side + 1) or side < 2:
        raise InvalidArgumentError(f"Shape {values.shape} is not a pseudo-polar array.")
    return side


def radial_mean_spectrum(values):
    """Average the pseudo-polar magnitudes over the angles, for every radius |r_j|, j = 0, ..., N.

    Returns:
        A raw :class:`~empirical_wavelets.boundaries.Spectrum1D` of N + 1 bins covering [0, π].
    """
    side = _side_of(values)
    magnitude = np.abs(values)
    positive = magnitude[:, side:]
    negative = magnitude[:, side::-1]
    return Spectrum1D(np.mean((positive + negative) / 2, axis=0))


def angular_mean_spectrum(values, radial_band=None):
    """Average the pseudo-polar magnitudes over the radii, for every angle.

    Args:
        values: the pseudo-polar values.
        radial_band: the (low, high) range of |r| to average over, endpoints included. The zero radius is always
            left out; all other radii are used when no band is given.

    Returns:
        A raw :class:`~empirical_wavelets.boundaries.Spectrum1D` of 2N bins, the angle axis being rescaled to
        [0, π]. :func:`profile_to_angles` maps positions on it back to angles.
    """
    side = _side_of(values)
    modulus = np.abs(np.pi * np.arange(-side, side + 1) / side)
    low, high = (0.0, np.pi) if radial_band is None else radial_band
    if not 0 <= low <= high or high > np.pi + 1e-12:
        raise InvalidArgumentError(f"Radial band {radial_band} is not within (0, π].")
    selected = (modulus > 0) & (modulus >= low - 1e-12) & (modulus <= high + 1e-12)
    if not np.any(selected):
        raise InvalidArgumentError(f"No pseudo-polar radius falls in the band {radial_band}.")
    return Spectrum1D(np.mean(np.abs(values)[:, selected], axis=1))


def profile_to_angles(grid, positions):
    """Map positions on the [0, π] axis of an angular profile to angles of the grid lines."""
    indices = np.asarray(positions, dtype=float) * (grid.theta.size - 1) / np.pi
    return np.interp(indices, np.arange(grid.theta.size), grid.theta)
