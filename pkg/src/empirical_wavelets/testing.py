"""Pytest fixtures and synthetic images for testing code that uses empirical wavelets.

Example:
    Fixtures are made available to a test suite by importing them in a ``conftest.py``::

        from empirical_wavelets.testing import random_image, toy_image_file  # noqa

    and then used as usual::

        def test_decompose(toy_image_file, tmp_path):
            assert cli(["decompose", "--input", str(toy_image_file), "--outdir", str(tmp_path)]) == 0
"""

import numpy as np
import pytest

from empirical_wavelets.fileformats import save_image


def toy_image(size=128):
    """Make a piecewise smooth toy image with values in [0, 255].

    The image holds a uniform background, a smooth bright blob, a low-contrast square with soft edges and two
    patches of oriented texture.
    """
    x1, x2 = np.mgrid[0:size, 0:size] / size
    image = np.full((size, size), 100.0)
    image += 60 * np.exp(-((x1 - 0.3) ** 2 + (x2 - 0.35) ** 2) / (2 * 0.08 ** 2))
    edge = 1.5 / size
    inside = (1 / (1 + np.exp(-(x1 - 0.55) / edge)) - 1 / (1 + np.exp(-(x1 - 0.85) / edge)))
    inside *= (1 / (1 + np.exp(-(x2 - 0.1) / edge)) - 1 / (1 + np.exp(-(x2 - 0.4) / edge)))
    image += 15 * inside
    image += _texture_patch(x1, x2, center=(0.7, 0.7), frequency=(6, 10), size=size)
    image += _texture_patch(x1, x2, center=(0.25, 0.75), frequency=(12, -4), size=size)
    return image


def _texture_patch(x1, x2, center, frequency, size, amplitude=6.0, width=0.07):
    envelope = np.exp(-((x1 - center[0]) ** 2 + (x2 - center[1]) ** 2) / (2 * width ** 2))
    return amplitude * envelope * np.cos(2 * np.pi * (frequency[0] * x1 + frequency[1] * x2) * size / 128)


def grid_cosine(shape, k1, k2, amplitude=1.0):
    """Make the cosine of DFT frequency (2πk1/rows, 2πk2/cols), whose spectrum is two exact peaks."""
    rows, cols = shape
    x1, x2 = np.mgrid[0:rows, 0:cols]
    return amplitude * np.cos(2 * np.pi * (k1 * x1 / rows + k2 * x2 / cols))


def oriented_cosine(size, frequency, angle, amplitude=1.0):
    """Make a straight ridge texture cos(k(x₁cos θ + x₂sin θ)), x₁ running along the rows."""
    x1, x2 = np.mgrid[0:size, 0:size]
    return amplitude * np.cos(frequency * (x1 * np.cos(angle) + x2 * np.sin(angle)))


def radial_cosine(size, frequency, amplitude=1.0):
    """Make concentric rings cos(k|x - c|) around the center of the image."""
    x1, x2 = np.mgrid[0:size, 0:size] - size / 2
    return amplitude * np.cos(frequency * np.hypot(x1, x2))


def windowed_waves(size, frequencies, width=None):
    """Make horizontal and vertical plane waves under a centered Gaussian window.

    The window keeps the spectrum free of leakage, so every frequency shows up as a smooth bump.
    """
    return windowed_oriented_waves(size, [(frequency, angle) for frequency in frequencies
                                          for angle in (0, np.pi / 2)], width)


def windowed_oriented_waves(size, waves, width=None):
    """Make plane waves cos(k(x₁cos θ + x₂sin θ)) under a centered Gaussian window, one per (k, θ) pair."""
    width = width or size / 8
    x1, x2 = np.mgrid[0:size, 0:size] - (size - 1) / 2
    window = np.exp(-(x1 ** 2 + x2 ** 2) / (2 * width ** 2))
    return window * sum(np.cos(frequency * (x1 * np.cos(angle) + x2 * np.sin(angle))) for frequency, angle in waves)


@pytest.fixture
def random_image():
    """Get a reproducible random 64×64 image."""
    return np.random.default_rng(42).standard_normal((64, 64))


@pytest.fixture
def toy_image_file(tmp_path):
    """Write a 64×64 toy image to a PGM file and get its path."""
    path = tmp_path / "toy.pgm"
    save_image(np.round(toy_image(64)), path)
    return path
