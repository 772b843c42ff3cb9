"""Tests for the array types and the Fourier transform contract."""

import numpy as np
import pytest

from empirical_wavelets.arrays import (
    CENTERED,
    ComplexPlane,
    as_image,
    as_signal,
    bin_frequencies,
    central_square,
    dft1,
    dft2,
    frequency_modulus,
    idft1,
    idft2,
)
from empirical_wavelets.common import InvalidArgumentError
from empirical_wavelets.testing import grid_cosine


def test_dft1_of_constant_is_dc_only():
    """Test the spectrum of a constant sequence."""
    spectrum = dft1(np.full(8, 2.5))
    np.testing.assert_allclose(spectrum, [20, 0, 0, 0, 0, 0, 0, 0], atol=1e-12)


def test_dft1_of_impulse_is_flat():
    """Test the spectrum of a unit impulse."""
    np.testing.assert_allclose(dft1([1, 0, 0, 0, 0]), np.ones(5), atol=1e-15)


def test_dft1_matches_direct_sum_and_round_trips():
    """Test the 1D transform against the direct sum, and its inverse."""
    signal = np.random.default_rng(1).standard_normal(16)
    k = np.arange(16)
    direct = np.exp(-2j * np.pi * np.outer(k, k) / 16) @ signal
    np.testing.assert_allclose(dft1(signal), direct, atol=1e-12)
    assert np.max(np.abs(idft1(dft1(signal)) - signal)) < 1e-12


def test_empty_or_bad_signals_are_rejected():
    """Test the validation of signals."""
    with pytest.raises(InvalidArgumentError, match="at least 2 samples"):
        as_signal([])
    with pytest.raises(InvalidArgumentError, match="non-finite"):
        as_signal([1.0, np.nan])
    with pytest.raises(InvalidArgumentError, match="one-dimensional"):
        as_signal(np.zeros((2, 2)))


def test_images_with_non_finite_pixels_are_rejected():
    """Test the validation of images."""
    image = np.zeros((4, 4))
    image[1, 2] = np.inf
    with pytest.raises(InvalidArgumentError, match="non-finite"):
        as_image(image)
    with pytest.raises(InvalidArgumentError, match="two-dimensional"):
        as_image(np.zeros(16))


def test_dft2_of_constant_is_dc_only():
    """Test the 2D spectrum of a constant image."""
    plane = dft2(np.ones((4, 6)))
    assert plane.hermitian
    expected = np.zeros((4, 6))
    expected[0, 0] = 24
    np.testing.assert_allclose(plane.values, expected, atol=1e-12)


def test_dft2_of_separable_cosine_has_four_peaks():
    """Test the spectrum of a product of cosines."""
    x1, x2 = np.mgrid[0:8, 0:12]
    image = np.cos(2 * np.pi * 2 * x1 / 8) * np.cos(2 * np.pi * 3 * x2 / 12)
    magnitude = np.abs(dft2(image).values)
    peaks = {tuple(index) for index in np.argwhere(magnitude > 1e-9)}
    assert peaks == {(2, 3), (2, 9), (6, 3), (6, 9)}
    np.testing.assert_allclose(magnitude[2, 3], 8 * 12 / 4)


def test_dft2_round_trip():
    """Test the inverse 2D transform gives back a real image."""
    image = np.random.default_rng(2).standard_normal((8, 8))
    rebuilt = idft2(dft2(image))
    assert not np.iscomplexobj(rebuilt)
    assert np.max(np.abs(rebuilt - image)) < 1e-12


def test_idft2_of_plain_array_is_complex():
    """Test a plane not flagged conjugate-symmetric gives a complex image."""
    assert np.iscomplexobj(idft2(np.ones((4, 4), dtype=complex)))


def test_centered_view_puts_dc_in_the_middle():
    """Test switching between the frequency layouts."""
    plane = dft2(np.ones((4, 4)))
    centered = plane.centered()
    assert centered.layout == CENTERED
    assert np.argmax(np.abs(centered.values)) == np.ravel_multi_index((2, 2), (4, 4))
    np.testing.assert_array_equal(centered.at_origin().values, plane.values)
    np.testing.assert_allclose(idft2(centered), np.ones((4, 4)), atol=1e-15)


def test_unknown_layout_is_rejected():
    """Test the layout tag is checked."""
    with pytest.raises(InvalidArgumentError, match="Unknown frequency layout"):
        ComplexPlane(np.zeros((2, 2)), layout="sideways")


def test_bin_frequencies_are_folded():
    """Test bins k and K - k get opposite frequencies, and the Nyquist bin is π."""
    frequencies = bin_frequencies(8)
    assert frequencies[4] == np.pi
    np.testing.assert_allclose(frequencies[1:4], -frequencies[7:4:-1])
    odd = bin_frequencies(7)
    np.testing.assert_allclose(odd[1:4], -odd[6:3:-1])
    assert np.max(np.abs(odd)) < np.pi


def test_frequency_modulus_reaches_the_corners():
    """Test |ω| reaches π√2 at the corner bin of an even grid."""
    modulus = frequency_modulus(8, 8)
    assert modulus[0, 0] == 0
    np.testing.assert_allclose(modulus[4, 4], np.pi * np.sqrt(2))


def test_central_square():
    """Test cropping the largest centered square."""
    image = grid_cosine((48, 64), 2, 3)
    square = central_square(image)
    assert square.shape == (48, 48)
    np.testing.assert_array_equal(square, image[:, 8:56])
    assert central_square(np.zeros((7, 9))).shape == (6, 6)
    assert central_square(np.zeros((7, 9)), even=False).shape == (7, 7)
