"""Tests for the 1D empirical wavelet transform."""

import numpy as np
import pytest

from empirical_wavelets.boundaries import BoundarySet
from empirical_wavelets.common import InvalidArgumentError
from empirical_wavelets.ewt1d import (
    beta,
    build_bank_1d,
    check_transitions,
    choose_gamma,
    empirical_masks,
    ewt1d_forward,
    ewt1d_inverse,
    ramp_down,
    ramp_up,
)
from empirical_wavelets.testing import random_image  # noqa

QUARTERS = BoundarySet.from_interior([np.pi / 4, np.pi / 2])


def test_beta_is_a_smooth_step():
    """Test the Meyer polynomial goes from 0 to 1 symmetrically."""
    x = np.linspace(0, 1, 11)
    assert beta(0.0) == 0
    assert beta(1.0) == 1
    np.testing.assert_allclose(beta(x) + beta(1 - x), 1, atol=1e-14)
    np.testing.assert_array_equal(beta(np.array([-1.0, 2.0])), [0, 1])


def test_beta_identity_on_a_fine_grid():
    """Test β(x) + β(1 - x) = 1 everywhere on [0, 1]."""
    x = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(beta(x) + beta(1 - x), 1, atol=1e-14)
    assert np.all(np.diff(beta(x)) >= 0)



def test_ramps_are_exact_outside_the_transition():
    """Test the ramps are exactly 0 or 1 outside the transition area, and complementary inside."""
    x = np.array([0.0, 0.89, 0.95, 1.0, 1.05, 1.11, 3.0])
    up = ramp_up(x, 1.0, 0.1)
    down = ramp_down(x, 1.0, 0.1)
    np.testing.assert_array_equal(up[[0, 1, -2, -1]], [0, 0, 1, 1])
    np.testing.assert_array_equal(down[[0, 1, -2, -1]], [1, 1, 0, 0])
    np.testing.assert_allclose(up ** 2 + down ** 2, 1, atol=1e-14)
    assert up[3] == pytest.approx(np.sqrt(2) / 2)


def test_choose_gamma():
    """Test the transition ratio follows the tightest pair of boundaries."""
    assert choose_gamma(QUARTERS) == pytest.approx(0.99 / 3)
    assert choose_gamma(BoundarySet.from_interior([1.0, 1.5])) == pytest.approx(0.198)
    assert choose_gamma(BoundarySet([0, np.pi])) == 0.99


def test_overlapping_transitions_are_rejected():
    """Test the error names the overlapping boundaries."""
    with pytest.raises(InvalidArgumentError, match="ω\\^1 and ω\\^2 overlap"):
        check_transitions(QUARTERS, 0.5)
    with pytest.raises(InvalidArgumentError, match="must be in"):
        check_transitions(QUARTERS, 1.0)


def test_last_transition_must_stay_below_pi():
    """Test the transition area of the last boundary is checked against π, like when choosing γ."""
    halves = BoundarySet.from_interior([np.pi / 2])
    check_transitions(halves, 0.99 * choose_gamma(halves))
    with pytest.raises(InvalidArgumentError, match="ω\\^1 and ω\\^2 overlap"):
        check_transitions(halves, 0.34)
    with pytest.raises(InvalidArgumentError, match="ω\\^2 and ω\\^3 overlap"):
        build_bank_1d(BoundarySet.from_interior([0.5, 2.5]), 0.2, 64)


def test_masks_form_a_tight_frame():
    """Test the squares of the masks sum to one at every frequency."""
    frequencies = np.linspace(-np.pi, np.pi, 1001)
    masks = empirical_masks(frequencies, QUARTERS, choose_gamma(QUARTERS))
    assert masks.shape == (3, 1001)
    np.testing.assert_allclose(np.sum(masks ** 2, axis=0), 1, atol=1e-14)
    assert np.all(masks >= 0)


def test_masks_are_one_inside_their_band():
    """Test each mask is exactly 1 away from the transitions of its band."""
    masks = empirical_masks([0.0, 3 * np.pi / 8, 3.0], QUARTERS, 0.1)
    np.testing.assert_array_equal(masks, np.eye(3))


def test_round_trip(random_image):
    """Test the inverse transform rebuilds the signal."""
    signal = random_image[3]
    bank = build_bank_1d(QUARTERS, choose_gamma(QUARTERS), signal.size)
    coefficients = ewt1d_forward(signal, bank)
    assert coefficients.shape == (3, signal.size)
    assert not np.iscomplexobj(coefficients)
    np.testing.assert_allclose(ewt1d_inverse(coefficients, bank), signal, atol=1e-12)


def test_round_trip_along_an_axis(random_image):
    """Test transforming every column of an image at once."""
    bank = build_bank_1d(QUARTERS, 0.2, random_image.shape[0])
    coefficients = ewt1d_forward(random_image, bank, axis=0)
    assert coefficients.shape == (3, *random_image.shape)
    np.testing.assert_allclose(ewt1d_inverse(coefficients, bank, axis=0), random_image, atol=1e-12)


@pytest.mark.parametrize("size", [127, 256])
def test_round_trip_of_odd_and_long_signals(size):
    """Test signals of odd and of power of two lengths are rebuilt."""
    signal = np.random.default_rng(size).standard_normal(size)
    bank = build_bank_1d(QUARTERS, choose_gamma(QUARTERS), size)
    coefficients = ewt1d_forward(signal, bank)
    assert not np.iscomplexobj(coefficients)
    np.testing.assert_allclose(ewt1d_inverse(coefficients, bank), signal, atol=1e-12)



def test_cosine_lands_in_its_band():
    """Test a cosine well inside a band is entirely captured by that band."""
    signal = np.cos(2 * np.pi * 48 * np.arange(256) / 256)
    bank = build_bank_1d(QUARTERS, 0.1, 256)
    coefficients = ewt1d_forward(signal, bank)
    np.testing.assert_allclose(coefficients[1], signal, atol=1e-12)
    np.testing.assert_allclose(coefficients[[0, 2]], 0, atol=1e-12)


def test_size_mismatch_is_rejected():
    """Test the bank and the signal must have the same size."""
    bank = build_bank_1d(QUARTERS, 0.1, 16)
    with pytest.raises(InvalidArgumentError, match="does not match the bank size"):
        ewt1d_forward(np.zeros(32), bank)
    with pytest.raises(InvalidArgumentError, match="Expected 3 subbands"):
        ewt1d_inverse(np.zeros((2, 16)), bank)
