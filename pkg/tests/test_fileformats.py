"""Tests for reading and writing images and matrices."""

import json

import numpy as np
import pytest

from empirical_wavelets.common import FormatError, InvalidArgumentError
from empirical_wavelets.fileformats import (
    PGMHeader,
    load_image,
    load_matrix,
    load_pparray,
    save_image,
    save_matrix,
    save_pparray,
    save_preview,
)


def test_load_8bit_pgm(tmp_path):
    """Test loading a tiny 8-bit image."""
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    np.testing.assert_array_equal(load_image(path), [[0, 255], [128, 64]])


def test_load_16bit_pgm_with_comments(tmp_path):
    """Test loading a 16-bit big-endian image whose header holds a comment."""
    path = tmp_path / "deep.pgm"
    payload = np.array([1000, 2], dtype=">u2").tobytes()
    path.write_bytes(b"P5\n# a comment\n1 2\n65535\n" + payload)
    np.testing.assert_array_equal(load_image(path), [[1000], [2]])


def test_load_bad_magic(tmp_path):
    """Test a file with a bad magic is rejected with the offset."""
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
    with pytest.raises(FormatError, match="at byte 0") as err:
        load_image(path)
    assert err.value.offset == 0


def test_load_truncated_pgm(tmp_path):
    """Test a truncated image is rejected."""
    path = tmp_path / "short.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))
    with pytest.raises(FormatError, match="Truncated PGM payload"):
        load_image(path)


def test_save_image_writes_canonical_header(tmp_path):
    """Test the header written for an 8-bit image."""
    path = tmp_path / "out.pgm"
    image = np.array([[0, 1, 2], [3, 4, 255]])
    save_image(image, path)
    assert path.read_bytes() == b"P5\n3 2\n255\n" + bytes([0, 1, 2, 3, 4, 255])
    np.testing.assert_array_equal(load_image(path), image)


def test_save_image_switches_to_16bit(tmp_path):
    """Test images with values above 255 are written on 16 bits."""
    path = tmp_path / "out.pgm"
    save_image(np.array([[300, 0], [1, 65535]]), path)
    assert path.read_bytes().startswith(b"P5\n2 2\n65535\n")
    np.testing.assert_array_equal(load_image(path), [[300, 0], [1, 65535]])


@pytest.mark.parametrize("content", [
    b"P5\n2 2\n100\n" + bytes([0, 100, 50, 25]),
    b"P5 2 2 255\n" + bytes([0, 255, 128, 64]),
    b"P5\n# made by hand\n2  2\r\n200\t" + bytes([7, 200, 0, 13]),
    b"P5\n1 2\n1000\n" + np.array([1000, 2], dtype=">u2").tobytes(),
])
def test_image_files_come_back_byte_identical(tmp_path, content):
    """Test saving a loaded image with its header gives the same bytes, whatever the maxval and layout."""
    path = tmp_path / "in.pgm"
    path.write_bytes(content)
    image, header = load_image(path, header=True)
    save_image(image, tmp_path / "out.pgm", header=header)
    assert (tmp_path / "out.pgm").read_bytes() == content


def test_header_keeps_the_maxval(tmp_path):
    """Test the header of a loaded image records what the file declared."""
    path = tmp_path / "in.pgm"
    path.write_bytes(b"P5\n2 2\n100\n" + bytes([0, 100, 50, 25]))
    image, header = load_image(path, header=True)
    assert (header.cols, header.rows, header.maxval) == (2, 2, 100)
    np.testing.assert_array_equal(image, [[0, 100], [50, 25]])


def test_header_must_fit_the_image(tmp_path):
    """Test a header is not written with a mismatching image or maxval."""
    header = PGMHeader.canonical(2, 2, 100)
    with pytest.raises(InvalidArgumentError, match="does not fit"):
        save_image(np.zeros((2, 3)), tmp_path / "out.pgm", header=header)
    with pytest.raises(InvalidArgumentError, match="contradicts"):
        save_image(np.zeros((2, 2)), tmp_path / "out.pgm", maxval=255, header=header)
    with pytest.raises(InvalidArgumentError, match=r"\[0, 100\]"):
        save_image(np.full((2, 2), 101), tmp_path / "out.pgm", header=header)


def test_save_image_rejects_fractional_pixels(tmp_path):
    """Test non-integer pixels are not silently rounded."""
    with pytest.raises(InvalidArgumentError, match="integers"):
        save_image(np.full((2, 2), 0.5), tmp_path / "out.pgm")


def test_save_one_by_one_matrix(tmp_path):
    """Test the smallest container."""
    path = tmp_path / "one.ewtm"
    save_matrix(np.array([[3.5]]), path)
    assert len(path.read_bytes()) == 20
    np.testing.assert_array_equal(load_matrix(path), [[3.5]])


def test_matrix_header_declares_rows_and_cols(tmp_path):
    """Test the header and row-major payload of a 3×2 matrix."""
    path = tmp_path / "m.ewtm"
    matrix = np.arange(6.0).reshape(3, 2)
    save_matrix(matrix, path)
    data = path.read_bytes()
    assert data[:4] == b"EWTM"
    assert int.from_bytes(data[4:8], "little") == 3
    assert int.from_bytes(data[8:12], "little") == 2
    np.testing.assert_array_equal(np.frombuffer(data[12:], dtype="<f8"), np.arange(6.0))


def test_matrix_round_trip_is_bitwise(tmp_path):
    """Test real and complex matrices come back bit for bit."""
    rng = np.random.default_rng(3)
    real = rng.standard_normal((64, 64))
    save_matrix(real, tmp_path / "real.ewtm")
    assert np.array_equal(load_matrix(tmp_path / "real.ewtm"), real)
    complex_matrix = real[:4, :5] + 1j * real[4:8, :5]
    save_matrix(complex_matrix, tmp_path / "complex.ewtm")
    loaded = load_matrix(tmp_path / "complex.ewtm")
    assert np.iscomplexobj(loaded)
    assert np.array_equal(loaded, complex_matrix)


def test_matrix_with_tampered_magic(tmp_path):
    """Test a container with a bad magic is rejected."""
    path = tmp_path / "m.ewtm"
    save_matrix(np.ones((2, 2)), path)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(FormatError, match="Bad container magic"):
        load_matrix(path)


def test_matrix_truncated_or_padded(tmp_path):
    """Test containers whose payload size does not match the header."""
    path = tmp_path / "m.ewtm"
    save_matrix(np.ones((2, 2)), path)
    data = path.read_bytes()
    path.write_bytes(data[:-1])
    with pytest.raises(FormatError, match="overflows"):
        load_matrix(path)
    path.write_bytes(data + b"\0")
    with pytest.raises(FormatError, match="Trailing bytes"):
        load_matrix(path)
    path.write_bytes(data[:6])
    with pytest.raises(FormatError, match="Truncated container header"):
        load_matrix(path)


def test_non_finite_matrix_is_rejected(tmp_path):
    """Test non-finite values cannot be saved."""
    with pytest.raises(InvalidArgumentError, match="non-finite"):
        save_matrix(np.array([[np.nan]]), tmp_path / "m.ewtm")


def test_preview_is_rescaled(tmp_path):
    """Test previews span the full 8-bit range."""
    path = tmp_path / "preview.pgm"
    save_preview(np.array([[-1.0, 0.0], [1.0, 3.0]]), path)
    preview = load_image(path)
    assert preview.min() == 0
    assert preview.max() == 255
    np.testing.assert_array_equal(preview, [[0, 64], [128, 255]])


def test_preview_of_constant_plane_is_gray(tmp_path):
    """Test a constant plane is written mid-gray."""
    path = tmp_path / "preview.pgm"
    save_preview(np.full((3, 3), 7.0), path)
    np.testing.assert_array_equal(load_image(path), np.full((3, 3), 128))


def test_pparray_round_trip(tmp_path):
    """Test saving pseudo-polar values with their sidecar."""
    values = np.random.default_rng(4).standard_normal((8, 9)) + 1j
    path = tmp_path / "pp.ewtm"
    save_pparray(values, path)
    sidecar = json.loads((tmp_path / "pp.json").read_text())
    assert sidecar == {"N": 4, "radii": 9, "sector_layout": "BH+BV"}
    loaded, side = load_pparray(path)
    assert side == 4
    assert np.array_equal(loaded, values)


def test_pparray_with_wrong_shape_is_rejected(tmp_path):
    """Test only pseudo-polar shapes are saved as such."""
    with pytest.raises(InvalidArgumentError, match="not a pseudo-polar array"):
        save_pparray(np.zeros((8, 8)), tmp_path / "pp.ewtm")
