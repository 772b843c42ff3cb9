"""Reading and writing images and coefficient matrices.

Paths can be anything :class:`upath.UPath` understands, so the files may live on any filesystem supported by
fsspec.

Two formats are handled:

- binary PGM images (``P5``), 8- or 16-bit. Pixel values are read as they are, without rescaling.
- the matrix containers used for subbands: the magic bytes ``EWTM``, the little-endian u32 number of rows and of
  columns, then the row-major little-endian f64 values. Complex matrices use the magic ``EWTC`` and interleaved
  (real, imaginary) pairs. A 1×1 real matrix takes 20 bytes.
"""

import json
import logging
from dataclasses import dataclass

import numpy as np
from upath import UPath

from empirical_wavelets.arrays import as_image
from empirical_wavelets.common import FormatError, InvalidArgumentError

logger = logging.getLogger(__name__)

REAL_MAGIC = b"EWTM"
COMPLEX_MAGIC = b"EWTC"
HEADER = np.dtype([("magic", "S4"), ("rows", "<u4"), ("cols", "<u4")])
MAX_DIMENSION = np.iinfo(np.uint32).max

_PGM_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True)
class PGMHeader:
    """The header of a PGM file, as found in the file.

    Args:
        cols: the width of the image.
        rows: the height of the image.
        maxval: the declared maximum gray value.
        raw: the header bytes up to the first pixel, comments and whitespace included.
    """

    cols: int
    rows: int
    maxval: int
    raw: bytes

    @classmethod
    def canonical(cls, rows, cols, maxval):
        """Make the canonical header: the magic, the dimensions and the maxval on three lines."""
        return cls(cols, rows, maxval, f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii"))


def load_image(path, header=False):
    """Load a binary PGM image.

    Args:
        path: the path to the file.
        header: whether to return the :class:`PGMHeader` of the file too.

    Returns:
        The image as a float array of shape (rows, cols), and its header when asked for. Saving the image with
        that header gives back the bytes of the file.

    Raises:
        FormatError: if the file is not a binary PGM or is truncated.
    """
    path = UPath(path)
    data = path.read_bytes()
    if data[:2] != b"P5":
        raise FormatError("Bad magic, expected binary PGM 'P5'", offset=0, path=path)
    offset = 2
    fields = []
    while len(fields) < 3:
        offset = _skip_whitespace_and_comments(data, offset)
        start = offset
        while offset < len(data) and data[offset:offset + 1].isdigit():
            offset += 1
        if start == offset:
            raise FormatError("Malformed PGM header", offset=offset, path=path)
        fields.append(int(data[start:offset]))
    if offset >= len(data) or data[offset] not in _PGM_WHITESPACE:
        raise FormatError("Missing whitespace after PGM maxval", offset=offset, path=path)
    offset += 1
    cols, rows, maxval = fields
    if not 0 < maxval < 65536 or rows == 0 or cols == 0:
        raise FormatError(f"Invalid PGM dimensions or maxval {cols}x{rows}/{maxval}", offset=offset, path=path)
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    expected = rows * cols * dtype.itemsize
    if len(data) - offset < expected:
        raise FormatError(f"Truncated PGM payload, expected {expected} bytes", offset=len(data), path=path)
    pixels = np.frombuffer(data, dtype=dtype, count=rows * cols, offset=offset).reshape(rows, cols)
    logger.debug(f"Loaded {cols}x{rows} image with maxval {maxval} from {str(path)}")
    if header:
        return pixels.astype(float), PGMHeader(cols, rows, maxval, data[:offset])
    return pixels.astype(float)


def _skip_whitespace_and_comments(data, offset):
    while offset < len(data):
        if data[offset] in _PGM_WHITESPACE:
            offset += 1
        elif data[offset:offset + 1] == b"#":
            while offset < len(data) and data[offset:offset + 1] not in (b"\n", b"\r"):
                offset += 1
        else:
            break
    return offset


def save_image(pixels, path, maxval=None, header=None):
    """Save an image as a binary PGM file.

    Args:
        pixels: the image, with integer values in [0, maxval].
        path: the path to the file.
        maxval: the maximum gray value to declare. Defaults to the maxval of `header`, else to 255 when all
            pixels fit in 8 bits and 65535 otherwise.
        header: a :class:`PGMHeader` given by :func:`load_image`, written back unchanged. The canonical header
            is written when none is given.
    """
    image = as_image(pixels)
    if not np.array_equal(image, np.round(image)):
        raise InvalidArgumentError("PGM pixels must be integers, rescale or round the image first.")
    if header is not None:
        if (header.rows, header.cols) != image.shape:
            raise InvalidArgumentError(f"Header for {header.cols}x{header.rows} does not fit an image of shape "
                                       f"{image.shape}.")
        if maxval is not None and maxval != header.maxval:
            raise InvalidArgumentError(f"maxval {maxval} contradicts the header maxval {header.maxval}.")
        maxval = header.maxval
    if maxval is None:
        maxval = 255 if image.max() <= 255 else 65535
    if not 0 < maxval < 65536:
        raise InvalidArgumentError(f"PGM maxval must be in [1, 65535], got {maxval}.")
    if image.min() < 0 or image.max() > maxval:
        raise InvalidArgumentError(f"Pixel values must lie in [0, {maxval}].")
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    header = header or PGMHeader.canonical(*image.shape, maxval)
    UPath(path).write_bytes(header.raw + image.astype(dtype).tobytes())


def save_preview(plane, path):
    """Save a plane as an 8-bit PGM, affinely rescaled to [0, 255].

    A constant plane is written as a mid-gray image.
    """
    plane = np.asarray(plane, dtype=float)
    if plane.ndim == 1:
        plane = plane[np.newaxis, :]
    low, high = float(plane.min()), float(plane.max())
    if high > low:
        scaled = np.round((plane - low) * (255 / (high - low)))
    else:
        scaled = np.full(plane.shape, 128.0)
    save_image(scaled, path, maxval=255)


def save_matrix(matrix, path):
    """Save a real or complex matrix to a container file.

    Args:
        matrix: a 2D array (1D arrays are saved as a single row).
        path: the path to the file.

    Raises:
        InvalidArgumentError: for non-finite values.
        FormatError: if a dimension does not fit in an unsigned 32 bit integer.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim == 1:
        matrix = matrix[np.newaxis, :]
    if matrix.ndim != 2:
        raise InvalidArgumentError(f"Only matrices can be saved, got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise InvalidArgumentError("Matrix contains non-finite values.")
    rows, cols = matrix.shape
    if rows > MAX_DIMENSION or cols > MAX_DIMENSION:
        raise FormatError(f"Dimensions {rows}x{cols} overflow the container header", offset=4, path=path)
    if np.iscomplexobj(matrix):
        magic = COMPLEX_MAGIC
        payload = np.ascontiguousarray(matrix, dtype="<c16").tobytes()
    else:
        magic = REAL_MAGIC
        payload = np.ascontiguousarray(matrix, dtype="<f8").tobytes()
    header = np.array([(magic, rows, cols)], dtype=HEADER).tobytes()
    UPath(path).write_bytes(header + payload)


def load_matrix(path):
    """Load a matrix from a container file.

    Returns:
        A float array for ``EWTM`` files, a complex array for ``EWTC`` files.

    Raises:
        FormatError: for an unknown magic, a truncated header or payload, or trailing bytes.
    """
    path = UPath(path)
    data = path.read_bytes()
    if len(data) < HEADER.itemsize:
        raise FormatError("Truncated container header", offset=len(data), path=path)
    header = np.frombuffer(data, dtype=HEADER, count=1)[0]
    magic = bytes(header["magic"])
    if magic == REAL_MAGIC:
        dtype = np.dtype("<f8")
    elif magic == COMPLEX_MAGIC:
        dtype = np.dtype("<c16")
    else:
        raise FormatError(f"Bad container magic {magic!r}", offset=0, path=path)
    rows, cols = int(header["rows"]), int(header["cols"])
    expected = rows * cols * dtype.itemsize
    available = len(data) - HEADER.itemsize
    if available < expected:
        raise FormatError(f"Declared {rows}x{cols} matrix overflows the {available} payload bytes",
                          offset=len(data), path=path)
    if available > expected:
        raise FormatError("Trailing bytes after the matrix payload", offset=HEADER.itemsize + expected, path=path)
    values = np.frombuffer(data, dtype=dtype, count=rows * cols, offset=HEADER.itemsize)
    return values.reshape(rows, cols).astype(dtype.newbyteorder("="))


def save_pparray(values, path):
    """Save pseudo-polar values to a complex container with a JSON sidecar next to it.

    The sidecar, written to the same path with a ``.json`` suffix, holds ``N``, the sector layout and the
    number of radii.
    """
    values = np.asarray(values, dtype=complex)
    angles, radii = values.shape
    side = angles // 2
    if angles != 2 * side or radii != angles + 1:
        raise InvalidArgumentError(f"Shape {values.shape} is not a pseudo-polar array.")
    path = UPath(path)
    save_matrix(values, path)
    sidecar = dict(N=side, sector_layout="BH+BV", radii=radii)
    path.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True))


def load_pparray(path):
    """Load pseudo-polar values saved with :func:`save_pparray`.

    Returns:
        The complex array and the value of ``N`` from the sidecar.
    """
    path = UPath(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    values = load_matrix(path)
    side = sidecar["N"]
    if values.shape != (2 * side, 2 * side + 1) or sidecar.get("sector_layout") != "BH+BV":
        raise FormatError(f"Sidecar does not match the container of shape {values.shape}", path=path)
    return values.astype(complex), side
