"""Writing and reading the on-disk artifacts of a run.

A decomposition is written to a directory holding one matrix container per subband, named after the file pattern
of its transform (e.g. ``sub_C2_{n:d}_{m:d}.ewtm``), an 8-bit preview of every subband (``preview_*.pgm``) and a
``metadata.json`` file. The metadata holds everything needed to rebuild the bank without detecting it again, and
the run configuration. For example::

    {
      "format": "ewt-subbands/1",
      "transform": "lp",
      "shape": [64, 64],
      "plane_shape": [64, 64],
      "labels": [[0], [1], [2]],
      "approximation": [true, false, false],
      "files": ["sub_LP_0.ewtm", "sub_LP_1.ewtm", "sub_LP_2.ewtm"],
      "layout": {"transform": "lp", "boundaries": {...}, "gamma": 0.33, "detect": {...}},
      "frame_deviation": 2.2e-16,
      "run_config": {...}
    }
"""

import json
import logging

import numpy as np
from trollsift import compose, globify, parse
from upath import UPath

from empirical_wavelets.common import FormatError
from empirical_wavelets.fileformats import load_matrix, save_matrix, save_preview
from empirical_wavelets.filterbank import SubbandSet

logger = logging.getLogger(__name__)

FORMAT = "ewt-subbands/1"
METADATA_FILENAME = "metadata.json"
REQUIRED_KEYS = ("transform", "shape", "plane_shape", "labels", "approximation", "layout")


def subband_filename(plugin, kind, label):
    """Compose the filename of a subband."""
    return compose(plugin.FILE_PATTERNS[kind], dict(zip(plugin.LABEL_FIELDS, label, strict=True)))


def write_json(content, path):
    """Write a JSON file, creating its directory when needed."""
    path = UPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(content, indent=2, sort_keys=True, allow_nan=False))
    logger.info(f"Wrote {path}")
    return path


def read_json(path):
    """Read a JSON file."""
    return json.loads(UPath(path).read_text())


def write_subbands(subbands, plugin, outdir, run_config=None, **extra):
    """Write the subbands, their previews and the metadata to a directory.

    Args:
        subbands: the :class:`~empirical_wavelets.filterbank.SubbandSet` to write.
        plugin: the transform module that produced the subbands.
        outdir: the directory to write to, created when missing.
        run_config: the run configuration, recorded in the metadata.
        extra: other items to add to the metadata, e.g. ``frame_deviation``.

    Returns:
        The path of the metadata file.
    """
    outdir = UPath(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for label, plane in zip(subbands.labels, subbands.planes, strict=True):
        filename = subband_filename(plugin, subbands.kind, label)
        save_matrix(plane, outdir / filename)
        save_preview(plane, outdir / f"preview_{UPath(filename).stem}.pgm")
        files.append(filename)
    logger.info(f"Wrote {len(files)} subbands to {outdir}")
    metadata = dict(format=FORMAT, transform=subbands.kind, shape=list(subbands.shape),
                    plane_shape=list(subbands.planes.shape[1:]), labels=[list(label) for label in subbands.labels],
                    approximation=list(subbands.approximation), files=files, layout=subbands.layout,
                    run_config=None if run_config is None else run_config.to_dict(), **extra)
    return write_json(metadata, outdir / METADATA_FILENAME)


def read_metadata(directory):
    """Read and check the metadata of a subband directory.

    Raises:
        FileNotFoundError: if the directory has no metadata file.
        FormatError: if the metadata is not of a known format.
    """
    path = UPath(directory) / METADATA_FILENAME
    if not path.exists():
        raise FileNotFoundError(f"Missing metadata file {path}")
    try:
        metadata = read_json(path)
    except json.JSONDecodeError as err:
        raise FormatError(f"Invalid JSON: {err.msg}", offset=err.pos, path=path) from err
    if not isinstance(metadata, dict):
        raise FormatError(f"Metadata must be a JSON object, got {type(metadata).__name__}", path=path)
    if metadata.get("format") != FORMAT:
        raise FormatError(f"Unknown subband format {metadata.get('format')!r}", path=path)
    missing = [key for key in REQUIRED_KEYS if key not in metadata]
    if missing:
        raise FormatError(f"Metadata misses {', '.join(missing)}", path=path)
    return metadata


def _labels_on_disk(directory, pattern, fields):
    labels = set()
    for path in UPath(directory).glob(globify(pattern)):
        try:
            parsed = parse(pattern, path.name)
        except ValueError:
            continue
        labels.add(tuple(parsed[name] for name in fields))
    return labels


def read_subbands(directory, plugin, metadata=None):
    """Read the subbands written by :func:`write_subbands` back.

    The bank is rebuilt from the layout of the metadata.

    Raises:
        FileNotFoundError: naming the first missing subband file.
    """
    directory = UPath(directory)
    metadata = metadata or read_metadata(directory)
    kind = metadata["transform"]
    labels = [tuple(label) for label in metadata["labels"]]
    on_disk = _labels_on_disk(directory, plugin.FILE_PATTERNS[kind], plugin.LABEL_FIELDS)
    for label in labels:
        if label not in on_disk:
            raise FileNotFoundError(f"Missing subband file {directory / subband_filename(plugin, kind, label)}")
    unexpected = on_disk - set(labels)
    if unexpected:
        logger.warning(f"Ignoring {len(unexpected)} subband files not listed in the metadata")
    if len(labels) != len(metadata["approximation"]):
        raise FormatError("The metadata must list one approximation flag per label",
                          path=directory / METADATA_FILENAME)
    plane_shape = tuple(metadata["plane_shape"])
    planes = []
    for label in labels:
        path = directory / subband_filename(plugin, kind, label)
        matrix = load_matrix(path)
        if matrix.size != int(np.prod(plane_shape)):
            raise FormatError(f"Subband of shape {matrix.shape} does not match {plane_shape}", path=path)
        planes.append(matrix.reshape(plane_shape))
    shape = tuple(metadata["shape"])
    bank = plugin.restore_bank(metadata["layout"], shape)
    return SubbandSet(kind, tuple(labels), np.stack(planes), tuple(metadata["approximation"]), bank,
                      metadata["layout"], shape)


def write_profile(spectrum, path):
    """Write a spectrum as a CSV file with the columns ``bin``, ``omega`` and ``value``."""
    lines = ["bin,omega,value"]
    rows = zip(spectrum.omega.tolist(), spectrum.values.tolist(), strict=True)
    lines.extend(f"{index},{omega!r},{value!r}" for index, (omega, value) in enumerate(rows))
    path = UPath(path)
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote {path}")
    return path
