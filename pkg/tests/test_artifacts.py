"""Tests for writing and reading the artifacts of a run."""

import json
import logging

import numpy as np
import pytest

from empirical_wavelets import artifacts, curvelet, littlewood_paley
from empirical_wavelets.boundaries import BoundarySet, Spectrum1D
from empirical_wavelets.common import FormatError
from empirical_wavelets.config import RunConfig
from empirical_wavelets.fileformats import load_image, save_matrix
from empirical_wavelets.testing import random_image  # noqa


@pytest.fixture
def lp_subbands(random_image):
    """Get the Littlewood-Paley subbands of a random image, for a fixed bank."""
    boundary_set = BoundarySet.from_interior([0.6, 1.5])
    bank = littlewood_paley.lp_bank(boundary_set, 0.3, *random_image.shape)
    layout = dict(transform="lp", boundaries=boundary_set.to_dict(), gamma=0.3)
    return littlewood_paley.analyze(random_image, bank, layout)


def test_subband_filename():
    """Test the filenames follow the pattern of the transform."""
    assert artifacts.subband_filename(curvelet, "curvelet2", (1, 3)) == "sub_C2_1_3.ewtm"
    assert artifacts.subband_filename(littlewood_paley, "lp", (2,)) == "sub_LP_2.ewtm"


def test_write_subbands(lp_subbands, tmp_path):
    """Test the subbands, their previews and the metadata are written."""
    outdir = tmp_path / "subbands"
    metadata_path = artifacts.write_subbands(lp_subbands, littlewood_paley, outdir, RunConfig(), frame_deviation=0.0)
    assert str(metadata_path) == str(outdir / "metadata.json")
    for n in range(3):
        assert (outdir / f"sub_LP_{n}.ewtm").exists()
        assert load_image(outdir / f"preview_sub_LP_{n}.pgm").shape == (64, 64)
    metadata = json.loads(metadata_path.read_text())
    assert metadata["format"] == "ewt-subbands/1"
    assert metadata["transform"] == "lp"
    assert metadata["shape"] == [64, 64]
    assert metadata["labels"] == [[0], [1], [2]]
    assert metadata["approximation"] == [True, False, False]
    assert metadata["files"] == ["sub_LP_0.ewtm", "sub_LP_1.ewtm", "sub_LP_2.ewtm"]
    assert metadata["frame_deviation"] == 0.0
    assert metadata["run_config"]["transform"] == "lp"


def test_read_subbands_back(lp_subbands, tmp_path):
    """Test reading the subbands back gives the same planes and bank."""
    artifacts.write_subbands(lp_subbands, littlewood_paley, tmp_path)
    subbands = artifacts.read_subbands(tmp_path, littlewood_paley)
    assert subbands.labels == lp_subbands.labels
    assert subbands.approximation == lp_subbands.approximation
    assert subbands.shape == (64, 64)
    np.testing.assert_array_equal(subbands.planes, lp_subbands.planes)
    np.testing.assert_array_equal(subbands.bank.masks, lp_subbands.bank.masks)


def test_missing_subband_file(lp_subbands, tmp_path):
    """Test a missing subband file is named in the error."""
    artifacts.write_subbands(lp_subbands, littlewood_paley, tmp_path)
    (tmp_path / "sub_LP_1.ewtm").unlink()
    with pytest.raises(FileNotFoundError, match="sub_LP_1.ewtm"):
        artifacts.read_subbands(tmp_path, littlewood_paley)


def test_unexpected_subband_files_are_ignored(lp_subbands, tmp_path, caplog):
    """Test subband files not listed in the metadata are ignored, with a warning."""
    artifacts.write_subbands(lp_subbands, littlewood_paley, tmp_path)
    save_matrix(np.zeros((64, 64)), tmp_path / "sub_LP_7.ewtm")
    with caplog.at_level(logging.WARNING):
        subbands = artifacts.read_subbands(tmp_path, littlewood_paley)
    assert len(subbands) == 3
    assert "Ignoring 1 subband files" in caplog.text


def test_subband_of_the_wrong_size(lp_subbands, tmp_path):
    """Test a subband whose size does not match the metadata is rejected."""
    artifacts.write_subbands(lp_subbands, littlewood_paley, tmp_path)
    save_matrix(np.zeros((8, 8)), tmp_path / "sub_LP_2.ewtm")
    with pytest.raises(FormatError, match="does not match"):
        artifacts.read_subbands(tmp_path, littlewood_paley)


def test_read_metadata_errors(tmp_path):
    """Test missing, broken and foreign metadata files."""
    with pytest.raises(FileNotFoundError, match="Missing metadata file"):
        artifacts.read_metadata(tmp_path)
    (tmp_path / "metadata.json").write_text("{not json")
    with pytest.raises(FormatError, match="Invalid JSON") as err:
        artifacts.read_metadata(tmp_path)
    assert err.value.offset == 1
    (tmp_path / "metadata.json").write_text(json.dumps(dict(format="something-else")))
    with pytest.raises(FormatError, match="Unknown subband format 'something-else'"):
        artifacts.read_metadata(tmp_path)
    (tmp_path / "metadata.json").write_text(json.dumps(["ewt-subbands/1"]))
    with pytest.raises(FormatError, match="must be a JSON object, got list"):
        artifacts.read_metadata(tmp_path)
    (tmp_path / "metadata.json").write_text(json.dumps(dict(format="ewt-subbands/1", transform="lp", shape=[4, 4])))
    with pytest.raises(FormatError, match="Metadata misses plane_shape, labels, approximation, layout"):
        artifacts.read_metadata(tmp_path)


def test_write_json_creates_the_directory(tmp_path):
    """Test JSON files can be written to a new directory."""
    path = artifacts.write_json(dict(value=1.5), tmp_path / "new" / "result.json")
    assert artifacts.read_json(path) == dict(value=1.5)


def test_write_json_refuses_nan(tmp_path):
    """Test non-finite numbers never end up in JSON files."""
    with pytest.raises(ValueError, match="Out of range float"):
        artifacts.write_json(dict(value=float("nan")), tmp_path / "result.json")


def test_write_profile(tmp_path):
    """Test the profile CSV file."""
    path = artifacts.write_profile(Spectrum1D([0.0, 1.0, 2.0]), tmp_path / "profile.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "bin,omega,value"
    assert lines[1] == "0,0.0,0.0"
    assert lines[3] == f"2,{np.pi!r},2.0"
    assert len(lines) == 4
