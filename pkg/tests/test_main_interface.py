"""Tests for the command-line interface."""

import json

import numpy as np
import pytest

from empirical_wavelets import curvelet, littlewood_paley
from empirical_wavelets.fileformats import load_image, load_matrix, save_image
from empirical_wavelets.main_interface import cli, get_transform
from empirical_wavelets.testing import toy_image_file, windowed_waves  # noqa

DETECTION = ["--log", "--trend", "morpho"]


def _stderr_error(capsys):
    """Get the JSON error report, the last line written to stderr."""
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_getting_the_right_transform():
    """Test getting the module of a transform."""
    assert get_transform("lp") is littlewood_paley
    assert get_transform("curvelet2") is curvelet
    with pytest.raises(ValueError, match="Unknown transform"):
        get_transform("wavelet")


def test_boundaries_json(toy_image_file, capsys):
    """Test detecting the radial boundaries, the result going to stdout."""
    assert cli(["boundaries", "--input", str(toy_image_file), "--bands", "3", "--json", *DETECTION]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["geometry"] == "radial"
    assert report["config"] == dict(log=True, trend="morpho", rule="lowestmin", N=3, rho=0.7)
    boundaries = report["boundaries_radians"]
    assert len(boundaries) == 4
    assert boundaries[0] == 0
    assert boundaries[-1] == pytest.approx(np.pi)


def test_boundaries_files(toy_image_file, tmp_path):
    """Test the boundaries, the profile and the sweep written to the output directory."""
    outdir = tmp_path / "out"
    args = ["boundaries", "--input", str(toy_image_file), "--outdir", str(outdir), "--geometry", "rows",
            "--profile", "--sweep", *DETECTION]
    assert cli(args) == 0
    report = json.loads((outdir / "boundaries.json").read_text())
    assert report["geometry"] == "rows"
    assert report["spectrum_bins"] == 33
    assert report["run_config"]["geometry"] == "rows"
    assert (outdir / "profile.csv").read_text().startswith("bin,omega,value\n")
    assert len(json.loads((outdir / "sweep.json").read_text())) == 20


def test_angular_boundaries_give_angles(toy_image_file, capsys):
    """Test the angular geometry reports angles too."""
    assert cli(["boundaries", "--input", str(toy_image_file), "--geometry", "angular", "--angles", "3",
                "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["config"]["N"] == 4
    assert len(report["angles_radians"]) == len(report["boundaries_radians"]) - 2


def test_decompose_and_reconstruct(toy_image_file, tmp_path, capsys):
    """Test decomposing an image and rebuilding it from the subband files."""
    outdir = tmp_path / "subbands"
    args = ["decompose", "--input", str(toy_image_file), "--outdir", str(outdir), "--transform", "lp",
            "--bands", "3", "--json", *DETECTION]
    assert cli(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["subbands"] == 3
    assert report["frame_deviation"] < 1e-12
    assert (outdir / "metadata.json").exists()
    assert (outdir / "tiling.pgm").exists()
    assert sorted(path.name for path in outdir.glob("*.ewtm")) == ["sub_LP_0.ewtm", "sub_LP_1.ewtm", "sub_LP_2.ewtm"]

    args = ["reconstruct", "--input", str(outdir), "--reference", str(toy_image_file), "--json"]
    assert cli(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["transform"] == "lp"
    assert report["max_error"] < 1e-6
    original = load_image(toy_image_file)
    np.testing.assert_allclose(load_matrix(outdir / "reconstruction.ewtm"), original, atol=1e-6)
    np.testing.assert_array_equal(load_image(outdir / "reconstruction.pgm"), original)
    assert json.loads((outdir / "reconstruction.json").read_text())["run_config"]["command"] == "reconstruct"


def test_framecheck(toy_image_file, capsys):
    """Test checking the frame sum of a tensor bank."""
    assert cli(["framecheck", "--input", str(toy_image_file), "--transform", "tensor", "--json", *DETECTION]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["transform"] == "tensor"
    assert report["max_deviation"] < 1e-12


def test_command_line_overrides_the_config_file(toy_image_file, tmp_path, capsys):
    """Test flags take precedence over the yaml run configuration."""
    config_file = tmp_path / "run.yaml"
    config_file.write_text("transform: tensor\nbands: 3\nuse_log: true\ntrend: morpho\n")
    assert cli(["framecheck", "-c", str(config_file), "--input", str(toy_image_file), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["transform"] == "tensor"
    assert cli(["framecheck", "-c", str(config_file), "--input", str(toy_image_file), "--transform", "lp",
                "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["transform"] == "lp"


def test_denoise(toy_image_file, tmp_path, capsys):
    """Test denoising writes the images, the report and the run configuration."""
    outdir = tmp_path / "denoised"
    args = ["denoise", "--input", str(toy_image_file), "--outdir", str(outdir), "--transform", "lp",
            "--sigma", "5", "--seed", "1", "--delta-grid", "0:3:4", "--json", *DETECTION]
    assert cli(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["transform"] == "lp"
    assert report["sigma"] == 5
    assert report["delta"] in (0, 1, 2, 3)
    assert report["psnr_denoised"] >= report["psnr_noisy"] - 1e-9
    assert json.loads((outdir / "report.json").read_text()) == report
    assert json.loads((outdir / "run_config.json").read_text())["delta_grid"] == "0:3:4"
    for name in ("denoised.pgm", "noisy.pgm", "denoised.ewtm"):
        assert (outdir / name).exists()


def test_denoise_an_already_noisy_image(toy_image_file, tmp_path, capsys):
    """Test the input is not degraded further when a reference is given."""
    noisy_file = tmp_path / "noisy.pgm"
    noise = np.random.default_rng(0).normal(0, 4, (64, 64))
    save_image(np.clip(np.round(load_image(toy_image_file) + noise), 0, 255), noisy_file)
    args = ["denoise", "--input", str(noisy_file), "--reference", str(toy_image_file), "--outdir",
            str(tmp_path / "out"), "--delta-grid", "0:3:4", "--json", *DETECTION]
    assert cli(args) == 0
    report = json.loads(capsys.readouterr().out)
    np.testing.assert_array_equal(load_image(tmp_path / "out" / "noisy.pgm"), load_image(noisy_file))
    assert report["psnr_noisy"] < 40


def test_missing_input_file(tmp_path, capsys):
    """Test a missing input file gives exit code 3."""
    assert cli(["boundaries", "--input", str(tmp_path / "nothing.pgm")]) == 3
    error = _stderr_error(capsys)
    assert error["error"] == "FileNotFoundError"
    assert error["exit_code"] == 3


def test_bad_image_format(tmp_path, capsys):
    """Test a file that is not a PGM gives exit code 3 and the offset of the problem."""
    path = tmp_path / "image.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
    assert cli(["decompose", "--input", str(path), "--outdir", str(tmp_path)]) == 3
    error = _stderr_error(capsys)
    assert error["error"] == "FormatError"
    assert error["offset"] == 0
    assert "Bad magic" in error["message"]


def test_missing_output_directory(toy_image_file, capsys):
    """Test commands writing files need an output directory."""
    assert cli(["decompose", "--input", str(toy_image_file)]) == 3
    assert "needs --outdir" in _stderr_error(capsys)["message"]


def test_detection_failure(tmp_path, capsys):
    """Test a failed detection gives exit code 4."""
    path = tmp_path / "flat.pgm"
    save_image(np.full((32, 32), 100.0), path)
    assert cli(["boundaries", "--input", str(path), "--geometry", "rows", "--json"]) == 4
    captured = capsys.readouterr()
    assert captured.out == ""
    error = json.loads(captured.err.strip().splitlines()[-1])
    assert error["error"] == "DetectionError"
    assert error["exit_code"] == 4
    assert "[rows]" in error["message"]


def test_bad_config_file(toy_image_file, tmp_path, capsys):
    """Test unknown keys in the run configuration give exit code 2."""
    config_file = tmp_path / "run.yaml"
    config_file.write_text("transfrom: lp\n")
    assert cli(["framecheck", "-c", str(config_file), "--input", str(toy_image_file)]) == 2
    error = _stderr_error(capsys)
    assert error["exit_code"] == 2
    assert "transfrom" in error["message"]


def test_missing_config_file(toy_image_file, tmp_path, capsys):
    """Test a missing run configuration file gives exit code 2."""
    assert cli(["framecheck", "-c", str(tmp_path / "run.yaml"), "--input", str(toy_image_file)]) == 2
    assert _stderr_error(capsys)["exit_code"] == 2


def test_invalid_setting_gives_a_usage_error(toy_image_file, capsys):
    """Test settings rejected by the configuration give exit code 2."""
    assert cli(["framecheck", "--input", str(toy_image_file), "--bands", "1"]) == 2
    assert "bands must be at least 2" in _stderr_error(capsys)["message"]


@pytest.mark.parametrize("args", [
    ["decompose", "--transform", "wavelet"],
    ["boundaries", "--trend", "cubic"],
    ["denoise", "--delta-grid", "1:0:3"],
    ["transform"],
])
def test_usage_errors(args):
    """Test malformed command lines exit with code 2."""
    with pytest.raises(SystemExit) as err:
        cli(args)
    assert err.value.code == 2


def test_log_config_file(toy_image_file, tmp_path, capsys):
    """Test a logging configuration file is used."""
    log_config = tmp_path / "logging.yaml"
    log_config.write_text("version: 1\n"
                          "disable_existing_loggers: false\n"
                          "formatters: {short: {format: 'ewt: %(message)s'}}\n"
                          "handlers: {console: {class: logging.StreamHandler, formatter: short, "
                          "stream: 'ext://sys.stderr'}}\n"
                          "root: {level: INFO, handlers: [console]}\n")
    assert cli(["framecheck", "-l", str(log_config), "--input", str(toy_image_file), *DETECTION]) == 0
    assert "ewt: Largest frame sum deviation" in capsys.readouterr().err


def _waves_file(tmp_path, frequencies):
    """Write an 8-bit image of horizontal and vertical waves at the given frequencies and get its path."""
    path = tmp_path / "waves.pgm"
    save_image(np.round(128 + 20 * windowed_waves(64, frequencies)), path)
    return path


def test_tensor_decomposition_file_count(tmp_path):
    """Test a 3 by 3 tensor decomposition writes 9 subbands."""
    outdir = tmp_path / "tensor"
    args = ["decompose", "--input", str(_waves_file(tmp_path, (0.8, 2.0))), "--outdir", str(outdir),
            "--transform", "tensor", "--bands", "3"]
    assert cli(args) == 0
    assert len(list(outdir.glob("sub_T_*.ewtm"))) == 9
    assert len(json.loads((outdir / "metadata.json").read_text())["labels"]) == 9


def test_curvelet_decomposition_file_count(tmp_path):
    """Test option II with 4 scales and 4 angles writes one approximation and 12 wedges."""
    outdir = tmp_path / "curvelet"
    args = ["decompose", "--input", str(_waves_file(tmp_path, (0.5, 1.2, 2.2))), "--outdir", str(outdir),
            "--transform", "curvelet2", "--scales", "4", "--angles", "4"]
    assert cli(args) == 0
    assert len(list(outdir.glob("sub_C2_*.ewtm"))) == 13
    assert (outdir / "sub_C2_0_0.ewtm").exists()
    assert (outdir / "sub_C2_3_3.ewtm").exists()


def test_commands_are_deterministic(toy_image_file, tmp_path, capsys):
    """Test running a command twice gives the same results."""
    args = ["boundaries", "--input", str(toy_image_file), "--json", *DETECTION]
    assert cli(args) == 0
    first = capsys.readouterr().out
    assert cli(args) == 0
    assert capsys.readouterr().out == first
    for run in ("first", "second"):
        assert cli(["decompose", "--input", str(toy_image_file), "--outdir", str(tmp_path / run), "--transform",
                    "curvelet2", "--scales", "3", "--angles", "3", *DETECTION]) == 0
    names = sorted(path.name for path in (tmp_path / "first").glob("*.ewtm"))
    assert names == sorted(path.name for path in (tmp_path / "second").glob("*.ewtm"))
    for name in names:
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
    metadata = [json.loads((tmp_path / run / "metadata.json").read_text()) for run in ("first", "second")]
    for content in metadata:
        del content["run_config"]
    assert metadata[0] == metadata[1]


def test_framecheck_rejects_an_overlarge_gamma(toy_image_file, capsys):
    """Test a transition ratio making the transition areas overlap is a data error."""
    assert cli(["framecheck", "--input", str(toy_image_file), "--transform", "lp", "--bands", "3", "--gamma",
                "0.9", *DETECTION]) == 3
    error = _stderr_error(capsys)
    assert error["error"] == "InvalidArgumentError"
    assert "overlap" in error["message"]


def _tamper_metadata(directory, change):
    path = directory / "metadata.json"
    metadata = json.loads(path.read_text())
    path.write_text(json.dumps(change(metadata)))


@pytest.mark.parametrize(("change", "error_name"), [
    (lambda metadata: dict(metadata, transform="wavelet"), "ValueError"),
    (lambda metadata: dict(metadata, layout={"transform": "lp"}), "KeyError"),
    (lambda metadata: [metadata], "FormatError"),
    (lambda metadata: {key: value for key, value in metadata.items() if key != "labels"}, "FormatError"),
])
def test_tampered_metadata_is_a_data_error(toy_image_file, tmp_path, capsys, change, error_name):
    """Test reconstructing from altered metadata exits with code 3 and a JSON report."""
    outdir = tmp_path / "subbands"
    assert cli(["decompose", "--input", str(toy_image_file), "--outdir", str(outdir), "--transform", "lp",
                *DETECTION]) == 0
    _tamper_metadata(outdir, change)
    assert cli(["reconstruct", "--input", str(outdir)]) == 3
    error = _stderr_error(capsys)
    assert error["error"] == error_name
    assert error["exit_code"] == 3


def test_config_file_must_be_a_mapping(toy_image_file, tmp_path, capsys):
    """Test a yaml run configuration that is not a mapping gives exit code 2."""
    config_file = tmp_path / "run.yaml"
    config_file.write_text("- lp\n- tensor\n")
    assert cli(["framecheck", "-c", str(config_file), "--input", str(toy_image_file)]) == 2
    assert "must be a mapping" in _stderr_error(capsys)["message"]
