"""Main interface functions."""

import argparse
import json
import logging.config
import sys
from importlib.metadata import entry_points

import numpy as np
import yaml
from upath import UPath

from empirical_wavelets import artifacts
from empirical_wavelets.arrays import central_square
from empirical_wavelets.boundaries import RULES, detect_boundaries, detection_sweep, parse_trend, preprocess
from empirical_wavelets.common import DetectionError, FormatError, InvalidArgumentError, NumericalError
from empirical_wavelets.config import GEOMETRIES, TRANSFORMS, RunConfig, parse_delta_grid
from empirical_wavelets.denoise import add_gaussian_noise, denoise
from empirical_wavelets.fileformats import load_image, save_image, save_matrix, save_preview
from empirical_wavelets.pseudopolar import (
    angular_mean_spectrum,
    pp_grid,
    ppfft,
    profile_to_angles,
    radial_mean_spectrum,
)
from empirical_wavelets.tensor import col_mean_spectrum, row_mean_spectrum

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
DATA_ERROR = 3
NUMERICAL_ERROR = 4
EXIT_CODES = ((FormatError, DATA_ERROR), (InvalidArgumentError, DATA_ERROR), (FileNotFoundError, DATA_ERROR),
              (DetectionError, NUMERICAL_ERROR), (NumericalError, NUMERICAL_ERROR),
              (KeyError, DATA_ERROR), (TypeError, DATA_ERROR), (ValueError, DATA_ERROR))


def get_transform(transform):
    """Get the module implementing a transform.

    Example:
        >>> plugin = get_transform("curvelet2")
        >>> subbands = plugin.decompose(image, config)

    """
    eps = entry_points(group="empirical_wavelets.transforms")
    for ep in eps:
        if transform == ep.name:
            return ep.load()
    raise ValueError(f"Unknown transform {transform}.")


def _argument_type(checker):
    def convert(text):
        try:
            checker(text)
        except InvalidArgumentError as err:
            raise argparse.ArgumentTypeError(str(err)) from err
        return text
    return convert


def _common_arguments():
    parser = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument("-c", "--config", type=str, help="The yaml run configuration file.")
    parser.add_argument("-l", "--log-config", type=str, help="The yaml config file for logging.")
    parser.add_argument("--input", type=str, help="The input image, or subband directory for reconstruct.")
    parser.add_argument("--outdir", type=str, help="The directory to write the results to.")
    parser.add_argument("--transform", choices=TRANSFORMS, help="The transform to use.")
    parser.add_argument("--bands", type=int, help="The number of bands N.")
    parser.add_argument("--bands-row", dest="bands_row", type=int, help="The number of row bands N_R.")
    parser.add_argument("--bands-col", dest="bands_col", type=int, help="The number of column bands N_C.")
    parser.add_argument("--scales", type=int, help="The number of curvelet scales N_s.")
    parser.add_argument("--angles", type=int, help="The number of curvelet angles N_θ.")
    parser.add_argument("--rule", choices=RULES, help="The boundary placement rule.")
    parser.add_argument("--trend", type=_argument_type(parse_trend),
                        help="The trend to remove: none, plaw, poly:D, morpho or tophat.")
    parser.add_argument("--log", dest="use_log", action="store_true", help="Detect on ln(1 + spectrum).")
    parser.add_argument("--rho", type=float, help="The merge ratio of the ftc rule.")
    parser.add_argument("--angle-rule", dest="angle_rule", choices=RULES, help="The rule for angles.")
    parser.add_argument("--angle-trend", dest="angle_trend", type=_argument_type(parse_trend),
                        help="The trend to remove from angular profiles.")
    parser.add_argument("--angle-log", dest="angle_log", action="store_true", help="Detect angles on logs.")
    parser.add_argument("--gamma", type=float, help="Override the automatic transition ratio γ.")
    parser.add_argument("--ppfft", dest="ppfft_method", choices=("direct", "czt"),
                        help="The pseudo-polar evaluation method.")
    parser.add_argument("--tol", type=float, help="The pseudo-polar solver tolerance.")
    parser.add_argument("--maxiter", type=int, help="The pseudo-polar solver iteration limit.")
    parser.add_argument("--json", action="store_true", help="Print the result as JSON on stdout.")
    return parser


def _build_parser():
    parser = argparse.ArgumentParser(
                    prog="empirical-wavelets",
                    description="Adaptive wavelet decompositions of images, built on their spectrum.",
                    epilog="Thanks for using empirical-wavelets!")
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()
    boundaries = commands.add_parser("boundaries", parents=[common], help="Detect the Fourier boundaries.")
    boundaries.add_argument("--geometry", choices=GEOMETRIES, default=argparse.SUPPRESS,
                            help="The spectrum to detect on.")
    boundaries.add_argument("--profile", action="store_true", default=argparse.SUPPRESS,
                            help="Write the preprocessed spectrum to profile.csv.")
    boundaries.add_argument("--sweep", action="store_true", default=argparse.SUPPRESS,
                            help="Run every preprocessing and rule combination, written to sweep.json.")
    commands.add_parser("decompose", parents=[common], help="Decompose an image into subbands.")
    reconstruct = commands.add_parser("reconstruct", parents=[common], help="Rebuild an image from subbands.")
    reconstruct.add_argument("--reference", type=str, default=argparse.SUPPRESS,
                             help="An image to compare the reconstruction to.")
    commands.add_parser("framecheck", parents=[common], help="Check the tight frame property of a bank.")
    denoise_parser = commands.add_parser("denoise", parents=[common], help="Denoise an image.")
    denoise_parser.add_argument("--sigma", type=float, default=argparse.SUPPRESS, help="The noise level σ.")
    denoise_parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="The noise seed.")
    denoise_parser.add_argument("--delta-grid", dest="delta_grid", default=argparse.SUPPRESS,
                                type=_argument_type(parse_delta_grid), help="The δ grid, as lo:hi:n.")
    denoise_parser.add_argument("--reference", type=str, default=argparse.SUPPRESS,
                                help="The clean image, when the input is already noisy.")
    denoise_parser.add_argument("--max-value", dest="max_value", type=float, default=argparse.SUPPRESS,
                                help="The peak value for PSNR and SSIM.")
    denoise_parser.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                                help="The number of threads evaluating the δ grid.")
    return parser


def load_run_config(config_filename, options):
    """Merge a yaml run configuration file with command-line options, the latter taking precedence."""
    content = dict()
    if config_filename is not None:
        content = yaml.safe_load(UPath(config_filename).read_text()) or dict()
        if not isinstance(content, dict):
            raise InvalidArgumentError(f"The run configuration must be a mapping, got {type(content).__name__}.")
    content.update(options)
    return RunConfig.from_dict(content)


def cli(args=None):
    """Command-line interface for empirical-wavelets.

    Returns:
        The exit code: 0 on success, 2 for usage errors, 3 for data or format errors and 4 for detection or
        numerical failures.
    """
    parser = _build_parser()
    parsed = vars(parser.parse_args(args))

    configure_logging(parsed.pop("log_config", None))

    try:
        config = load_run_config(parsed.pop("config", None), parsed)
    except (InvalidArgumentError, TypeError, yaml.YAMLError, FileNotFoundError) as err:
        return _report_error(err, USAGE_ERROR)

    try:
        result = COMMANDS[config.command](config)
    except tuple(error for error, _ in EXIT_CODES) as err:
        exit_code = next(code for error, code in EXIT_CODES if isinstance(err, error))
        return _report_error(err, exit_code)
    if config.json:
        sys.stdout.write(json.dumps(result, sort_keys=True))
    return 0


def _report_error(err, exit_code):
    logger.error(str(err))
    content = {"error": type(err).__name__, "message": str(err), "exit_code": exit_code}
    if isinstance(err, FormatError) and err.offset is not None:
        content["offset"] = err.offset
    sys.stderr.write(json.dumps(content) + "\n")
    return exit_code


def _require(config, *names):
    for name in names:
        if getattr(config, name) is None:
            raise InvalidArgumentError(f"The {config.command} command needs --{name}.")


def _write_run_config(config):
    if config.outdir is not None:
        artifacts.write_json(config.to_dict(), UPath(config.outdir) / "run_config.json")


def _save_pgm(image, path):
    """Save an image rounded and clipped to the 16 bit range, 8 bits when it fits."""
    pixels = np.clip(np.round(image), 0, 65535)
    save_image(pixels, path)


def _spectrum_of(image, geometry, method):
    if geometry == "rows":
        return row_mean_spectrum(image)
    if geometry == "cols":
        return col_mean_spectrum(image)
    values = ppfft(central_square(image), method=method)
    if geometry == "radial":
        return radial_mean_spectrum(values)
    return angular_mean_spectrum(values)


def run_boundaries(config):
    """Detect the boundaries of a spectrum of the input image."""
    _require(config, "input")
    image = load_image(config.input)
    spectrum = _spectrum_of(image, config.geometry, config.ppfft_method)
    detect_config = config.angle_config() if config.geometry == "angular" else config.detect_config()
    boundary_set = detect_boundaries(spectrum, detect_config, geometry=config.geometry)
    report = dict(geometry=config.geometry, spectrum_bins=spectrum.size, config=detect_config.to_dict(),
                  **boundary_set.to_dict())
    if config.geometry == "angular":
        grid = pp_grid(central_square(image).shape[0])
        report["angles_radians"] = profile_to_angles(grid, boundary_set.interior).tolist()
    if config.outdir is not None:
        outdir = UPath(config.outdir)
        artifacts.write_json(dict(report, run_config=config.to_dict()), outdir / "boundaries.json")
        if config.profile:
            artifacts.write_profile(preprocess(spectrum, detect_config), outdir / "profile.csv")
        if config.sweep:
            artifacts.write_json(_sweep(spectrum, detect_config.n_bands), outdir / "sweep.json")
    return report


def _sweep(spectrum, n_bands):
    results = []
    for detect_config, outcome in detection_sweep(spectrum, n_bands):
        result = outcome.to_dict() if hasattr(outcome, "to_dict") else dict(error=outcome)
        results.append(dict(config=detect_config.to_dict(), result=result))
    return results


def run_decompose(config):
    """Decompose the input image and write the subbands."""
    _require(config, "input", "outdir")
    image = load_image(config.input)
    plugin = get_transform(config.transform)
    bank, layout = plugin.build_bank(image, config)
    subbands = plugin.analyze(image, bank, layout)
    deviation = plugin.frame_deviation(bank)
    metadata_path = artifacts.write_subbands(subbands, plugin, config.outdir, config, frame_deviation=deviation)
    save_preview(plugin.tiling(bank), UPath(config.outdir) / "tiling.pgm")
    return dict(transform=config.transform, subbands=len(subbands), frame_deviation=deviation,
                metadata=str(metadata_path))


def run_reconstruct(config):
    """Rebuild an image from a subband directory."""
    _require(config, "input")
    metadata = artifacts.read_metadata(config.input)
    plugin = get_transform(metadata["transform"])
    subbands = artifacts.read_subbands(config.input, plugin, metadata)
    image, info = plugin.synthesize(subbands, config)
    outdir = UPath(config.outdir or config.input)
    outdir.mkdir(parents=True, exist_ok=True)
    save_matrix(image, outdir / "reconstruction.ewtm")
    _save_pgm(image, outdir / "reconstruction.pgm")
    report = dict(transform=metadata["transform"], **info)
    if config.reference is not None:
        reference = load_image(config.reference)
        if reference.shape != image.shape:
            raise InvalidArgumentError(f"Reference of shape {reference.shape} does not match {image.shape}.")
        report["max_error"] = float(np.max(np.abs(image - reference)))
        report["relative_l2_error"] = float(np.linalg.norm(image - reference) / max(np.linalg.norm(reference),
                                                                                       np.finfo(float).tiny))
    artifacts.write_json(dict(report, run_config=config.to_dict()), outdir / "reconstruction.json")
    return report


def run_framecheck(config):
    """Build the bank of the input image and check its frame sum."""
    _require(config, "input")
    image = load_image(config.input)
    plugin = get_transform(config.transform)
    bank, _ = plugin.build_bank(image, config)
    deviation = plugin.frame_deviation(bank)
    logger.info(f"Largest frame sum deviation: {deviation:.3e}")
    report = dict(transform=config.transform, max_deviation=deviation)
    if config.outdir is not None:
        artifacts.write_json(dict(report, run_config=config.to_dict()), UPath(config.outdir) / "framecheck.json")
    return report


def run_denoise(config):
    """Add noise to the input image, denoise it and score the result."""
    _require(config, "input", "outdir")
    image = load_image(config.input)
    if config.reference is None:
        reference = image
        noisy = add_gaussian_noise(image, config.sigma, config.seed)
    else:
        reference = load_image(config.reference)
        noisy = image
    plugin = get_transform(config.transform)
    denoised, report = denoise(noisy, plugin, config, config.delta_values(), reference,
                               max_value=config.max_value, workers=config.workers)
    outdir = UPath(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_matrix(denoised, outdir / "denoised.ewtm")
    _save_pgm(denoised, outdir / "denoised.pgm")
    _save_pgm(noisy, outdir / "noisy.pgm")
    artifacts.write_json(report.to_dict(), outdir / "report.json")
    _write_run_config(config)
    return report.to_dict()


COMMANDS = dict(boundaries=run_boundaries, decompose=run_decompose, reconstruct=run_reconstruct,
                framecheck=run_framecheck, denoise=run_denoise)


def configure_logging(log_config_filename):
    """Configure logging from a yaml file."""
    if log_config_filename is not None:
        with open(log_config_filename) as fd:
            log_config = yaml.safe_load(fd.read())
    else:
        log_config = {
            "version": 1,
            "formatters": {
                "ewt": {
                    "format": "[%(asctime)s %(levelname)-8s %(name)s] %(message)s"
                }
            },
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "level": "INFO",
                    "formatter": "ewt",
                    "stream": "ext://sys.stderr",
                },
            },
            "disable_existing_loggers": False,
            "loggers": {
                "": {
                    "level": "INFO",
                    "handlers": ["console"],
                    "propagate": True
                },
            },
        }
    logging.config.dictConfig(log_config)
