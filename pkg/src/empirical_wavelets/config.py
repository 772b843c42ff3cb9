"""The run configuration shared by the command-line interface and the transform plugins.

A run configuration can be written as a yaml file, whose keys are the field names of :class:`RunConfig`, e.g.:

.. code-block:: yaml

    transform: curvelet2
    scales: 4
    angles: 4
    use_log: true
    trend: morpho
    rule: lowestmin
    angle_rule: middle
    angle_trend: tophat

Command-line flags take precedence over the file.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from empirical_wavelets.boundaries import RULES, DetectConfig, parse_trend
from empirical_wavelets.common import InvalidArgumentError

COMMANDS = ("boundaries", "decompose", "reconstruct", "framecheck", "denoise")
TRANSFORMS = ("tensor", "lp", "ridgelet", "curvelet1", "curvelet2")
GEOMETRIES = ("rows", "cols", "radial", "angular")


def parse_delta_grid(text):
    """Parse a ``lo:hi:n`` grid specification.

    Returns:
        The (lo, hi, n) tuple.
    """
    try:
        low, high, count = text.split(":")
        grid = float(low), float(high), int(count)
    except ValueError as err:
        raise InvalidArgumentError(f"Invalid δ grid {text}, expected lo:hi:n.") from err
    if grid[2] < 1 or grid[0] < 0 or grid[1] < grid[0]:
        raise InvalidArgumentError(f"Invalid δ grid {text}, need 0 <= lo <= hi and n >= 1.")
    return grid


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs to run, validated on creation."""

    command: str = "decompose"
    input: str = None
    outdir: str = None
    transform: str = "lp"
    bands: int = 3
    bands_row: int = None
    bands_col: int = None
    scales: int = 4
    angles: int = 4
    use_log: bool = False
    trend: str = "none"
    rule: str = "lowestmin"
    rho: float = 0.7
    angle_log: bool = False
    angle_trend: str = "tophat"
    angle_rule: str = "middle"
    sigma: float = 0.0
    seed: int = 0
    delta_grid: str = "0:4:21"
    tol: float = 1e-10
    maxiter: int = 300
    gamma: float = None
    ppfft_method: str = "direct"
    max_value: float = 255.0
    workers: int = 1
    reference: str = None
    geometry: str = "radial"
    profile: bool = False
    sweep: bool = False
    json: bool = False

    def __post_init__(self):
        """Validate the configuration."""
        if self.command not in COMMANDS:
            raise InvalidArgumentError(f"Unknown command {self.command}.")
        if self.transform not in TRANSFORMS:
            raise InvalidArgumentError(f"Unknown transform {self.transform}.")
        if self.geometry not in GEOMETRIES:
            raise InvalidArgumentError(f"Unknown geometry {self.geometry}.")
        for name in ("bands", "scales", "angles"):
            if getattr(self, name) < 2:
                raise InvalidArgumentError(f"{name} must be at least 2.")
        for name in ("bands_row", "bands_col"):
            if getattr(self, name) is not None and getattr(self, name) < 2:
                raise InvalidArgumentError(f"{name} must be at least 2.")
        if self.sigma < 0:
            raise InvalidArgumentError(f"σ must be nonnegative, got {self.sigma}.")
        if self.tol <= 0 or self.maxiter < 1 or self.workers < 1 or self.max_value <= 0:
            raise InvalidArgumentError("tol and max_value must be positive, maxiter and workers at least 1.")
        if self.ppfft_method not in ("direct", "czt"):
            raise InvalidArgumentError(f"Unknown pseudo-polar method {self.ppfft_method}.")
        parse_delta_grid(self.delta_grid)
        self.detect_config()
        self.angle_config()

    @classmethod
    def from_dict(cls, content):
        """Create a configuration from a dictionary, e.g. loaded from yaml."""
        known = {item.name for item in dataclasses.fields(cls)}
        unknown = set(content) - known
        if unknown:
            raise InvalidArgumentError(f"Unknown configuration keys: {', '.join(sorted(unknown))}.")
        return cls(**content)

    def to_dict(self):
        """Get the configuration as a dictionary of plain values."""
        return dataclasses.asdict(self)

    def detect_config(self, n_bands=None):
        """Get the detection settings for the scales, or for 1D spectra."""
        trend, degree = parse_trend(self.trend)
        if self.rule not in RULES:
            raise InvalidArgumentError(f"Unknown rule {self.rule}.")
        return DetectConfig(use_log=self.use_log, trend=trend, degree=degree, rule=self.rule,
                            n_bands=n_bands or self.bands, rho=self.rho)

    def angle_config(self, n_bands=None):
        """Get the detection settings for the angles."""
        trend, degree = parse_trend(self.angle_trend)
        return DetectConfig(use_log=self.angle_log, trend=trend, degree=degree, rule=self.angle_rule,
                            n_bands=n_bands or self.angles + 1, rho=self.rho)

    @property
    def row_bands(self):
        """The number of filters of the row bank."""
        return self.bands_row or self.bands

    @property
    def col_bands(self):
        """The number of filters of the column bank."""
        return self.bands_col or self.bands

    def delta_values(self):
        """Get the δ values of the denoising grid."""
        low, high, count = parse_delta_grid(self.delta_grid)
        return np.linspace(low, high, count)
