"""Lens geometry, coordinate conventions and radiative-region classification.

The lens lies in the plane z = 0 and is centred on the origin. The feed sits
on the -z side and the lens radiates into +z. Row 0 of every cell grid is the
top row (largest y); column 0 is the leftmost column (smallest x).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Raised for invalid geometry or configuration values."""


@dataclass(frozen=True)
class FeedModel:
    position: tuple[float, float, float] = (0.0, 0.0, -0.045)
    exponent: float = 1.0
    power_w: float = 1.0

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        if len(pos) != 3:
            raise ConfigError("feed position must be a 3-vector")
        object.__setattr__(self, "position", pos)
        if not pos[2] < 0.0:
            raise ConfigError("feed must sit behind the lens plane (z < 0)")
        if self.exponent < 0:
            raise ConfigError("feed exponent must be non-negative")
        if self.power_w <= 0:
            raise ConfigError("feed power must be positive")


@dataclass(frozen=True)
class SystemConfig:
    """Lens geometry, operating frequency, feed and element-pattern model."""

    frequency: float = 4.0e9
    rows: int = 6
    cols: int = 6
    cell_pitch: float = 0.030
    feed: FeedModel = field(default_factory=FeedModel)
    element_exponent: float = 1.0
    back_lobe_leakage: float = 0.2
    phase_offset: float = 0.0
    # descriptive unit-cell dimensions (W1, W2, L1, E, t ...); never used numerically
    cell_metadata: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be >= 1")
        if self.cell_pitch <= 0:
            raise ConfigError("cell_pitch must be positive")
        if self.frequency <= 0:
            raise ConfigError("frequency must be positive")
        if not 0.0 <= self.back_lobe_leakage < 1.0:
            raise ConfigError("back_lobe_leakage must lie in [0, 1)")
        if self.element_exponent < 0:
            raise ConfigError("element_exponent must be non-negative")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def k0(self) -> float:
        return 2.0 * math.pi * self.frequency / SPEED_OF_LIGHT

    @property
    def aperture_size(self) -> tuple[float, float]:
        """Physical (x, y) extent of the lens in meters."""
        return self.cols * self.cell_pitch, self.rows * self.cell_pitch

    @property
    def aperture_area(self) -> float:
        w, h = self.aperture_size
        return w * h

    @property
    def max_dimension(self) -> float:
        """Aperture diagonal, used as D in the region bounds."""
        return math.hypot(*self.aperture_size)

    @property
    def far_radius(self) -> float:
        """Default evaluation radius for direction-mode patterns."""
        return 10.0 * region_bounds(self.max_dimension, self.wavelength)[1]

    def with_feed_distance(self, distance: float) -> "SystemConfig":
        """Copy of the config with the feed moved on-axis to ``distance`` behind the lens."""
        return replace(self, feed=replace(self.feed, position=(0.0, 0.0, -abs(distance))))


class FieldRegion(enum.Enum):
    REACTIVE_NEAR = "reactive-near"
    RADIATIVE_NEAR = "radiative-near"
    FAR = "far"


def lens_aperture(config: SystemConfig) -> np.ndarray:
    """Cell centres as a (rows*cols, 3) array, row-major, top-left first."""
    p = config.cell_pitch
    xs = (np.arange(config.cols) - (config.cols - 1) / 2.0) * p
    ys = -(np.arange(config.rows) - (config.rows - 1) / 2.0) * p
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])


def region_bounds(D: float, wavelength: float) -> tuple[float, float]:
    """Inner (reactive/radiative) and outer (radiative/far) boundary radii."""
    return 0.62 * math.sqrt(D**3 / wavelength), 2.0 * D**2 / wavelength


def classify_field_region(r: float, config: SystemConfig) -> FieldRegion:
    if not r > 0:
        raise ConfigError(f"radial distance must be positive, got {r}")
    inner, outer = region_bounds(config.max_dimension, config.wavelength)
    if r <= inner:
        return FieldRegion.REACTIVE_NEAR
    if r < outer:
        return FieldRegion.RADIATIVE_NEAR
    return FieldRegion.FAR


def spherical_to_cartesian(r, theta, phi):
    """(r, theta, phi) -> (x, y, z); theta from +z, phi from +x. Broadcasts."""
    r, theta, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, theta, phi)))
    if np.any(r < 0):
        raise ConfigError("radius must be non-negative")
    st = np.sin(theta)
    out = np.stack([r * np.cos(phi) * st, r * np.sin(phi) * st, r * np.cos(theta)], axis=-1)
    return out


def cartesian_to_spherical(xyz) -> tuple:
    """Inverse of :func:`spherical_to_cartesian` with theta in [0, pi], phi in [0, 2pi)."""
    xyz = np.asarray(xyz, dtype=float)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    theta = np.arctan2(np.hypot(x, y), z)
    phi = np.mod(np.arctan2(y, x), 2.0 * np.pi)
    return r, theta, phi


_CONFIG_KEYS = {
    "frequency_hz", "rows", "cols", "cell_pitch_m", "feed", "element_exponent",
    "back_lobe_leakage", "phase_offset_rad", "cell_metadata",
}


def config_from_dict(doc: dict) -> SystemConfig:
    """Build a config from the JSON schema; missing keys keep their defaults."""
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = SystemConfig()
    feed_doc = doc.get("feed", {}) or {}
    if set(feed_doc) - {"position_m", "exponent", "power_w"}:
        raise ConfigError(f"unknown feed keys: {', '.join(sorted(set(feed_doc) - {'position_m', 'exponent', 'power_w'}))}")
    feed = FeedModel(
        position=tuple(feed_doc.get("position_m", base.feed.position)),
        exponent=float(feed_doc.get("exponent", base.feed.exponent)),
        power_w=float(feed_doc.get("power_w", base.feed.power_w)),
    )
    try:
        return SystemConfig(
            frequency=float(doc.get("frequency_hz", base.frequency)),
            rows=int(doc.get("rows", base.rows)),
            cols=int(doc.get("cols", base.cols)),
            cell_pitch=float(doc.get("cell_pitch_m", base.cell_pitch)),
            feed=feed,
            element_exponent=float(doc.get("element_exponent", base.element_exponent)),
            back_lobe_leakage=float(doc.get("back_lobe_leakage", base.back_lobe_leakage)),
            phase_offset=float(doc.get("phase_offset_rad", base.phase_offset)),
            cell_metadata=tuple(sorted((doc.get("cell_metadata") or {}).items())),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: SystemConfig) -> dict:
    return {
        "frequency_hz": config.frequency,
        "rows": config.rows,
        "cols": config.cols,
        "cell_pitch_m": config.cell_pitch,
        "feed": {
            "position_m": list(config.feed.position),
            "exponent": config.feed.exponent,
            "power_w": config.feed.power_w,
        },
        "element_exponent": config.element_exponent,
        "back_lobe_leakage": config.back_lobe_leakage,
        "phase_offset_rad": config.phase_offset,
        "cell_metadata": dict(config.cell_metadata),
    }


def load_config(path) -> SystemConfig:
    with open(Path(path)) as fh:
        return config_from_dict(json.load(fh))
