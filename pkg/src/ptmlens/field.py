"""Equivalent-source field model of the fed lens.

Each unit cell is one complex point source. Its excitation is the feed's
spherical wave at the cell centre times the cell's transmission coefficient;
it radiates with a cos^q element factor forward and a beta-scaled cos^q lobe
backward. The field at an observation point is the coherent sum over cells.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cells import StateTable
from .geometry import SystemConfig, lens_aperture, spherical_to_cartesian
from .synthesis import CodePattern

_CHUNK = 8192


class FieldDomainError(ValueError):
    """Observation point coincides with a source."""


def _as_points(points) -> tuple[np.ndarray, bool]:
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


def incident_field(points, config: SystemConfig):
    """Feed field at ``points``: cos^qf(off-boresight angle) * exp(-j k0 d) / d."""
    pts, single = _as_points(points)
    feed = np.asarray(config.feed.position)
    delta = pts - feed
    d = np.sqrt(np.sum(delta**2, axis=1))
    if np.any(d == 0.0):
        raise FieldDomainError("observation point coincides with the feed")
    cos_t = np.clip(delta[:, 2] / d, 0.0, 1.0)
    taper = cos_t**config.feed.exponent
    out = taper * np.exp(-1j * config.k0 * d) / d
    return complex(out[0]) if single else out


def element_factor(cos_theta: np.ndarray, config: SystemConfig) -> np.ndarray:
    q = config.element_exponent
    mag = np.abs(cos_theta) ** q
    return np.where(cos_theta >= 0.0, mag, config.back_lobe_leakage * mag)


def cell_excitations(pattern: CodePattern, config: SystemConfig, table: StateTable | None = None) -> np.ndarray:
    """Complex source weight per cell (row-major): incident field times transmission."""
    if pattern.shape != (config.rows, config.cols):
        raise ValueError(f"pattern shape {pattern.shape} does not match lens {config.rows}x{config.cols}")
    table = table if table is not None else pattern.response_table()
    coeffs = table.coefficients
    if pattern.states.max() >= len(coeffs):
        raise ValueError("pattern uses states missing from the response table")
    cells = lens_aperture(config)
    return incident_field(cells, config) * coeffs[pattern.states.ravel()]


def _sum_sources(pts: np.ndarray, cells: np.ndarray, weights: np.ndarray, config: SystemConfig) -> np.ndarray:
    delta = pts[:, None, :] - cells[None, :, :]
    R = np.sqrt(np.sum(delta**2, axis=2))
    if np.any(R == 0.0):
        raise FieldDomainError("observation point coincides with a cell centre")
    F = element_factor(delta[:, :, 2] / R, config)
    terms = weights[None, :] * F * np.exp(-1j * config.k0 * R) / R
    # per-row reduction keeps each sample independent of how rows are batched
    return np.sum(terms, axis=1)


def source_field(points, cells, weights, config: SystemConfig, workers: int = 1):
    """Coherent sum of arbitrary point sources through the element factor."""
    pts, single = _as_points(points)
    cells = np.asarray(cells, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    chunks = [pts[i : i + _CHUNK] for i in range(0, len(pts), _CHUNK)] or [pts]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: _sum_sources(c, cells, weights, config), chunks))
    else:
        parts = [_sum_sources(c, cells, weights, config) for c in chunks]
    out = np.concatenate(parts)
    return complex(out[0]) if single else out


def cell_contributions(point, config: SystemConfig) -> np.ndarray:
    """Field at one point from each cell alone, per unit transmission coefficient."""
    pt = np.asarray(point, dtype=float)
    cells = lens_aperture(config)
    delta = pt[None, :] - cells
    R = np.sqrt(np.sum(delta**2, axis=1))
    if np.any(R == 0.0):
        raise FieldDomainError("observation point coincides with a cell centre")
    F = element_factor(delta[:, 2] / R, config)
    return incident_field(cells, config) * F * np.exp(-1j * config.k0 * R) / R


def transmitted_field(
    points,
    pattern: CodePattern,
    config: SystemConfig,
    table: StateTable | None = None,
    amplitude_mask=None,
    workers: int = 1,
):
    """Field radiated by the lens at one point (3-vector) or many ((N, 3) array)."""
    weights = cell_excitations(pattern, config, table)
    if amplitude_mask is not None:
        weights = weights * np.asarray(amplitude_mask, dtype=float).ravel()
    return source_field(points, lens_aperture(config), weights, config, workers)


@dataclass(frozen=True)
class ObservationGrid:
    """Directions (theta, phi in radians) at ``radius``, or explicit 3-D points.

    ``shape`` records the (n_theta, n_phi) layout of full-sphere grids so the
    samples can be integrated.
    """

    theta: np.ndarray | None = None
    phi: np.ndarray | None = None
    radius: float | None = None
    points: np.ndarray | None = None
    shape: tuple[int, int] | None = None
    kind: str = "directions"
    step_deg: float | None = None

    def __post_init__(self):
        if self.kind == "points":
            if self.points is None or len(self.points) == 0:
                raise ValueError("point grid is empty")
        else:
            if self.theta is None or len(self.theta) == 0:
                raise ValueError("direction grid is empty")
            if self.step_deg is not None and self.step_deg <= 0:
                raise ValueError("angular step must be positive")

    def __len__(self):
        return len(self.points) if self.kind == "points" else len(self.theta)

    @classmethod
    def elevation_cut(cls, step_deg: float = 1.0, phi: float = 0.0, span_deg: float = 90.0, radius=None):
        """Signed-elevation cut from -span to +span in the plane at azimuth ``phi``."""
        if step_deg <= 0:
            raise ValueError("angular step must be positive")
        n = int(round(2 * span_deg / step_deg))
        theta = np.deg2rad(np.linspace(-span_deg, span_deg, n + 1))
        return cls(theta, np.full_like(theta, phi), radius, kind="cut", step_deg=step_deg)

    @classmethod
    def sphere(cls, step_deg: float = 1.0, radius=None):
        """Full sphere: theta 0..180 and phi 0..360 inclusive, theta-major."""
        if step_deg <= 0:
            raise ValueError("angular step must be positive")
        nt = int(round(180.0 / step_deg))
        npf = int(round(360.0 / step_deg))
        th = np.deg2rad(np.linspace(0.0, 180.0, nt + 1))
        ph = np.deg2rad(np.linspace(0.0, 360.0, npf + 1))
        T, P = np.meshgrid(th, ph, indexing="ij")
        return cls(T.ravel(), P.ravel(), radius, shape=T.shape, kind="sphere", step_deg=step_deg)

    @classmethod
    def directions(cls, theta, phi, radius=None):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape).copy()
        return cls(theta, phi, radius)

    @classmethod
    def at_points(cls, points):
        return cls(points=np.atleast_2d(np.asarray(points, dtype=float)), kind="points")

    def cartesian(self, config: SystemConfig) -> np.ndarray:
        if self.kind == "points":
            return self.points
        r = self.radius if self.radius is not None else config.far_radius
        return spherical_to_cartesian(r, self.theta, self.phi)


@dataclass
class RadiationPattern:
    grid: ObservationGrid
    values: np.ndarray
    frequency: float
    pattern: CodePattern | None = None
    config: SystemConfig | None = None
    table: StateTable | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.grid),):
            raise ValueError("one sample per grid entry required")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field samples must be finite")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def mag_db(self, normalize: bool = True) -> np.ndarray:
        mag = self.magnitude
        ref = mag.max() if normalize and mag.max() > 0 else 1.0
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(mag / ref)

    @property
    def theta_deg(self) -> np.ndarray:
        return np.rad2deg(self.grid.theta)

    @property
    def phi_deg(self) -> np.ndarray:
        return np.rad2deg(self.grid.phi)

    def field_at(self, theta: float, phi: float) -> complex:
        """Evaluate the source lens in any direction at the grid radius."""
        if self.pattern is None or self.config is None:
            raise ValueError("pattern carries no source model")
        r = self.grid.radius if self.grid.radius is not None else self.config.far_radius
        pt = spherical_to_cartesian(r, theta, phi)
        return transmitted_field(pt, self.pattern, self.config, self.table)

    def scaled(self, factor: complex) -> "RadiationPattern":
        return RadiationPattern(self.grid, self.values * factor, self.frequency, None, None, None, dict(self.meta))


def radiation_pattern(
    pattern: CodePattern,
    grid: ObservationGrid,
    config: SystemConfig,
    table: StateTable | None = None,
    workers: int = 1,
) -> RadiationPattern:
    table = table if table is not None else pattern.response_table()
    values = transmitted_field(grid.cartesian(config), pattern, config, table, workers=workers)
    return RadiationPattern(grid, np.atleast_1d(values), config.frequency, pattern, config, table)


@dataclass
class SurfaceMap:
    x: np.ndarray
    y: np.ndarray
    z: float
    magnitude: np.ndarray  # shape (len(y), len(x))
    normalized: bool


def efield_surface_map(
    pattern: CodePattern,
    z_plane: float,
    config: SystemConfig,
    table: StateTable | None = None,
    half_width: float | None = None,
    n: int = 61,
    normalize: bool = True,
    workers: int = 1,
) -> SurfaceMap:
    """|E| on an n x n raster in the plane z = ``z_plane`` centred on the lens axis."""
    if not z_plane > 0:
        raise ValueError("z_plane must be positive")
    if half_width is None:
        half_width = max(config.aperture_size)
    xs = np.linspace(-half_width, half_width, n)
    ys = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, z_plane)])
    mag = np.abs(transmitted_field(pts, pattern, config, table, workers=workers)).reshape(X.shape)
    if normalize and mag.max() > 0:
        mag = mag / mag.max()
    return SurfaceMap(xs, ys, z_plane, mag, normalize)


def write_pattern_csv(rp: RadiationPattern, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["theta_deg", "phi_deg", "re", "im", "mag_db"])
    if rp.grid.kind == "points":
        raise ValueError("point grids have no angular coordinates")
    db = rp.mag_db()
    for t, p, v, m in zip(rp.theta_deg, rp.phi_deg, rp.values, db):
        w.writerow([f"{t:.6f}", f"{p:.6f}", f"{v.real:.9e}", f"{v.imag:.9e}", f"{m:.6f}" if math.isfinite(m) else "-inf"])


def read_pattern_csv(fh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return theta_deg, phi_deg and complex values from a pattern CSV."""
    rows = list(csv.DictReader(fh))
    th = np.array([float(r["theta_deg"]) for r in rows])
    ph = np.array([float(r["phi_deg"]) for r in rows])
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return th, ph, vals


def write_surface_csv(sm: SurfaceMap, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x_m", "y_m", "mag_norm"])
    for iy, y in enumerate(sm.y):
        for ix, x in enumerate(sm.x):
            w.writerow([f"{x:.6f}", f"{y:.6f}", f"{sm.magnitude[iy, ix]:.9e}"])
