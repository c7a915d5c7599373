"""Receiver tracking for dynamic wireless power transfer.

The controller knows the receiver position at every step (genie-aided) and
either picks the best stored state or synthesizes a fresh pattern focused on
the receiver. Propagation is line-of-sight only.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .cells import StateTable, default_state_table
from .field import ObservationGrid, radiation_pattern, transmitted_field
from .geometry import SystemConfig, cartesian_to_spherical, spherical_to_cartesian
from .metrics import compute_metrics, main_lobe
from .synthesis import CodePattern, builtin_state_library, synthesize_focus

_TIE_RTOL = 1e-12


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray  # (N, 3) meters
    timestep: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if len(self.positions) == 0:
            raise ValueError("trajectory is empty")
        if len(self.times) != len(self.positions):
            raise ValueError("one time stamp per position required")
        if np.any(self.positions[:, 2] <= 0):
            raise ValueError("receiver positions must lie in the z > 0 half-space")

    def __len__(self):
        return len(self.positions)

    @classmethod
    def from_spherical(cls, times, r, theta_deg, phi_deg, timestep: float | None = None):
        pos = spherical_to_cartesian(r, np.deg2rad(theta_deg), np.deg2rad(phi_deg))
        times = np.asarray(times, dtype=float)
        if timestep is None:
            timestep = float(np.median(np.diff(times))) if len(times) > 1 else 0.0
        return cls(times, np.atleast_2d(pos), timestep)

    @classmethod
    def sweep(cls, theta_start, theta_stop, steps, r=20.0, phi_deg=90.0, dt=1.0):
        th = np.linspace(theta_start, theta_stop, steps)
        return cls.from_spherical(np.arange(steps) * dt, np.full(steps, r), th, np.full(steps, phi_deg), dt)

    def mirrored(self, axis: str = "y") -> "Trajectory":
        pos = self.positions.copy()
        pos[:, 0 if axis == "x" else 1] *= -1.0
        return Trajectory(self.times.copy(), pos, self.timestep)


@dataclass
class StepRecord:
    t: float
    label: str
    achieved_deg: float
    receiver_deg: float
    power_dbm: float
    pointing_error_deg: float


@dataclass
class TrackingResult:
    steps: list[StepRecord]
    mode: str
    summary: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.steps]

    @property
    def powers(self) -> np.ndarray:
        return np.array([s.power_dbm for s in self.steps])


def _signed_angle(pos: np.ndarray, phi_plane: float) -> float:
    """Signed elevation of ``pos`` within the plane at azimuth ``phi_plane``."""
    u = pos / np.linalg.norm(pos)
    along = u[0] * math.cos(phi_plane) + u[1] * math.sin(phi_plane)
    return math.degrees(math.atan2(along, u[2]))


def _target_key(p: CodePattern):
    t = p.target.theta_deg if p.target is not None else math.inf
    return (abs(round(t, 9)), round(t, 9), p.label)


def select_state(
    rx_position,
    library: list[CodePattern],
    config: SystemConfig,
    table: StateTable | None = None,
    current: int | None = None,
    hysteresis_db: float = 0.0,
) -> int:
    """Index of the library pattern delivering the most power at ``rx_position``.

    Ties go to the smaller |target angle|. With a hysteresis margin the current
    state is kept unless another beats it by more than the margin.
    """
    if not library:
        raise ValueError("library is empty")
    rx = np.asarray(rx_position, dtype=float)
    power = np.array([abs(transmitted_field(rx, p, config, table)) ** 2 for p in library])
    best_val = power.max()
    tied = [i for i in range(len(library)) if power[i] >= best_val * (1.0 - _TIE_RTOL)]
    best = min(tied, key=lambda i: _target_key(library[i]))
    if current is not None and hysteresis_db > 0 and power[current] > 0:
        if 10.0 * math.log10(power[best] / power[current]) <= hysteresis_db:
            return current
    return best


def free_space_loss_db(distance: float, wavelength: float) -> float:
    return 20.0 * math.log10(4.0 * math.pi * distance / wavelength)


@lru_cache(maxsize=32)
def _calibration(config: SystemConfig, table: StateTable) -> float:
    """Scale K with 20 log10(|E|/K) = gain - free-space loss at State IV boresight."""
    ref = next(p for p in builtin_state_library() if p.label == "State IV")
    gain = compute_metrics(ref, config, table, step_deg=1.0).realized_gain
    r = config.far_radius
    e = abs(transmitted_field(np.array([0.0, 0.0, r]), ref, config, table))
    return e * r * 4.0 * math.pi / (config.wavelength * 10.0 ** (gain / 20.0))


def received_power(
    pattern: CodePattern,
    rx_position,
    config: SystemConfig,
    table: StateTable | None = None,
    rx_gain_dbi: float = 0.0,
    pt_dbm: float | None = None,
) -> float:
    """Received power in dBm: P_t + 20 log10|E_normalized(rx)| + receiver gain."""
    rx = np.asarray(rx_position, dtype=float)
    if rx[2] <= 0:
        raise ValueError("receiver must lie in the z > 0 half-space")
    if pt_dbm is None:
        pt_dbm = 10.0 * math.log10(config.feed.power_w * 1e3)
    cal_table = table if table is not None else default_state_table()
    k = _calibration(config, cal_table)
    e = abs(transmitted_field(rx, pattern, config, table))
    with np.errstate(divide="ignore"):
        return float(pt_dbm + 20.0 * np.log10(e / k) + rx_gain_dbi)


def run_tracking(
    trajectory: Trajectory,
    config: SystemConfig,
    table: StateTable | None = None,
    mode: str = "library",
    library: list[CodePattern] | None = None,
    alphabet=None,
    hysteresis_db: float = 0.0,
    rx_gain_dbi: float = 0.0,
    cut_step_deg: float = 1.0,
) -> TrackingResult:
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    if mode not in ("library", "resynthesize"):
        raise ValueError(f"unknown tracking mode {mode!r}")
    table = table if table is not None else default_state_table()
    library = library if library is not None else builtin_state_library()
    lobe_cache: dict[tuple, float] = {}

    def achieved(p: CodePattern, phi_plane: float) -> float:
        key = (hash(p), round(phi_plane, 12))
        if key not in lobe_cache:
            rp = radiation_pattern(p, ObservationGrid.elevation_cut(cut_step_deg, phi_plane), config, table)
            lobe_cache[key] = main_lobe(rp)[0]
        return lobe_cache[key]

    steps = []
    current = None
    for t, pos in zip(trajectory.times, trajectory.positions):
        _, _, phi = cartesian_to_spherical(pos)
        phi_plane = float(phi) if math.hypot(pos[0], pos[1]) > 0 else math.pi / 2
        if phi_plane >= math.pi:
            phi_plane -= math.pi
        if mode == "library":
            current = select_state(pos, library, config, table, current, hysteresis_db)
            pat = library[current]
        else:
            alpha = alphabet if alphabet is not None else table
            pat = synthesize_focus(pos, config, alpha, label="resynthesized", optimize_offset=True)
        rx_deg = _signed_angle(pos, phi_plane)
        ach = achieved(pat, phi_plane)
        p_dbm = received_power(pat, pos, config, table, rx_gain_dbi)
        steps.append(StepRecord(float(t), pat.label, ach, rx_deg, p_dbm, ach - rx_deg))

    powers = np.array([s.power_dbm for s in steps])
    dips = [powers[i] - powers[i - 1] for i in range(1, len(steps)) if steps[i].label != steps[i - 1].label]
    summary = {
        "mode": mode,
        "steps": len(steps),
        "mean_power_dbm": float(np.mean(powers)),
        "min_power_dbm": float(np.min(powers)),
        "handovers": len(dips),
        "worst_handover_dip_db": float(max(0.0, -min(dips))) if dips else 0.0,
        "mean_abs_pointing_error_deg": float(np.mean([abs(s.pointing_error_deg) for s in steps])),
    }
    return TrackingResult(steps, mode, summary)


def load_trajectory(path) -> Trajectory:
    """CSV with t_s, r_m, theta_deg, phi_deg columns, or the equivalent JSON."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith(("{", "[")):
        doc = json.loads(text)
        pts = doc["points"] if isinstance(doc, dict) else doc
        dt = doc.get("timestep_s") if isinstance(doc, dict) else None
    else:
        pts = list(csv.DictReader(text.splitlines()))
        dt = None
    try:
        t = [float(p["t_s"]) for p in pts]
        r = [float(p["r_m"]) for p in pts]
        th = [float(p["theta_deg"]) for p in pts]
        ph = [float(p["phi_deg"]) for p in pts]
    except KeyError as exc:
        raise ValueError(f"trajectory record missing {exc}") from exc
    if not pts:
        raise ValueError("trajectory is empty")
    return Trajectory.from_spherical(t, r, th, ph, dt)


def write_tracking_csv(result: TrackingResult, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t_s", "state", "receiver_deg", "achieved_deg", "power_dbm", "pointing_error_deg"])
    for s in result.steps:
        w.writerow([f"{s.t:.6f}", s.label, f"{s.receiver_deg:.4f}", f"{s.achieved_deg:.4f}",
                    f"{s.power_dbm:.6f}", f"{s.pointing_error_deg:.4f}"])
