"""Ideal phase profiles, phase quantization and the built-in operating states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cells import (
    TWO_PI,
    Alphabet,
    PhaseAlphabet,
    StateTable,
    as_table,
    bits_of,
    default_state_table,
    uniform_alphabet,
    wrap_phase,
)
from .geometry import SystemConfig, lens_aperture

# Seven operating states of the fabricated lens; one 12-bit string per column SQ1..SQ6.
OPERATING_STATES = {
    "I": (30, ("011110010000", "101010101011", "110101101111", "110101101111", "101010101011", "011110010000")),
    "II": (20, ("010101010110", "000001101111", "110010111111", "110010111111", "000001101111", "010101010110")),
    "III": (10, ("010101010101", "000001101111", "011110111111", "011110111111", "000001101111", "010101010101")),
    "IV": (0, ("010101010101", "000001101001", "011110110001", "011110110001", "000001101001", "010101010101")),
    "V": (-10, ("010110010000", "101101100100", "101111101000", "101111101000", "101101100100", "010110010000")),
    "VI": (-20, ("010110010000", "101110100100", "101111011000", "101111011000", "101110100100", "010110010000")),
    "VII": (-30, ("010100010100", "110000101111", "111111011000", "111111011000", "110000101111", "010100010100")),
}

# The column sequences are mirror symmetric across the lens columns, so the
# built-in states steer in the y-z plane.
LIBRARY_PHI = math.pi / 2

_TIE_DECIMALS = 12


@dataclass(frozen=True)
class SteeringTarget:
    """Beam direction: signed elevation ``theta`` and azimuth ``phi`` (radians)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not -math.pi / 2 - 1e-12 <= self.theta <= math.pi / 2 + 1e-12:
            raise ValueError(f"theta {self.theta} outside [-pi/2, pi/2]")
        object.__setattr__(self, "phi", float(np.mod(self.phi, TWO_PI)))

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float = 0.0) -> "SteeringTarget":
        return cls(math.radians(theta_deg), math.radians(phi_deg))

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    @property
    def phi_deg(self) -> float:
        return math.degrees(self.phi)

    @property
    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(eq=False)
class CodePattern:
    """A rows x cols grid of state codes."""

    states: np.ndarray
    label: str = ""
    target: SteeringTarget | None = None
    bits: int = 2
    meta: dict = field(default_factory=dict)
    table: StateTable | None = None

    def __post_init__(self):
        self.states = np.array(self.states, dtype=np.int64)
        if self.states.ndim != 2:
            raise ValueError("code pattern must be two-dimensional")
        if self.states.min(initial=0) < 0 or self.states.max(initial=0) >= 2**self.bits:
            raise ValueError(f"state codes must lie in [0, {2 ** self.bits})")
        self.states.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.states.shape

    def __eq__(self, other):
        if not isinstance(other, CodePattern):
            return NotImplemented
        return self.bits == other.bits and np.array_equal(self.states, other.states)

    def __hash__(self):
        return hash((self.bits, self.states.tobytes(), self.states.shape))

    def bit_grid(self) -> list[list[str]]:
        return [[bits_of(s, self.bits) for s in row] for row in self.states]

    def flipped(self, axis: str) -> "CodePattern":
        """Mirror the grid: axis 'x' reverses columns, 'y' reverses rows."""
        states = self.states[:, ::-1] if axis == "x" else self.states[::-1, :]
        return CodePattern(states, self.label, self.target, self.bits, dict(self.meta), self.table)

    def response_table(self) -> StateTable:
        """Table used to evaluate this pattern when none is given explicitly."""
        if self.table is not None:
            return self.table
        if self.bits == 2:
            return default_state_table()
        return uniform_alphabet(self.bits).as_table()

    def __repr__(self):
        return f"CodePattern(label={self.label!r}, shape={self.shape}, bits={self.bits})"


def steering_axis(phi: float) -> str:
    """Grid axis along which a steering target with azimuth ``phi`` steers."""
    return "x" if abs(math.cos(phi)) >= abs(math.sin(phi)) else "y"


def _path_lengths(config: SystemConfig, cells: np.ndarray) -> tuple[np.ndarray, float]:
    feed = np.asarray(config.feed.position)
    S = np.sqrt(np.sum((cells - feed) ** 2, axis=1))
    S0 = float(np.sqrt(np.sum(feed**2)))
    return S, S0


def ideal_phase_profile(target: SteeringTarget, config: SystemConfig, extra_offset: float = 0.0) -> np.ndarray:
    """Continuous transmission phase per cell, wrapped to [0, 2pi), shape (rows, cols)."""
    cells = lens_aperture(config)
    S, S0 = _path_lengths(config, cells)
    u = math.sin(target.theta) * math.cos(target.phi)
    v = math.sin(target.theta) * math.sin(target.phi)
    x, y = cells[:, 0], cells[:, 1]
    phase = config.k0 * (S - S0 - x * u - y * v) + config.phase_offset + extra_offset
    return wrap_phase(phase).reshape(config.rows, config.cols)


def focus_phase_profile(point, config: SystemConfig) -> np.ndarray:
    """Phase profile that brings every cell's path to ``point`` into phase."""
    cells = lens_aperture(config)
    S, S0 = _path_lengths(config, cells)
    point = np.asarray(point, dtype=float)
    R = np.sqrt(np.sum((point - cells) ** 2, axis=1))
    R0 = float(np.linalg.norm(point))
    phase = config.k0 * (S - S0 + R - R0) + config.phase_offset
    return wrap_phase(phase).reshape(config.rows, config.cols)


def circular_distance(a, b):
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi)
    return d


def quantize_phases(phases, alphabet: Alphabet, rule: str = "nearest") -> np.ndarray:
    """Map each phase to a state code.

    ``nearest`` picks the minimum circular distance, ties to the lowest code.
    ``floor`` picks the state with the largest phase not exceeding the wrapped
    input (the binary {0, pi} binning rule, generalized).
    """
    phases = np.asarray(phases, dtype=float)
    ref = np.asarray(alphabet.phases)
    if rule == "nearest":
        dist = circular_distance(phases[..., None], ref)
        # rounding absorbs last-bit noise so exact ties resolve by code order
        return np.argmin(np.round(dist, _TIE_DECIMALS), axis=-1)
    if rule == "floor":
        order = np.argsort(ref, kind="stable")
        pos = np.searchsorted(ref[order], wrap_phase(phases), side="right") - 1
        return order[np.mod(pos, len(ref))]
    raise ValueError(f"unknown quantization rule {rule!r}")


def quantize_phase(phase: float, alphabet: Alphabet, rule: str = "nearest") -> int:
    return int(quantize_phases(phase, alphabet, rule))


def binary_bin(phase: float) -> float:
    """Binary bin of the 1-bit rule: 0 for [0, pi), pi for [pi, 2pi)."""
    return 0.0 if wrap_phase(phase) < math.pi else math.pi


def _decision_boundaries(alphabet: Alphabet) -> np.ndarray:
    ref = np.sort(np.asarray(alphabet.phases))
    nxt = np.roll(ref, -1)
    nxt[-1] += TWO_PI
    return np.mod((ref + nxt) / 2.0, TWO_PI)


def candidate_offsets(profile: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    """One primary-phase offset inside every interval on which the quantized pattern is constant."""
    cuts = np.mod(_decision_boundaries(alphabet)[None, :] - np.ravel(profile)[:, None], TWO_PI).ravel()
    cuts = np.unique(np.round(cuts, _TIE_DECIMALS))
    if len(cuts) == 0:
        return np.zeros(1)
    gaps = np.diff(np.append(cuts, cuts[0] + TWO_PI))
    return np.mod(cuts + gaps / 2.0, TWO_PI)


def _best_offset_pattern(profile, alphabet, point, config, label, target, meta):
    from .field import cell_contributions

    table = as_table(alphabet)
    per_cell = cell_contributions(point, config)
    coeffs = table.coefficients
    offsets = candidate_offsets(profile, alphabet)
    codes = quantize_phases(np.ravel(profile)[None, :] + offsets[:, None], alphabet)
    scores = np.abs(np.sum(per_cell[None, :] * coeffs[codes], axis=1))
    k = int(np.argmax(np.round(scores / scores.max(), _TIE_DECIMALS)))
    meta = dict(meta, offset_rad=float(offsets[k]))
    return CodePattern(codes[k].reshape(profile.shape), label, target, alphabet.bits, meta, table)


def synthesize_pattern(
    target: SteeringTarget,
    config: SystemConfig,
    alphabet: Alphabet | None = None,
    refine: bool = False,
    label: str = "",
    optimize_offset: bool = False,
) -> CodePattern:
    """Quantize the ideal profile for ``target`` onto ``alphabet``.

    With ``refine`` the received-field phase term is applied once: the pattern
    is evaluated at the far radius toward the target, k0 * r * |E| is added as
    a global phase offset, and the profile is re-quantized.

    With ``optimize_offset`` the free primary phase is chosen, among all values
    that yield distinct patterns, to maximize the far field toward the target.
    """
    alphabet = alphabet if alphabet is not None else uniform_alphabet(2)
    table = as_table(alphabet)
    profile = ideal_phase_profile(target, config)
    if optimize_offset:
        point = config.far_radius * target.unit_vector
        return _best_offset_pattern(profile, alphabet, point, config, label, target, {})
    pattern = CodePattern(quantize_phases(profile, alphabet), label, target, alphabet.bits, table=table)
    if refine:
        from .field import transmitted_field

        r = config.far_radius
        e = transmitted_field(r * target.unit_vector, pattern, config, table)
        profile = ideal_phase_profile(target, config, extra_offset=config.k0 * r * abs(e))
        states = quantize_phases(profile, alphabet)
        pattern = CodePattern(states, label, target, alphabet.bits, {"refined": True}, table)
    return pattern


def synthesize_focus(
    point, config: SystemConfig, alphabet: Alphabet | None = None, label: str = "", optimize_offset: bool = False
) -> CodePattern:
    """Pattern focusing on a 3-D point; see :func:`synthesize_pattern` for ``optimize_offset``."""
    alphabet = alphabet if alphabet is not None else uniform_alphabet(2)
    point = np.asarray(point, dtype=float)
    profile = focus_phase_profile(point, config)
    meta = {"focus_m": [float(v) for v in point]}
    if optimize_offset:
        return _best_offset_pattern(profile, alphabet, point, config, label, None, meta)
    states = quantize_phases(profile, alphabet)
    return CodePattern(states, label, None, alphabet.bits, meta, as_table(alphabet))


def decode_columns(columns, label: str = "", target: SteeringTarget | None = None) -> CodePattern:
    """Build a 6x6 pattern from six 12-character column sequences.

    Column string c fills grid column c top to bottom, two characters per
    cell, upper-diode bit first.
    """
    columns = list(columns)
    rows = len(columns[0]) // 2
    states = np.zeros((rows, len(columns)), dtype=np.int64)
    for c, seq in enumerate(columns):
        for r in range(rows):
            states[r, c] = int(seq[2 * r : 2 * r + 2], 2)
    return CodePattern(states, label, target, 2, table=default_state_table())


def builtin_state_library() -> list[CodePattern]:
    """States I..VII of the fabricated lens, targets +30 to -30 degrees."""
    out = []
    for label, (theta_deg, cols) in OPERATING_STATES.items():
        target = SteeringTarget(math.radians(theta_deg), LIBRARY_PHI)
        out.append(decode_columns(cols, f"State {label}", target))
    return out


__all__ = [
    "OPERATING_STATES",
    "LIBRARY_PHI",
    "SteeringTarget",
    "CodePattern",
    "PhaseAlphabet",
    "steering_axis",
    "ideal_phase_profile",
    "focus_phase_profile",
    "circular_distance",
    "quantize_phase",
    "quantize_phases",
    "binary_bin",
    "synthesize_pattern",
    "synthesize_focus",
    "decode_columns",
    "builtin_state_library",
]
