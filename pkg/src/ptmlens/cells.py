"""Unit-cell state alphabet and complex transmission response."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class CellState(enum.IntEnum):
    """Two-diode cell state; the code reads upper diode then lower diode."""

    S00 = 0
    S01 = 1
    S10 = 2
    S11 = 3

    @property
    def bits(self) -> str:
        return format(int(self), "02b")

    @property
    def upper_on(self) -> bool:
        return bool(int(self) & 0b10)

    @property
    def lower_on(self) -> bool:
        return bool(int(self) & 0b01)

    @classmethod
    def from_bits(cls, bits: str) -> "CellState":
        if len(bits) != 2 or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid state bits {bits!r}")
        return cls(int(bits, 2))


def bits_of(state: int, width: int = 2) -> str:
    return format(int(state), f"0{width}b")


def state_from_bits(bits: str) -> int:
    return int(bits, 2)


def wrap_phase(phase):
    """Wrap to [0, 2pi)."""
    out = np.mod(phase, TWO_PI)
    # np.mod returns exactly 2pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PhaseAlphabet:
    """Available phases of an n-bit cell, indexed by state code."""

    bits: int
    phases: tuple[float, ...]

    def __post_init__(self):
        if len(self.phases) != 2**self.bits:
            raise ValueError("alphabet must hold 2**bits phases")
        wrapped = [wrap_phase(p) for p in self.phases]
        object.__setattr__(self, "phases", tuple(wrapped))
        if len(set(np.round(wrapped, 12))) != len(wrapped):
            raise ValueError("alphabet phases must be distinct modulo 2pi")

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return (1.0,) * len(self.phases)

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.phases))

    def as_table(self, freq_hz: float | None = None) -> "StateTable":
        return StateTable(self.phases, self.amplitudes, freq_hz)


@dataclass(frozen=True)
class StateTable:
    """Per-state complex transmission: amplitude (linear) and phase (rad)."""

    phases: tuple[float, ...]
    amplitudes: tuple[float, ...]
    freq_hz: float | None = None

    def __post_init__(self):
        n = len(self.phases)
        if n < 2 or n & (n - 1):
            raise ValueError("state count must be a power of two >= 2")
        if len(self.amplitudes) != n:
            raise ValueError("one amplitude per state required")
        for a in self.amplitudes:
            if not 0.0 < a <= 1.0:
                raise ValueError(f"amplitude {a} outside (0, 1]")
        object.__setattr__(self, "phases", tuple(wrap_phase(p) for p in self.phases))
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))

    @property
    def bits(self) -> int:
        return len(self.phases).bit_length() - 1

    @property
    def coefficients(self) -> np.ndarray:
        return np.asarray(self.amplitudes) * np.exp(1j * np.asarray(self.phases))

    def scaled(self, factor: float) -> "StateTable":
        return StateTable(self.phases, tuple(a * factor for a in self.amplitudes), self.freq_hz)


Alphabet = PhaseAlphabet | StateTable


def state_response(state: int, table: StateTable) -> complex:
    return complex(table.amplitudes[int(state)] * np.exp(1j * table.phases[int(state)]))


def default_state_table() -> StateTable:
    """The measured 2-bit cell: 150, 180, 210, 240 degrees at 3.7 GHz, lossless."""
    phases = tuple(k * math.pi / 6.0 for k in (5, 6, 7, 8))
    return StateTable(phases, (1.0, 1.0, 1.0, 1.0), 3.7e9)


def uniform_alphabet(n: int) -> PhaseAlphabet:
    if not 1 <= n <= 4:
        raise ValueError(f"bit depth must be in 1..4, got {n}")
    m = 2**n
    return PhaseAlphabet(n, tuple(TWO_PI * i / m for i in range(m)))


def as_table(alphabet: Alphabet) -> StateTable:
    return alphabet if isinstance(alphabet, StateTable) else alphabet.as_table()


def table_from_dict(doc: dict) -> StateTable:
    states = doc["states"]
    width = len(next(iter(states)))
    n = 2**width
    phases, amps = [], []
    for code in range(n):
        key = bits_of(code, width)
        if key not in states:
            raise ValueError(f"state table missing entry {key!r}")
        entry = states[key]
        phases.append(math.radians(float(entry["phase_deg"])))
        amps.append(float(entry.get("amp", 1.0)))
    return StateTable(tuple(phases), tuple(amps), doc.get("freq_hz"))


def table_to_dict(table: StateTable) -> dict:
    width = table.bits
    return {
        "states": {
            bits_of(i, width): {"amp": a, "phase_deg": math.degrees(p)}
            for i, (a, p) in enumerate(zip(table.amplitudes, table.phases))
        },
        "freq_hz": table.freq_hz,
    }


def load_state_table(path) -> StateTable:
    with open(path) as fh:
        return table_from_dict(json.load(fh))
