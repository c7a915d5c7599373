"""Bias-line frames, codebook text format and pattern files.

A frame holds six 12-character column sequences (SQ1..SQ6). Sequence c drives
lens column c; its characters run down the column, two per cell, upper diode
first. The twelve ground lines carry no data and are appended as a constant
trailer when the full 84-line word is requested.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cells import default_state_table, uniform_alphabet
from .synthesis import LIBRARY_PHI, CodePattern, SteeringTarget, builtin_state_library, decode_columns

FRAME_COLUMNS = 6
FRAME_ROWS = 6
SEQ_LEN = 2 * FRAME_ROWS
GROUND_LINES = 12


class DimensionError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class BiasFrame:
    columns: tuple[str, ...]
    ground: tuple[bool, ...] = (True,) * GROUND_LINES

    def __post_init__(self):
        cols = tuple(self.columns)
        if len(cols) != FRAME_COLUMNS:
            raise ParseError(f"expected {FRAME_COLUMNS} column sequences, got {len(cols)}")
        for i, seq in enumerate(cols, start=1):
            _check_sequence(seq, i)
        object.__setattr__(self, "columns", cols)
        if len(self.ground) != GROUND_LINES:
            raise ParseError(f"expected {GROUND_LINES} ground flags")

    @property
    def diode_bits(self) -> str:
        return "".join(self.columns)

    def line_word(self) -> str:
        """All 84 bias lines: 72 diode bits then the asserted ground trailer."""
        return self.diode_bits + "".join("1" if g else "0" for g in self.ground)

    def to_text(self) -> str:
        return "\n".join(self.columns) + "\n"

    def hamming(self, other: "BiasFrame") -> int:
        return sum(a != b for a, b in zip(self.diode_bits, other.diode_bits))


def _check_sequence(seq: str, line: int, offset: int = 0) -> None:
    for col, ch in enumerate(seq, start=1):
        if ch not in "01":
            raise ParseError(f"illegal character {ch!r}", line, col + offset)
    if len(seq) != SEQ_LEN:
        raise ParseError(f"sequence has {len(seq)} characters, expected {SEQ_LEN}", line)


def encode_bias_frame(pattern: CodePattern) -> BiasFrame:
    if pattern.shape != (FRAME_ROWS, FRAME_COLUMNS) or pattern.bits != 2:
        raise DimensionError(f"frames need a 6x6 2-bit pattern, got {pattern.shape} at {pattern.bits} bits")
    grid = pattern.bit_grid()
    cols = tuple("".join(grid[r][c] for r in range(FRAME_ROWS)) for c in range(FRAME_COLUMNS))
    return BiasFrame(cols)


def decode_bias_frame(frame, label: str = "", target: SteeringTarget | None = None) -> CodePattern:
    """Inverse of :func:`encode_bias_frame`; also accepts six strings or frame text."""
    if isinstance(frame, str):
        frame = parse_frame_text(frame)
    elif not isinstance(frame, BiasFrame):
        frame = BiasFrame(tuple(frame))
    return decode_columns(frame.columns, label, target)


def parse_frame_text(text: str) -> BiasFrame:
    lines = [(n, ln.strip()) for n, ln in enumerate(text.splitlines(), start=1)]
    lines = [(n, ln) for n, ln in lines if ln and not ln.startswith("#")]
    if len(lines) != FRAME_COLUMNS:
        raise ParseError(f"expected {FRAME_COLUMNS} sequence lines, got {len(lines)}")
    for n, ln in lines:
        _check_sequence(ln, n)
    return BiasFrame(tuple(ln for _, ln in lines))


_HEADER = re.compile(r"^\[(?P<label>[^\]]+)\](?:\s+theta=(?P<theta>[+-]?\d+(?:\.\d+)?))?(?:\s+phi=(?P<phi>[+-]?\d+(?:\.\d+)?))?\s*$")


def _fmt_angle(v: float) -> str:
    if round(v, 6) == 0:
        return "0"
    return f"{v:+.6f}".rstrip("0").rstrip(".")


def emit_codebook(patterns) -> str:
    """Labelled frames, one block per pattern separated by blank lines."""
    blocks = []
    for p in patterns:
        head = f"[{p.label or 'unnamed'}]"
        if p.target is not None:
            head += f" theta={_fmt_angle(p.target.theta_deg)} phi={_fmt_angle(p.target.phi_deg).lstrip('+')}"
        blocks.append(head + "\n" + encode_bias_frame(p).to_text())
    return "\n".join(blocks)


def parse_codebook(text: str) -> list[CodePattern]:
    out: list[CodePattern] = []
    label = target = None
    seqs: list[str] = []
    start = 0

    def flush(lineno):
        nonlocal label, target, seqs
        if label is None:
            return
        if len(seqs) != FRAME_COLUMNS:
            raise ParseError(f"block [{label}] has {len(seqs)} sequence lines, expected {FRAME_COLUMNS}", start)
        out.append(decode_columns(seqs, label, target))
        label, target, seqs = None, None, []

    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            flush(n)
            m = _HEADER.match(line)
            if not m:
                raise ParseError("malformed block header", n, 1)
            label, start = m.group("label"), n
            if m.group("theta") is not None:
                phi = float(m.group("phi")) if m.group("phi") is not None else math.degrees(LIBRARY_PHI)
                target = SteeringTarget.from_degrees(float(m.group("theta")), phi)
            continue
        if label is None:
            raise ParseError("sequence line outside a [label] block", n, 1)
        _check_sequence(line, n)
        seqs.append(line)
        if len(seqs) > FRAME_COLUMNS:
            raise ParseError(f"block [{label}] has more than {FRAME_COLUMNS} sequence lines", n)
    flush(None)
    return out


def builtin_codebook_text() -> str:
    return emit_codebook(builtin_state_library())


def pattern_to_json(p: CodePattern) -> dict:
    doc = {
        "rows": p.shape[0],
        "cols": p.shape[1],
        "bits": p.bits,
        "states": p.bit_grid(),
        "label": p.label,
        "target_deg": None if p.target is None else p.target.theta_deg,
    }
    if p.target is not None:
        doc["phi_deg"] = p.target.phi_deg
    if p.table is not None and p.table == default_state_table():
        doc["alphabet"] = "paper"
    elif p.table is not None and p.table == uniform_alphabet(p.bits).as_table():
        doc["alphabet"] = "uniform"
    return doc


def pattern_from_json(doc: dict) -> CodePattern:
    try:
        grid = doc["states"]
        rows, cols = int(doc["rows"]), int(doc["cols"])
    except KeyError as exc:
        raise ParseError(f"missing key {exc}") from exc
    bits = int(doc.get("bits", len(grid[0][0]) if grid and grid[0] else 2))
    if len(grid) != rows or any(len(r) != cols for r in grid):
        raise ParseError(f"states grid does not match {rows}x{cols}")
    states = np.array([[int(s, 2) for s in r] for r in grid])
    target = None
    if doc.get("target_deg") is not None:
        target = SteeringTarget.from_degrees(float(doc["target_deg"]), float(doc.get("phi_deg", 0.0)))
    alphabet = doc.get("alphabet")
    table = None
    if alphabet == "paper":
        table = default_state_table()
    elif alphabet == "uniform":
        table = uniform_alphabet(bits).as_table()
    return CodePattern(states, doc.get("label", ""), target, bits, table=table)


def load_pattern(path) -> CodePattern:
    """Read a pattern from JSON, a codebook block or plain frame text."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return pattern_from_json(json.loads(text))
    if stripped.startswith("["):
        book = parse_codebook(text)
        if len(book) != 1:
            raise ParseError(f"pattern file holds {len(book)} blocks, expected 1")
        return book[0]
    return decode_bias_frame(parse_frame_text(text), label=Path(path).stem)
