"""Beamforming workbench for a 6x6 programmable transmit-metamaterial lens.

The lens is modelled as a grid of equivalent sources driven by a horn feed.
Each cell applies one of a few discrete transmission states.
"""

from .cells import (
    CellState,
    PhaseAlphabet,
    StateTable,
    default_state_table,
    uniform_alphabet,
    wrap_phase,
)
from .control_io import (
    BiasFrame,
    ParseError,
    decode_bias_frame,
    emit_codebook,
    encode_bias_frame,
    parse_codebook,
)
from .field import ObservationGrid, RadiationPattern, radiation_pattern, transmitted_field
from .geometry import (
    ConfigError,
    FeedModel,
    FieldRegion,
    SystemConfig,
    classify_field_region,
    region_bounds,
)
from .metrics import PatternMetrics, compute_metrics, directivity, side_lobe_level, steering_accuracy
from .synthesis import (
    CodePattern,
    SteeringTarget,
    builtin_state_library,
    quantize_phases,
    synthesize_focus,
    synthesize_pattern,
)
from .tracking import Trajectory, run_tracking

__version__ = "0.1.0"

__all__ = [
    "BiasFrame", "CellState", "CodePattern", "ConfigError", "FeedModel", "FieldRegion",
    "ObservationGrid", "ParseError", "PatternMetrics", "PhaseAlphabet", "RadiationPattern",
    "StateTable", "SteeringTarget", "SystemConfig", "Trajectory", "builtin_state_library",
    "classify_field_region", "compute_metrics", "decode_bias_frame", "default_state_table",
    "directivity", "emit_codebook", "encode_bias_frame", "parse_codebook", "quantize_phases",
    "radiation_pattern", "region_bounds", "run_tracking", "side_lobe_level", "steering_accuracy",
    "synthesize_focus", "synthesize_pattern", "transmitted_field", "uniform_alphabet", "wrap_phase",
]
