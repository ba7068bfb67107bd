"""Positional alignment of glyph-condition tokens for text-rendering diffusion models."""
from .errors import *  # noqa: F401,F403
from .geometry import (
    CJK,
    LATIN,
    ConditionLayout,
    PixelRect,
    ScriptClass,
    ScriptKind,
    TokenGrid,
    build_condition_layout,
    build_mixed_layouts,
    pixel_to_token,
    split_script_runs,
    token_to_pixel,
)
from .metrics import (
    PrecisionReport,
    TranscriptPair,
    aggregate,
    char_precision,
    sentence_precision,
)
from .pe import (
    AlignmentMap,
    Mode,
    RopeConfig,
    attention_probe,
    build_alignment_map,
    rope_encode,
    summarize_map,
)
from .warp import (
    AffineBoxMap,
    ControlPoints,
    OffsetMap,
    Space,
    TargetRegion,
    TpsWarp,
    affine_map,
    box_control_points,
    detect_fold,
    offset_map,
    tps_eval,
    tps_fit,
)

__version__ = "0.1.0"
