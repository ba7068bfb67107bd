"""Synthetic multilingual text-rendering data: targets, conditions, annotations."""
from .charsets import CHARSETS, LATIN_104, REFERENCE_STATS
from .dataset import build_dataset, read_annotations, sample_seed
from .render import FontAdvance, render_condition, render_mask
from .synth import (
    BoxAnnotation,
    DirectoryBackgrounds,
    ProceduralBackgrounds,
    SamplePolicy,
    SampleRecord,
    ScriptSpec,
    placeholder_prompt,
    record_alignment_map,
    sample_text,
    synthesize_sample,
)
