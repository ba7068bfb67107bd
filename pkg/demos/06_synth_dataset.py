"""
Synthetic training data
=======================

Random Latin text drawn in several target fonts on smooth random
backgrounds, with condition strips always drawn in one standard font.
Set GLYPHALIGN_FONTS to a directory holding the DejaVu fonts if they are
not in the default location.
"""
import json
import os
import sys
import tempfile
from pathlib import Path

from glyphalign.datagen import LATIN_104, SamplePolicy, ScriptSpec, build_dataset, read_annotations, record_alignment_map
from glyphalign.datagen.synth import SampleRecord
from glyphalign.pe import Mode, summarize_map

fonts = Path(os.environ.get("GLYPHALIGN_FONTS", "/usr/share/fonts/truetype/dejavu"))
if not (fonts / "DejaVuSans.ttf").exists():
    sys.exit(f"DejaVu fonts not found in {fonts}")

spec = ScriptSpec(
    name="latin",
    character_set=LATIN_104,
    fonts=[fonts / "DejaVuSerif.ttf", fonts / "DejaVuSansMono.ttf", fonts / "DejaVuSans-Bold.ttf"],
    condition_font=fonts / "DejaVuSans.ttf",
)

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="glyphalign-"))
manifest = build_dataset([spec], out, seed=0, counts={"latin": 50})
print(out)
print("mean boxes per image:", round(manifest["mean_boxes_per_image"], 3))
print("characters covered:", manifest["scripts"]["latin"]["covered_chars"], "/ 104")

rows = read_annotations(out / "annotations.jsonl")
first = rows[0]
print(first["prompt"])
print(json.dumps({k: first["boxes"][0][k] for k in ("x1", "y1", "x2", "y2", "text", "size")}))

# Every record can be turned into an alignment map directly.
record = SampleRecord.from_json(first)
print(summarize_map(record_alignment_map(record)))

# Rotated text is opt-in; its corner quad drives a TPS map.
slanted = build_dataset([spec], out / "slanted", seed=0, counts={"latin": 10},
                        policy=SamplePolicy(slant_degrees=15))
rec = SampleRecord.from_json(read_annotations(out / "slanted" / "annotations.jsonl")[0])
print(rec.boxes[0].angle, rec.boxes[0].quad)
print(summarize_map(record_alignment_map(rec, Mode.TPS)))
