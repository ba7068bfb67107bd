"""Synthetic sample generation: multi-font targets, standard-font conditions."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from ..errors import GlyphMissing, PlacementFailure
from ..geometry import (
    DEFAULT_LATENT_FACTOR,
    ConditionLayout,
    PixelRect,
    ScriptClass,
    ScriptKind,
    TokenGrid,
    build_condition_layout,
    concat_offsets,
)
from ..pe import AlignmentMap, Mode, build_alignment_map
from ..warp import ControlPoints, TargetRegion, box_control_points
from .render import (
    FontAdvance,
    concat_strips,
    covers,
    load_font,
    missing_chars,
    render_condition,
    render_mask,
    text_color,
)

PROMPT_TEMPLATES = (
    "A photo with the text {slots} written on it.",
    "A scene showing {slots}.",
    "A poster that reads {slots}.",
    "An image with text {slots} in natural placement.",
)


@dataclass(frozen=True)
class ScriptSpec:
    name: str
    character_set: str
    fonts: tuple[str, ...]
    condition_font: str
    samples_goal: int = 0
    kind: ScriptKind = ScriptKind.ALPHABETIC

    def __post_init__(self):
        object.__setattr__(self, "fonts", tuple(str(f) for f in self.fonts))
        object.__setattr__(self, "condition_font", str(self.condition_font))
        object.__setattr__(self, "kind", ScriptKind(self.kind))

    @property
    def script(self) -> ScriptClass:
        return ScriptClass(self.kind, self.name)

    def validate(self) -> None:
        if not self.character_set:
            raise ValueError(f"script {self.name!r}: empty character set")
        if len(set(self.character_set)) != len(self.character_set):
            dupes = sorted({c for c in self.character_set if self.character_set.count(c) > 1})
            raise ValueError(f"script {self.name!r}: duplicate characters {''.join(dupes)!r}")
        if not self.fonts:
            raise ValueError(f"script {self.name!r}: no target fonts")
        for path in (*self.fonts, self.condition_font):
            if not os.path.isfile(path):
                raise FileNotFoundError(path)
        gaps = missing_chars(self.condition_font, self.character_set)
        if gaps:
            raise GlyphMissing(self.condition_font, gaps)
        uncovered = [
            ch for ch in self.character_set
            if not any(covers(f, ch) for f in self.fonts)
        ]
        if uncovered:
            raise GlyphMissing(",".join(self.fonts), "".join(uncovered))


@dataclass(frozen=True)
class SamplePolicy:
    """Knobs for one synthetic sample.

    The box count is ``1 + Poisson(extra_box_rate)`` capped at
    ``max_boxes``, which gives a mean of about 1.7 boxes per image.
    ``length_range`` is inclusive; ``None`` picks a script-dependent default
    (3-11 characters for logographic scripts, 6-22 for alphabetic ones).
    ``slant_degrees`` > 0 turns on rotated boxes: each text is rotated by a
    uniform angle in ``[-slant_degrees, slant_degrees]`` and its corner
    quadrilateral is recorded for TPS alignment. Off by default.
    """

    extra_box_rate: float = 0.7
    max_boxes: int = 6
    fixed_boxes: int | None = None
    length_range: tuple[int, int] | None = None
    size_range: tuple[int, int] = (24, 96)
    retries: int = 50
    margin: int = 16
    condition_size: int = 48
    latent_factor: int = DEFAULT_LATENT_FACTOR
    slant_degrees: float = 0.0

    def box_count(self, rng: np.random.Generator) -> int:
        if self.fixed_boxes is not None:
            return self.fixed_boxes
        return int(min(1 + rng.poisson(self.extra_box_rate), self.max_boxes))

    def lengths(self, kind: ScriptKind) -> tuple[int, int]:
        if self.length_range is not None:
            return self.length_range
        return (3, 11) if kind is ScriptKind.LOGOGRAPHIC else (6, 22)


def sample_text(spec: ScriptSpec, rng: np.random.Generator, length_range: tuple[int, int]) -> str:
    lo, hi = length_range
    if not 1 <= lo <= hi <= 64:
        raise ValueError(f"length range {length_range} outside [1, 64]")
    n = int(rng.integers(lo, hi + 1))
    chars = spec.character_set
    idx = rng.integers(0, len(chars), size=n)
    return "".join(chars[i] for i in idx)


@dataclass(frozen=True)
class BoxAnnotation:
    rect: PixelRect
    text: str
    font: str
    size: int
    origin: tuple[int, int]
    layout: ConditionLayout
    condition_x: int
    angle: float = 0.0
    quad: tuple[tuple[float, float], ...] | None = None

    def to_json(self) -> dict:
        r = self.rect
        extra = {}
        if self.quad is not None:
            extra = {"angle": self.angle, "quad": [list(q) for q in self.quad]}
        return extra | {
            "x1": r.x1, "y1": r.y1, "x2": r.x2, "y2": r.y2,
            "text": self.text,
            "font": self.font,
            "size": self.size,
            "origin": list(self.origin),
            "condition_x": self.condition_x,
            "layout": self.layout.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "BoxAnnotation":
        return cls(
            rect=PixelRect(d["x1"], d["y1"], d["x2"], d["y2"]),
            text=d["text"],
            font=d["font"],
            size=int(d["size"]),
            origin=tuple(d["origin"]),
            layout=ConditionLayout.from_json(d["layout"]),
            condition_x=int(d["condition_x"]),
            angle=float(d.get("angle", 0.0)),
            quad=tuple(tuple(map(float, q)) for q in d["quad"]) if "quad" in d else None,
        )

    def control_points(self, latent_factor: int = DEFAULT_LATENT_FACTOR) -> ControlPoints:
        """Corner landmarks from the condition grid to this box, in tokens.

        Uses the recorded quadrilateral when the text was rotated, else the
        rectangle corners (inclusive last pixel, as for affine regions).
        """
        f = latent_factor
        if self.quad is not None:
            corners = [(x / f, y / f) for x, y in self.quad]
        else:
            t = TargetRegion.from_pixel_box(self.rect, f)
            corners = [(t.x1, t.y1), (t.x2, t.y1), (t.x2, t.y2), (t.x1, t.y2)]
        grid = self.layout.token_grid(f)
        return box_control_points(grid.cols, grid.rows, corners)


@dataclass
class SampleRecord:
    script: str
    index: int
    seed: int
    width: int
    height: int
    boxes: list[BoxAnnotation]
    prompt: str
    image_ref: str = ""
    condition_ref: str = ""
    image: Image.Image | None = field(default=None, repr=False, compare=False)
    condition: Image.Image | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "script": self.script,
            "index": self.index,
            "seed": self.seed,
            "image": self.image_ref,
            "condition": self.condition_ref,
            "width": self.width,
            "height": self.height,
            "prompt": self.prompt,
            "boxes": [b.to_json() for b in self.boxes],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SampleRecord":
        return cls(
            script=d["script"],
            index=int(d["index"]),
            seed=int(d["seed"]),
            width=int(d["width"]),
            height=int(d["height"]),
            boxes=[BoxAnnotation.from_json(b) for b in d["boxes"]],
            prompt=d["prompt"],
            image_ref=d.get("image", ""),
            condition_ref=d.get("condition", ""),
        )


def placeholder_prompt(n_boxes: int, rng: np.random.Generator) -> str:
    slots = [f"<sks{i}>" for i in range(1, n_boxes + 1)]
    joined = slots[0] if len(slots) == 1 else ", ".join(slots[:-1]) + " and " + slots[-1]
    template = PROMPT_TEMPLATES[int(rng.integers(len(PROMPT_TEMPLATES)))]
    return template.format(slots=joined)


def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _rotate(mask: Image.Image, angle: float):
    """Rotate a text mask; return the ink-cropped result and its corner quad.

    The quad holds the rotated positions of the unrotated mask's corner
    pixels (top-left, top-right, bottom-right, bottom-left) relative to the
    cropped result. The crop covers both the ink and the whole quad, since
    the rotated corners are not always inked.
    """
    w, h = mask.size
    rotated = mask.rotate(angle, resample=Image.BICUBIC, expand=True)
    cx, cy = (w - 1) / 2, (h - 1) / 2
    ncx, ncy = (rotated.width - 1) / 2, (rotated.height - 1) / 2
    t = math.radians(angle)
    c, s = math.cos(t), math.sin(t)
    corners = [(0, 0), (w - 1, 0), (w - 1, h - 1), (0, h - 1)]
    # PIL rotates counterclockwise on screen, i.e. with y pointing down
    quad = [(ncx + (x - cx) * c + (y - cy) * s, ncy - (x - cx) * s + (y - cy) * c) for x, y in corners]
    ink = rotated.getbbox()
    qx, qy = [q[0] for q in quad], [q[1] for q in quad]
    # crop pads with zeros where the quad pokes past the expanded canvas
    box = (
        min(ink[0], math.floor(min(qx))),
        min(ink[1], math.floor(min(qy))),
        max(ink[2], math.ceil(max(qx)) + 1),
        max(ink[3], math.ceil(max(qy)) + 1),
    )
    rotated = rotated.crop(box)
    return rotated, [(x - box[0], y - box[1]) for x, y in quad]


def _place_box(text, fonts, image_size, taken, rng, policy):
    W, H = image_size
    lo, hi = policy.size_range
    m = policy.margin
    for _ in range(policy.retries):
        font = fonts[int(rng.integers(len(fonts)))]
        size = int(round(_log_uniform(rng, lo, hi)))
        angle = float(rng.uniform(-policy.slant_degrees, policy.slant_degrees)) if policy.slant_degrees else 0.0
        mask, offset = render_mask(text, font, size)
        if mask.width > W - 2 * m:
            size = int(size * (W - 2 * m) / mask.width)
            if size < lo:
                continue
            mask, offset = render_mask(text, font, size)
        quad = None
        if angle:
            mask, quad = _rotate(mask, angle)
        if mask.width > W - 2 * m or mask.height > H - 2 * m:
            continue
        x = int(rng.integers(m, W - m - mask.width + 1))
        y = int(rng.integers(m, H - m - mask.height + 1))
        rect = PixelRect(x, y, x + mask.width, y + mask.height)
        if any(rect.intersects(t, m) for t in taken):
            continue
        origin = (x - offset[0], y - offset[1])
        if quad is not None:
            quad = tuple((round(x + qx, 3), round(y + qy, 3)) for qx, qy in quad)
        return rect, font, size, origin, mask, angle, quad
    return None


def synthesize_sample(
    spec: ScriptSpec,
    background: Image.Image,
    rng: np.random.Generator,
    policy: SamplePolicy | None = None,
    seed: int = 0,
    index: int = 0,
) -> SampleRecord:
    """Compose one sample and its condition strip.

    Each text is drawn in a random target font at a random non-overlapping
    position; the condition strip renders the same texts with the script's
    condition font, concatenated left to right in box order. Boxes are the
    exact inked-pixel extents of each rendered text.
    """
    policy = policy or SamplePolicy()
    n_boxes = policy.box_count(rng)
    if n_boxes < 1:
        raise PlacementFailure("policy requested no text boxes")
    image = background.convert("RGB").copy()
    size = image.size
    advance = FontAdvance(spec.condition_font, policy.condition_size)
    taken: list[PixelRect] = []
    placed = []
    for b in range(n_boxes):
        text = sample_text(spec, rng, policy.lengths(spec.kind))
        fonts = [f for f in spec.fonts if covers(f, text)]
        if not fonts:
            raise GlyphMissing(",".join(spec.fonts), missing_chars(spec.fonts[0], text))
        hit = _place_box(text, fonts, size, taken, rng, policy)
        if hit is None:
            raise PlacementFailure(f"could not place box {b + 1} ({text!r}) after {policy.retries} tries")
        rect, font, font_size, origin, mask, angle, quad = hit
        color = text_color(image, rect.as_tuple(), rng)
        image.paste(color, rect.as_tuple(), mask)
        taken.append(rect)
        layout = build_condition_layout(text, spec.script, advance, policy.latent_factor)
        placed.append((rect, text, font, font_size, origin, layout, angle, quad))

    layouts = [p[5] for p in placed]
    offsets = concat_offsets(layouts)
    strips = [render_condition(l, spec.condition_font, policy.condition_size) for l in layouts]
    boxes = [
        BoxAnnotation(rect, text, font, fsize, origin, layout, off, angle, quad)
        for (rect, text, font, fsize, origin, layout, angle, quad), off in zip(placed, offsets)
    ]
    return SampleRecord(
        script=spec.name,
        index=index,
        seed=seed,
        width=size[0],
        height=size[1],
        boxes=boxes,
        prompt=placeholder_prompt(n_boxes, rng),
        image=image,
        condition=concat_strips(strips),
    )


def record_alignment_map(
    record: SampleRecord,
    mode: Mode = Mode.AFFINE,
    latent_factor: int = DEFAULT_LATENT_FACTOR,
    warn: bool = True,
) -> AlignmentMap:
    """Alignment map for a generated sample, each box at its inked extent.

    TPS mode pins the condition corners to each box's corners, following the
    recorded quadrilateral for rotated text.
    """
    grid = TokenGrid.for_pixels(record.height, record.width, latent_factor)
    layouts = []
    for box in record.boxes:
        region = TargetRegion.from_pixel_box(box.rect, latent_factor)
        if mode is Mode.AFFINE:
            spec = region
        elif mode is Mode.TPS:
            spec = (box.control_points(latent_factor), region)
        else:
            spec = None
        layouts.append((box.layout, spec))
    return build_alignment_map(layouts, grid, mode, warn=warn)


# ---------------------------------------------------------------------------
# backgrounds


@dataclass(frozen=True)
class ProceduralBackgrounds:
    """Smooth random color fields; a stand-in when no photo directory is given."""

    size: tuple[int, int] = (512, 512)

    def get(self, rng: np.random.Generator) -> Image.Image:
        coarse = rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8)
        return Image.fromarray(coarse, "RGB").resize(self.size, Image.BICUBIC)


@dataclass(frozen=True)
class DirectoryBackgrounds:
    """Text-free images from a directory, chosen uniformly per sample."""

    path: str
    min_size: tuple[int, int] = (256, 256)
    extensions: tuple[str, ...] = (".png", ".jpg", ".jpeg", ".bmp", ".webp")

    def files(self) -> list[Path]:
        files = sorted(
            p for p in Path(self.path).iterdir() if p.suffix.lower() in self.extensions
        )
        if not files:
            raise FileNotFoundError(f"no background images in {self.path}")
        return files

    def get(self, rng: np.random.Generator) -> Image.Image:
        files = self.files()
        with Image.open(files[int(rng.integers(len(files)))]) as im:
            img = im.convert("RGB")
        w, h = img.size
        scale = max(self.min_size[0] / w, self.min_size[1] / h, 1.0)
        if scale > 1:
            img = img.resize((math.ceil(w * scale), math.ceil(h * scale)), Image.BICUBIC)
        return img
