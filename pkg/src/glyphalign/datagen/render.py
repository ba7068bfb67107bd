"""Font loading, glyph coverage and text rasterization helpers."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

from ..geometry import CELL_SIZE, CONDITION_HEIGHT, ConditionLayout


@lru_cache(maxsize=256)
def load_font(path: str, size: int) -> ImageFont.FreeTypeFont:
    return ImageFont.truetype(path, size)


@lru_cache(maxsize=64)
def font_codepoints(path: str) -> frozenset[int]:
    with TTFont(path, lazy=True, fontNumber=0) as font:
        return frozenset(font.getBestCmap() or {})


def covers(path: str, text: str) -> bool:
    cmap = font_codepoints(path)
    return all(ch.isspace() or ord(ch) in cmap for ch in text)


def missing_chars(path: str, text: str) -> str:
    cmap = font_codepoints(path)
    return "".join(ch for ch in dict.fromkeys(text) if not ch.isspace() and ord(ch) not in cmap)


class FontAdvance:
    """Advance-width policy backed by the shaper of a real font."""

    def __init__(self, path: str, size: int = 48):
        self.path = path
        self.size = size

    def __call__(self, text: str) -> float:
        return load_font(self.path, self.size).getlength(text)

    def supports(self, char: str) -> bool:
        return covers(self.path, char)


def render_mask(text: str, font_path: str, size: int) -> tuple[Image.Image, tuple[int, int]]:
    """Rasterize ``text`` and crop to inked pixels.

    Returns the ``L`` mask and the offset of its top-left corner relative
    to the drawing origin, so drawing at origin ``o`` inks exactly
    ``o + offset`` up to ``o + offset + mask.size``.
    """
    font = load_font(font_path, size)
    left, top, right, bottom = font.getbbox(text)
    w, h = max(right - left, 1) + 2, max(bottom - top, 1) + 2
    canvas = Image.new("L", (w, h), 0)
    ImageDraw.Draw(canvas).text((1 - left, 1 - top), text, font=font, fill=255)
    ink = canvas.getbbox()
    if ink is None:
        raise ValueError(f"{text!r} renders no visible pixels with {font_path}")
    mask = canvas.crop(ink)
    return mask, (ink[0] - 1 + left, ink[1] - 1 + top)


def ink_bbox(image: Image.Image) -> tuple[int, int, int, int] | None:
    """Bounding box of non-zero pixels, or ``None`` for an empty image."""
    return image.getbbox()


def render_condition(layout: ConditionLayout, font_path: str, size: int = 48) -> Image.Image:
    """Draw a condition strip: black text on white, 64 pixels high."""
    img = Image.new("L", (layout.canvas_width, layout.canvas_height), 255)
    draw = ImageDraw.Draw(img)
    font = load_font(font_path, size)
    if layout.script.is_logographic:
        for ch, rect in layout.cells:
            cx = (rect.x1 + rect.x2) / 2
            draw.text((cx, CELL_SIZE / 2), ch, font=font, fill=0, anchor="mm")
    else:
        text, rect = layout.cells[0]
        advance = font.getlength(text)
        x0 = rect.x1 + max(0.0, (rect.width - advance) / 2)
        draw.text((x0, CONDITION_HEIGHT / 2), text, font=font, fill=0, anchor="lm")
    return img.convert("RGB")


def concat_strips(strips: list[Image.Image]) -> Image.Image:
    width = sum(s.width for s in strips)
    out = Image.new("RGB", (max(width, 1), CONDITION_HEIGHT), (255, 255, 255))
    x = 0
    for s in strips:
        out.paste(s, (x, 0))
        x += s.width
    return out


def text_color(background: Image.Image, box: tuple[int, int, int, int], rng: np.random.Generator) -> tuple[int, int, int]:
    """A random color that contrasts with the mean luminance under ``box``."""
    region = np.asarray(background.crop(box).convert("L"), dtype=float)
    dark = region.mean() > 127
    base = rng.integers(0, 70, size=3) if dark else rng.integers(185, 256, size=3)
    return tuple(int(c) for c in base)
