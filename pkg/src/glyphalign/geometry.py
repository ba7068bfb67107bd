"""Condition-image layout and pixel/token coordinate spaces.

Coordinates use a top-left origin with x to the right and y downward.
Pixel rectangles are half-open, ``[x1, x2) x [y1, y2)``. Token coordinates
address the top-left corner of a token, so token ``(0, 0)`` covers pixels
``[0, f) x [0, f)`` for a latent factor ``f``.
"""
from __future__ import annotations

import enum
import math
import unicodedata
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EmptyText, UnsupportedCodePoint

CONDITION_HEIGHT = 64
CELL_SIZE = 64
DEFAULT_LATENT_FACTOR = 16

AdvanceWidths = Callable[[str], float]


@dataclass(frozen=True)
class PixelRect:
    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if min(self.x1, self.y1, self.x2, self.y2) < 0:
            raise ValueError(f"negative coordinate in {self}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    def intersects(self, other: "PixelRect", margin: int = 0) -> bool:
        return not (
            self.x2 + margin <= other.x1
            or other.x2 + margin <= self.x1
            or self.y2 + margin <= other.y1
            or other.y2 + margin <= self.y1
        )

    def contains(self, other: "PixelRect") -> bool:
        return (
            self.x1 <= other.x1
            and self.y1 <= other.y1
            and other.x2 <= self.x2
            and other.y2 <= self.y2
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)


class ScriptKind(enum.Enum):
    ALPHABETIC = "alphabetic"
    LOGOGRAPHIC = "logographic"


@dataclass(frozen=True)
class ScriptClass:
    kind: ScriptKind
    name: str

    @property
    def is_logographic(self) -> bool:
        return self.kind is ScriptKind.LOGOGRAPHIC


LATIN = ScriptClass(ScriptKind.ALPHABETIC, "latin")
GREEK = ScriptClass(ScriptKind.ALPHABETIC, "greek")
THAI = ScriptClass(ScriptKind.ALPHABETIC, "thai")
CJK = ScriptClass(ScriptKind.LOGOGRAPHIC, "cjk")
KANA = ScriptClass(ScriptKind.LOGOGRAPHIC, "kana")
HANGUL = ScriptClass(ScriptKind.LOGOGRAPHIC, "hangul")

KNOWN_SCRIPTS = {s.name: s for s in (LATIN, GREEK, THAI, CJK, KANA, HANGUL)}

# (first, last, script) inclusive code point ranges; anything else is latin.
_RANGES = [
    (0x0370, 0x03FF, GREEK),
    (0x1F00, 0x1FFF, GREEK),
    (0x0E00, 0x0E7F, THAI),
    (0x3040, 0x30FF, KANA),
    (0x31F0, 0x31FF, KANA),
    (0x1100, 0x11FF, HANGUL),
    (0x3130, 0x318F, HANGUL),
    (0xAC00, 0xD7AF, HANGUL),
    (0x3400, 0x4DBF, CJK),
    (0x4E00, 0x9FFF, CJK),
    (0xF900, 0xFAFF, CJK),
    (0x3000, 0x303F, CJK),
    (0xFF00, 0xFFEF, CJK),
    (0x20000, 0x2FA1F, CJK),
]


def script_of(char: str) -> ScriptClass:
    cp = ord(char)
    for lo, hi, script in _RANGES:
        if lo <= cp <= hi:
            return script
    return LATIN


def split_script_runs(text: str) -> list[tuple[str, ScriptClass]]:
    """Split ``text`` into maximal same-script runs, in input order.

    Whitespace, combining marks and punctuation attach to the run that is
    currently open rather than starting a new one.
    """
    runs: list[tuple[str, ScriptClass]] = []
    buf: list[str] = []
    current: ScriptClass | None = None
    for ch in text:
        neutral = ch.isspace() or unicodedata.category(ch)[0] in "MPZ"
        script = script_of(ch)
        if current is None:
            current = script
        elif script != current and not neutral:
            runs.append(("".join(buf), current))
            buf, current = [], script
        buf.append(ch)
    if buf:
        runs.append(("".join(buf), current))
    return runs


@dataclass(frozen=True)
class TokenGrid:
    rows: int
    cols: int
    latent_factor: int = DEFAULT_LATENT_FACTOR
    origin: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.latent_factor < 1:
            raise ValueError("latent_factor must be >= 1")
        if self.rows < 0 or self.cols < 0:
            raise ValueError("token counts must be non-negative")

    @classmethod
    def for_pixels(cls, height: int, width: int, latent_factor: int = DEFAULT_LATENT_FACTOR) -> "TokenGrid":
        if latent_factor < 1:
            raise ValueError("latent_factor must be >= 1")
        return cls(
            rows=math.ceil(height / latent_factor),
            cols=math.ceil(width / latent_factor),
            latent_factor=latent_factor,
        )

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def coords(self) -> np.ndarray:
        """Row-major ``(rows*cols, 2)`` array of integer token coordinates ``(x, y)``."""
        ys, xs = np.mgrid[0 : self.rows, 0 : self.cols]
        return np.column_stack([xs.ravel(), ys.ravel()]).astype(float)


def pixel_to_token(p: Sequence[float], grid: TokenGrid) -> tuple[float, float]:
    f = grid.latent_factor
    return ((p[0] - grid.origin[0]) / f, (p[1] - grid.origin[1]) / f)


def token_to_pixel(t: Sequence[float], grid: TokenGrid) -> tuple[float, float]:
    f = grid.latent_factor
    return (t[0] * f + grid.origin[0], t[1] * f + grid.origin[1])


@dataclass(frozen=True)
class ConditionLayout:
    cells: tuple[tuple[str, PixelRect], ...]
    canvas_width: int
    script: ScriptClass
    canvas_height: int = CONDITION_HEIGHT

    @property
    def text(self) -> str:
        return "".join(t for t, _ in self.cells)

    def token_grid(self, latent_factor: int = DEFAULT_LATENT_FACTOR) -> TokenGrid:
        return TokenGrid.for_pixels(self.canvas_height, self.canvas_width, latent_factor)

    def to_json(self) -> dict:
        return {
            "script": self.script.name,
            "kind": self.script.kind.value,
            "height": self.canvas_height,
            "width": self.canvas_width,
            "cells": [
                {"text": t, "x1": r.x1, "y1": r.y1, "x2": r.x2, "y2": r.y2}
                for t, r in self.cells
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConditionLayout":
        name = data["script"]
        if "kind" in data:
            script = ScriptClass(ScriptKind(data["kind"]), name)
        else:
            script = KNOWN_SCRIPTS[name]
        cells = tuple(
            (c["text"], PixelRect(c["x1"], c["y1"], c["x2"], c["y2"])) for c in data["cells"]
        )
        return cls(cells=cells, canvas_width=int(data["width"]), script=script,
                   canvas_height=int(data["height"]))


def round_up(value: float, multiple: int) -> int:
    return int(math.ceil(value / multiple - 1e-9)) * multiple


def build_condition_layout(
    text: str,
    script: ScriptClass,
    width_policy: AdvanceWidths | None = None,
    latent_factor: int = DEFAULT_LATENT_FACTOR,
    supports: Callable[[str], bool] | None = None,
    allow_fallback: bool = False,
    min_tokens: int = 2,
) -> ConditionLayout:
    """Lay out ``text`` on a 64-pixel-high condition canvas.

    Logographic scripts get one 64x64 cell per character, tiled left to
    right. Alphabetic scripts get a single strip whose width is the shaped
    advance width rounded up to a multiple of ``latent_factor`` (and at least
    ``min_tokens`` tokens wide so the affine alignment stays well defined).

    ``supports`` is an optional glyph-coverage predicate; a code point it
    rejects raises :class:`UnsupportedCodePoint` unless ``allow_fallback``.
    """
    if not text:
        raise EmptyText("condition text is empty")
    if supports is not None and not allow_fallback:
        for ch in text:
            if not ch.isspace() and not supports(ch):
                raise UnsupportedCodePoint(ch)

    if script.is_logographic:
        cells = tuple(
            (ch, PixelRect(i * CELL_SIZE, 0, (i + 1) * CELL_SIZE, CELL_SIZE))
            for i, ch in enumerate(text)
        )
        return ConditionLayout(cells=cells, canvas_width=CELL_SIZE * len(text), script=script)

    if width_policy is None:
        raise ValueError("alphabetic layout needs a width policy")
    advance = float(width_policy(text))
    if not math.isfinite(advance) or advance <= 0:
        raise ValueError(f"invalid advance width {advance!r} for {text!r}")
    width = max(round_up(advance, latent_factor), min_tokens * latent_factor)
    cells = ((text, PixelRect(0, 0, width, CONDITION_HEIGHT)),)
    return ConditionLayout(cells=cells, canvas_width=width, script=script)


def build_mixed_layouts(
    text: str,
    width_policy: AdvanceWidths | None = None,
    latent_factor: int = DEFAULT_LATENT_FACTOR,
    **kwargs,
) -> list[ConditionLayout]:
    """One layout per maximal same-script run of ``text``."""
    return [
        build_condition_layout(run, script, width_policy, latent_factor, **kwargs)
        for run, script in split_script_runs(text)
    ]


def concat_offsets(layouts: Iterable[ConditionLayout]) -> list[int]:
    """x offset of each layout when strips are concatenated left to right."""
    offsets, x = [], 0
    for layout in layouts:
        offsets.append(x)
        x += layout.canvas_width
    return offsets
