"""Positional coordinates for concatenated target + condition token sequences.

The target image keeps its natural token grid. Each condition patch gets
its tokens re-addressed by a warp so that, under a rotary encoding, a
condition token and the target token it lands on see the same rotation.

A small 2D rotary encoder is included to check that property numerically.
"""
from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, OverlapWarning
from .geometry import ConditionLayout, TokenGrid, concat_offsets
from .warp import (
    AffineBoxMap,
    ControlPoints,
    Diagnostics,
    OffsetMap,
    TargetRegion,
    TpsWarp,
    quantized_collisions,
    tps_fit,
)


class Mode(enum.Enum):
    AFFINE = "affine"
    TPS = "tps"
    LAYOUT_FREE = "offset"


TARGET = -1


class AlignmentEntry(NamedTuple):
    idx: int
    src: str  # "target" or "cond"
    box: int | None
    x: float
    y: float


def _sig9(x: float) -> float:
    return float(format(float(x), ".9g"))


@dataclass(frozen=True, eq=False)
class AlignmentMap:
    mode: Mode
    target_rows: int
    target_cols: int
    boxes: np.ndarray  # (n,) int, TARGET for target tokens, else box index
    coords: np.ndarray  # (n, 2) float, (x, y) in token units
    regions: tuple = ()  # declared TargetRegion (or None) per box
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def __len__(self):
        return len(self.boxes)

    @property
    def n_target(self) -> int:
        return int((self.boxes == TARGET).sum())

    @property
    def condition_mask(self) -> np.ndarray:
        return self.boxes != TARGET

    @property
    def entries(self) -> list[AlignmentEntry]:
        out = []
        for i, (b, (x, y)) in enumerate(zip(self.boxes.tolist(), self.coords.tolist())):
            if b == TARGET:
                out.append(AlignmentEntry(i, "target", None, x, y))
            else:
                out.append(AlignmentEntry(i, "cond", b, x, y))
        return out

    def to_json(self) -> dict:
        data = {
            "mode": self.mode.value,
            "target": {"rows": self.target_rows, "cols": self.target_cols},
            "entries": [
                {"idx": e.idx, "src": e.src, "box": e.box, "x": _sig9(e.x), "y": _sig9(e.y)}
                for e in self.entries
            ],
        }
        if any(r is not None for r in self.regions):
            data["boxes"] = [
                None if r is None else {"box": i, "x1": _sig9(r.x1), "y1": _sig9(r.y1),
                                        "x2": _sig9(r.x2), "y2": _sig9(r.y2)}
                for i, r in enumerate(self.regions)
            ]
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "AlignmentMap":
        entries = sorted(data["entries"], key=lambda e: e["idx"])
        if [e["idx"] for e in entries] != list(range(len(entries))):
            raise ValueError("entry indices are not contiguous from 0")
        boxes = np.array(
            [TARGET if e["src"] == "target" else int(e["box"]) for e in entries], dtype=np.int64
        )
        coords = np.array([[e["x"], e["y"]] for e in entries], dtype=float).reshape(-1, 2)
        regions = tuple(
            None if b is None else TargetRegion(b["x1"], b["y1"], b["x2"], b["y2"])
            for b in data.get("boxes", [])
        )
        return cls(
            mode=Mode(data["mode"]),
            target_rows=int(data["target"]["rows"]),
            target_cols=int(data["target"]["cols"]),
            boxes=boxes,
            coords=coords,
            regions=regions,
        )


def _condition_coords(layout: ConditionLayout, latent_factor: int) -> tuple[np.ndarray, TokenGrid]:
    grid = layout.token_grid(latent_factor)
    return grid.coords(), grid


def _warp_for(mode: Mode, spec, grid: TokenGrid, latent_factor: int, regularization: float):
    """Resolve a per-box warp spec into (map, declared region)."""
    if mode is Mode.AFFINE:
        if isinstance(spec, AffineBoxMap):
            return spec, spec.target
        if not isinstance(spec, TargetRegion):
            raise TypeError(f"affine mode needs a TargetRegion, got {type(spec).__name__}")
        region = spec.to_token(latent_factor)
        return AffineBoxMap(grid.cols, region, grid.rows), region
    if mode is Mode.TPS:
        region = None
        if isinstance(spec, tuple):
            spec, region = spec
            region = region.to_token(latent_factor) if region is not None else None
        if isinstance(spec, ControlPoints):
            spec = tps_fit(spec, regularization)
        if not isinstance(spec, TpsWarp):
            raise TypeError(f"tps mode needs ControlPoints or TpsWarp, got {type(spec).__name__}")
        return spec, region
    raise ValueError(f"unsupported mode {mode}")


def build_alignment_map(
    layouts: Sequence[tuple[ConditionLayout, object]],
    target_grid: TokenGrid,
    mode: Mode,
    regularization: float = 0.0,
    cell: float = 0.5,
    warn: bool = True,
) -> AlignmentMap:
    """Assign positional coordinates to every target and condition token.

    Target tokens come first in row-major order at their own grid
    coordinates. Condition tokens follow, patch by patch in list order,
    each patch row-major, at warped coordinates:

    * ``AFFINE``: per-box spec is a :class:`TargetRegion` (pixel or token
      space) or a ready :class:`AffineBoxMap` in token space.
    * ``TPS``: :class:`ControlPoints` or a fitted :class:`TpsWarp` in token
      space, optionally paired with a declared region as ``(spec, region)``.
    * ``LAYOUT_FREE``: spec is ignored. Patches are laid side by side and
      shifted right by the target width in tokens.

    Condition tokens from different boxes that share a ``cell``-sized
    positional cell raise an :class:`OverlapWarning` (non-fatal).
    """
    mode = Mode(mode)
    f = target_grid.latent_factor
    diag = Diagnostics()
    box_ids = [np.full(target_grid.size, TARGET, dtype=np.int64)]
    coords = [target_grid.coords()]
    regions = []

    if mode is Mode.LAYOUT_FREE:
        shift = OffsetMap(float(target_grid.cols))
        offsets = concat_offsets(layout for layout, _ in layouts)
        for b, ((layout, _), off) in enumerate(zip(layouts, offsets)):
            src, _grid = _condition_coords(layout, f)
            src = src + np.array([off / f, 0.0])
            coords.append(shift.apply(src))
            box_ids.append(np.full(len(src), b, dtype=np.int64))
            regions.append(None)
    else:
        for b, (layout, spec) in enumerate(layouts):
            src, grid = _condition_coords(layout, f)
            warp, region = _warp_for(mode, spec, grid, f, regularization)
            if isinstance(warp, AffineBoxMap):
                mapped = warp.apply(src, diag)
            else:
                mapped = warp.apply(src)
            coords.append(mapped)
            box_ids.append(np.full(len(src), b, dtype=np.int64))
            regions.append(region)

    boxes = np.concatenate(box_ids)
    xy = np.concatenate(coords).reshape(-1, 2)

    if mode is not Mode.LAYOUT_FREE and len(layouts) > 1:
        diag.collisions = cross_box_collisions(boxes, xy, cell)
        if diag.collisions and warn:
            warnings.warn(
                f"{len(diag.collisions)} condition token pairs from different boxes share a "
                f"positional cell",
                OverlapWarning,
                stacklevel=2,
            )

    return AlignmentMap(
        mode=mode,
        target_rows=target_grid.rows,
        target_cols=target_grid.cols,
        boxes=boxes,
        coords=xy,
        regions=tuple(regions),
        diagnostics=diag,
    )


def cross_box_collisions(boxes: np.ndarray, coords: np.ndarray, cell: float = 0.5) -> list[tuple[int, int]]:
    """Index pairs of condition tokens from different boxes sharing a cell."""
    cond = np.flatnonzero(boxes != TARGET)
    if len(cond) == 0:
        return []
    pairs = quantized_collisions(coords[cond], cell)
    return [
        (int(cond[a]), int(cond[b]))
        for a, b in pairs
        if boxes[cond[a]] != boxes[cond[b]]
    ]


def summarize_map(amap: AlignmentMap, cell: float = 0.5, tol: float = 1e-6) -> dict:
    """Read-only statistics used by the inspect command."""
    cond = amap.condition_mask
    xy = amap.coords[cond]
    summary = {
        "mode": amap.mode.value,
        "target_tokens": amap.n_target,
        "condition_tokens": int(cond.sum()),
        "boxes": int(len(np.unique(amap.boxes[cond]))),
        "collisions": len(cross_box_collisions(amap.boxes, amap.coords, cell)),
    }
    if len(xy):
        summary.update(
            min_x=float(xy[:, 0].min()), max_x=float(xy[:, 0].max()),
            min_y=float(xy[:, 1].min()), max_y=float(xy[:, 1].max()),
        )
    if amap.regions:
        outside = 0
        for b, region in enumerate(amap.regions):
            if region is None:
                continue
            pts = amap.coords[amap.boxes == b]
            outside += int((~region.contains(pts, tol)).sum())
        summary["outside_declared"] = outside
    if amap.mode is Mode.LAYOUT_FREE:
        summary["right_of_target"] = bool(len(xy) == 0 or xy[:, 0].min() >= amap.target_cols)
    return summary


# ---------------------------------------------------------------------------
# reference rotary encoder


@dataclass(frozen=True)
class RopeConfig:
    head_dim: int
    axis_split: tuple[int, int] | None = None  # (d_y, d_x)
    base: float = 10000.0

    def __post_init__(self):
        d = self.head_dim
        if d < 4 or d % 2:
            raise ValueError("head_dim must be an even integer >= 4")
        split = self.axis_split
        if split is None:
            dy = 2 * (d // 4)
            split = (dy, d - dy)
            object.__setattr__(self, "axis_split", split)
        dy, dx = split
        if dy + dx != d or dy < 2 or dx < 2 or dy % 2 or dx % 2:
            raise ValueError(f"invalid axis split {split} for head_dim {d}")
        if not self.base > 1:
            raise ValueError("base must be > 1")

    def frequencies(self, axis_dim: int) -> np.ndarray:
        k = np.arange(axis_dim // 2)
        return self.base ** (-2.0 * k / axis_dim)


def _rotate_pairs(block: np.ndarray, angles: np.ndarray) -> np.ndarray:
    even, odd = block[..., 0::2], block[..., 1::2]
    c, s = np.cos(angles), np.sin(angles)
    out = np.empty_like(block)
    out[..., 0::2] = even * c - odd * s
    out[..., 1::2] = even * s + odd * c
    return out


def rope_encode(vec, coord, cfg: RopeConfig) -> np.ndarray:
    """Rotate ``vec`` by 2D position ``coord = (x, y)``.

    The first ``d_y`` features rotate with ``y``, the remaining ``d_x`` with
    ``x``; feature pairs ``(2k, 2k+1)`` inside each block rotate at
    frequency ``base**(-2k/d_axis)``. Leading batch dimensions broadcast,
    and positions may be fractional.
    """
    v = np.asarray(vec, dtype=float)
    c = np.asarray(coord, dtype=float)
    if v.shape[-1] != cfg.head_dim:
        raise DimensionMismatch(f"vector has {v.shape[-1]} features, expected {cfg.head_dim}")
    if c.shape[-1] != 2:
        raise DimensionMismatch("coordinates must be (x, y) pairs")
    dy, dx = cfg.axis_split
    x, y = c[..., 0:1], c[..., 1:2]
    out = np.empty(np.broadcast_shapes(v.shape, c.shape[:-1] + (cfg.head_dim,)))
    out[..., :dy] = _rotate_pairs(np.broadcast_to(v[..., :dy], out[..., :dy].shape), y * cfg.frequencies(dy))
    out[..., dy:] = _rotate_pairs(np.broadcast_to(v[..., dy:], out[..., dy:].shape), x * cfg.frequencies(dx))
    return out


def attention_probe(amap: AlignmentMap, cfg: RopeConfig, queries, keys) -> np.ndarray:
    """Rope-encoded inner products ``q_i . k_j`` between all tokens of a map."""
    q = np.asarray(queries, dtype=float)
    k = np.asarray(keys, dtype=float)
    if q.shape != (len(amap), cfg.head_dim) or k.shape != q.shape:
        raise DimensionMismatch(
            f"need ({len(amap)}, {cfg.head_dim}) queries and keys, got {q.shape} and {k.shape}"
        )
    return rope_encode(q, amap.coords, cfg) @ rope_encode(k, amap.coords, cfg).T
