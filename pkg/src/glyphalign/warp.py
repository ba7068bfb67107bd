"""Coordinate warps that carry condition-token positions into the target image.

Three maps are provided:

* :class:`AffineBoxMap` -- per-axis linear scaling of the condition canvas
  onto a target box (endpoints map to endpoints).
* :class:`TpsWarp` -- a thin-plate spline through landmark correspondences,
  for slanted or curved regions.
* :class:`OffsetMap` -- a constant horizontal shift past the target width,
  used when no layout is given.

All maps expose ``apply(points)`` on an ``(n, 2)`` array, which is what
:func:`detect_fold` relies on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateSource, NonFiniteInput, SingularSystem
from .geometry import CONDITION_HEIGHT


class Space(enum.Enum):
    PIXEL = "pixel"
    TOKEN = "token"


@dataclass
class Diagnostics:
    """Mutable counters filled in while maps are evaluated."""

    extrapolated: int = 0
    collisions: list = field(default_factory=list)


@dataclass(frozen=True)
class TargetRegion:
    """A box in the target image, with *inclusive* end coordinates.

    ``(x1, y1)`` is where the first condition index lands and ``(x2, y2)``
    where the last one lands.
    """

    x1: float
    y1: float
    x2: float
    y2: float
    space: Space = Space.TOKEN

    def __post_init__(self):
        vals = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in vals):
            raise NonFiniteInput(f"non-finite target region {vals}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise ValueError(f"degenerate target region {vals}")

    @classmethod
    def from_half_open(cls, x1, y1, x2, y2, space: Space = Space.TOKEN) -> "TargetRegion":
        """Region for the index range ``[x1, x2) x [y1, y2)`` of unit cells."""
        return cls(float(x1), float(y1), float(x2 - 1), float(y2 - 1), space)

    @classmethod
    def from_pixel_box(cls, rect, latent_factor: int) -> "TargetRegion":
        """Token-space region covering the pixels of a half-open pixel rect.

        The last covered pixel index ``x2 - 1`` is the inclusive end, which
        is then expressed in token units.
        """
        f = float(latent_factor)
        return cls(rect.x1 / f, rect.y1 / f, (rect.x2 - 1) / f, (rect.y2 - 1) / f, Space.TOKEN)

    def to_token(self, latent_factor: int) -> "TargetRegion":
        if self.space is Space.TOKEN:
            return self
        f = float(latent_factor)
        return TargetRegion(self.x1 / f, self.y1 / f, self.x2 / f, self.y2 / f, Space.TOKEN)

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return (
            (p[:, 0] >= self.x1 - tol)
            & (p[:, 0] <= self.x2 + tol)
            & (p[:, 1] >= self.y1 - tol)
            & (p[:, 1] <= self.y2 + tol)
        )

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class AffineBoxMap:
    source_width: float
    target: TargetRegion
    source_height: float = CONDITION_HEIGHT

    def __post_init__(self):
        if self.source_width < 2:
            raise DegenerateSource(f"source width {self.source_width} < 2")
        if self.source_height < 2:
            raise DegenerateSource(f"source height {self.source_height} < 2")

    def apply(self, points, diagnostics: Diagnostics | None = None) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(p)):
            raise NonFiniteInput("non-finite source coordinate")
        u, v = p[:, 0], p[:, 1]
        umax, vmax = self.source_width - 1, self.source_height - 1
        if diagnostics is not None:
            outside = (u < 0) | (u > umax) | (v < 0) | (v > vmax)
            diagnostics.extrapolated += int(outside.sum())
        t = self.target
        x = t.x1 + u / umax * (t.x2 - t.x1)
        y = t.y1 + v / vmax * (t.y2 - t.y1)
        return np.column_stack([x, y])


def affine_map(m: AffineBoxMap, u: float, v: float, diagnostics: Diagnostics | None = None) -> tuple[float, float]:
    x, y = m.apply([[u, v]], diagnostics)[0]
    return float(x), float(y)


# ---------------------------------------------------------------------------
# thin-plate spline


def tps_kernel(r: np.ndarray) -> np.ndarray:
    """r^2 ln r, with the limit value 0 at r = 0."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = r[nz] ** 2 * np.log(r[nz])
    return out


def _pairwise_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return tps_kernel(d)


def _hull_area(points: np.ndarray) -> float:
    pts = sorted(set(map(tuple, points.tolist())))
    if len(pts) < 3:
        return 0.0

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    area = 0.0
    for i in range(len(hull)):
        x0, y0 = hull[i]
        x1, y1 = hull[(i + 1) % len(hull)]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2


@dataclass(frozen=True)
class ControlPoints:
    sources: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sources, dtype=float).reshape(-1, 2)
        t = np.asarray(self.targets, dtype=float).reshape(-1, 2)
        if s.shape != t.shape:
            raise ValueError(f"{len(s)} sources but {len(t)} targets")
        object.__setattr__(self, "sources", s)
        object.__setattr__(self, "targets", t)

    @classmethod
    def from_pairs(cls, pairs) -> "ControlPoints":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __len__(self):
        return len(self.sources)

    def validate(self) -> None:
        s, t = self.sources, self.targets
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
            raise NonFiniteInput("control points contain NaN or inf")
        if len(s) < 3:
            raise SingularSystem(f"need at least 3 control points, got {len(s)}")
        if len({tuple(p) for p in s.tolist()}) != len(s):
            raise SingularSystem("duplicate source control points")
        span = s.max(0) - s.min(0)
        bbox_area = float(span[0] * span[1])
        if bbox_area <= 0 or _hull_area(s) < 1e-9 * bbox_area:
            raise SingularSystem("source control points are collinear")


@dataclass(frozen=True)
class TpsWarp:
    affine: np.ndarray  # (2, 3): rows give x and y as a*u + b*v + c
    weights: np.ndarray  # (K, 2)
    sources: np.ndarray  # (K, 2)
    regularization: float = 0.0

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(p)):
            raise NonFiniteInput("non-finite query coordinate")
        base = p @ self.affine[:, :2].T + self.affine[:, 2]
        return base + _pairwise_kernel(p, self.sources) @ self.weights

    def to_json(self) -> dict:
        return {
            "affine": self.affine.tolist(),
            "weights": self.weights.tolist(),
            "sources": self.sources.tolist(),
            "lambda": float(self.regularization),
        }

    @classmethod
    def from_json(cls, data: dict) -> "TpsWarp":
        return cls(
            affine=np.asarray(data["affine"], dtype=float),
            weights=np.asarray(data["weights"], dtype=float).reshape(-1, 2),
            sources=np.asarray(data["sources"], dtype=float).reshape(-1, 2),
            regularization=float(data.get("lambda", 0.0)),
        )


def tps_system(sources: np.ndarray, regularization: float = 0.0) -> np.ndarray:
    """The bordered ``(K+3, K+3)`` matrix ``[[Phi + lam*I, P], [P^T, 0]]``."""
    k = len(sources)
    L = np.zeros((k + 3, k + 3))
    L[:k, :k] = _pairwise_kernel(sources, sources) + regularization * np.eye(k)
    P = np.column_stack([sources, np.ones(k)])
    L[:k, k:] = P
    L[k:, :k] = P.T
    return L


def tps_fit(cp: ControlPoints, regularization: float = 0.0) -> TpsWarp:
    """Fit a thin-plate spline through ``cp``.

    Solves both output coordinates at once with a dense LU solve. With
    ``regularization == 0`` the warp interpolates every landmark exactly;
    positive values trade exactness for smoothness.
    """
    if not math.isfinite(regularization) or regularization < 0:
        raise ValueError("regularization must be a finite non-negative number")
    cp.validate()
    k = len(cp)
    L = tps_system(cp.sources, regularization)
    rhs = np.zeros((k + 3, 2))
    rhs[:k] = cp.targets
    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("solve produced non-finite parameters")
    return TpsWarp(
        affine=sol[k:].T.copy(),
        weights=sol[:k].copy(),
        sources=cp.sources.copy(),
        regularization=float(regularization),
    )


def tps_eval(w: TpsWarp, u: float, v: float) -> tuple[float, float]:
    x, y = w.apply([[u, v]])[0]
    return float(x), float(y)


def box_control_points(
    source_width: float,
    source_height: float,
    quad: Sequence[Sequence[float]],
    interior: Sequence[tuple[Sequence[float], Sequence[float]]] = (),
) -> ControlPoints:
    """Landmarks pinning the four condition corners to a target quadrilateral.

    ``quad`` lists the target corners in the order top-left, top-right,
    bottom-right, bottom-left. ``interior`` adds extra ``(source, target)``
    pairs, e.g. to bend the middle of a curved baseline.
    """
    if len(quad) != 4:
        raise ValueError("quad needs exactly 4 corners")
    u1, v1 = source_width - 1, source_height - 1
    sources = [(0.0, 0.0), (u1, 0.0), (u1, v1), (0.0, v1)]
    targets = [tuple(map(float, q)) for q in quad]
    for s, t in interior:
        sources.append(tuple(map(float, s)))
        targets.append(tuple(map(float, t)))
    return ControlPoints(sources, targets)


# ---------------------------------------------------------------------------
# layout-free offset


@dataclass(frozen=True)
class OffsetMap:
    offset_x: float
    offset_y: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.offset_x) or self.offset_x < 0:
            raise ValueError("offset_x must be finite and >= 0")
        if self.offset_y != 0:
            raise ValueError("offset_y is fixed at 0")

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return p + np.array([self.offset_x, 0.0])


def offset_map(o: OffsetMap, i: float, j: float) -> tuple[float, float]:
    return (i + o.offset_x, j)


# ---------------------------------------------------------------------------
# overlap diagnostics


def quantized_collisions(points: np.ndarray, cell: float = 0.5) -> list[tuple[int, int]]:
    """All index pairs ``(a, b)``, ``a < b``, whose points share a grid cell."""
    keys = np.floor(np.asarray(points, dtype=float) / cell).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for idx, key in enumerate(map(tuple, keys.tolist())):
        buckets.setdefault(key, []).append(idx)
    pairs = []
    for members in buckets.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                pairs.append((members[i], members[j]))
    pairs.sort()
    return pairs


def detect_fold(w, grid, cell: float = 0.5) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Pairs of distinct source coordinates that the warp sends into one cell.

    ``w`` is any map with an ``apply`` method (a :class:`TpsWarp` normally).
    An empty result means no overlap was detected at this resolution.
    """
    src = np.asarray(grid, dtype=float).reshape(-1, 2)
    if len(src) == 0:
        raise ValueError("grid is empty")
    mapped = w.apply(src)
    out = []
    for a, b in quantized_collisions(mapped, cell):
        if not np.array_equal(src[a], src[b]):
            out.append((tuple(src[a].tolist()), tuple(src[b].tolist())))
    return out
