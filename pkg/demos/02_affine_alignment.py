"""
Affine alignment
================

Condition tokens take the coordinates of the target box they should
render into. Each condition token (u, v) is stretched linearly onto the
box, so its first and last tokens land on the box corners.
"""
import numpy as np

from glyphalign.geometry import CJK, PixelRect, TokenGrid, build_condition_layout
from glyphalign.pe import Mode, build_alignment_map, summarize_map
from glyphalign.warp import AffineBoxMap, TargetRegion, affine_map

# A single character (4x4 tokens) placed in a 4x4-token box of a 64x64 target.
cell = build_condition_layout("字", CJK)
region = TargetRegion.from_half_open(2, 3, 6, 7)
amap = build_alignment_map([(cell, region)], TokenGrid(64, 64), Mode.AFFINE)
print(len(amap), "tokens,", amap.n_target, "of them target")
print(amap.coords[amap.condition_mask].reshape(4, 4, 2)[:, :, 0])

# A pixel box [x1, x2) converts to tokens by the latent factor; its last
# pixel column x2 - 1 becomes the inclusive right edge.
print(TargetRegion.from_pixel_box(PixelRect(32, 48, 96, 112), 16))

# A wider box than the patch stretches the tokens apart; fractional
# coordinates are kept, not rounded.
stretch = AffineBoxMap(4, TargetRegion(10, 10, 20, 13), source_height=4)
print(stretch.apply(np.array([[0, 0], [1, 0], [2, 0], [3, 3]])))

# Points off the patch extrapolate and are counted, not rejected.
from glyphalign.warp import Diagnostics

diag = Diagnostics()
print(affine_map(stretch, 5, 0, diag), diag.extrapolated)

# The summary checks that every condition token stayed inside its box.
print(summarize_map(amap))

# Two boxes aimed at the same place collide; that is a warning, not an error.
import warnings

with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    twice = build_alignment_map([(cell, region), (cell, region)], TokenGrid(64, 64), Mode.AFFINE)
print(len(twice.diagnostics.collisions), "collisions;", caught[0].category.__name__)
