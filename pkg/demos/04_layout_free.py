"""
Layout-free conditioning
========================

Without target boxes, condition tokens are shifted right past the target
grid so they never share a position with a target token. The model is
then free to choose where the text goes.
"""
import numpy as np

from glyphalign.geometry import CJK, TokenGrid, build_condition_layout
from glyphalign.pe import Mode, build_alignment_map, summarize_map
from glyphalign.warp import OffsetMap, offset_map

print(offset_map(OffsetMap(64), 5, 3))

target = TokenGrid(64, 64)
patches = [(build_condition_layout("你好", CJK), None), (build_condition_layout("世界", CJK), None)]
amap = build_alignment_map(patches, target, Mode.LAYOUT_FREE)
cond = amap.coords[amap.condition_mask]
print("condition x range:", cond[:, 0].min(), cond[:, 0].max())
# Patches are laid side by side, so they do not collide with each other.
print("unique positions:", len({tuple(p) for p in cond.tolist()}) == len(cond))
print(summarize_map(amap))
