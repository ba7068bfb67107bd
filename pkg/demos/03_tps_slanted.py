"""
Thin-plate-spline alignment
===========================

For slanted or curved text, a thin-plate spline carries the condition
grid onto an arbitrary quadrilateral, bending through optional interior
landmarks.
"""
import numpy as np

from glyphalign.geometry import LATIN, TokenGrid, build_condition_layout
from glyphalign.pe import Mode, build_alignment_map, summarize_map
from glyphalign.warp import ControlPoints, box_control_points, detect_fold, tps_fit

layout = build_condition_layout("Hello", LATIN, width_policy=lambda s: 150.0)
g = layout.token_grid()
print("condition grid", g.rows, "x", g.cols)

# Slanted quad: top-left, top-right, bottom-right, bottom-left (tokens).
quad = [(4, 10), (24, 6), (24, 10), (4, 14)]
cp = box_control_points(g.cols, g.rows, quad)
warp = tps_fit(cp)
print("corners ->", np.round(warp.apply(cp.sources), 6).tolist())
# A parallelogram needs no bending: the radial weights vanish.
print("max |w| =", np.abs(warp.weights).max())

# An arch: pull the middle of the top and bottom edges upward.
mid = (g.cols - 1) / 2
arch = box_control_points(
    g.cols, g.rows, [(4, 20), (24, 20), (24, 24), (4, 24)],
    interior=[((mid, 0), (14, 16)), ((mid, g.rows - 1), (14, 20))],
)
bent = tps_fit(arch)
top = bent.apply(np.column_stack([np.arange(g.cols), np.zeros(g.cols)]))
print("top edge y:", np.round(top[:, 1], 2))

# Regularization trades exact interpolation for smoothness.
smooth = tps_fit(arch, regularization=10.0)
print("bending |w| exact vs smoothed:", np.abs(bent.weights).sum(), np.abs(smooth.weights).sum())

# The alignment map accepts the control points directly.
amap = build_alignment_map([(layout, arch)], TokenGrid(32, 32), Mode.TPS)
print(summarize_map(amap))

# Folding check: collapsing two landmarks onto one point is flagged.
collapse = ControlPoints([(0, 0), (4, 0), (4, 4), (0, 4), (1, 1), (3, 3)],
                         [(0, 0), (4, 0), (4, 4), (0, 4), (2.2, 2.2), (2.2, 2.2)])
print(detect_fold(tps_fit(collapse), [(1, 1), (3, 3), (0, 0)]))

# Warps round-trip through JSON for reuse.
print(sorted(warp.to_json()))
