"""
Why shared coordinates matter
=============================

A 2D rotary encoding rotates feature pairs by angles proportional to the
x and y position. Dot products then depend only on relative position, so
a condition token placed at a target token's coordinate looks co-located
to attention.
"""
import numpy as np

from glyphalign.geometry import CJK, TokenGrid, build_condition_layout
from glyphalign.pe import Mode, RopeConfig, attention_probe, build_alignment_map, rope_encode
from glyphalign.warp import TargetRegion

cfg = RopeConfig(head_dim=32)
print("features for y / x:", cfg.axis_split)

rng = np.random.default_rng(0)
q, k = rng.normal(size=(2, 32))

# Shifting both positions by the same amount leaves the score unchanged.
a = rope_encode(q, (3, 4), cfg) @ rope_encode(k, (5, 1), cfg)
b = rope_encode(q, (13, 24), cfg) @ rope_encode(k, (15, 21), cfg)
print(a, b, abs(a - b))

# Put one character at tokens {2..5} x {3..6} of an 8x8 target.
amap = build_alignment_map(
    [(build_condition_layout("字", CJK), TargetRegion.from_half_open(2, 3, 6, 7))],
    TokenGrid(8, 8), Mode.AFFINE,
)
Q = rng.normal(size=(len(amap), 32))
K = rng.normal(size=(len(amap), 32))
cond0, tgt = amap.n_target, 3 * 8 + 2
K[cond0] = K[tgt]
P = attention_probe(amap, cfg, Q, K)
# Target token (2, 3) scores the co-located condition token exactly like itself.
print(P[tgt, tgt], P[tgt, cond0])

# Compare with layout-free placement, where the same pair is far apart.
free = build_alignment_map([(build_condition_layout("字", CJK), None)], TokenGrid(8, 8), Mode.LAYOUT_FREE)
P2 = attention_probe(free, cfg, Q, K)
print(P2[tgt, cond0])
