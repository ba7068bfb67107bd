"""
Condition patches
=================

How text becomes a 64-pixel-high condition strip, and how many latent
tokens that strip occupies.
"""
import numpy as np

from glyphalign.geometry import CJK, LATIN, build_condition_layout, build_mixed_layouts, split_script_runs

# Logographic scripts get one 64x64 cell per character.
zh = build_condition_layout("你好世界", CJK)
print(zh.canvas_width, zh.canvas_height)
for ch, cell in zh.cells:
    print(ch, cell.as_tuple())

# Alphabetic text is one connected strip, as wide as the font advance
# rounded up to a whole token (16 pixels).
en = build_condition_layout("Hello", LATIN, width_policy=lambda s: 150.0)
print(en.canvas_width, en.token_grid())

# The token grid is what the transformer sees.
grid = zh.token_grid()
print(grid.rows, grid.cols, grid.size)
print(grid.coords()[:6])

# Mixed text is split into one run per script, each with its own layout.
print([(t, s.name) for t, s in split_script_runs("Menu 菜单 2024")])
for layout in build_mixed_layouts("Menu 菜单", width_policy=lambda s: 11.0 * len(s)):
    print(layout.script.name, repr(layout.text), layout.canvas_width)

# Layouts serialize to plain JSON.
print(np.array([[c["x1"], c["x2"]] for c in zh.to_json()["cells"]]))
