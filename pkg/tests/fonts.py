"""Locate the DejaVu family used by rendering tests."""
import glob
import os

import pytest

_DIRS = ["/usr/share/fonts/truetype/dejavu"] + glob.glob(
    "/usr/lib/python3*/site-packages/matplotlib/mpl-data/fonts/ttf"
) + glob.glob("/usr/local/lib/python3*/*-packages/matplotlib/mpl-data/fonts/ttf")

_FILES = {
    "sans": "DejaVuSans.ttf",
    "sans_bold": "DejaVuSans-Bold.ttf",
    "serif": "DejaVuSerif.ttf",
    "mono": "DejaVuSansMono.ttf",
}


def _find():
    for d in _DIRS:
        paths = {k: os.path.join(d, f) for k, f in _FILES.items()}
        if all(os.path.isfile(p) for p in paths.values()):
            return paths
    return {}


DEJAVU = _find()
requires_fonts = pytest.mark.skipif(not DEJAVU, reason="DejaVu fonts not installed")
