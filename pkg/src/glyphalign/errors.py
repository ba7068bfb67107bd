"""Exception and warning types shared across the package."""


class GlyphAlignError(Exception):
    """Base class for all errors raised by glyphalign."""


class EmptyText(GlyphAlignError, ValueError):
    pass


class UnsupportedCodePoint(GlyphAlignError, ValueError):
    def __init__(self, char: str):
        super().__init__(f"no glyph available for U+{ord(char):04X} ({char!r})")
        self.char = char


class DegenerateSource(GlyphAlignError, ValueError):
    pass


class SingularSystem(GlyphAlignError, ValueError):
    pass


class NonFiniteInput(GlyphAlignError, ValueError):
    pass


class DimensionMismatch(GlyphAlignError, ValueError):
    pass


class PlacementFailure(GlyphAlignError):
    pass


class GlyphMissing(GlyphAlignError):
    def __init__(self, font: str, chars: str):
        super().__init__(f"font {font} has no glyph for {chars!r}")
        self.font = font
        self.chars = chars


class EmptyGroundTruth(GlyphAlignError, ValueError):
    pass


class EmptyInput(GlyphAlignError, ValueError):
    pass


class OverlapWarning(UserWarning):
    """Condition tokens from different boxes landed on the same positional cell."""
