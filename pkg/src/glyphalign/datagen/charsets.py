"""Character inventories and reference statistics per script class."""
import string

# 52 letters, 10 digits, 32 ASCII punctuation marks and 10 common accented
# letters shared by German, French, Italian and Spanish: 104 in total.
LATIN_104 = (
    string.ascii_uppercase
    + string.ascii_lowercase
    + string.digits
    + string.punctuation
    + "ÄÖÜäöüßéèà"
)

GREEK_BASIC = "".join(chr(c) for c in range(0x0391, 0x03AA) if c != 0x03A2) + "".join(
    chr(c) for c in range(0x03B1, 0x03CA)
)

# Pre-training corpus shape: unique characters, font count, sample count.
REFERENCE_STATS = {
    "chinese": {"unique_chars": 7000, "fonts": 18, "samples": 230_000},
    "korean": {"unique_chars": 4308, "fonts": 13, "samples": 100_000},
    "japanese": {"unique_chars": 2922, "fonts": 17, "samples": 100_000},
    "thai": {"unique_chars": 2128, "fonts": 3, "samples": 100_000},
    "vietnamese": {"unique_chars": 91, "fonts": 19, "samples": 100_000},
    "latin": {"unique_chars": 104, "fonts": 30, "samples": 180_000},
    "greek": {"unique_chars": 79, "fonts": 19, "samples": 100_000},
}

CHARSETS = {
    "latin104": LATIN_104,
    "greek": GREEK_BASIC,
}

assert len(LATIN_104) == len(set(LATIN_104)) == 104
