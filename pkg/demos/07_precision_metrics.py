"""
Scoring rendered text
=====================

Character precision is the share of ground-truth characters that survive
a minimal-edit alignment with the transcription. Sentence precision asks
whether the whole line is exactly right.
"""
from glyphalign.metrics import TranscriptPair, aggregate, alignment_diff, char_precision, edit_counts

print(char_precision(TranscriptPair("hello", "hallo")))
print(alignment_diff("hello", "hallo"))

# Extra characters do not reduce precision; they are counted separately.
print(edit_counts("abc", "xxabc"))

# When several minimal alignments tie, the one with the most matches wins.
print(char_precision(TranscriptPair("ab", "ba")))

pairs = [
    TranscriptPair("春眠不觉晓", "春眠不觉晓", lang="zh"),
    TranscriptPair("处处闻啼鸟", "处处闻鸟", lang="zh"),
    TranscriptPair("Good morning", "Good mornirg", lang="en"),
    TranscriptPair("Coffee", "Coffee", lang="en"),
]
report = aggregate(pairs)
print(report.table())
