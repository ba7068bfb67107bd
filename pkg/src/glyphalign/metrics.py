"""Character- and sentence-level text precision.

Character precision counts ground-truth characters that survive a
minimal-edit alignment with the prediction. Among minimal-cost alignments
the one with the most exact matches is used, which makes the score
well-defined when several alignments tie (``"ab"`` vs ``"ba"`` scores 0.5).
Insertions do not lower precision; they are reported as a separate rate.

These are reimplementation conventions: human scoring of partially
correct characters has no single formal definition.
"""
from __future__ import annotations

import json
import unicodedata
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyGroundTruth, EmptyInput

CONVENTION = (
    "char precision = matched ground-truth chars / ground-truth length, using the "
    "minimal Levenshtein alignment (unit costs) with the most matches; insertions "
    "reported separately"
)


@dataclass(frozen=True)
class TranscriptPair:
    ground_truth: str
    predicted: str
    box_id: str = ""
    lang: str = "und"


@dataclass(frozen=True)
class EditCounts:
    matches: int
    substitutions: int
    deletions: int
    insertions: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def normalize(text: str, mode: str = "none", trim: bool = False) -> str:
    if mode == "nfc":
        text = unicodedata.normalize("NFC", text)
    elif mode != "none":
        raise ValueError(f"unknown normalization {mode!r}")
    return text.rstrip() if trim else text


def edit_counts_batch(gt: np.ndarray, pred: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min edit cost and max matches for many equal-length string pairs.

    ``gt`` is ``(B, n)`` and ``pred`` is ``(B, m)`` of integer symbol codes.
    Returns ``(cost, matches)`` arrays of shape ``(B,)``.

    Each DP cell stores the single key ``cost * K - matches`` with
    ``K > max(n, m)``, so minimizing the key minimizes cost first and then
    maximizes matches. Rows are computed without a Python loop over
    columns: the left-to-right insertion chain ``row[j] = min(row[j],
    row[j-1] + K)`` is a running minimum of ``row[j] - K*j``.
    """
    gt = np.asarray(gt)
    pred = np.asarray(pred)
    B, n = gt.shape
    m = pred.shape[1]
    K = max(n, m) + 1
    span = (n + m + 1) * K
    dtype = np.int16 if span < 2**15 else np.int32 if span < 2**31 else np.int64
    # work on (m + 1, B) so every operation streams over the batch axis
    pred_t = np.ascontiguousarray(pred.T)
    ramp = (np.arange(m + 1) * K).astype(dtype)[:, None]
    prev = np.broadcast_to(ramp, (m + 1, B)).copy()
    eq = np.empty((m, B), dtype=bool)
    diag = np.empty((m, B), dtype=dtype)
    for i in range(n):
        np.equal(pred_t, gt[:, i], out=eq)
        # diagonal step: -1 on a match, +K on a substitution
        np.multiply(eq, dtype(-(K + 1)), out=diag, casting="unsafe")
        diag += prev[:-1]
        diag += K
        cur = np.empty_like(prev)
        cur[0] = prev[0] + K
        np.add(prev[1:], dtype(K), out=cur[1:])
        np.minimum(cur[1:], diag, out=cur[1:])
        cur -= ramp
        np.minimum.accumulate(cur, axis=0, out=cur)
        cur += ramp
        prev = cur
    key = prev[-1].astype(np.int64)
    matches = np.mod(-key, K)
    cost = (key + matches) // K
    return cost, matches


def edit_counts(ground_truth: str, predicted: str) -> EditCounts:
    n, m = len(ground_truth), len(predicted)
    if n == 0 or m == 0:
        return EditCounts(0, 0, n, m)
    gt = np.fromiter(map(ord, ground_truth), dtype=np.int64, count=n)[None, :]
    pr = np.fromiter(map(ord, predicted), dtype=np.int64, count=m)[None, :]
    cost, matches = edit_counts_batch(gt, pr)
    M, c = int(matches[0]), int(cost[0])
    # cost = S + D + I, n = M + S + D, m = M + S + I
    S = n + m - 2 * M - c
    return EditCounts(M, S, n - M - S, m - M - S)


def char_precision(pair: TranscriptPair, normalization: str = "none") -> float:
    gt = normalize(pair.ground_truth, normalization)
    if not gt:
        raise EmptyGroundTruth(f"box {pair.box_id!r} has empty ground truth")
    counts = edit_counts(gt, normalize(pair.predicted, normalization))
    return min(1.0, max(0.0, counts.matches / len(gt)))


def sentence_precision(pair: TranscriptPair, normalization: str = "none", trim: bool = False) -> int:
    gt = normalize(pair.ground_truth, normalization, trim)
    pred = normalize(pair.predicted, normalization, trim)
    return int(gt == pred)


def insertion_rate(pair: TranscriptPair, normalization: str = "none") -> float:
    gt = normalize(pair.ground_truth, normalization)
    if not gt:
        raise EmptyGroundTruth(f"box {pair.box_id!r} has empty ground truth")
    return edit_counts(gt, normalize(pair.predicted, normalization)).insertions / len(gt)


@dataclass(frozen=True)
class LanguageScore:
    char_precision: float
    sentence_precision: float
    insertion_rate: float
    box_count: int
    char_count: int

    def to_json(self) -> dict:
        return {
            "char_precision": self.char_precision,
            "sentence_precision": self.sentence_precision,
            "insertion_rate": self.insertion_rate,
            "box_count": self.box_count,
            "char_count": self.char_count,
        }


@dataclass(frozen=True)
class PrecisionReport:
    languages: "OrderedDict[str, LanguageScore]"
    overall: LanguageScore
    normalization: str = "none"
    trim: bool = False

    def to_json(self) -> dict:
        return {
            "convention": CONVENTION,
            "normalization": self.normalization,
            "trim_trailing_whitespace": self.trim,
            "overall": self.overall.to_json(),
            "languages": {k: v.to_json() for k, v in self.languages.items()},
        }

    def table(self) -> str:
        rows = [f"{'lang':<10} {'boxes':>6} {'chars':>7} {'char_prec':>10} {'sent_prec':>10}"]
        items = list(self.languages.items()) + [("overall", self.overall)]
        for name, s in items:
            rows.append(
                f"{name:<10} {s.box_count:>6} {s.char_count:>7} "
                f"{s.char_precision:>10.4f} {s.sentence_precision:>10.4f}"
            )
        return "\n".join(rows)


def _score(rows: list[tuple[int, int, int, int]]) -> LanguageScore:
    # rows of (matches, gt_len, sentence_ok, insertions)
    matched = sum(r[0] for r in rows)
    chars = sum(r[1] for r in rows)
    return LanguageScore(
        char_precision=matched / chars,
        sentence_precision=sum(r[2] for r in rows) / len(rows),
        insertion_rate=sum(r[3] for r in rows) / chars,
        box_count=len(rows),
        char_count=chars,
    )


def aggregate(pairs: Iterable[TranscriptPair], normalization: str = "none", trim: bool = False) -> PrecisionReport:
    """Per-language and overall precision.

    Character precision weights each box by its ground-truth length (so it
    equals total matched characters over total characters); sentence
    precision is the plain mean of per-box indicators. Languages appear in
    order of first occurrence.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no transcript pairs to aggregate")
    per_lang: "OrderedDict[str, list]" = OrderedDict()
    everything = []
    for p in pairs:
        gt = normalize(p.ground_truth, normalization)
        if not gt:
            raise EmptyGroundTruth(f"box {p.box_id!r} has empty ground truth")
        counts = edit_counts(gt, normalize(p.predicted, normalization))
        row = (counts.matches, len(gt), sentence_precision(p, normalization, trim), counts.insertions)
        per_lang.setdefault(p.lang, []).append(row)
        everything.append(row)
    return PrecisionReport(
        languages=OrderedDict((k, _score(v)) for k, v in per_lang.items()),
        overall=_score(everything),
        normalization=normalization,
        trim=trim,
    )


def alignment_diff(ground_truth: str, predicted: str) -> str:
    """Two-line aligned rendering of a minimal-edit, max-match alignment.

    Debug aid only. ``-`` marks a gap; the third line flags each column as
    match ``|``, substitution ``*``, deletion ``D`` or insertion ``I``.
    """
    n, m = len(ground_truth), len(predicted)
    K = max(n, m) + 1
    INF = 10**9
    key = [[INF] * (m + 1) for _ in range(n + 1)]
    key[0] = [j * K for j in range(m + 1)]
    for i in range(1, n + 1):
        key[i][0] = i * K
        for j in range(1, m + 1):
            d = -1 if ground_truth[i - 1] == predicted[j - 1] else K
            key[i][j] = min(key[i - 1][j - 1] + d, key[i - 1][j] + K, key[i][j - 1] + K)
    top, bottom, marks = [], [], []
    i, j = n, m
    while i or j:
        if i and j:
            d = -1 if ground_truth[i - 1] == predicted[j - 1] else K
            if key[i][j] == key[i - 1][j - 1] + d:
                top.append(ground_truth[i - 1]); bottom.append(predicted[j - 1])
                marks.append("|" if d < 0 else "*")
                i, j = i - 1, j - 1
                continue
        if i and key[i][j] == key[i - 1][j] + K:
            top.append(ground_truth[i - 1]); bottom.append("-"); marks.append("D")
            i -= 1
        else:
            top.append("-"); bottom.append(predicted[j - 1]); marks.append("I")
            j -= 1
    return "\n".join("".join(reversed(s)) for s in (top, bottom, marks))


def read_pairs(lines: Iterable[str]) -> list[TranscriptPair]:
    """Parse JSONL lines of ``{"gt", "pred", "lang", "box"}``.

    Raises ``ValueError`` whose message names the 1-based line number.
    """
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            gt, pred = obj["gt"], obj["pred"]
            if not isinstance(gt, str) or not isinstance(pred, str):
                raise TypeError("gt and pred must be strings")
            out.append(TranscriptPair(gt, pred, str(obj.get("box", "")), str(obj.get("lang", "und"))))
        except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return out
