import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glyphalign.errors import EmptyGroundTruth, EmptyInput
from glyphalign.metrics import (
    TranscriptPair,
    aggregate,
    alignment_diff,
    char_precision,
    edit_counts,
    edit_counts_batch,
    insertion_rate,
    normalize,
    read_pairs,
    sentence_precision,
)

from oracles import levenshtein_table, max_matches_oracle

P = TranscriptPair
small_text = st.text(alphabet="abc", min_size=0, max_size=9)
any_text = st.text(min_size=1, max_size=20)


@pytest.mark.parametrize(
    "gt,pred,expected",
    [("hello", "hello", 1.0), ("hello", "hallo", 0.8), ("abc", "", 0.0), ("ab", "ba", 0.5)],
)
def test_char_precision_examples(gt, pred, expected):
    assert char_precision(P(gt, pred)) == expected


def test_edit_counts_known_cases():
    c = edit_counts("kitten", "sitting")
    assert (c.matches, c.substitutions, c.deletions, c.insertions) == (4, 2, 0, 1)
    assert c.distance == 3
    assert edit_counts("", "ab").insertions == 2


def test_insertions_do_not_lower_precision():
    pair = P("abc", "xxabcxx")
    assert char_precision(pair) == 1.0
    assert insertion_rate(pair) == pytest.approx(4 / 3)


def test_empty_ground_truth():
    with pytest.raises(EmptyGroundTruth):
        char_precision(P("", "a"))


@pytest.mark.parametrize(
    "gt,pred,trim,expected",
    [("你好", "你好", False, 1), ("你好", "你奸", False, 0), ("abc ", "abc", False, 0), ("abc ", "abc", True, 1)],
)
def test_sentence_precision_examples(gt, pred, trim, expected):
    assert sentence_precision(P(gt, pred), trim=trim) == expected


def test_nfc_is_opt_in():
    composed, decomposed = "\u00e9", "e\u0301"
    assert sentence_precision(P(composed, decomposed)) == 0
    assert sentence_precision(P(composed, decomposed), "nfc") == 1
    assert char_precision(P(composed, decomposed), "nfc") == 1.0
    with pytest.raises(ValueError):
        normalize("x", "nfkc")


@given(any_text)
def test_self_precision_is_one(s):
    assert char_precision(P(s, s)) == 1.0


@given(any_text, st.text(max_size=20))
def test_sentence_implies_char(gt, pred):
    if sentence_precision(P(gt, pred)) == 1:
        assert char_precision(P(gt, pred)) == 1.0
    assert 0.0 <= char_precision(P(gt, pred)) <= 1.0


@settings(max_examples=300)
@given(st.text(alphabet="abc", min_size=1, max_size=9), small_text, small_text)
def test_prefix_never_lowers_precision(gt, pred, prefix):
    base = char_precision(P(gt, pred))
    extended = char_precision(P(prefix + gt, prefix + pred))
    assert extended >= base
    # the pure-Python two-pass oracle agrees on both
    assert max_matches_oracle(prefix + gt, prefix + pred) / len(prefix + gt) == extended


@settings(max_examples=300)
@given(small_text, small_text)
def test_counts_consistent_with_oracle(gt, pred):
    c = edit_counts(gt, pred)
    assert c.distance == levenshtein_table(gt, pred)[len(gt)][len(pred)]
    assert c.matches + c.substitutions + c.deletions == len(gt)
    assert c.matches + c.substitutions + c.insertions == len(pred)
    assert c.matches == max_matches_oracle(gt, pred)


def test_batch_kernel_wide_dtype():
    # long strings push the packed key out of int16 range
    rng = np.random.default_rng(0)
    gt = rng.integers(0, 4, (3, 300))
    pred = rng.integers(0, 4, (3, 280))
    cost, matches = edit_counts_batch(gt, pred)
    for b in range(3):
        g, p = "".join(map(str, gt[b])), "".join(map(str, pred[b]))
        assert cost[b] == levenshtein_table(g, p)[300][280]
        assert matches[b] == max_matches_oracle(g, p)


def test_aggregate_examples():
    report = aggregate([P("abcd", "abcd"), P("abcd", "abxx")])
    assert report.overall.char_precision == 0.75
    assert report.overall.sentence_precision == 0.5
    assert report.overall.box_count == 2 and report.overall.char_count == 8


def test_aggregate_weights_by_length():
    report = aggregate([P("ab", "ab"), P("abcdefgh", "")])
    assert report.overall.char_precision == 0.2


def test_aggregate_partitions_languages():
    pairs = [P("a", "a", lang="en"), P("你", "你", lang="zh"), P("b", "c", lang="en")]
    report = aggregate(pairs)
    assert list(report.languages) == ["en", "zh"]
    assert sum(s.box_count for s in report.languages.values()) == 3
    assert report.languages["en"].char_precision == 0.5


@given(st.text(min_size=1, max_size=10), st.text(max_size=10))
def test_aggregate_singleton(gt, pred):
    s = aggregate([P(gt, pred)]).overall
    assert s.char_precision == char_precision(P(gt, pred))
    assert s.sentence_precision == sentence_precision(P(gt, pred))


def test_aggregate_empty():
    with pytest.raises(EmptyInput):
        aggregate([])


def test_report_json_and_table():
    report = aggregate([P("ab", "ab", lang="en")])
    data = report.to_json()
    assert "convention" in data and data["normalization"] == "none"
    assert data["languages"]["en"]["char_precision"] == 1.0
    assert report.table().splitlines()[-1].startswith("overall")


def test_alignment_diff():
    assert alignment_diff("hello", "hallo").splitlines() == ["hello", "hallo", "|*|||"]
    assert alignment_diff("abc", "ac").splitlines()[2] == "|D|"


def test_read_pairs():
    lines = ['{"gt": "a", "pred": "b", "lang": "en", "box": "1"}', "", '{"gt": "c", "pred": "c"}']
    pairs = read_pairs(lines)
    assert pairs[0] == P("a", "b", "1", "en") and pairs[1].lang == "und"
    with pytest.raises(ValueError, match="line 2"):
        read_pairs(['{"gt": "a", "pred": "b"}', "{bad"])
    with pytest.raises(ValueError, match="line 1"):
        read_pairs([json.dumps({"gt": 1, "pred": "b"})])
