import json
import re
from collections import Counter

import numpy as np
import pytest
from PIL import Image, ImageDraw

from glyphalign.datagen import (
    CHARSETS,
    LATIN_104,
    ProceduralBackgrounds,
    SamplePolicy,
    SampleRecord,
    ScriptSpec,
    build_dataset,
    read_annotations,
    record_alignment_map,
    sample_text,
    synthesize_sample,
)
from glyphalign.datagen.dataset import sample_seed
from glyphalign.datagen.render import load_font, render_mask
from glyphalign.errors import GlyphMissing, PlacementFailure
from glyphalign.pe import summarize_map

from fonts import DEJAVU, requires_fonts

pytestmark = requires_fonts


def latin_spec(**kw):
    base = dict(
        name="latin",
        character_set=LATIN_104,
        fonts=[DEJAVU["serif"], DEJAVU["mono"], DEJAVU["sans_bold"]],
        condition_font=DEJAVU["sans"],
    )
    base.update(kw)
    return ScriptSpec(**base)


def test_latin_charset_size():
    assert len(LATIN_104) == len(set(LATIN_104)) == 104
    assert CHARSETS["latin104"] == LATIN_104


def test_sample_text_single_symbol():
    spec = latin_spec(character_set="a")
    assert sample_text(spec, np.random.default_rng(0), (3, 3)) == "aaa"


def test_sample_text_deterministic():
    spec = latin_spec()
    a = [sample_text(spec, np.random.default_rng(42), (6, 22)) for _ in range(2)]
    assert a[0] == a[1]


@pytest.mark.slow
def test_sample_text_coverage_counting_oracle():
    spec = latin_spec()
    rng = np.random.default_rng(7)
    seen = Counter()
    for _ in range(10**6):
        seen.update(sample_text(spec, rng, (10, 10)))
    assert set(seen) == set(LATIN_104)
    assert sum(seen.values()) == 10**7


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError, match="duplicate"):
        latin_spec(character_set="abca").validate()
    with pytest.raises(FileNotFoundError):
        latin_spec(fonts=[str(tmp_path / "nope.ttf")]).validate()
    with pytest.raises(GlyphMissing):
        latin_spec(character_set="ab字").validate()
    latin_spec().validate()


def _one_box(seed):
    rng = np.random.default_rng(seed)
    spec = latin_spec()
    bg = ProceduralBackgrounds((512, 384)).get(rng)
    return synthesize_sample(spec, bg, rng, SamplePolicy(fixed_boxes=1), seed=seed), bg


@pytest.mark.parametrize("seed", range(5))
def test_single_box_is_tight(seed):
    record, bg = _one_box(seed)
    (box,) = record.boxes
    # redraw onto a blank canvas at the recorded origin and scan inked pixels
    canvas = Image.new("L", (record.width, record.height), 0)
    ImageDraw.Draw(canvas).text(box.origin, box.text, font=load_font(box.font, box.size), fill=255)
    assert canvas.getbbox() == box.rect.as_tuple()
    # and the composited image only differs from the background inside the box
    diff = np.any(np.asarray(record.image) != np.asarray(bg.convert("RGB")), axis=2)
    ys, xs = np.nonzero(diff)
    r = box.rect
    assert xs.min() >= r.x1 and xs.max() < r.x2 and ys.min() >= r.y1 and ys.max() < r.y2


def test_zero_boxes_rejected():
    rng = np.random.default_rng(0)
    with pytest.raises(PlacementFailure):
        synthesize_sample(latin_spec(), ProceduralBackgrounds().get(rng), rng, SamplePolicy(fixed_boxes=0))


def test_placement_failure_on_tiny_canvas():
    rng = np.random.default_rng(0)
    bg = Image.new("RGB", (40, 40))
    with pytest.raises(PlacementFailure):
        synthesize_sample(latin_spec(), bg, rng, SamplePolicy(fixed_boxes=1, retries=5))


def test_record_invariants_and_roundtrip():
    rng = np.random.default_rng(3)
    policy = SamplePolicy(fixed_boxes=4)
    spec = latin_spec()
    rec = synthesize_sample(spec, ProceduralBackgrounds().get(rng), rng, policy)
    assert len(rec.boxes) == 4
    for i, a in enumerate(rec.boxes):
        r = a.rect
        assert 0 <= r.x1 < r.x2 <= rec.width and 0 <= r.y1 < r.y2 <= rec.height
        for b in rec.boxes[i + 1:]:
            assert not a.rect.intersects(b.rect)
        # targets never use the condition font here
        assert a.font != spec.condition_font
    assert sorted(re.findall(r"<sks\d+>", rec.prompt)) == [f"<sks{i}>" for i in range(1, 5)]
    # condition strip spans every box layout in order
    xs = [b.condition_x for b in rec.boxes]
    assert xs[0] == 0 and xs == sorted(xs)
    assert rec.condition.width == xs[-1] + rec.boxes[-1].layout.canvas_width
    back = SampleRecord.from_json(json.loads(json.dumps(rec.to_json())))
    assert back.to_json() == rec.to_json()


def test_rerender_fits_within_slack():
    rng = np.random.default_rng(11)
    for _ in range(20):
        rec = synthesize_sample(latin_spec(), ProceduralBackgrounds().get(rng), rng)
        for b in rec.boxes:
            mask, off = render_mask(b.text, b.font, b.size)
            x1, y1 = b.origin[0] + off[0], b.origin[1] + off[1]
            r = b.rect
            assert abs(x1 - r.x1) <= 2 and abs(y1 - r.y1) <= 2
            assert abs(x1 + mask.width - r.x2) <= 2 and abs(y1 + mask.height - r.y2) <= 2


def test_condition_strip_uses_condition_font():
    rng = np.random.default_rng(5)
    rec = synthesize_sample(latin_spec(), ProceduralBackgrounds().get(rng), rng, SamplePolicy(fixed_boxes=1))
    strip = np.asarray(rec.condition.convert("L"))
    assert strip.shape[0] == 64
    assert strip.min() == 0 and strip.max() == 255


def test_mean_box_count_monte_carlo():
    policy = SamplePolicy()
    rng = np.random.default_rng(0)
    counts = [policy.box_count(rng) for _ in range(1000)]
    assert abs(np.mean(counts) - 1.7) <= 0.15
    assert min(counts) >= 1 and max(counts) <= policy.max_boxes


def test_sample_seed_order_independent():
    assert sample_seed(0, "latin", 5) == sample_seed(0, "latin", 5)
    assert sample_seed(0, "latin", 5) != sample_seed(0, "latin", 6)
    assert sample_seed(0, "latin", 5) != sample_seed(1, "latin", 5)
    assert sample_seed(0, "latin", 5) != sample_seed(0, "greek", 5)


def test_build_dataset_two_specs(tmp_path):
    greek = ScriptSpec("greek", CHARSETS["greek"], [DEJAVU["serif"]], DEJAVU["sans"])
    m = build_dataset([latin_spec(), greek], tmp_path, counts={"latin": 5, "greek": 5})
    assert {k: v["count"] for k, v in m["scripts"].items()} == {"latin": 5, "greek": 5}
    rows = read_annotations(tmp_path / "annotations.jsonl")
    assert len(rows) == m["produced"] == m["requested"] - m["failed"] == 10
    assert len(list((tmp_path / "images").rglob("*.png"))) == 10
    assert all((tmp_path / r["image"]).is_file() and (tmp_path / r["condition"]).is_file() for r in rows)
    assert json.loads((tmp_path / "manifest.json").read_text())["produced"] == 10


def test_build_dataset_deterministic(tmp_path):
    a = build_dataset([latin_spec()], tmp_path / "a", seed=9, counts={"latin": 6})
    b = build_dataset([latin_spec()], tmp_path / "b", seed=9, counts={"latin": 6}, jobs=2)
    assert (tmp_path / "a/annotations.jsonl").read_bytes() == (tmp_path / "b/annotations.jsonl").read_bytes()
    assert a == b
    for p in (tmp_path / "a/images").rglob("*.png"):
        assert p.read_bytes() == (tmp_path / "b" / p.relative_to(tmp_path / "a")).read_bytes()


def test_build_dataset_records_failures(tmp_path):
    policy = SamplePolicy(fixed_boxes=6, size_range=(90, 96), retries=2)
    m = build_dataset([latin_spec()], tmp_path, counts={"latin": 4}, policy=policy,
                      backgrounds=ProceduralBackgrounds((128, 128)), fail_threshold=0.05)
    assert m["failed"] == 4 and m["threshold_exceeded"]
    assert all("PlacementFailure" in f["error"] for f in m["failures"])


def test_coverage_statistics(tmp_path):
    m = build_dataset([latin_spec()], tmp_path, seed=1, counts={"latin": 120})
    s = m["scripts"]["latin"]
    hist = Counter()
    for row in read_annotations(tmp_path / "annotations.jsonl"):
        for b in row["boxes"]:
            hist.update(b["text"])
    assert s["coverage"] == {c: hist[c] for c in LATIN_104}
    assert s["covered_chars"] == 104 and s["uncovered"] == ""


def test_record_alignment_map_is_clean():
    rng = np.random.default_rng(2)
    rec = synthesize_sample(latin_spec(), ProceduralBackgrounds().get(rng), rng, SamplePolicy(fixed_boxes=3))
    s = summarize_map(record_alignment_map(rec))
    assert s["collisions"] == 0 and s["outside_declared"] == 0
    assert s["boxes"] == 3


@pytest.mark.parametrize("angle", [-25.0, -7.5, 10.0, 30.0])
@pytest.mark.parametrize("corner", range(4))
def test_rotate_tracks_corners(angle, corner):
    from glyphalign.datagen.synth import _rotate

    mask = Image.new("L", (80, 24), 40)
    x0, y0 = [(0, 0), (74, 0), (74, 18), (0, 18)][corner]
    mask.paste(255, (x0, y0, x0 + 6, y0 + 6))
    rotated, quad = _rotate(mask, angle)
    ys, xs = np.nonzero(np.asarray(rotated) > 200)
    centroid = np.array([xs.mean(), ys.mean()])
    dists = np.hypot(*(np.array(quad) - centroid).T)
    # the marked block hugs its own corner of the rotated quad
    assert dists.argmin() == corner and dists[corner] < 6


def test_slanted_boxes_export_control_points():
    from glyphalign.pe import Mode

    spec = latin_spec()
    policy = SamplePolicy(slant_degrees=20, fixed_boxes=2)
    checked = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        try:
            rec = synthesize_sample(spec, ProceduralBackgrounds().get(rng), rng, policy)
        except PlacementFailure:
            continue
        checked += 1
        for b in rec.boxes:
            q, r = np.array(b.quad), b.rect
            assert abs(b.angle) <= 20
            assert q[:, 0].min() >= r.x1 and q[:, 0].max() <= r.x2 - 1
            assert q[:, 1].min() >= r.y1 and q[:, 1].max() <= r.y2 - 1
            cp = b.control_points()
            np.testing.assert_allclose(cp.targets[:4], q / 16)
        s = summarize_map(record_alignment_map(rec, Mode.TPS))
        assert s["collisions"] == 0 and s["outside_declared"] == 0
        back = SampleRecord.from_json(json.loads(json.dumps(rec.to_json())))
        assert back.boxes[0].quad == rec.boxes[0].quad
    assert checked >= 5


def test_unslanted_records_have_no_quad():
    rng = np.random.default_rng(0)
    rec = synthesize_sample(latin_spec(), ProceduralBackgrounds().get(rng), rng, SamplePolicy(fixed_boxes=1))
    data = rec.to_json()["boxes"][0]
    assert "quad" not in data and "angle" not in data
    cp = rec.boxes[0].control_points()
    r = rec.boxes[0].rect
    assert cp.targets[0].tolist() == [r.x1 / 16, r.y1 / 16]
    assert cp.targets[2].tolist() == [(r.x2 - 1) / 16, (r.y2 - 1) / 16]
