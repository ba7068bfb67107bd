"""Dataset assembly: seeding, parallel synthesis, JSONL annotations, manifest."""
from __future__ import annotations

import io
import json
import logging
import zlib
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import GlyphAlignError
from .synth import ProceduralBackgrounds, SamplePolicy, ScriptSpec, synthesize_sample

log = logging.getLogger(__name__)


def sample_seed(master: int, script: str, index: int) -> int:
    """64-bit per-sample seed, independent of generation order."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(zlib.crc32(script.encode()), index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _png(img) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG", compress_level=1)
    return buf.getvalue()


def _work(job):
    spec, backgrounds, policy, master, index = job
    seed = sample_seed(master, spec.name, index)
    rng = np.random.default_rng(seed)
    try:
        record = synthesize_sample(spec, backgrounds.get(rng), rng, policy, seed=seed, index=index)
    except (GlyphAlignError, ValueError) as exc:
        return spec.name, index, None, f"{type(exc).__name__}: {exc}", b"", b""
    return spec.name, index, record.to_json(), None, _png(record.image), _png(record.condition)


def build_dataset(
    specs: Sequence[ScriptSpec],
    out_dir,
    backgrounds=None,
    seed: int = 0,
    policy: SamplePolicy | None = None,
    jobs: int = 1,
    counts: dict[str, int] | None = None,
    fail_threshold: float = 0.05,
) -> dict:
    """Generate every spec's samples into ``out_dir`` and return the manifest.

    Layout: ``images/<script>/<index>.png``, ``conditions/<script>/<index>.png``,
    ``annotations.jsonl`` (one record per line, in script then index order)
    and ``manifest.json``. Per-sample failures are collected rather than
    raised; ``manifest["threshold_exceeded"]`` flags a failure rate above
    ``fail_threshold``. Output bytes depend only on the inputs and ``seed``,
    never on ``jobs``.
    """
    if not specs:
        raise ValueError("no script specs given")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate script names in {names}")
    for spec in specs:
        spec.validate()
    backgrounds = backgrounds or ProceduralBackgrounds()
    policy = policy or SamplePolicy()
    counts = counts or {}

    out = Path(out_dir)
    jobs_list = []
    for spec in specs:
        n = counts.get(spec.name, spec.samples_goal)
        (out / "images" / spec.name).mkdir(parents=True, exist_ok=True)
        (out / "conditions" / spec.name).mkdir(parents=True, exist_ok=True)
        jobs_list += [(spec, backgrounds, policy, seed, i) for i in range(n)]

    per_script = Counter()
    coverage = {s.name: Counter() for s in specs}
    fonts = Counter()
    box_total = 0
    failures = []

    if jobs > 1:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_work, jobs_list, chunksize=max(1, len(jobs_list) // (jobs * 8)))
    else:
        pool = None
        results = map(_work, jobs_list)
    try:
        with open(out / "annotations.jsonl", "w", encoding="utf-8") as sink:
            for name, index, record, error, img_png, cond_png in results:
                if error is not None:
                    failures.append({"script": name, "index": index, "error": error})
                    log.warning("sample %s/%d failed: %s", name, index, error)
                    continue
                image_ref = f"images/{name}/{index:06d}.png"
                cond_ref = f"conditions/{name}/{index:06d}.png"
                (out / image_ref).write_bytes(img_png)
                (out / cond_ref).write_bytes(cond_png)
                record["image"], record["condition"] = image_ref, cond_ref
                sink.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
                per_script[name] += 1
                for box in record["boxes"]:
                    coverage[name].update(box["text"])
                    fonts[box["font"]] += 1
                    box_total += 1
    finally:
        if pool is not None:
            pool.shutdown()

    requested = len(jobs_list)
    produced = sum(per_script.values())
    manifest = {
        "seed": seed,
        "policy": asdict(policy),
        "requested": requested,
        "produced": produced,
        "failed": len(failures),
        "failure_rate": len(failures) / requested if requested else 0.0,
        "threshold_exceeded": bool(requested and len(failures) / requested > fail_threshold),
        "mean_boxes_per_image": box_total / produced if produced else 0.0,
        "scripts": {},
        "font_usage": dict(sorted(fonts.items())),
        "failures": failures,
    }
    for spec in specs:
        hist = coverage[spec.name]
        manifest["scripts"][spec.name] = {
            "count": per_script[spec.name],
            "unique_chars": len(spec.character_set),
            "covered_chars": sum(1 for c in spec.character_set if hist[c]),
            "uncovered": "".join(c for c in spec.character_set if not hist[c]),
            "coverage": {c: hist[c] for c in spec.character_set},
        }
    (out / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def read_annotations(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
