"""``glyphalign`` command line: align, synth, eval, inspect.

Exit codes: 0 success, 1 synth finished above its failure threshold,
2 input/validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import DegenerateSource, GlyphMissing, NonFiniteInput, SingularSystem
from .geometry import (
    DEFAULT_LATENT_FACTOR,
    KNOWN_SCRIPTS,
    PixelRect,
    ScriptClass,
    ScriptKind,
    TokenGrid,
    build_condition_layout,
    split_script_runs,
)
from .pe import AlignmentMap, Mode, build_alignment_map, summarize_map
from .warp import ControlPoints, TargetRegion, box_control_points

EXIT_OK, EXIT_THRESHOLD, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

MODES = {"affine": Mode.AFFINE, "tps": Mode.TPS, "offset": Mode.LAYOUT_FREE}


class InputError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"glyphalign: {msg}", file=sys.stderr)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})")


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# align


def _box_script(box: dict, n: int) -> ScriptClass:
    name = box.get("script")
    if name is None:
        runs = split_script_runs(box["text"])
        if len(runs) != 1:
            raise InputError(f"box {n}: text mixes scripts; split it into one box per run")
        return runs[0][1]
    if isinstance(name, dict):
        return ScriptClass(ScriptKind(name["kind"]), name["name"])
    if name in KNOWN_SCRIPTS:
        return KNOWN_SCRIPTS[name]
    raise InputError(f"box {n}: unknown script {name!r}")


def _width_policy(box: dict, n: int, base: Path):
    if "advance" in box:
        adv = float(box["advance"])
        return lambda _text: adv
    if "font" in box:
        from .datagen.render import FontAdvance

        path = Path(box["font"])
        path = path if path.is_absolute() else base / path
        if not path.is_file():
            raise InputError(f"box {n}: font not found: {path}")
        return FontAdvance(str(path), int(box.get("font_size", 48)))
    return None


def parse_layout_request(req: dict, mode_override=None, latent_override=None, base: Path = Path(".")):
    """Validate an align request and turn it into build_alignment_map inputs.

    Relative font paths resolve against ``base``.
    """
    try:
        width, height = int(req["target"]["width"]), int(req["target"]["height"])
    except (KeyError, TypeError, ValueError):
        raise InputError("request needs target.width and target.height")
    if width <= 0 or height <= 0:
        raise InputError("target size must be positive")
    mode_name = mode_override or req.get("mode", "affine")
    if mode_name not in MODES:
        raise InputError(f"unknown mode {mode_name!r}")
    mode = MODES[mode_name]
    f = int(latent_override or req.get("latent_factor", DEFAULT_LATENT_FACTOR))
    if f < 1:
        raise InputError("latent factor must be >= 1")
    grid = TokenGrid.for_pixels(height, width, f)
    bounds = PixelRect(0, 0, width, height)

    boxes = req.get("boxes", [])
    if not isinstance(boxes, list):
        raise InputError("boxes must be a list")
    layouts = []
    for n, box in enumerate(boxes):
        if not isinstance(box, dict) or not box.get("text"):
            raise InputError(f"box {n}: missing text")
        script = _box_script(box, n)
        policy = _width_policy(box, n, base)
        if not script.is_logographic and policy is None:
            raise InputError(f"box {n}: alphabetic text needs 'advance' or 'font'")
        layout = build_condition_layout(box["text"], script, policy, f)
        cond = layout.token_grid(f)

        region = None
        if "region" in box:
            try:
                rect = PixelRect(*map(int, box["region"]))
            except (TypeError, ValueError) as exc:
                raise InputError(f"box {n}: bad region ({exc})")
            if not bounds.contains(rect):
                raise InputError(f"box {n}: region {list(rect.as_tuple())} outside target {width}x{height}")
            region = TargetRegion.from_pixel_box(rect, f)
        if mode is Mode.AFFINE:
            if region is None:
                raise InputError(f"box {n}: affine mode needs a region")
            spec = region
        elif mode is Mode.TPS:
            spec = (_tps_points(box, n, cond, region, f), region)
        else:
            spec = None
        layouts.append((layout, spec))
    return layouts, grid, mode


def _tps_points(box, n, cond: TokenGrid, region, f) -> ControlPoints:
    interior = [
        (np.asarray(s, float) / f, np.asarray(t, float) / f)
        for s, t in box.get("control_points", [])
    ]
    if "quad" in box:
        quad = np.asarray(box["quad"], float) / f
        if quad.shape != (4, 2):
            raise InputError(f"box {n}: quad needs 4 (x, y) corners")
        return box_control_points(cond.cols, cond.rows, quad, interior)
    if region is not None and box.get("pin_corners", True) and len(interior) < 3:
        quad = [(region.x1, region.y1), (region.x2, region.y1), (region.x2, region.y2), (region.x1, region.y2)]
        return box_control_points(cond.cols, cond.rows, quad, interior)
    if len(interior) < 3:
        raise InputError(f"box {n}: tps mode needs >= 3 control points, a quad, or a region")
    return ControlPoints([s for s, _ in interior], [t for _, t in interior])


def cmd_align(args) -> int:
    req = _load_json(args.request)
    layouts, grid, mode = parse_layout_request(req, args.mode, args.latent_factor, Path(args.request).parent)
    try:
        amap = build_alignment_map(layouts, grid, mode, regularization=args.lam, warn=False)
    except (SingularSystem, NonFiniteInput, DegenerateSource) as exc:
        box = _failing_box(layouts, grid, mode, args.lam)
        _err(f"box {box}: {type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    _write(args.out, amap.dumps() + "\n")
    d = amap.diagnostics
    print(f"extrapolated coordinates: {d.extrapolated}", file=sys.stderr)
    print(f"cross-box collisions: {len(d.collisions)}", file=sys.stderr)
    return EXIT_OK


def _failing_box(layouts, grid, mode, lam):
    for i, item in enumerate(layouts):
        try:
            build_alignment_map([item], grid, mode, regularization=lam, warn=False)
        except Exception:
            return i
    return "?"


# ---------------------------------------------------------------------------
# synth


def parse_synth_config(cfg: dict, base: Path, latent_override=None):
    from .datagen import CHARSETS, DirectoryBackgrounds, ProceduralBackgrounds, SamplePolicy, ScriptSpec

    if not isinstance(cfg, dict) or not cfg.get("specs"):
        raise InputError("config needs a non-empty 'specs' list")

    def resolve(p):
        p = Path(p)
        return str(p if p.is_absolute() else base / p)

    specs, counts = [], {}
    for n, s in enumerate(cfg["specs"]):
        try:
            chars = s["chars"] if "chars" in s else CHARSETS[s["charset"]]
            fonts = [resolve(f) for f in s["fonts"]]
            cond = resolve(s["condition_font"])
            spec = ScriptSpec(
                name=s["name"],
                character_set=chars,
                fonts=tuple(fonts),
                condition_font=cond,
                samples_goal=int(s.get("samples", 0)),
                kind=ScriptKind(s.get("kind", "alphabetic")),
            )
        except KeyError as exc:
            raise InputError(f"spec {n}: missing or unknown {exc}")
        except ValueError as exc:
            raise InputError(f"spec {n}: {exc}")
        for path in (*spec.fonts, spec.condition_font):
            if not os.path.isfile(path):
                raise InputError(f"font not found: {path}")
        specs.append(spec)

    policy_kw = dict(cfg.get("policy", {}))
    for key in ("length_range", "size_range"):
        if key in policy_kw:
            policy_kw[key] = tuple(policy_kw[key])
    if latent_override:
        policy_kw["latent_factor"] = latent_override
    try:
        policy = SamplePolicy(**policy_kw)
    except TypeError as exc:
        raise InputError(f"policy: {exc}")

    if cfg.get("background_dir"):
        bg_dir = resolve(cfg["background_dir"])
        if not os.path.isdir(bg_dir):
            raise InputError(f"background directory not found: {bg_dir}")
        backgrounds = DirectoryBackgrounds(bg_dir)
    else:
        backgrounds = ProceduralBackgrounds(tuple(cfg.get("image_size", (512, 512))))
    return specs, backgrounds, policy, int(cfg.get("seed", 0))


def cmd_synth(args) -> int:
    from .datagen import build_dataset

    cfg = _load_json(args.config)
    specs, backgrounds, policy, seed = parse_synth_config(cfg, Path(args.config).parent, args.latent_factor)
    if args.seed is not None:
        seed = args.seed
    try:
        manifest = build_dataset(
            specs, args.out, backgrounds, seed=seed, policy=policy,
            jobs=args.jobs or os.cpu_count() or 1, fail_threshold=args.fail_threshold,
        )
    except (GlyphMissing, ValueError) as exc:
        raise InputError(str(exc))
    print(
        f"produced {manifest['produced']}/{manifest['requested']} samples, "
        f"{manifest['failed']} failed, mean boxes/image {manifest['mean_boxes_per_image']:.3f}"
    )
    for name, s in manifest["scripts"].items():
        print(f"  {name}: {s['count']} samples, {s['covered_chars']}/{s['unique_chars']} chars covered")
    if manifest["threshold_exceeded"]:
        _err(f"failure rate {manifest['failure_rate']:.3f} exceeds threshold {args.fail_threshold}")
        return EXIT_THRESHOLD
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    from .errors import EmptyGroundTruth
    from .metrics import aggregate, alignment_diff, read_pairs

    try:
        with open(args.pairs, encoding="utf-8") as fh:
            pairs = read_pairs(fh)
    except FileNotFoundError:
        raise InputError(f"file not found: {args.pairs}")
    except ValueError as exc:
        raise InputError(f"{args.pairs}: {exc}")
    if not pairs:
        raise InputError(f"{args.pairs}: no transcript pairs")
    try:
        report = aggregate(pairs, normalization=args.normalize, trim=args.trim)
    except EmptyGroundTruth as exc:
        raise InputError(str(exc))
    if args.out:
        _write(args.out, json.dumps(report.to_json(), ensure_ascii=False, indent=2) + "\n")
    print(report.table())
    if args.diff:
        chunks = [f"[{p.lang}:{p.box_id}]\n{alignment_diff(p.ground_truth, p.predicted)}\n" for p in pairs]
        _write(args.diff, "\n".join(chunks))
    return EXIT_OK


# ---------------------------------------------------------------------------
# inspect


def render_map(amap: AlignmentMap, scale: int = 8):
    from PIL import Image, ImageDraw

    pts = amap.coords
    xmax = max(amap.target_cols, float(pts[:, 0].max()) + 1 if len(pts) else 0)
    ymax = max(amap.target_rows, float(pts[:, 1].max()) + 1 if len(pts) else 0)
    pad = 2 * scale
    size = (int(np.ceil(xmax * scale)) + 2 * pad, int(np.ceil(ymax * scale)) + 2 * pad)
    img = Image.new("RGB", size, (255, 255, 255))
    draw = ImageDraw.Draw(img)
    draw.rectangle([pad, pad, pad + amap.target_cols * scale, pad + amap.target_rows * scale],
                   outline=(160, 160, 160), fill=(240, 240, 240))
    palette = [(214, 39, 40), (31, 119, 180), (44, 160, 44), (148, 103, 189), (255, 127, 14), (23, 190, 207)]
    for b, region in enumerate(amap.regions):
        if region is not None:
            draw.rectangle([pad + region.x1 * scale, pad + region.y1 * scale,
                            pad + region.x2 * scale, pad + region.y2 * scale],
                           outline=palette[b % len(palette)])
    r = max(1, scale // 4)
    for b, (x, y) in zip(amap.boxes.tolist(), pts.tolist()):
        if b < 0:
            continue
        cx, cy = pad + x * scale, pad + y * scale
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=palette[b % len(palette)])
    return img


def cmd_inspect(args) -> int:
    data = _load_json(args.map)
    try:
        amap = AlignmentMap.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.map}: not an alignment map ({exc})")
    summary = summarize_map(amap)
    out = args.out or str(Path(args.map).with_suffix(".png"))
    render_map(amap).save(out)
    for key, value in summary.items():
        print(f"{key}: {value}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glyphalign", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("align", help="build an alignment map from a layout request")
    a.add_argument("request")
    a.add_argument("--out", "-o")
    a.add_argument("--mode", choices=sorted(MODES))
    a.add_argument("--latent-factor", type=int)
    a.add_argument("--lambda", dest="lam", type=float, default=0.0)
    a.set_defaults(func=cmd_align)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("config")
    s.add_argument("--out", "-o", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int)
    s.add_argument("--latent-factor", type=int)
    s.add_argument("--fail-threshold", type=float, default=0.05)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="score transcript pairs")
    e.add_argument("pairs")
    e.add_argument("--out", "-o")
    e.add_argument("--normalize", choices=["none", "nfc"], default="none")
    e.add_argument("--trim", action="store_true", help="ignore trailing whitespace for sentence precision")
    e.add_argument("--diff", help="write aligned diffs here")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("inspect", help="summarize and plot an alignment map")
    i.add_argument("map")
    i.add_argument("--out", "-o", help="PNG path (default: next to the map)")
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
