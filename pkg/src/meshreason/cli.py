"""Command line entry points: render | segment | eval | serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failures keep a diagnostic, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


class FileArgumentError(Exception):
    """Bad paths or unusable inputs; maps to exit code 2."""


def build_parser():
    parser = argparse.ArgumentParser(
        prog="meshreason",
        description="Multi-view mesh part segmentation driven by a 2D "
        "language-segmentation backend.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="render view ring images and face ids")
    _add_render_flags(render)
    render.add_argument("--out", required=True, help="output directory")
    render.add_argument(
        "--face-ids", action="store_true", help="also dump uint32 face-id buffers"
    )
    render.set_defaults(func=cmd_render)

    segment = sub.add_parser("segment", help="segment mesh parts for a query")
    _add_render_flags(segment)
    segment.add_argument(
        "--query",
        action="append",
        required=True,
        help="natural-language part query (repeat for multi-category runs)",
    )
    segment.add_argument(
        "--backend",
        default=None,
        help="http:<url> | fixture:<dir> | oracle:<gt.json>:<label> "
        "(default: MESHREASON_BACKEND env var)",
    )
    segment.add_argument("--out", required=True, help="output directory")
    segment.add_argument("--config", default=None, help="JSON config file")
    segment.add_argument("--max-candidates", type=int, default=None)
    segment.add_argument("-T", "--area-threshold", type=float, default=None,
                         help="top-k area difference threshold")
    segment.add_argument("--k-max", type=int, default=None)
    segment.add_argument("--q", type=int, default=None, help="neighborhood rank")
    segment.add_argument("--smoothing", type=int, default=None)
    segment.add_argument("--min-pixels", type=int, default=None)
    segment.set_defaults(func=cmd_segment)

    evaluate = sub.add_parser("eval", help="score predictions against ground truth")
    evaluate.add_argument("--pred", required=True, help="directory of result.json files")
    evaluate.add_argument("--gt", required=True, help="ground-truth JSON")
    evaluate.add_argument("--out", default=None, help="directory for report files")
    evaluate.add_argument(
        "--area-weighted",
        action="store_true",
        help="weight IoU by face area (requires --mesh-dir)",
    )
    evaluate.add_argument(
        "--mesh-dir",
        default=None,
        help="directory of <shape>.obj/.ply meshes for area weighting",
    )
    evaluate.set_defaults(func=cmd_eval)

    serve = sub.add_parser("serve", help="run the job service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8008)
    serve.add_argument("--backend", default=None)
    serve.add_argument("--persist-dir", default=None)
    serve.add_argument("--ui-dir", default=None, help="static viewer bundle to mount at /ui")
    serve.set_defaults(func=cmd_serve)
    return parser


def _add_render_flags(cmd):
    cmd.add_argument("--mesh", required=True, help="OBJ or PLY mesh path")
    cmd.add_argument("--views", type=int, default=None, help="view count (default 8)")
    cmd.add_argument("--res", type=int, default=None, help="square resolution (default 1024)")
    cmd.add_argument("--fov", type=float, default=None)
    cmd.add_argument("--distance", type=float, default=None)
    cmd.add_argument("--elevation", type=float, default=None)


def _config_from_args(args):
    from .pipeline import resolve_config

    overrides = {
        "n_views": args.views,
        "width": args.res,
        "height": args.res,
        "fov_degrees": args.fov,
        "distance": args.distance,
        "elevation_degrees": args.elevation,
    }
    if getattr(args, "max_candidates", None) is not None:
        overrides["max_candidates"] = args.max_candidates
    for attr, key in (
        ("area_threshold", "area_diff_threshold"),
        ("k_max", "k_max"),
        ("q", "q"),
        ("smoothing", "smoothing_iterations"),
        ("min_pixels", "min_pixels_per_face"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    config_file = getattr(args, "config", None)
    if config_file and not Path(config_file).exists():
        raise FileArgumentError(f"config file not found: {config_file}")
    return resolve_config(overrides, config_file)


def _require_mesh(path):
    if not Path(path).exists():
        raise FileArgumentError(f"mesh file not found: {path}")


def cmd_render(args) -> int:
    from .mesh import load_mesh, normalize
    from .render import render_views, save_face_ids, save_png

    _require_mesh(args.mesh)
    config = _config_from_args(args)
    mesh = normalize(load_mesh(args.mesh))
    from .render import make_view_ring

    cams = make_view_ring(
        config.n_views, config.width, config.height, config.distance,
        config.fov_degrees, config.elevation_degrees,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    views = render_views(mesh, cams, workers=config.workers)
    for view in views:
        save_png(view.color, out / f"view_{view.view_index:03d}.png")
        if args.face_ids:
            save_face_ids(view, out / f"view_{view.view_index:03d}.faceids.u32")
    print(f"rendered {len(views)} views to {out}")
    return EXIT_OK


def cmd_segment(args) -> int:
    from .backends import make_backend
    from .pipeline import run_segmentation

    _require_mesh(args.mesh)
    backend_spec = args.backend or os.environ.get("MESHREASON_BACKEND")
    if not backend_spec:
        raise FileArgumentError(
            "no backend given: pass --backend or set MESHREASON_BACKEND"
        )
    if backend_spec.startswith("fixture:"):
        fixture_dir = Path(backend_spec[len("fixture:") :])
        if not fixture_dir.exists():
            raise FileArgumentError(f"fixture directory not found: {fixture_dir}")
    config = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run, results, _ = run_segmentation(
        args.mesh,
        args.query,
        backend_factory=lambda mesh: make_backend(backend_spec, mesh=mesh),
        config=config,
        out_dir=out,
        backend_spec=backend_spec,
    )
    last = results[args.query[-1]]
    labeled = int(last.labels.sum())
    skipped = len(last.skipped_views)
    print(
        f"segmented {labeled}/{run.mesh.face_count} faces "
        f"({skipped} views skipped) -> {out / 'result.json'}"
    )
    return EXIT_OK


def cmd_eval(args) -> int:
    from .evaluation import load_ground_truth, miou_report

    gt_path = Path(args.gt)
    if not gt_path.exists():
        raise FileArgumentError(f"ground-truth file not found: {gt_path}")
    pred_dir = Path(args.pred)
    if not pred_dir.exists():
        raise FileArgumentError(f"prediction directory not found: {pred_dir}")
    gt = load_ground_truth(gt_path)
    predictions = collect_predictions(pred_dir, gt)
    if not predictions:
        raise FileArgumentError(f"no predictions found under {pred_dir}")
    face_areas = None
    if args.area_weighted:
        if not args.mesh_dir:
            raise FileArgumentError("--area-weighted needs --mesh-dir for face areas")
        face_areas = collect_face_areas(Path(args.mesh_dir), predictions)
    report = miou_report(predictions, gt, face_areas=face_areas)
    table = report.format_table()
    print(table, end="")
    print(f"mean IoU: {report.mean_iou:.2f} over {report.shape_count} shape(s)")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(table)
        (out / "report.json").write_text(json.dumps(report.as_dict(), indent=1))
    return EXIT_OK


def collect_predictions(pred_dir: Path, gt):
    """Map shape name -> per-face category indices from result.json files.

    Accepts ``<dir>/<shape>/result.json`` (multi-category runs carry
    ``categories`` + ``category_labels``; single-query runs carry boolean
    ``labels`` and the query names the category) and ``<dir>/<shape>.json``.
    """
    import numpy as np

    found = {}
    candidates = sorted(pred_dir.glob("*/result.json")) + sorted(pred_dir.glob("*.json"))
    for path in candidates:
        shape = path.parent.name if path.name == "result.json" else path.stem
        if shape not in gt.shapes:
            continue
        data = json.loads(path.read_text())
        if "category_labels" in data:
            names = data.get("categories", [])
            remap = np.array(
                [gt.categories.index(n) if n in gt.categories else -1 for n in names]
                + [-1]
            )
            labels = np.asarray(data["category_labels"], dtype=np.int64)
            found[shape] = remap[labels]
        else:
            query = data.get("config", {}).get("query", "")
            cat = gt.categories.index(query) if query in gt.categories else -1
            labels = np.asarray(data["labels"], dtype=bool)
            found[shape] = np.where(labels, cat, -1)
    return found


def collect_face_areas(mesh_dir: Path, predictions):
    from .mesh import load_mesh

    areas = {}
    for shape in predictions:
        for suffix in (".obj", ".ply"):
            path = mesh_dir / f"{shape}{suffix}"
            if path.exists():
                areas[shape] = load_mesh(path).face_areas()
                break
        else:
            raise FileArgumentError(f"no mesh for shape {shape!r} under {mesh_dir}")
    return areas


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    backend_spec = args.backend or os.environ.get("MESHREASON_BACKEND")
    app = create_app(
        default_backend_spec=backend_spec,
        persist_dir=args.persist_dir,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
