"""End-to-end orchestration: load -> render -> segment -> fuse -> export."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .backends import BackendError, SegQuery
from .fusion import (
    FusionConfig,
    SegmentationResult,
    fuse,
    multi_query_label,
    save_colored_ply,
    write_result_json,
)
from .geodesic import GeodesicSolver
from .mesh import Mesh, build_face_graph, load_mesh, normalize
from .render import make_view_ring, render_views, save_png


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved configuration echoed into every result."""

    n_views: int = 8
    width: int = 1024
    height: int = 1024
    fov_degrees: float = 50.0
    distance: float = 2.2
    elevation_degrees: float = 0.0
    max_candidates: int = 6
    workers: int = 4
    fusion: FusionConfig = field(default_factory=FusionConfig)

    def as_dict(self):
        out = {
            "n_views": self.n_views,
            "width": self.width,
            "height": self.height,
            "fov_degrees": self.fov_degrees,
            "distance": self.distance,
            "elevation_degrees": self.elevation_degrees,
            "max_candidates": self.max_candidates,
        }
        out.update(self.fusion.as_dict())
        return out


_FUSION_KEYS = {
    "area_diff_threshold",
    "k_max",
    "q",
    "smoothing_iterations",
    "min_pixels_per_face",
}


def resolve_config(overrides: dict | None = None, config_file=None) -> PipelineConfig:
    """Merge defaults < config file < explicit overrides (None means unset)."""
    merged = {}
    if config_file:
        merged.update(json.loads(Path(config_file).read_text()))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    fusion_kwargs = {k: merged.pop(k) for k in list(merged) if k in _FUSION_KEYS}
    known = {f.name for f in PipelineConfig.__dataclass_fields__.values()}
    unknown = set(merged) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    config = PipelineConfig(**merged)
    if fusion_kwargs:
        config = replace(config, fusion=FusionConfig(**fusion_kwargs))
    return config


class PipelineRun:
    """One mesh and one or more queries against one backend.

    Phases are explicit so a job service can report progress and re-fuse
    with user-selected candidates without re-rendering or re-querying.
    """

    def __init__(self, mesh: Mesh, backend, config: PipelineConfig):
        self.input_mesh = mesh
        self.mesh = normalize(mesh)
        self.backend = backend
        self.config = config
        self.graph = None
        self.solver = None
        self.views = None
        self.per_view_candidates = None
        self.view_errors = {}

    def render(self):
        cams = make_view_ring(
            self.config.n_views,
            self.config.width,
            self.config.height,
            self.config.distance,
            self.config.fov_degrees,
            self.config.elevation_degrees,
        )
        self.views = render_views(self.mesh, cams, workers=self.config.workers)
        return self.views

    def segment(self, query_text: str):
        if self.views is None:
            self.render()
        query = SegQuery(query_text, max_candidates=self.config.max_candidates)

        def call(view):
            try:
                return self.backend.segment(view, query), None
            except BackendError as exc:
                return None, str(exc)

        workers = max(1, min(self.config.workers, 4))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(call, self.views))
        self.per_view_candidates = [c for c, _ in outcomes]
        self.view_errors = {
            view.view_index: err
            for view, (_, err) in zip(self.views, outcomes)
            if err is not None
        }
        return self.per_view_candidates

    def fuse(self, selections: dict | None = None) -> SegmentationResult:
        if self.per_view_candidates is None:
            raise RuntimeError("segment() must run before fuse()")
        if self.graph is None:
            self.graph = build_face_graph(self.mesh)
        if self.solver is None:
            self.solver = GeodesicSolver(self.mesh)
        return fuse(
            self.mesh,
            self.graph,
            self.views,
            self.per_view_candidates,
            self.config.fusion,
            solver=self.solver,
            selections=selections,
            view_errors=self.view_errors,
        )


def save_artifacts(
    out_dir,
    run: PipelineRun,
    result: SegmentationResult,
    query_text: str,
    backend_spec: str | None = None,
    extra_result_fields: dict | None = None,
):
    """Write views/, candidates/, result.json, and segmented.ply under out_dir."""
    out = Path(out_dir)
    views_dir = out / "views"
    cands_dir = out / "candidates"
    views_dir.mkdir(parents=True, exist_ok=True)
    cands_dir.mkdir(parents=True, exist_ok=True)
    for view in run.views:
        save_png(view.color, views_dir / f"view_{view.view_index:03d}.png")
    for view, cands in zip(run.views, run.per_view_candidates or []):
        for j, cand in enumerate(cands or []):
            save_png(
                (cand.mask.astype("uint8")) * 255,
                cands_dir / f"view_{view.view_index:03d}_cand_{j:02d}.png",
            )
    extra = {
        "config": {
            **run.config.as_dict(),
            "query": query_text,
            "backend": backend_spec or "",
        }
    }
    if extra_result_fields:
        extra.update(extra_result_fields)
    write_result_json(out / "result.json", result, extra=extra)
    save_colored_ply(out / "segmented.ply", run.mesh, result.labels)
    return out / "result.json"


def run_segmentation(
    mesh_path,
    query_texts,
    backend_factory,
    config: PipelineConfig,
    out_dir=None,
    backend_spec: str | None = None,
):
    """Batch entry point. ``query_texts`` may hold several queries; then the
    per-face argmax across categories is exported alongside the last result.

    ``backend_factory`` receives the normalized mesh (oracle backends need
    it) and returns the backend instance.
    """
    mesh = load_mesh(mesh_path)
    run = PipelineRun(mesh, None, config)
    run.backend = backend_factory(run.mesh)
    run.render()

    results = {}
    for text in query_texts:
        run.segment(text)
        results[text] = run.fuse()

    last_query = query_texts[-1]
    result = results[last_query]
    extra = None
    if len(query_texts) > 1:
        from .fusion import FaceScores

        scored = {
            text: FaceScores(score=res.score, visibility=res.visibility)
            for text, res in results.items()
        }
        labels = multi_query_label(scored)
        extra = {
            "categories": list(query_texts),
            "category_labels": [int(v) for v in labels],
        }
    if out_dir is not None:
        save_artifacts(
            out_dir,
            run,
            result,
            query_text=" | ".join(query_texts),
            backend_spec=backend_spec,
            extra_result_fields=extra,
        )
    return run, results, extra
