"""Lift 2D candidate masks into per-face 3D segmentation.

Per view: filter candidates by the top-k area rule, map mask pixels to
faces through the face-id buffer, estimate each mask's central face,
reweight covered faces by a Gaussian fitted to neighborhood-averaged
geodesic distances from that center, and tally visibility. Across views:
accumulate, multiply by visibility, smooth over edge neighbors, and
threshold at the mean score of visible faces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .backends import CandidateMask
from .geodesic import GeodesicSolver, fit_gaussian, gaussian_density
from .mesh import FaceGraph, Mesh, ring_reach
from .render import BACKGROUND, ViewRender


class FusionError(Exception):
    """Raised when no view produced usable candidates upstream."""


@dataclass(frozen=True)
class FusionConfig:
    """Knobs of the mask-to-3D stage; defaults echoed into every result."""

    area_diff_threshold: float = 0.25  # fraction of image area
    k_max: int = 3
    q: int = 5
    smoothing_iterations: int = 3
    min_pixels_per_face: int = 1

    def __post_init__(self):
        if not 0.0 <= self.area_diff_threshold <= 1.0:
            raise ValueError("area_diff_threshold must be in [0, 1]")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.q < 0:
            raise ValueError("q must be >= 0")
        if self.smoothing_iterations < 0:
            raise ValueError("smoothing_iterations must be >= 0")
        if self.min_pixels_per_face < 1:
            raise ValueError("min_pixels_per_face must be >= 1")

    def as_dict(self):
        return {
            "area_diff_threshold": self.area_diff_threshold,
            "k_max": self.k_max,
            "q": self.q,
            "smoothing_iterations": self.smoothing_iterations,
            "min_pixels_per_face": self.min_pixels_per_face,
        }


@dataclass
class FaceScores:
    """Per-face accumulated score and visibility tally."""

    score: np.ndarray
    visibility: np.ndarray

    @classmethod
    def zeros(cls, face_count: int) -> "FaceScores":
        return cls(np.zeros(face_count), np.zeros(face_count, dtype=np.int64))


@dataclass
class MaskFaceSet:
    """Faces covered by one candidate mask in one view."""

    view: int
    mask_index: int
    faces: np.ndarray  # sorted ascending
    pixel_counts: np.ndarray
    confidence: float
    answer_text: str = ""
    central_face: int | None = None


@dataclass
class SegmentationResult:
    labels: np.ndarray  # bool per face
    score: np.ndarray
    visibility: np.ndarray
    explanations: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    skipped_views: list = field(default_factory=list)

    def to_dict(self):
        return {
            "labels": [bool(v) for v in self.labels],
            "score": [float(v) for v in self.score],
            "visibility": [int(v) for v in self.visibility],
            "explanations": self.explanations,
            "config": self.config,
            "skipped_views": self.skipped_views,
        }


def filter_topk(candidates, config: FusionConfig):
    """Top-k rule: a dominant-area gap keeps only the most salient mask.

    Candidates arrive sorted by confidence descending. With fewer than two
    they pass through; otherwise when the area difference of the top two
    exceeds the threshold only the top one survives, else the top
    min(k_max, count).
    """
    if len(candidates) < 2:
        return list(candidates)
    a1 = candidates[0].area_fraction
    a2 = candidates[1].area_fraction
    if abs(a1 - a2) > config.area_diff_threshold:
        return [candidates[0]]
    return list(candidates[: config.k_max])


def mask_faces(
    view: ViewRender,
    candidate: CandidateMask,
    config: FusionConfig,
    mask_index: int = 0,
) -> MaskFaceSet:
    """Faces whose pixels are foreground inside the candidate's bbox."""
    if candidate.mask.shape != view.shape:
        raise ValueError(
            f"mask shape {candidate.mask.shape} != view shape {view.shape}"
        )
    x0, y0, x1, y1 = candidate.bbox
    boxed = np.zeros_like(candidate.mask)
    boxed[y0:y1, x0:x1] = candidate.mask[y0:y1, x0:x1]
    ids = view.face_id[boxed & (view.face_id != BACKGROUND)]
    faces, counts = np.unique(ids, return_counts=True)
    keep = counts >= config.min_pixels_per_face
    return MaskFaceSet(
        view=view.view_index,
        mask_index=mask_index,
        faces=faces[keep].astype(np.int64),
        pixel_counts=counts[keep],
        confidence=candidate.confidence,
        answer_text=candidate.answer_text,
    )


def central_face(mesh: Mesh, view: ViewRender, mask_set: MaskFaceSet) -> int:
    """Area-weighted average of the covered faces' centroids, projected back.

    The face found at the projected pixel anchors the mask if it belongs to
    the covered set; otherwise (non-convex regions, off-screen projections)
    the covered face with the nearest centroid in 3D is used.
    """
    faces = mask_set.faces
    if len(faces) == 0:
        raise ValueError("cannot locate the central face of an empty face set")
    areas = mesh.face_areas()[faces]
    centroids = mesh.face_centroids()[faces]
    average = (centroids * areas[:, None]).sum(axis=0) / areas.sum()
    pixel, depth = view.camera.project(average)
    px, py = int(np.floor(pixel[0])), int(np.floor(pixel[1]))
    h, w = view.shape
    if depth > 0 and 0 <= px < w and 0 <= py < h:
        hit = int(view.face_id[py, px])
        if hit != BACKGROUND and hit in set(faces.tolist()):
            return hit
    nearest = np.argmin(np.linalg.norm(centroids - average, axis=1))
    return int(faces[nearest])


def gaussian_reweight(
    mesh: Mesh,
    graph: FaceGraph,
    mask_set: MaskFaceSet,
    q: int,
    solver: GeodesicSolver | None = None,
    sigma_floor: float | None = None,
) -> np.ndarray:
    """Weights over the covered faces from the fitted distance Gaussian.

    Distances from the central face are averaged over each face's q-ring
    intersected with the covered set (plain tallies underweight the area
    around the center), then scored by the Gaussian fitted to those
    averages. Weights are strictly positive.
    """
    if mask_set.central_face is None:
        raise ValueError("central_face must be set before reweighting")
    if solver is None:
        solver = GeodesicSolver(mesh)
    if sigma_floor is None:
        sigma_floor = 1e-3 * mesh.diameter()
    faces = mask_set.faces
    dist = solver.distance_from(mask_set.central_face).distance[faces]
    # covered faces in components unreachable from the center keep a finite
    # far-distance surrogate so their weights stay positive
    dist = np.where(np.isfinite(dist), dist, mesh.diameter())
    reach = ring_reach(graph, faces, q)[:, faces]
    counts = np.asarray(reach.sum(axis=1)).ravel()
    averaged = (reach @ dist) / counts
    mu, sigma = fit_gaussian(averaged, sigma_floor=sigma_floor)
    return gaussian_density(averaged, mu, sigma)


def accumulate(scores: FaceScores, mask_set: MaskFaceSet, weights: np.ndarray) -> FaceScores:
    """Add one mask's weighted confidence to the raw scores and bump tallies."""
    scores.score[mask_set.faces] += weights * mask_set.confidence
    scores.visibility[mask_set.faces] += 1
    return scores


def visibility_smooth(scores: FaceScores, graph: FaceGraph, iterations: int) -> FaceScores:
    """Average each score with its edge neighbors, ``iterations`` times."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    adj = graph.edge_adjacency.astype(np.float64)
    degree = np.asarray(adj.sum(axis=1)).ravel()
    score = scores.score.copy()
    for _ in range(iterations):
        score = (score + adj @ score) / (1.0 + degree)
    return FaceScores(score=score, visibility=scores.visibility.copy())


def global_filter(scores: FaceScores) -> np.ndarray:
    """Threshold at the mean score over every face.

    Never-segmented faces carry score 0 and participate in the mean; a face
    is labeled when its score reaches the mean and it was segmented at
    least once.
    """
    visible = scores.visibility > 0
    if not visible.any():
        return np.zeros_like(visible)
    threshold = scores.score.mean()
    return (scores.score >= threshold) & visible


def fuse(
    mesh: Mesh,
    graph: FaceGraph,
    views,
    per_view_candidates,
    config: FusionConfig,
    solver: GeodesicSolver | None = None,
    selections: dict | None = None,
    view_errors: dict | None = None,
) -> SegmentationResult:
    """Run the whole mask-to-3D stage over every view.

    ``per_view_candidates[i]`` is the candidate list for ``views[i]``
    (confidence-sorted), or None when that view failed upstream; failed
    views are recorded in the result. ``selections`` maps a view index to
    explicit candidate indices, bypassing the top-k rule for that view.
    Views are processed in ascending view-index order so the result is
    independent of the caller's ordering.
    """
    if len(views) != len(per_view_candidates):
        raise ValueError("views and candidate lists must align")
    order = sorted(range(len(views)), key=lambda i: views[i].view_index)
    skipped = []
    usable = []
    for i in order:
        view = views[i]
        cands = per_view_candidates[i]
        if cands is None:
            message = (view_errors or {}).get(view.view_index, "backend failed")
            skipped.append({"view": view.view_index, "error": str(message)})
            continue
        usable.append((view, cands))
    if not usable and skipped:
        raise FusionError("all views failed upstream")

    if solver is None:
        solver = GeodesicSolver(mesh)
    sigma_floor = 1e-3 * mesh.diameter()
    raw = FaceScores.zeros(mesh.face_count)
    explanations = []
    for view, cands in usable:
        if selections and view.view_index in selections:
            indices = selections[view.view_index]
            if any(j < 0 or j >= len(cands) for j in indices):
                raise IndexError(
                    f"selection index out of range for view {view.view_index}"
                )
            kept = [cands[j] for j in indices]
        else:
            kept = filter_topk(cands, config)
        for j, cand in enumerate(kept):
            explanations.append(
                {
                    "view": view.view_index,
                    "text": cand.answer_text,
                    "confidence": float(cand.confidence),
                }
            )
            mset = mask_faces(view, cand, config, mask_index=j)
            if len(mset.faces) == 0:
                continue
            mset.central_face = central_face(mesh, view, mset)
            weights = gaussian_reweight(
                mesh, graph, mset, config.q, solver=solver, sigma_floor=sigma_floor
            )
            accumulate(raw, mset, weights)

    combined = FaceScores(
        score=raw.visibility * raw.score, visibility=raw.visibility
    )
    smoothed = visibility_smooth(combined, graph, config.smoothing_iterations)
    labels = global_filter(smoothed)
    return SegmentationResult(
        labels=labels,
        score=smoothed.score,
        visibility=smoothed.visibility,
        explanations=explanations,
        config=config.as_dict(),
        skipped_views=skipped,
    )


UNASSIGNED = -1


def multi_query_label(results: dict) -> np.ndarray:
    """Per-face argmax over per-category scores.

    ``results`` maps category name -> FaceScores (insertion order fixes the
    category index used for tie-breaks). Faces never seen by any category
    get UNASSIGNED.
    """
    if not results:
        raise ValueError("at least one category is required")
    names = list(results.keys())
    stack = np.stack([results[n].score for n in names])
    seen = np.stack([results[n].visibility > 0 for n in names])
    masked = np.where(seen, stack, -np.inf)
    labels = masked.argmax(axis=0)  # first max wins: lowest category index
    labels[~seen.any(axis=0)] = UNASSIGNED
    return labels


def write_result_json(path, result: SegmentationResult, extra: dict | None = None) -> None:
    payload = result.to_dict()
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


SEGMENT_COLOR = (255, 0, 0)
NEUTRAL_COLOR = (128, 128, 128)


def save_colored_ply(path, mesh: Mesh, labels) -> None:
    """ASCII PLY with per-face color: segmented faces red, the rest gray."""
    labels = np.asarray(labels)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {mesh.vertex_count}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write(f"element face {mesh.face_count}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        fh.write("end_header\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for face, lab in zip(mesh.faces, labels):
            r, g, b = SEGMENT_COLOR if lab else NEUTRAL_COLOR
            fh.write(f"3 {face[0]} {face[1]} {face[2]} {r} {g} {b}\n")
