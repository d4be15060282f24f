"""Pluggable 2D reasoning-segmentation backends.

A backend answers one rendered view and a natural-language query with
candidate masks, each carrying a confidence and an explanation text. The
model itself is opaque; this module owns only the observable contract:
an HTTP client for live models, a fixture backend replaying recorded
answers, and a ground-truth oracle backend for tests.
"""

from __future__ import annotations

import base64
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests
from PIL import Image

from .render import BACKGROUND, ViewRender

MASK_FOREGROUND_THRESHOLD = 128  # 8-bit grayscale >= 128 is foreground


class BackendError(Exception):
    """Backend failure; carries the view index so the pipeline can skip it."""

    def __init__(self, message, view=None):
        super().__init__(message)
        self.view = view


class ProtocolError(BackendError):
    """The backend's response violates the wire or fixture contract."""


@dataclass(frozen=True)
class SegQuery:
    """User prompt plus the cap on returned candidates."""

    text: str
    max_candidates: int = 6

    def __post_init__(self):
        if not self.text:
            raise ValueError("query text must be non-empty")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")


@dataclass
class CandidateMask:
    """One backend answer: binary mask, confidence, text, tight bbox."""

    mask: np.ndarray  # (H, W) bool
    confidence: float
    answer_text: str
    bbox: tuple[int, int, int, int] = field(default=None)  # x0, y0, x1, y1 exclusive

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.ndim != 2:
            raise ValueError("mask must be 2-D")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if self.bbox is None:
            self.bbox = tight_bbox(self.mask)
        else:
            self.bbox = tuple(int(v) for v in self.bbox)

    @property
    def area_fraction(self) -> float:
        return float(self.mask.sum()) / self.mask.size


def tight_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Tight [x0, y0, x1, y1) box around foreground; zeros if empty."""
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return (0, 0, 0, 0)
    return (int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def finalize_candidates(raw, max_candidates: int, view_index=None):
    """Boundary normalization shared by every backend.

    Drops zero-confidence candidates (they must never count as evidence),
    verifies any supplied bbox contains the foreground and tightens it, and
    returns candidates sorted by confidence descending (stable), truncated
    to ``max_candidates``.
    """
    kept = []
    for cand in raw:
        if cand.confidence <= 0.0:
            continue
        tight = tight_bbox(cand.mask)
        if cand.mask.any():
            x0, y0, x1, y1 = cand.bbox
            if not (x0 <= tight[0] and y0 <= tight[1] and x1 >= tight[2] and y1 >= tight[3]):
                raise ProtocolError(
                    f"bbox {cand.bbox} does not contain mask foreground {tight}",
                    view=view_index,
                )
        cand.bbox = tight
        kept.append(cand)
    kept.sort(key=lambda c: -c.confidence)
    return kept[:max_candidates]


def encode_png(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes) -> np.ndarray:
    img = Image.open(io.BytesIO(data)).convert("L")
    return np.asarray(img) >= MASK_FOREGROUND_THRESHOLD


class FixtureBackend:
    """Replays candidates recorded in a manifest directory.

    Layout: ``manifest.json`` is a list of ``{"view": i, "candidates":
    [{"mask_png": relpath, "confidence": c, "text": t}]}``; mask PNGs are
    8-bit grayscale with >= 128 meaning foreground.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        manifest_path = self.directory / "manifest.json"
        if not manifest_path.exists():
            raise BackendError(f"fixture manifest not found: {manifest_path}")
        try:
            entries = json.loads(manifest_path.read_text())
            self._by_view = {}
            for entry in entries:
                self._by_view.setdefault(int(entry["view"]), []).extend(
                    entry["candidates"]
                )
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed fixture manifest: {exc}") from exc

    def segment(self, view: ViewRender, query: SegQuery):
        raw = []
        for spec in self._by_view.get(view.view_index, []):
            try:
                mask = decode_mask_png((self.directory / spec["mask_png"]).read_bytes())
                cand = CandidateMask(
                    mask=mask,
                    confidence=float(spec["confidence"]),
                    answer_text=str(spec.get("text", "")),
                )
            except (OSError, ValueError, KeyError) as exc:
                raise ProtocolError(
                    f"malformed fixture candidate for view {view.view_index}: {exc}",
                    view=view.view_index,
                ) from exc
            if cand.mask.shape != view.shape:
                raise ProtocolError(
                    f"fixture mask shape {cand.mask.shape} != view {view.shape}",
                    view=view.view_index,
                )
            raw.append(cand)
        return finalize_candidates(raw, query.max_candidates, view.view_index)


class OracleBackend:
    """Renders ground-truth labels into perfect masks; the test double.

    ``target_label`` fixes the part to segment; when None the query text is
    used as the label.
    """

    def __init__(self, mesh, gt_labels, target_label=None):
        if len(gt_labels) != mesh.face_count:
            raise ValueError("gt_labels must cover every face")
        self.mesh = mesh
        self.gt_labels = list(gt_labels)
        self.target_label = target_label

    def segment(self, view: ViewRender, query: SegQuery):
        label = self.target_label if self.target_label is not None else query.text
        target_faces = np.array(
            [i for i, l in enumerate(self.gt_labels) if l == label], dtype=np.int64
        )
        if len(target_faces) == 0:
            return []
        mask = np.isin(view.face_id, target_faces) & (view.face_id != BACKGROUND)
        if not mask.any():
            return []
        cand = CandidateMask(mask=mask, confidence=1.0, answer_text=label)
        return finalize_candidates([cand], query.max_candidates, view.view_index)


class HttpBackend:
    """Client for the v1 wire protocol.

    POST {base_url}/v1/segment with ``{"image_png_base64", "query",
    "max_candidates"}``; expects ``{"candidates": [{"mask_png_base64",
    "confidence", "text", "bbox"?}]}``. Transient transport failures are
    retried up to ``retries`` times.
    """

    def __init__(self, base_url, timeout=60.0, retries=2, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.session = session or requests.Session()

    def segment(self, view: ViewRender, query: SegQuery):
        payload = {
            "image_png_base64": base64.b64encode(encode_png(view.color)).decode("ascii"),
            "query": query.text,
            "max_candidates": query.max_candidates,
        }
        response = self._post(payload, view.view_index)
        try:
            body = response.json()
            candidates = body["candidates"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(
                f"malformed backend response (missing candidates): {exc}",
                view=view.view_index,
            ) from exc
        raw = []
        for item in candidates:
            raw.append(self._decode_candidate(item, view))
        return finalize_candidates(raw, query.max_candidates, view.view_index)

    def _post(self, payload, view_index):
        last = None
        for attempt in range(self.retries + 1):
            try:
                response = self.session.post(
                    f"{self.base_url}/v1/segment", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last = BackendError(f"backend unreachable: {exc}", view=view_index)
            else:
                if response.status_code == 200:
                    return response
                last = BackendError(
                    f"backend returned HTTP {response.status_code}", view=view_index
                )
                if 400 <= response.status_code < 500:
                    raise last
            if attempt < self.retries:
                time.sleep(0.1 * (attempt + 1))
        raise last

    def _decode_candidate(self, item, view):
        for key in ("mask_png_base64", "confidence", "text"):
            if key not in item:
                raise ProtocolError(
                    f"candidate missing field '{key}'", view=view.view_index
                )
        try:
            mask = decode_mask_png(base64.b64decode(item["mask_png_base64"]))
        except Exception as exc:
            raise ProtocolError(
                f"undecodable candidate mask: {exc}", view=view.view_index
            ) from exc
        if mask.shape != view.shape:
            raise ProtocolError(
                f"candidate mask shape {mask.shape} != view {view.shape}",
                view=view.view_index,
            )
        confidence = item["confidence"]
        if not isinstance(confidence, (int, float)) or not 0.0 <= confidence <= 1.0:
            raise ProtocolError(
                f"candidate field 'confidence' out of range: {confidence}",
                view=view.view_index,
            )
        bbox = item.get("bbox")
        try:
            return CandidateMask(
                mask=mask,
                confidence=float(confidence),
                answer_text=str(item["text"]),
                bbox=bbox,
            )
        except ValueError as exc:
            raise ProtocolError(str(exc), view=view.view_index) from exc


def make_backend(spec: str, mesh=None):
    """Build a backend from a CLI spec string.

    Accepted forms: ``http:<url>``, ``fixture:<dir>``, and
    ``oracle:<gt.json>:<label>`` (the JSON maps faces to labels; requires
    ``mesh``).
    """
    if spec.startswith("http:"):
        url = spec[len("http:") :]
        if url.startswith("//"):
            url = "http:" + url  # http://host was split on the first colon
        return HttpBackend(url)
    if spec.startswith("https://"):
        return HttpBackend(spec)
    if spec.startswith("fixture:"):
        return FixtureBackend(spec[len("fixture:") :])
    if spec.startswith("oracle:"):
        rest = spec[len("oracle:") :]
        gt_path, sep, label = rest.rpartition(":")
        if not sep:
            gt_path, label = rest, ""
        if not gt_path:
            raise ValueError(f"oracle backend spec needs oracle:<gt.json>:<label>, got {spec!r}")
        if mesh is None:
            raise ValueError("oracle backend requires the mesh")
        labels = load_label_file(gt_path, mesh.face_count)
        # empty label leaves the target unpinned: the query text selects it
        return OracleBackend(mesh, labels, label or None)
    raise ValueError(f"unknown backend spec: {spec!r}")


def load_label_file(path, face_count: int):
    """Read per-face labels from JSON.

    Accepts ``{"categories": [...], "labels": [idx per face]}`` or the
    ground-truth shape file ``{"categories": [...], "shapes": {name:
    [idx per face]}}`` (the single shape, or the one matching face_count).
    """
    data = json.loads(Path(path).read_text())
    categories = data["categories"]
    if "labels" in data:
        idx = data["labels"]
    else:
        shapes = data["shapes"]
        matches = [v for v in shapes.values() if len(v) == face_count]
        if len(shapes) == 1:
            idx = next(iter(shapes.values()))
        elif len(matches) == 1:
            idx = matches[0]
        else:
            raise ValueError(f"cannot pick a shape from {path} for this mesh")
    if len(idx) != face_count:
        raise ValueError(
            f"label file {path} covers {len(idx)} faces, mesh has {face_count}"
        )
    return [categories[i] for i in idx]
