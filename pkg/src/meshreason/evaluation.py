"""Per-category mIoU evaluation over face-labeled shapes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass
class GroundTruth:
    """Per-face category labels for a set of shapes."""

    categories: list
    shapes: dict  # name -> int array of category indices per face

    def __post_init__(self):
        for name, labels in self.shapes.items():
            labels = np.asarray(labels, dtype=np.int64)
            if labels.size and (labels.min() < 0 or labels.max() >= len(self.categories)):
                raise ValueError(f"shape {name!r} uses labels outside the vocabulary")
            self.shapes[name] = labels

    def faces_of(self, shape: str, category_index: int) -> set:
        return set(np.flatnonzero(self.shapes[shape] == category_index).tolist())


def load_ground_truth(path) -> GroundTruth:
    data = json.loads(Path(path).read_text())
    return GroundTruth(categories=list(data["categories"]), shapes=dict(data["shapes"]))


def face_iou(pred, gt) -> float:
    """Intersection over union of two face-index sets.

    Both empty counts as perfect agreement (1.0); exactly one empty is 0.0.
    """
    pred = set(pred)
    gt = set(gt)
    if not pred and not gt:
        return 1.0
    union = len(pred | gt)
    return len(pred & gt) / union


@dataclass
class EvalReport:
    categories: list
    per_category_iou: dict  # name -> percent
    per_shape: dict  # name -> {shape: percent}
    shape_count: int
    mean_iou: float
    weighted: bool = False

    def as_dict(self):
        return {
            "categories": self.categories,
            "per_category_iou": self.per_category_iou,
            "per_shape": self.per_shape,
            "shape_count": self.shape_count,
            "mean_iou": self.mean_iou,
            "area_weighted": self.weighted,
        }

    def format_table(self, row_label: str = "ours") -> str:
        """One column per category, values in percent with two decimals."""
        headers = ["Model"] + list(self.categories)
        row = [row_label] + [
            f"{self.per_category_iou[c]:.2f}" for c in self.categories
        ]
        widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
        line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
        vals = "  ".join(v.ljust(w) for v, w in zip(row, widths))
        return line + "\n" + vals + "\n"


def _area_weighted_iou(pred, gt, areas) -> float:
    pred = set(pred)
    gt = set(gt)
    if not pred and not gt:
        return 1.0
    union = sum(areas[f] for f in pred | gt)
    if union == 0:
        return 0.0
    return sum(areas[f] for f in pred & gt) / union


def miou_report(
    predictions: dict,
    gt: GroundTruth,
    face_areas: dict | None = None,
) -> EvalReport:
    """Mean per-category IoU across shapes.

    ``predictions`` maps shape name -> per-face category indices (use -1
    for unassigned faces). Category IoU averages the per-shape IoUs; pass
    ``face_areas`` (shape name -> per-face areas) for the area-weighted
    variant.
    """
    if not predictions:
        raise ValueError("no predictions given")
    for name, pred in predictions.items():
        if name not in gt.shapes:
            raise ValueError(f"prediction for unknown shape {name!r}")
        if len(pred) != len(gt.shapes[name]):
            raise ValueError(
                f"shape {name!r}: prediction covers {len(pred)} faces, "
                f"ground truth has {len(gt.shapes[name])}"
            )
    weighted = face_areas is not None
    per_category = {}
    per_shape = {}
    for ci, cat in enumerate(gt.categories):
        shape_ious = {}
        for name in sorted(predictions):
            pred = np.asarray(predictions[name])
            pred_faces = set(np.flatnonzero(pred == ci).tolist())
            gt_faces = gt.faces_of(name, ci)
            if weighted:
                value = _area_weighted_iou(pred_faces, gt_faces, face_areas[name])
            else:
                value = face_iou(pred_faces, gt_faces)
            shape_ious[name] = 100.0 * value
        per_shape[cat] = shape_ious
        per_category[cat] = float(np.mean(list(shape_ious.values())))
    mean_iou = float(np.mean(list(per_category.values())))
    return EvalReport(
        categories=list(gt.categories),
        per_category_iou=per_category,
        per_shape=per_shape,
        shape_count=len(predictions),
        mean_iou=mean_iou,
        weighted=weighted,
    )
