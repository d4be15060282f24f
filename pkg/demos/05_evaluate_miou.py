#!/usr/bin/env python3
"""Score multi-part predictions with the per-category mIoU harness.

Runs the pipeline once per part on the synthetic figure, combines the
per-part scores with the argmax rule, and prints the evaluation table.
"""

import numpy as np

from meshreason import (
    FaceScores,
    FusionConfig,
    GroundTruth,
    OracleBackend,
    SegQuery,
    build_face_graph,
    fuse,
    miou_report,
    multi_query_label,
    normalize,
)
from meshreason.primitives import humanoid
from meshreason.render import make_view_ring, render_views

mesh, labels = humanoid()
mesh = normalize(mesh)
graph = build_face_graph(mesh)
parts = ["head", "torso", "legs"]

cameras = make_view_ring(8, 192, 192, distance=3.2)
views = render_views(mesh, cameras)

per_part = {}
for part in parts:
    backend = OracleBackend(mesh, labels, part)
    query = SegQuery(part)
    per_view = [backend.segment(view, query) for view in views]
    result = fuse(mesh, graph, views, per_view, FusionConfig())
    per_part[part] = FaceScores(score=result.score, visibility=result.visibility)
    print(f"{part:6s}: {int(result.labels.sum())} faces above threshold")

# one label per face: the part with the highest fused score wherever seen
combined = multi_query_label(per_part)
print(f"unassigned faces (never visible): {(combined == -1).sum()}")

gt = GroundTruth(
    categories=parts,
    shapes={"figure": np.array([parts.index(l) for l in labels])},
)
report = miou_report({"figure": combined}, gt)
print()
print(report.format_table(row_label="oracle-run"), end="")
print(f"mean IoU: {report.mean_iou:.2f}")
