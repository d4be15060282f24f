#!/usr/bin/env python3
"""Regenerate the checked-in sample meshes and backend fixtures.

Run from the repository root:  python3 tools/make_fixtures.py
"""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from meshreason.backends import OracleBackend, SegQuery  # noqa: E402
from meshreason.mesh import Mesh, normalize  # noqa: E402
from meshreason.primitives import (  # noqa: E402
    box,
    cylinder,
    grid_patch,
    hemisphere_labels,
    humanoid,
    icosphere,
)
from meshreason.render import make_view_ring, render_views, save_png  # noqa: E402


def write_obj(path: Path, mesh: Mesh):
    with open(path, "w") as fh:
        fh.write("# generated by tools/make_fixtures.py\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0]+1} {f[1]+1} {f[2]+1}\n")


def write_ascii_ply(path: Path, mesh: Mesh):
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {mesh.vertex_count}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write(f"element face {mesh.face_count}\n")
        fh.write("property list uchar int vertex_indices\nend_header\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def write_gt(path: Path, name: str, labels):
    categories = sorted(set(labels))
    payload = {
        "categories": categories,
        "shapes": {name: [categories.index(l) for l in labels]},
    }
    path.write_text(json.dumps(payload, indent=1))


def sample_meshes():
    out = ROOT / "data" / "meshes"
    out.mkdir(parents=True, exist_ok=True)
    meshes = {
        "cube.obj": box(),
        "icosphere.obj": icosphere(2),
        "grid.ply": grid_patch(5, 5),
        "cylinder.obj": cylinder(radial_segments=24, height_segments=4),
    }
    hum, hum_labels = humanoid()
    meshes["humanoid.obj"] = hum
    counts = {}
    for name, mesh in meshes.items():
        path = out / name
        if name.endswith(".obj"):
            write_obj(path, mesh)
        else:
            write_ascii_ply(path, mesh)
        counts[name] = mesh.face_count
    (out / "manifest.json").write_text(json.dumps(counts, indent=1))
    write_gt(out / "humanoid_gt.json", "humanoid", hum_labels)
    print("sample meshes:", counts)


def oracle_masks(mesh, labels, label, views):
    backend = OracleBackend(mesh, labels, label)
    query = SegQuery(label)
    return [backend.segment(v, query) for v in views]


def cube_fixture():
    """Fixture for the CLI smoke and determinism runs: 4 views at 256."""
    out = ROOT / "fixtures" / "cube"
    backend_dir = out / "backend"
    backend_dir.mkdir(parents=True, exist_ok=True)
    mesh = box()
    write_obj(out / "cube.obj", mesh)
    norm = normalize(mesh)
    labels = ["top" if c > 0 else "bottom" for c in norm.face_centroids()[:, 1]]
    write_gt(out / "gt.json", "cube", labels)
    cams = make_view_ring(4, 256, 256, 2.2)
    views = render_views(norm, cams)
    manifest = []
    for view, cands in zip(views, oracle_masks(norm, labels, "top", views)):
        entry = {"view": view.view_index, "candidates": []}
        for j, cand in enumerate(cands):
            name = f"view{view.view_index}_cand{j}.png"
            save_png(cand.mask.astype(np.uint8) * 255, backend_dir / name)
            entry["candidates"].append(
                {"mask_png": name, "confidence": 0.9, "text": "the top part"}
            )
        manifest.append(entry)
    (backend_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))
    print("cube fixture: 4 views")


def sphere_fixture():
    """Two candidates per view so selection flows have something to drop."""
    out = ROOT / "fixtures" / "sphere"
    backend_dir = out / "backend"
    backend_dir.mkdir(parents=True, exist_ok=True)
    mesh = icosphere(2)
    write_obj(out / "sphere.obj", mesh)
    norm = normalize(mesh)
    top_labels = hemisphere_labels(norm)
    centroids = norm.face_centroids()
    band_labels = ["band" if abs(c[1]) < 0.35 else "rest" for c in centroids]
    write_gt(out / "gt.json", "sphere", top_labels)
    res = 160
    cams = make_view_ring(4, res, res, 2.5)
    views = render_views(norm, cams)
    top = oracle_masks(norm, top_labels, "top", views)
    band = oracle_masks(norm, band_labels, "band", views)
    manifest = []
    for view in views:
        entry = {"view": view.view_index, "candidates": []}
        for tag, cands, conf, text in (
            ("top", top[view.view_index], 0.9, "the upper half"),
            ("band", band[view.view_index], 0.55, "the equator band"),
        ):
            for cand in cands:
                name = f"view{view.view_index}_{tag}.png"
                save_png(cand.mask.astype(np.uint8) * 255, backend_dir / name)
                entry["candidates"].append(
                    {"mask_png": name, "confidence": conf, "text": text}
                )
        manifest.append(entry)
    (backend_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))
    print("sphere fixture: 4 views, 2 candidates each")


if __name__ == "__main__":
    sample_meshes()
    cube_fixture()
    sphere_fixture()
