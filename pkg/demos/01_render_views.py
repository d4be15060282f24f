#!/usr/bin/env python3
"""Render a mesh from a ring of cameras and inspect the face-id buffers.

The renderer is a plain z-buffered software rasterizer: every pixel keeps
the id of the frontmost face, which is what ties 2D masks back to the mesh.
"""

from pathlib import Path


from meshreason import load_mesh, make_view_ring, normalize, render_views, visible_faces
from meshreason.render import save_face_ids, save_png

ROOT = Path(__file__).resolve().parent.parent
OUT = Path(__file__).resolve().parent / "out" / "render"
OUT.mkdir(parents=True, exist_ok=True)

mesh = normalize(load_mesh(ROOT / "data" / "meshes" / "humanoid.obj"))
print(f"mesh: {mesh.face_count} faces, {mesh.vertex_count} vertices")

# eight cameras on a horizontal ring, all looking at the origin
cameras = make_view_ring(n_views=8, width=512, height=512, distance=2.6)
views = render_views(mesh, cameras)

for view in views:
    save_png(view.color, OUT / f"view_{view.view_index}.png")
save_face_ids(views[0], OUT / "view_0.faceids.u32")

# the face-id histogram says how much of the mesh each view actually sees
for view in views[:3]:
    hist = visible_faces(view)
    pixels = sum(hist.values())
    print(
        f"view {view.view_index}: {len(hist)} faces visible over {pixels} pixels "
        f"(coverage {pixels / view.color[..., 0].size:.1%})"
    )

stacked = set()
for view in views:
    stacked.update(visible_faces(view))
print(f"all 8 views together cover {len(stacked)}/{mesh.face_count} faces")
print(f"wrote images to {OUT}")
