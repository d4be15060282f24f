"""Procedural triangle meshes used by tests and demos."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh


def tetrahedron() -> Mesh:
    """Regular tetrahedron, 4 faces; every face edge-adjacent to the others."""
    v = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64
    ) / np.sqrt(3.0)
    f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]], dtype=np.int32)
    return Mesh(v, f)


def box(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> Mesh:
    """Axis-aligned box, 12 triangles, outward winding."""
    ex, ey, ez = (e / 2.0 for e in extents)
    cx, cy, cz = center
    corners = np.array(
        [
            [-ex, -ey, -ez], [ex, -ey, -ez], [ex, ey, -ez], [-ex, ey, -ez],
            [-ex, -ey, ez], [ex, -ey, ez], [ex, ey, ez], [-ex, ey, ez],
        ]
    ) + np.array([cx, cy, cz])
    quads = [
        (0, 3, 2, 1),  # -z
        (4, 5, 6, 7),  # +z
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (0, 4, 7, 3),  # -x
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append((a, b, c))
        faces.append((a, c, d))
    return Mesh(corners, np.array(faces, dtype=np.int32))


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> Mesh:
    """Icosahedron subdivided ``subdivisions`` times, projected onto a sphere.

    Face count is 20 * 4**subdivisions (0 -> 20, 1 -> 80, 2 -> 320, 3 -> 1280).
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    for _ in range(subdivisions):
        verts, faces = _subdivide(verts, faces)
        verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return Mesh(verts * radius, faces.astype(np.int32))


def _subdivide(verts, faces):
    """Split each triangle into four via edge midpoints."""
    midpoint_cache = {}
    verts = list(map(tuple, verts))

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in midpoint_cache:
            va, vb = np.array(verts[a]), np.array(verts[b])
            verts.append(tuple((va + vb) / 2.0))
            midpoint_cache[key] = len(verts) - 1
        return midpoint_cache[key]

    new_faces = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.array(verts, dtype=np.float64), np.array(new_faces, dtype=np.int64)


def grid_patch(cells_x: int = 5, cells_y: int = 5, size: float = 1.0) -> Mesh:
    """Planar grid in the XY plane with 2 * cells_x * cells_y triangles."""
    xs = np.linspace(-size / 2, size / 2, cells_x + 1)
    ys = np.linspace(-size / 2, size / 2, cells_y + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    verts = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)])
    faces = []
    stride = cells_x + 1
    for j in range(cells_y):
        for i in range(cells_x):
            a = j * stride + i
            b = a + 1
            c = a + stride
            d = c + 1
            faces.append((a, b, d))
            faces.append((a, d, c))
    return Mesh(verts, np.array(faces, dtype=np.int32))


def cylinder(
    radial_segments: int = 32,
    height_segments: int = 4,
    radius: float = 1.0,
    height: float = 2.0,
    center=(0.0, 0.0, 0.0),
    capped: bool = False,
) -> Mesh:
    """Open (or capped) cylinder around the Y axis."""
    verts = []
    for j in range(height_segments + 1):
        y = -height / 2 + height * j / height_segments
        for i in range(radial_segments):
            a = 2 * np.pi * i / radial_segments
            verts.append((radius * np.sin(a), y, radius * np.cos(a)))
    faces = []
    for j in range(height_segments):
        for i in range(radial_segments):
            a = j * radial_segments + i
            b = j * radial_segments + (i + 1) % radial_segments
            c = a + radial_segments
            d = b + radial_segments
            faces.append((a, b, d))
            faces.append((a, d, c))
    if capped:
        bottom = len(verts)
        verts.append((0.0, -height / 2, 0.0))
        top = len(verts)
        verts.append((0.0, height / 2, 0.0))
        for i in range(radial_segments):
            b = (i + 1) % radial_segments
            faces.append((bottom, b, i))
            rim = height_segments * radial_segments
            faces.append((top, rim + i, rim + b))
    v = np.asarray(verts, dtype=np.float64) + np.asarray(center)
    return Mesh(v, np.array(faces, dtype=np.int32))


def hemisphere_labels(mesh: Mesh, axis: int = 1) -> list[str]:
    """Per-face 'top'/'bottom' labels split by centroid sign along ``axis``."""
    c = mesh.face_centroids()[:, axis]
    return ["top" if y > 0 else "bottom" for y in c]


def merge(meshes) -> Mesh:
    """Concatenate meshes into one, reindexing faces."""
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        offset += m.vertex_count
    return Mesh(np.vstack(verts), np.vstack(faces))


def humanoid() -> tuple[Mesh, list[str]]:
    """Synthetic three-part figure: head sphere, torso tube, two leg tubes.

    Returns the merged mesh and per-face labels ('head', 'torso', 'legs').
    Tubes are open so every face is reachable from a horizontal view ring.
    """
    head = icosphere(subdivisions=2, radius=0.28)
    head = Mesh(head.vertices + np.array([0.0, 1.08, 0.0]), head.faces)
    torso = cylinder(
        radial_segments=24, height_segments=5, radius=0.34, height=1.0,
        center=(0.0, 0.3, 0.0),
    )
    leg_l = cylinder(
        radial_segments=16, height_segments=5, radius=0.13, height=1.0,
        center=(-0.19, -0.72, 0.0),
    )
    leg_r = cylinder(
        radial_segments=16, height_segments=5, radius=0.13, height=1.0,
        center=(0.19, -0.72, 0.0),
    )
    mesh = merge([head, torso, leg_l, leg_r])
    labels = (
        ["head"] * head.face_count
        + ["torso"] * torso.face_count
        + ["legs"] * (leg_l.face_count + leg_r.face_count)
    )
    return mesh, labels
