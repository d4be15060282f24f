"""Multi-view rendering: z-buffered software rasterizer with per-pixel face IDs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .mesh import Mesh

BACKGROUND = -1  # in-memory face-id sentinel
BACKGROUND_EXPORT = 0xFFFFFFFF  # sentinel in the uint32 debug export
_NEAR = 1e-6


@dataclass(frozen=True)
class Camera:
    """Perspective pinhole camera."""

    position: tuple
    look_at: tuple
    up: tuple = (0.0, 1.0, 0.0)
    fov_degrees: float = 50.0
    width: int = 1024
    height: int = 1024

    def __post_init__(self):
        if np.allclose(self.position, self.look_at):
            raise ValueError("camera position must differ from look_at")
        if not 0.0 < self.fov_degrees < 180.0:
            raise ValueError("fov must be in (0, 180) degrees")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")

    def basis(self):
        """Right, up, forward unit vectors of the view frame."""
        pos = np.asarray(self.position, dtype=np.float64)
        fwd = np.asarray(self.look_at, dtype=np.float64) - pos
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, np.asarray(self.up, dtype=np.float64))
        right /= np.linalg.norm(right)
        up = np.cross(right, fwd)
        return pos, right, up, fwd

    def project(self, points: np.ndarray):
        """World points (..., 3) -> pixel coordinates (..., 2) and view depth.

        Pixel x grows right, y grows down; a point at pixel (px, py) covers
        the pixel whose center is (px, py) when px = ix + 0.5.
        """
        pos, right, up, fwd = self.basis()
        rel = np.asarray(points, dtype=np.float64) - pos
        x = rel @ right
        y = rel @ up
        z = rel @ fwd
        tan_half = np.tan(np.radians(self.fov_degrees) / 2.0)
        aspect = self.width / self.height
        with np.errstate(divide="ignore", invalid="ignore"):
            ndc_x = x / (z * tan_half * aspect)
            ndc_y = y / (z * tan_half)
        px = (ndc_x + 1.0) * 0.5 * self.width
        py = (1.0 - ndc_y) * 0.5 * self.height
        return np.stack([px, py], axis=-1), z

    def pixel_rays(self, px, py):
        """Unit ray directions through pixel coordinates (px, py)."""
        pos, right, up, fwd = self.basis()
        tan_half = np.tan(np.radians(self.fov_degrees) / 2.0)
        aspect = self.width / self.height
        ndc_x = 2.0 * np.asarray(px) / self.width - 1.0
        ndc_y = 1.0 - 2.0 * np.asarray(py) / self.height
        d = (
            np.multiply.outer(ndc_x * tan_half * aspect, right)
            + np.multiply.outer(ndc_y * tan_half, up)
            + fwd
        )
        return pos, d / np.linalg.norm(d, axis=-1, keepdims=True)


@dataclass
class ViewRender:
    """One rendered view: color image, face-id buffer, and depth buffer."""

    view_index: int
    color: np.ndarray  # (H, W, 3) uint8; exact (0,0,0) on background
    face_id: np.ndarray  # (H, W) int32; BACKGROUND where no face covers
    depth: np.ndarray  # (H, W) float64; +inf on background
    camera: Camera

    @property
    def shape(self):
        return self.face_id.shape


def make_view_ring(
    n_views: int,
    width: int = 1024,
    height: int = 1024,
    distance: float = 2.2,
    fov_degrees: float = 50.0,
    elevation_degrees: float = 0.0,
) -> list[Camera]:
    """Cameras evenly spaced in azimuth on a horizontal ring, looking at origin.

    Camera i sits at azimuth 360*i/n_views degrees; azimuth 0 is on +Z.
    """
    if n_views < 1:
        raise ValueError("n_views must be >= 1")
    if distance <= 1.0:
        raise ValueError("distance must exceed the unit-sphere radius")
    cams = []
    elev = np.radians(elevation_degrees)
    for i in range(n_views):
        az = 2.0 * np.pi * i / n_views
        pos = (
            distance * np.cos(elev) * np.sin(az),
            distance * np.sin(elev),
            distance * np.cos(elev) * np.cos(az),
        )
        cams.append(
            Camera(
                position=pos,
                look_at=(0.0, 0.0, 0.0),
                up=(0.0, 1.0, 0.0),
                fov_degrees=fov_degrees,
                width=width,
                height=height,
            )
        )
    return cams


def rasterize(mesh: Mesh, camera: Camera, base_gray: int = 200) -> ViewRender:
    """Render one view with per-pixel face IDs.

    One sample at each pixel center; the face with the smallest view-space
    depth at that center wins. No back-face culling; flat shading with a
    light at the camera (two-sided). Triangles with any vertex at or behind
    the camera plane are skipped.
    """
    h, w = camera.height, camera.width
    face_id = np.full((h, w), BACKGROUND, dtype=np.int32)
    depth = np.full((h, w), np.inf, dtype=np.float64)
    shade = np.zeros((h, w), dtype=np.float64)

    screen, z = camera.project(mesh.vertices)
    sx = screen[..., 0]
    sy = screen[..., 1]

    normals = mesh.face_normals()
    centroids = mesh.face_centroids()
    cam_pos = np.asarray(camera.position, dtype=np.float64)
    view_dir = centroids - cam_pos
    view_dir /= np.linalg.norm(view_dir, axis=1, keepdims=True)
    intensity = 0.25 + 0.75 * np.abs((normals * view_dir).sum(axis=1))

    tri_x = sx[mesh.faces]  # (N, 3)
    tri_y = sy[mesh.faces]
    tri_z = z[mesh.faces]

    in_front = (tri_z > _NEAR).all(axis=1)
    min_x = np.maximum(np.floor(tri_x.min(axis=1) - 0.5).astype(np.int64), 0)
    max_x = np.minimum(np.ceil(tri_x.max(axis=1) + 0.5).astype(np.int64), w - 1)
    min_y = np.maximum(np.floor(tri_y.min(axis=1) - 0.5).astype(np.int64), 0)
    max_y = np.minimum(np.ceil(tri_y.max(axis=1) + 0.5).astype(np.int64), h - 1)
    on_screen = (min_x <= max_x) & (min_y <= max_y)

    for f in np.flatnonzero(in_front & on_screen):
        x0, x1, x2 = tri_x[f]
        y0, y1, y2 = tri_y[f]
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if abs(area2) < 1e-12:
            continue
        xs = np.arange(min_x[f], max_x[f] + 1, dtype=np.float64) + 0.5
        ys = np.arange(min_y[f], max_y[f] + 1, dtype=np.float64) + 0.5
        px, py = np.meshgrid(xs, ys, indexing="xy")
        # signed edge functions; barycentric = e / area2
        e0 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        e1 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)
        e2 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
        if area2 > 0:
            inside = (e0 >= 0) & (e1 >= 0) & (e2 >= 0)
        else:
            inside = (e0 <= 0) & (e1 <= 0) & (e2 <= 0)
        if not inside.any():
            continue
        b0 = e0 / area2
        b1 = e1 / area2
        b2 = e2 / area2
        z0, z1, z2 = tri_z[f]
        # perspective-correct depth from screen-space barycentrics
        inv_z = b0 / z0 + b1 / z1 + b2 / z2
        with np.errstate(divide="ignore"):
            pz = 1.0 / inv_z
        iy, ix = np.nonzero(inside)
        gy = iy + min_y[f]
        gx = ix + min_x[f]
        pzv = pz[iy, ix]
        closer = pzv < depth[gy, gx]
        if not closer.any():
            continue
        gy, gx, pzv = gy[closer], gx[closer], pzv[closer]
        depth[gy, gx] = pzv
        face_id[gy, gx] = f
        shade[gy, gx] = intensity[f]

    color = np.zeros((h, w, 3), dtype=np.uint8)
    covered = face_id != BACKGROUND
    level = np.clip(np.rint(shade[covered] * base_gray), 1, 255).astype(np.uint8)
    color[covered] = level[:, None]
    return ViewRender(view_index=0, color=color, face_id=face_id, depth=depth, camera=camera)


def render_views(mesh: Mesh, cameras, workers: int = 4) -> list[ViewRender]:
    """Render every camera; views are independent and render concurrently."""
    from concurrent.futures import ThreadPoolExecutor

    def run(i):
        view = rasterize(mesh, cameras[i])
        view.view_index = i
        return view

    if workers <= 1 or len(cameras) == 1:
        return [run(i) for i in range(len(cameras))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(cameras))))


def visible_faces(view: ViewRender) -> dict[int, int]:
    """Histogram of face IDs over non-background pixels."""
    ids = view.face_id[view.face_id != BACKGROUND]
    values, counts = np.unique(ids, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def save_png(image: np.ndarray, path) -> None:
    Image.fromarray(image).save(path)


def save_face_ids(view: ViewRender, path) -> None:
    """Raw little-endian uint32 dump, row-major, background = 0xFFFFFFFF."""
    buf = view.face_id.astype(np.int64).copy()
    buf[buf == BACKGROUND] = BACKGROUND_EXPORT
    buf.astype("<u4").tofile(path)
