"""Independent brute-force oracles used to check the library's fast paths."""

import numpy as np

from meshreason.render import BACKGROUND


def ray_first_hit(mesh, camera, px, py):
    """First face hit by the ray through pixel center (px+0.5, py+0.5).

    Moller-Trumbore over every face; returns (face index | BACKGROUND, t).
    """
    origin, d = camera.pixel_rays(px + 0.5, py + 0.5)
    v0 = mesh.vertices[mesh.faces[:, 0]]
    e1 = mesh.vertices[mesh.faces[:, 1]] - v0
    e2 = mesh.vertices[mesh.faces[:, 2]] - v0
    pvec = np.cross(d, e2)
    det = (e1 * pvec).sum(axis=1)
    ok = np.abs(det) > 1e-14
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = origin - v0
    u = (tvec * pvec).sum(axis=1) * inv_det
    qvec = np.cross(tvec, e1)
    v = (d * qvec).sum(axis=1) * inv_det
    t = (e2 * qvec).sum(axis=1) * inv_det
    hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 1e-9)
    if not hit.any():
        return BACKGROUND, np.inf
    candidates = np.flatnonzero(hit)
    best = candidates[np.argmin(t[candidates])]
    return int(best), float(t[best])


def interior_pixels(face_id):
    """Mask of non-background pixels whose 8-neighborhood has the same id."""
    h, w = face_id.shape
    interior = np.ones((h, w), dtype=bool)
    interior[[0, -1], :] = False
    interior[:, [0, -1]] = False
    core = face_id[1:-1, 1:-1]
    same = np.ones_like(core, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == dx == 0:
                continue
            same &= face_id[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx] == core
    interior[1:-1, 1:-1] = same & (core != BACKGROUND)
    return interior


def raycast_agreement(mesh, camera, view, n_samples, seed=0):
    """Fraction of sampled interior pixels where the rasterizer's face id
    equals the ray-cast first hit. Returns (agreement, sample count)."""
    rng = np.random.default_rng(seed)
    mask = interior_pixels(view.face_id)
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return 1.0, 0
    take = min(n_samples, len(xs))
    pick = rng.choice(len(xs), size=take, replace=False)
    agree = 0
    for i in pick:
        face, _ = ray_first_hit(mesh, camera, int(xs[i]), int(ys[i]))
        agree += face == view.face_id[ys[i], xs[i]]
    return agree / take, take


def view_depth_oracle(camera, point):
    """View-space depth of a world point: projection onto the forward axis."""
    pos, _, _, fwd = camera.basis()
    return float((np.asarray(point) - pos) @ fwd)
