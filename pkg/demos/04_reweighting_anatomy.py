#!/usr/bin/env python3
"""What the Gaussian geodesic reweighting actually does to one mask.

Walk the stages by hand on a flat grid: pick a covered region, find its
central face, measure geodesic distances, average them over each face's
neighborhood ring, fit a Gaussian, and read off the weights.
"""

from pathlib import Path

import numpy as np

from meshreason import build_face_graph, fit_gaussian, gaussian_density
from meshreason.fusion import MaskFaceSet, gaussian_reweight
from meshreason.geodesic import GeodesicSolver
from meshreason.mesh import ring_reach
from meshreason.primitives import grid_patch

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(parents=True, exist_ok=True)

mesh = grid_patch(9, 9)
graph = build_face_graph(mesh)
solver = GeodesicSolver(mesh)

# pretend a mask covered the left two thirds of the grid
centroids = mesh.face_centroids()
covered = np.flatnonzero(centroids[:, 0] < 0.2).astype(np.int64)
central = int(covered[np.argmin(np.linalg.norm(centroids[covered] - centroids[covered].mean(0), axis=1))])
print(f"{len(covered)} covered faces, central face {central}")

# stage 1: raw geodesic distances from the central face
distance = solver.distance_from(central).distance[covered]
print(f"raw distances: 0 .. {distance.max():.3f}")

# stage 2: average each face's distance over its q-ring (q=5) inside the mask
reach = ring_reach(graph, covered, 5)[:, covered]
averaged = (reach @ distance) / np.asarray(reach.sum(axis=1)).ravel()
print(f"after ring averaging: {averaged.min():.3f} .. {averaged.max():.3f} (spread shrinks)")

# stage 3: fit the Gaussian and score every face with its density
mu, sigma = fit_gaussian(averaged, sigma_floor=1e-3 * mesh.diameter())
weights = gaussian_density(averaged, mu, sigma)
print(f"fitted mu={mu:.3f} sigma={sigma:.3f}")
print(f"weight range: {weights.min():.3f} .. {weights.max():.3f} (peak at d = mu)")

# the one-liner used by the pipeline gives the same numbers
mset = MaskFaceSet(
    view=0, mask_index=0, faces=covered, pixel_counts=np.ones(len(covered)),
    confidence=1.0, central_face=central,
)
pipeline_weights = gaussian_reweight(mesh, graph, mset, q=5, solver=solver)
assert np.allclose(pipeline_weights, weights)
print("gaussian_reweight reproduces the manual stages exactly")

with open(OUT / "reweighting.csv", "w") as fh:
    fh.write("face,distance,averaged,weight\n")
    for i, f in enumerate(covered):
        fh.write(f"{f},{distance[i]:.6f},{averaged[i]:.6f},{weights[i]:.6f}\n")
print(f"wrote {OUT / 'reweighting.csv'}")
