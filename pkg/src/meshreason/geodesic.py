"""Face-to-face geodesic distance fields via the heat method.

The solver diffuses heat from the source face for a short time, normalizes
the gradient of the heat field, and recovers distance from a Poisson solve
against the cotangent operator. A dual-graph Dijkstra field is provided as
an independent slower route for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import cg, splu

from .mesh import Mesh


class GeodesicError(Exception):
    """Raised when the linear solves cannot produce a usable field."""


@dataclass
class GeodesicField:
    """Per-face distances from one source face; +inf on unreachable parts."""

    source_face: int
    distance: np.ndarray
    clamped_faces: int = 0


def build_operators(mesh: Mesh):
    """Cotangent stiffness (PSD) and lumped mass matrix on vertices."""
    t0, t1, t2 = mesh.faces[:, 0], mesh.faces[:, 1], mesh.faces[:, 2]
    v0, v1, v2 = mesh.corners()
    e12 = v2 - v1
    e20 = v0 - v2
    e01 = v1 - v0
    cr = np.cross(e12, e20)
    vol = 2.0 * np.sqrt((cr * cr).sum(axis=1))  # 4 * area
    vol = np.maximum(vol, 1e-300)
    # off-diagonal cotangent weights (negative), diagonal from zero row sums
    a01 = (e12 * e20).sum(axis=1) / vol
    a12 = (e20 * e01).sum(axis=1) / vol
    a20 = (e01 * e12).sum(axis=1) / vol
    a00 = -a01 - a20
    a11 = -a01 - a12
    a22 = -a20 - a12
    data = np.column_stack([a01, a01, a12, a12, a20, a20, a00, a11, a22]).reshape(-1)
    i = np.column_stack([t0, t1, t1, t2, t2, t0, t0, t1, t2]).reshape(-1)
    j = np.column_stack([t1, t0, t2, t1, t0, t2, t0, t1, t2]).reshape(-1)
    n = mesh.vertex_count
    stiffness = sparse.csc_matrix((data, (i, j)), shape=(n, n))
    # lumped mass: one third of incident face area per vertex
    area3 = vol / 12.0
    mass_data = np.column_stack([area3, area3, area3]).reshape(-1)
    mi = np.column_stack([t0, t1, t2]).reshape(-1)
    mass = sparse.csc_matrix((mass_data, (mi, mi)), shape=(n, n))
    return stiffness, mass


class _Factorized:
    """LU solve with the regularize-and-retry policy for near-singular input."""

    def __init__(self, matrix: sparse.csc_matrix):
        self.matrix = matrix.tocsc()
        self._lu = None
        self._regularized = False

    def _factor(self, regularize: bool):
        m = self.matrix
        if regularize:
            n = m.shape[0]
            eps = 1e-9 * m.diagonal().sum() / n
            m = (m + eps * sparse.identity(n, format="csc")).tocsc()
        return splu(m)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is None:
            try:
                self._lu = self._factor(regularize=False)
            except RuntimeError:
                self._lu = self._factor(regularize=True)
                self._regularized = True
        x = self._lu.solve(rhs)
        if np.isfinite(x).all() and self._residual_ok(x, rhs):
            return x
        if not self._regularized:
            self._lu = self._factor(regularize=True)
            self._regularized = True
            x = self._lu.solve(rhs)
            if np.isfinite(x).all() and self._residual_ok(x, rhs):
                return x
        x, info = cg(self.matrix, rhs, rtol=1e-8, maxiter=20 * self.matrix.shape[0])
        if info != 0 or not np.isfinite(x).all():
            raise GeodesicError("linear solve failed after regularization fallback")
        return x

    def _residual_ok(self, x, rhs):
        scale = np.linalg.norm(rhs)
        if scale == 0:
            return True
        return np.linalg.norm(self.matrix @ x - rhs) / scale < 1e-6


class GeodesicSolver:
    """Heat-method distance fields with operators factorized once per mesh.

    Safe to share across threads for concurrent reads after construction;
    solves against the cached factorizations are independent per source.
    """

    def __init__(self, mesh: Mesh, time_multiplier: float = 1.0):
        self.mesh = mesh
        self.stiffness, self.mass = build_operators(mesh)
        h = mesh.mean_edge_length()
        self.time_step = time_multiplier * h * h
        self._heat = _Factorized((self.mass + self.time_step * self.stiffness).tocsc())
        self._poisson = _Factorized(self.stiffness)
        n_comp, labels = csgraph.connected_components(
            (abs(self.stiffness) > 0).astype(np.int8), directed=False
        )
        self._vertex_component = labels if n_comp > 1 else None

        v0, v1, v2 = mesh.corners()
        normals = np.cross(v1 - v0, v2 - v0)
        self._double_area = np.linalg.norm(normals, axis=1)
        self._unit_normals = normals / np.maximum(self._double_area, 1e-300)[:, None]
        # edges opposite each corner, CCW within the face
        self._opp_edges = (v2 - v1, v0 - v2, v1 - v0)

    def _face_gradients(self, u: np.ndarray) -> np.ndarray:
        f = self.mesh.faces
        grad = np.zeros((len(f), 3))
        for corner in range(3):
            contrib = np.cross(self._unit_normals, self._opp_edges[corner])
            grad += u[f[:, corner], None] * contrib
        return grad / np.maximum(self._double_area, 1e-300)[:, None]

    def _divergence(self, field: np.ndarray) -> np.ndarray:
        mesh = self.mesh
        v0, v1, v2 = mesh.corners()
        edges = [(v1 - v0, v2 - v0), (v2 - v1, v0 - v1), (v0 - v2, v1 - v2)]

        def cot(a, b):
            cross = np.linalg.norm(np.cross(a, b), axis=1)
            return (a * b).sum(axis=1) / np.maximum(cross, 1e-300)

        cots = [cot(*edges[c]) for c in range(3)]  # interior angle at corner c
        div = np.zeros(mesh.vertex_count)
        corner_other = [(1, 2), (2, 0), (0, 1)]
        verts = mesh.vertices
        faces = mesh.faces
        for c, (j, k) in enumerate(corner_other):
            e_cj = verts[faces[:, j]] - verts[faces[:, c]]
            e_ck = verts[faces[:, k]] - verts[faces[:, c]]
            contrib = 0.5 * (
                cots[k] * (e_cj * field).sum(axis=1)
                + cots[j] * (e_ck * field).sum(axis=1)
            )
            np.add.at(div, faces[:, c], contrib)
        return div

    def distance_from(self, source_face: int) -> GeodesicField:
        mesh = self.mesh
        if source_face < 0 or source_face >= mesh.face_count:
            raise IndexError(f"source face {source_face} out of range")
        src_verts = mesh.faces[source_face]

        u0 = np.zeros(mesh.vertex_count)
        u0[src_verts] = 1.0
        u = self._heat.solve(u0)

        grad = self._face_gradients(u)
        norm = np.linalg.norm(grad, axis=1)
        field = np.zeros_like(grad)
        nz = norm > 1e-300
        field[nz] = -grad[nz] / norm[nz, None]

        rhs = -self._divergence(field)
        # project out the constant nullspace per component (Neumann solvability)
        if self._vertex_component is None:
            rhs -= rhs.mean()
        else:
            for comp in np.unique(self._vertex_component):
                sel = self._vertex_component == comp
                rhs[sel] -= rhs[sel].mean()
        phi = self._poisson.solve(rhs)
        phi = phi - phi[src_verts].min()

        face_dist = phi[mesh.faces].mean(axis=1)
        face_dist -= face_dist[source_face]
        clamped = int((face_dist < 0).sum())
        face_dist = np.maximum(face_dist, 0.0)
        face_dist[source_face] = 0.0

        if self._vertex_component is not None:
            src_comp = self._vertex_component[src_verts[0]]
            unreachable = self._vertex_component[mesh.faces[:, 0]] != src_comp
            face_dist[unreachable] = np.inf
        return GeodesicField(
            source_face=int(source_face),
            distance=face_dist,
            clamped_faces=max(clamped, 0),
        )


def heat_geodesic(mesh: Mesh, source_face: int, time_multiplier: float = 1.0) -> GeodesicField:
    """One-shot heat-method distance field from ``source_face``."""
    return GeodesicSolver(mesh, time_multiplier=time_multiplier).distance_from(source_face)


def dijkstra_geodesic(mesh: Mesh, source_face: int) -> GeodesicField:
    """Shortest paths on the dual graph (edge-adjacent faces, centroid weights).

    Exact for the graph metric; used as the slow verification route for
    :func:`heat_geodesic`.
    """
    if source_face < 0 or source_face >= mesh.face_count:
        raise IndexError(f"source face {source_face} out of range")
    from .mesh import build_face_graph

    graph = build_face_graph(mesh)
    adj = graph.edge_adjacency.tocoo()
    centroids = mesh.face_centroids()
    weights = np.linalg.norm(centroids[adj.row] - centroids[adj.col], axis=1)
    w = sparse.csr_matrix((weights, (adj.row, adj.col)), shape=adj.shape)
    dist = csgraph.dijkstra(w, directed=False, indices=source_face)
    return GeodesicField(source_face=int(source_face), distance=dist)


def save_distance_csv(path, field: GeodesicField) -> None:
    """Debug dump: one ``faceIndex,distance`` row per face."""
    with open(path, "w") as fh:
        fh.write("faceIndex,distance\n")
        for f, d in enumerate(field.distance):
            fh.write(f"{f},{d:.9g}\n")


def fit_gaussian(values, sigma_floor: float = 0.0) -> tuple[float, float]:
    """Sample mean and population standard deviation, floored at sigma_floor."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot fit a Gaussian to an empty sample")
    mu = float(arr.mean())
    sigma = float(arr.std(ddof=0))
    return mu, max(sigma, sigma_floor)


def gaussian_density(d, mu: float, sigma: float):
    """Normal probability density at ``d``; strictly positive."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = np.asarray(d, dtype=np.float64)
    out = np.exp(-((d - mu) ** 2) / (2.0 * sigma * sigma)) / (sigma * np.sqrt(2.0 * np.pi))
    return float(out) if out.ndim == 0 else out
