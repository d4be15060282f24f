"""Triangle mesh ingestion, normalization, and face adjacency structures."""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

DEGENERATE_AREA = 1e-12


class MeshError(Exception):
    """Raised when a mesh file cannot be read or yields no usable faces."""


@dataclass(frozen=True)
class Mesh:
    """An immutable triangle mesh.

    vertices: (V, 3) float64 coordinates.
    faces: (N, 3) int32 vertex indices, each row three distinct in-range
        indices spanning a face of area > 1e-12.
    dropped_faces: number of degenerate faces removed during loading.
    """

    vertices: np.ndarray
    faces: np.ndarray
    dropped_faces: int = 0

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int32))
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError("vertices must be (V, 3)")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError("faces must be (N, 3)")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise MeshError("face index out of range")
        if f.size and (
            (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 2] == f[:, 0])
        ).any():
            raise MeshError("face with repeated vertex index")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        v.setflags(write=False)
        f.setflags(write=False)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def corners(self):
        """Per-face vertex coordinates as three (N, 3) arrays."""
        return (
            self.vertices[self.faces[:, 0]],
            self.vertices[self.faces[:, 1]],
            self.vertices[self.faces[:, 2]],
        )

    def face_areas(self) -> np.ndarray:
        v0, v1, v2 = self.corners()
        cr = np.cross(v1 - v0, v2 - v0)
        return 0.5 * np.sqrt((cr * cr).sum(axis=1))

    def face_normals(self) -> np.ndarray:
        """Unit face normals; degenerate faces cannot occur post-load."""
        v0, v1, v2 = self.corners()
        n = np.cross(v1 - v0, v2 - v0)
        ln = np.linalg.norm(n, axis=1, keepdims=True)
        ln[ln == 0] = 1.0
        return n / ln

    def face_centroids(self) -> np.ndarray:
        v0, v1, v2 = self.corners()
        return (v0 + v1 + v2) / 3.0

    def mean_edge_length(self) -> float:
        v0, v1, v2 = self.corners()
        lens = np.concatenate(
            [
                np.linalg.norm(v1 - v0, axis=1),
                np.linalg.norm(v2 - v1, axis=1),
                np.linalg.norm(v0 - v2, axis=1),
            ]
        )
        return float(lens.mean())

    def diameter(self) -> float:
        """Bounding-box diagonal, the length scale used for tolerances."""
        ext = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(ext))


@dataclass
class FaceGraph:
    """Face adjacency of a mesh.

    vertex_adjacency: faces sharing at least one vertex (symmetric,
        irreflexive, boolean CSR).
    edge_adjacency: faces sharing an edge, i.e. two vertices (a subset of
        vertex_adjacency).
    """

    vertex_adjacency: sparse.csr_matrix
    edge_adjacency: sparse.csr_matrix
    _hop: sparse.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        # vertex adjacency plus self-loops, reused for ring expansion
        n = self.vertex_adjacency.shape[0]
        self._hop = (
            self.vertex_adjacency.astype(np.int8)
            + sparse.identity(n, dtype=np.int8, format="csr")
        ).tocsr()

    @property
    def face_count(self) -> int:
        return self.vertex_adjacency.shape[0]

    def vertex_neighbors(self, face: int) -> np.ndarray:
        return self.vertex_adjacency.indices[
            self.vertex_adjacency.indptr[face] : self.vertex_adjacency.indptr[face + 1]
        ]

    def edge_neighbors(self, face: int) -> np.ndarray:
        return self.edge_adjacency.indices[
            self.edge_adjacency.indptr[face] : self.edge_adjacency.indptr[face + 1]
        ]


def load_mesh(path) -> Mesh:
    """Load an OBJ or PLY triangle mesh.

    Polygons with more than three vertices are fan-triangulated; faces with
    repeated vertex indices or area <= 1e-12 are dropped and counted in
    ``Mesh.dropped_faces``. Texture and material statements are ignored.
    """
    p = Path(path)
    if not p.exists():
        raise MeshError(f"mesh file not found: {p}")
    suffix = p.suffix.lower()
    try:
        if suffix == ".obj":
            vertices, polygons = _read_obj(p)
        elif suffix == ".ply":
            vertices, polygons = _read_ply(p)
        else:
            raise MeshError(f"unsupported mesh format: {p} (expected .obj or .ply)")
    except MeshError:
        raise
    except (OSError, UnicodeDecodeError, ValueError, struct.error) as exc:
        raise MeshError(f"failed to read mesh {p}: {exc}") from exc
    if not len(vertices):
        raise MeshError(f"no vertices in {p}")
    vertices = np.asarray(vertices, dtype=np.float64)

    tris = []
    for poly in polygons:
        idx = [i if i >= 0 else len(vertices) + i for i in poly]
        if any(i < 0 or i >= len(vertices) for i in idx):
            raise MeshError(f"face index out of range in {p}")
        for k in range(1, len(idx) - 1):
            tris.append((idx[0], idx[k], idx[k + 1]))
    if not tris:
        raise MeshError(f"no faces in {p}")
    faces = np.asarray(tris, dtype=np.int32)

    distinct = (
        (faces[:, 0] != faces[:, 1])
        & (faces[:, 1] != faces[:, 2])
        & (faces[:, 2] != faces[:, 0])
    )
    v0 = vertices[faces[:, 0]]
    cr = np.cross(vertices[faces[:, 1]] - v0, vertices[faces[:, 2]] - v0)
    areas = 0.5 * np.sqrt((cr * cr).sum(axis=1))
    keep = distinct & (areas > DEGENERATE_AREA)
    dropped = int(len(faces) - keep.sum())
    faces = faces[keep]
    if not len(faces):
        raise MeshError(f"no non-degenerate faces in {p}")
    return Mesh(vertices, faces, dropped_faces=dropped)


def _read_obj(path: Path):
    vertices = []
    polygons = []
    with open(path, "r", errors="replace") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vertices.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = []
                for token in parts[1:]:
                    i = int(token.split("/")[0])
                    # OBJ indices are 1-based; negatives count from the end
                    idx.append(i - 1 if i > 0 else i)
                if len(idx) >= 3:
                    polygons.append(idx)
    return vertices, polygons


def _read_ply(path: Path):
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"ply":
            raise MeshError(f"not a PLY file: {path}")
        fmt = None
        elements = []  # (name, count, [(proptype, name) or ('list', counttype, itemtype, name)])
        while True:
            line = fh.readline()
            if not line:
                raise MeshError("unexpected end of PLY header")
            tokens = line.decode("ascii", errors="replace").split()
            if not tokens:
                continue
            if tokens[0] == "format":
                fmt = tokens[1]
            elif tokens[0] == "element":
                elements.append((tokens[1], int(tokens[2]), []))
            elif tokens[0] == "property":
                if not elements:
                    raise MeshError("PLY property before element")
                if tokens[1] == "list":
                    elements[-1][2].append(("list", tokens[2], tokens[3], tokens[4]))
                else:
                    elements[-1][2].append((tokens[1], tokens[2]))
            elif tokens[0] == "end_header":
                break
        if fmt is None:
            raise MeshError("PLY header missing format")
        if fmt == "ascii":
            return _read_ply_ascii(fh, elements)
        if fmt in ("binary_little_endian", "binary_big_endian"):
            return _read_ply_binary(fh, elements, "<" if fmt.endswith("little_endian") else ">")
        raise MeshError(f"unsupported PLY format: {fmt}")


_PLY_STRUCT = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def _read_ply_ascii(fh, elements):
    vertices, polygons = [], []
    text = fh.read().decode("ascii", errors="replace").split("\n")
    rows = (line.split() for line in text if line.strip())
    for name, count, props in elements:
        for _ in range(count):
            values = next(rows)
            if name == "vertex":
                scalar_names = [p[-1] for p in props if p[0] != "list"]
                lookup = dict(zip(scalar_names, values))
                vertices.append([float(lookup["x"]), float(lookup["y"]), float(lookup["z"])])
            elif name == "face":
                n = int(values[0])
                polygons.append([int(x) for x in values[1 : 1 + n]])
    return vertices, polygons


def _read_ply_binary(fh, elements, endian):
    vertices, polygons = [], []
    for name, count, props in elements:
        if all(p[0] != "list" for p in props):
            fmt = endian + "".join(_PLY_STRUCT[p[0]] for p in props)
            size = struct.calcsize(fmt)
            raw = fh.read(size * count)
            names = [p[1] for p in props]
            for row in struct.iter_unpack(fmt, raw):
                if name == "vertex":
                    lookup = dict(zip(names, row))
                    vertices.append([lookup["x"], lookup["y"], lookup["z"]])
        else:
            for _ in range(count):
                row_scalars = {}
                row_list = None
                for p in props:
                    if p[0] == "list":
                        cnt_fmt = endian + _PLY_STRUCT[p[1]]
                        (n,) = struct.unpack(cnt_fmt, fh.read(struct.calcsize(cnt_fmt)))
                        item_fmt = endian + _PLY_STRUCT[p[2]] * n
                        row_list = list(struct.unpack(item_fmt, fh.read(struct.calcsize(item_fmt))))
                    else:
                        fmt = endian + _PLY_STRUCT[p[0]]
                        (row_scalars[p[1]],) = struct.unpack(fmt, fh.read(struct.calcsize(fmt)))
                if name == "vertex":
                    vertices.append([row_scalars["x"], row_scalars["y"], row_scalars["z"]])
                elif name == "face" and row_list is not None:
                    polygons.append(row_list)
    return vertices, polygons


def normalize(mesh: Mesh) -> Mesh:
    """Center the vertex centroid at the origin and scale max vertex norm to 1."""
    if not mesh.vertex_count:
        raise MeshError("cannot normalize an empty mesh")
    centered = mesh.vertices - mesh.vertices.mean(axis=0)
    scale = np.linalg.norm(centered, axis=1).max()
    if scale < 1e-300:
        raise MeshError("cannot normalize a zero-extent mesh")
    return Mesh(centered / scale, mesh.faces, dropped_faces=mesh.dropped_faces)


def build_face_graph(mesh: Mesh) -> FaceGraph:
    """Face adjacency from shared vertices (>=1) and shared edges (>=2)."""
    n = mesh.face_count
    rows = np.repeat(np.arange(n, dtype=np.int64), 3)
    cols = mesh.faces.reshape(-1).astype(np.int64)
    incidence = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)),
        shape=(n, mesh.vertex_count),
    )
    shared = (incidence @ incidence.T).tocsr()  # shared-vertex counts per face pair
    shared = (shared - sparse.diags(shared.diagonal(), dtype=np.int8)).tocsr()
    shared.eliminate_zeros()
    vertex_adj = (shared > 0).tocsr()
    # two shared vertices of a triangle always span one of its edges
    edge_adj = (shared >= 2).tocsr()
    return FaceGraph(vertex_adjacency=vertex_adj, edge_adjacency=edge_adj)


def q_ring(graph: FaceGraph, face: int, q: int) -> np.ndarray:
    """Faces reachable from ``face`` within q+1 hops of vertex adjacency.

    The result includes ``face`` itself (q intermediate nodes allowed on the
    connecting path); returned sorted ascending.
    """
    if face < 0 or face >= graph.face_count:
        raise IndexError(f"face {face} out of range [0, {graph.face_count})")
    if q < 0:
        raise ValueError("q must be >= 0")
    seen = {int(face)}
    frontier = deque([int(face)])
    for _ in range(q + 1):
        if not frontier:
            break
        next_frontier = deque()
        while frontier:
            f = frontier.popleft()
            for g in graph.vertex_neighbors(f):
                g = int(g)
                if g not in seen:
                    seen.add(g)
                    next_frontier.append(g)
        frontier = next_frontier
    return np.array(sorted(seen), dtype=np.int64)


def ring_reach(graph: FaceGraph, faces: np.ndarray, q: int) -> sparse.csr_matrix:
    """Boolean reachability rows: (len(faces), N) with True at q_ring(f, q).

    Vectorized equivalent of calling :func:`q_ring` per row.
    """
    faces = np.asarray(faces, dtype=np.int64)
    n = graph.face_count
    reach = sparse.csr_matrix(
        (np.ones(len(faces), dtype=bool), (np.arange(len(faces)), faces)),
        shape=(len(faces), n),
    )
    for _ in range(q + 1):
        grown = (reach @ graph._hop) > 0
        if (grown != reach).nnz == 0:
            break
        reach = grown.tocsr()
    return reach
