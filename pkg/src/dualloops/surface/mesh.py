"""Closed triangle meshes: loading, checks, generators and plane cuts."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from dualloops.errors import Disconnected, IoError, NonManifold, NotClosed, ParseError


@dataclass(eq=False)
class TriMesh:
    """Counterclockwise (outward) oriented closed manifold triangle mesh.

    ``tags`` optionally records, per vertex, the cutting planes it lies on
    (see :func:`cut_by_plane`).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    tags: list[frozenset] = field(default_factory=list)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not self.tags:
            self.tags = [frozenset()] * len(self.vertices)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @cached_property
    def halfedges(self) -> dict[tuple[int, int], int]:
        """Directed edge -> triangle containing it."""
        out = {}
        for t, (a, b, c) in enumerate(self.triangles.tolist()):
            for e in ((a, b), (b, c), (c, a)):
                if e in out:
                    raise NonManifold(f"half-edge {e} appears twice (inconsistent orientation or non-manifold edge)")
                out[e] = t
        return out

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        return sorted({(min(a, b), max(a, b)) for a, b in self.halfedges})

    @cached_property
    def neighbors(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb

    @cached_property
    def ccw_next(self) -> list[dict[int, int]]:
        """Per vertex: neighbor -> next neighbor counterclockwise."""
        out: list[dict[int, int]] = [{} for _ in range(self.vertex_count)]
        for a, b, c in self.triangles.tolist():
            out[a][b] = c
            out[b][c] = a
            out[c][a] = b
        return out

    @cached_property
    def face_normals(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        length = np.linalg.norm(n, axis=1)
        return n / np.where(length > 0, length, 1.0)[:, None]

    @cached_property
    def face_areas(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        return 0.5 * np.linalg.norm(np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]]), axis=1)

    @cached_property
    def position_rank(self) -> np.ndarray:
        """Rank of each vertex in lexicographic (x, y, z) order; used for tie-breaking."""
        order = np.lexsort((self.vertices[:, 2], self.vertices[:, 1], self.vertices[:, 0]))
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self.edges) + len(self.triangles)

    @property
    def genus(self) -> int:
        return (2 - self.euler_characteristic) // 2

    def check(self) -> "TriMesh":
        """Verify the mesh is closed, manifold, oriented and connected."""
        he = self.halfedges
        for a, b in he:
            if (b, a) not in he:
                raise NotClosed(f"edge ({a}, {b}) has only one triangle")
        used = np.zeros(self.vertex_count, dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all():
            raise NotClosed(f"{int((~used).sum())} vertices are not used by any triangle")
        for v, nxt in enumerate(self.ccw_next):
            start = next(iter(nxt))
            w, steps = start, 0
            while True:
                w = nxt[w]
                steps += 1
                if w == start:
                    break
            if steps != len(nxt):
                raise NonManifold(f"vertex {v} has a non-manifold neighborhood")
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.neighbors[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != self.vertex_count:
            raise Disconnected("mesh is not connected")
        return self

    def permuted(self, perm: np.ndarray) -> "TriMesh":
        """Same surface with vertex ``i`` renamed ``perm[i]``."""
        perm = np.asarray(perm)
        verts = np.empty_like(self.vertices)
        verts[perm] = self.vertices
        tags = [frozenset()] * self.vertex_count
        for i, p in enumerate(perm):
            tags[p] = self.tags[i]
        return TriMesh(verts, perm[self.triangles], tags)


# -- file io -----------------------------------------------------------------------


def parse_obj(text: str) -> TriMesh:
    verts, tris = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
                if len(idx) < 3:
                    raise ParseError(f"line {lineno}: face with fewer than 3 vertices")
                for k in range(1, len(idx) - 1):
                    tris.append([idx[0], idx[k], idx[k + 1]])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    if not verts or not tris:
        raise ParseError("no vertices or faces")
    if min(min(t) for t in tris) < 0 or max(max(t) for t in tris) >= len(verts):
        raise ParseError("face index out of range")
    return TriMesh(np.array(verts), np.array(tris))


def load_trimesh(path) -> TriMesh:
    """Read an OBJ file and verify it is a closed manifold surface."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return parse_obj(text).check()


def trimesh_obj_text(mesh: TriMesh) -> str:
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    return "\n".join(lines) + "\n"


def save_trimesh(mesh: TriMesh, path) -> None:
    try:
        Path(path).write_text(trimesh_obj_text(mesh))
    except OSError as exc:
        raise IoError(str(exc)) from exc


# -- generators --------------------------------------------------------------------


def cube_mesh(n: int = 4, size: float = 2.0) -> TriMesh:
    """Axis-aligned cube ``[-size/2, size/2]^3`` with an ``n`` x ``n`` grid per face."""
    h = size / 2
    index: dict[tuple[int, int, int], int] = {}
    verts, tris = [], []

    def vid(p):
        if p not in index:
            index[p] = len(verts)
            verts.append([c * size / n - h for c in p])
        return index[p]

    for d in range(3):
        u, w = (d + 1) % 3, (d + 2) % 3
        for side in (0, n):
            for i in range(n):
                for j in range(n):
                    quad = []
                    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = [0, 0, 0]
                        p[d], p[u], p[w] = side, i + di, j + dj
                        quad.append(vid(tuple(p)))
                    if side == 0:
                        quad.reverse()
                    a, b, c, e = quad
                    tris += [[a, b, c], [a, c, e]]
    return TriMesh(np.array(verts), np.array(tris))


def quad_trimesh(positions, quads, n: int = 4) -> TriMesh:
    """Triangulate a mesh of unit axis-aligned quads with an ``n`` x ``n`` grid per quad.

    ``positions`` are integer corners and each quad lists four corner
    indices counterclockwise from outside, as in a polycube mesh.
    """
    index: dict[tuple[int, int, int], int] = {}
    verts, tris = [], []

    def vid(p):
        if p not in index:
            index[p] = len(verts)
            verts.append([c / n for c in p])
        return index[p]

    for quad in quads:
        o, a, _, b = (np.array(positions[k], dtype=np.int64) for k in quad)
        du, dv = a - o, b - o
        grid = [[vid(tuple((o * n + i * du + j * dv).tolist())) for j in range(n + 1)] for i in range(n + 1)]
        for i in range(n):
            for j in range(n):
                p, q, r, s = grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]
                tris += [[p, q, r], [p, r, s]]
    return TriMesh(np.array(verts, dtype=float), np.array(tris))


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> TriMesh:
    """Subdivided icosahedron; 20 * 4**subdivisions triangles."""
    p = (1 + 5**0.5) / 2
    verts = [[-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0], [0, -1, p], [0, 1, p],
             [0, -1, -p], [0, 1, -p], [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1]]
    tris = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
            [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
            [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    verts = [list(np.array(v) / np.linalg.norm(v)) for v in verts]
    for _ in range(subdivisions):
        mid: dict[tuple[int, int], int] = {}

        def m(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                v = np.add(verts[a], verts[b])
                verts.append(list(v / np.linalg.norm(v)))
                mid[key] = len(verts) - 1
            return mid[key]

        new = []
        for a, b, c in tris:
            ab, bc, ca = m(a, b), m(b, c), m(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        tris = new
    return TriMesh(np.array(verts) * radius, np.array(tris))


def torus_mesh(major: float = 1.0, minor: float = 0.4, nu: int = 32, nv: int = 16) -> TriMesh:
    """Torus around the Z axis, ``nu`` segments around the axis and ``nv`` around the tube."""
    verts = []
    for i in range(nu):
        a = 2 * np.pi * (i + 0.5) / nu
        for j in range(nv):
            b = 2 * np.pi * (j + 0.5) / nv
            r = major + minor * np.cos(b)
            verts.append([r * np.cos(a), r * np.sin(a), minor * np.sin(b)])
    tris = []
    for i in range(nu):
        for j in range(nv):
            a, b = i * nv + j, ((i + 1) % nu) * nv + j
            c, d = ((i + 1) % nu) * nv + (j + 1) % nv, i * nv + (j + 1) % nv
            tris += [[a, b, c], [a, c, d]]
    return TriMesh(np.array(verts), np.array(tris))


def open_patch(n: int = 3) -> TriMesh:
    """A flat triangulated square; not closed."""
    verts = [[i, j, 0.0] for i in range(n + 1) for j in range(n + 1)]
    tris = []
    for i in range(n):
        for j in range(n):
            a, b, c, d = i * (n + 1) + j, (i + 1) * (n + 1) + j, (i + 1) * (n + 1) + j + 1, i * (n + 1) + j + 1
            tris += [[a, b, c], [a, c, d]]
    return TriMesh(np.array(verts, dtype=float), np.array(tris))


# -- plane cuts ----------------------------------------------------------------------


def safe_level(values: np.ndarray, t: float, eps: float = 1e-9) -> float:
    """``t`` moved off the given vertex values so that a cut at it is transversal."""
    vals = np.unique(values)
    if not (np.abs(vals - t) < eps).any():
        return t
    # step past the whole cluster of values near t
    lower = t
    while True:
        near = vals[(vals >= lower - eps) & (vals <= lower + eps)]
        if not len(near) or near.max() <= lower:
            break
        lower = float(near.max())
    above = vals[vals > lower + eps]
    upper = float(above[0]) if len(above) else lower + 1.0
    # halfway to the next vertex plane keeps the new triangles well shaped
    return lower + 0.5 * (upper - lower)


def cut_by_plane(mesh: TriMesh, axis: int, t: float, tag) -> TriMesh:
    """Split triangles along the plane ``coordinate[axis] == t``.

    Every new vertex lies exactly on the plane and is tagged with ``tag``;
    vertices keep the tags shared by both ends of the edge they split.  ``t``
    must not equal any vertex coordinate (see :func:`safe_level`).
    """
    v = mesh.vertices
    f = v[:, axis] - t
    if np.any(np.abs(f) < 1e-12):
        raise ValueError("cutting plane passes through a vertex")
    verts = list(v)
    tags = list(mesh.tags)
    split: dict[tuple[int, int], int] = {}

    def cut(a, b):
        key = (min(a, b), max(a, b))
        if key not in split:
            s = f[a] / (f[a] - f[b])
            p = v[a] + s * (v[b] - v[a])
            p[axis] = t
            verts.append(p)
            tags.append((tags[a] & tags[b]) | {tag})
            split[key] = len(verts) - 1
        return split[key]

    tris = []
    for tri in mesh.triangles.tolist():
        s = [f[x] > 0 for x in tri]
        if all(s) or not any(s):
            tris.append(tri)
            continue
        # rotate so the vertex alone on its side comes first
        for r in range(3):
            a, b, c = tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]
            if s[r] != s[(r + 1) % 3] and s[r] != s[(r + 2) % 3]:
                break
        ab, ac = cut(a, b), cut(a, c)
        tris += [[a, ab, ac], [ab, b, c], [ab, c, ac]]
    return TriMesh(np.array(verts), np.array(tris), tags)


def subdivide(mesh: TriMesh) -> tuple[TriMesh, dict[tuple[int, int], int]]:
    """1-to-4 midpoint subdivision; also returns edge -> midpoint vertex."""
    verts = list(mesh.vertices)
    tags = list(mesh.tags)
    mid: dict[tuple[int, int], int] = {}
    for a, b in mesh.edges:
        mid[(a, b)] = len(verts)
        verts.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
        tags.append(tags[a] & tags[b])

    def m(a, b):
        return mid[(min(a, b), max(a, b))]

    tris = []
    for a, b, c in mesh.triangles.tolist():
        ab, bc, ca = m(a, b), m(b, c), m(c, a)
        tris += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return TriMesh(np.array(verts), np.array(tris), tags), mid
