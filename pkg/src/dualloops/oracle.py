"""Ground truth from voxel solids.

A union of unit cubes has a polycube boundary.  Its quad faces are dual to
loops: walking from face to face across opposite edges traces strips, and
each strip is a loop of the axis its crossed edges point along.  Reading the
strips off the voxel boundary gives a loop structure whose primal polycube is
known exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from dualloops.core import Axis, Loop, LoopStructure
from dualloops.errors import Disconnected, NonManifold
from dualloops.primalize import PolycubeMesh

Cell = tuple[int, int, int]


@dataclass(frozen=True)
class VoxelSolid:
    """A finite set of unit cubes, identified by their minimum corners."""

    cells: frozenset[Cell]

    @classmethod
    def of(cls, cells: Iterable[Cell]) -> "VoxelSolid":
        return cls(frozenset(tuple(int(x) for x in c) for c in cells))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "VoxelSolid":
        return cls.of(map(tuple, np.argwhere(mask)))

    @classmethod
    def box(cls, nx: int, ny: int, nz: int) -> "VoxelSolid":
        return cls.of((x, y, z) for x in range(nx) for y in range(ny) for z in range(nz))

    def __len__(self):
        return len(self.cells)


def _boundary_quads(solid: VoxelSolid):
    """Boundary faces of the solid, counterclockwise seen from outside."""
    cells = solid.cells
    faces = []
    for c in sorted(cells):
        for d in range(3):
            u, w = (d + 1) % 3, (d + 2) % 3
            for s in (1, -1):
                nb = list(c)
                nb[d] += s
                if tuple(nb) in cells:
                    continue
                base = list(c)
                if s > 0:
                    base[d] += 1
                p0 = tuple(base)
                p1 = list(base); p1[u] += 1
                p2 = list(p1); p2[w] += 1
                p3 = list(base); p3[w] += 1
                quad = [p0, tuple(p1), tuple(p2), tuple(p3)]
                if s < 0:
                    quad.reverse()
                faces.append(quad)
    return faces


def _check_cells_connected(cells: frozenset[Cell]) -> None:
    if not cells:
        raise Disconnected("empty solid")
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        x, y, z = stack.pop()
        for nb in ((x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)):
            if nb in cells and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if len(seen) != len(cells):
        raise Disconnected("cells are not face-connected")


def voxel_to_polycube(solid: VoxelSolid) -> PolycubeMesh:
    """Boundary of a voxel solid as a polycube mesh.

    Raises
    ------
    Disconnected
        If the cells are not face-connected or the boundary has several parts.
    NonManifold
        If an edge or a corner of the boundary is non-manifold.
    """
    _check_cells_connected(solid.cells)
    quads = _boundary_quads(solid)
    index: dict[Cell, int] = {}
    faces = []
    for q in quads:
        faces.append(tuple(index.setdefault(p, len(index)) for p in q))
    positions = [None] * len(index)
    for p, i in index.items():
        positions[i] = p
    # edges: exactly two faces
    edge_faces: dict[tuple[int, int], int] = {}
    for f in faces:
        for k in range(4):
            a, b = f[k], f[(k + 1) % 4]
            key = (min(a, b), max(a, b))
            edge_faces[key] = edge_faces.get(key, 0) + 1
    for e, cnt in edge_faces.items():
        if cnt != 2:
            raise NonManifold(f"edge {positions[e[0]]}-{positions[e[1]]} is on {cnt} faces")
    # corners: incident faces form one fan
    corner_faces: dict[int, list[int]] = {}
    for fi, f in enumerate(faces):
        for v in f:
            corner_faces.setdefault(v, []).append(fi)
    for v, fl in corner_faces.items():
        nxt = {}
        for fi in fl:
            f = faces[fi]
            k = f.index(v)
            nxt[f[(k + 1) % 4]] = f[(k - 1) % 4]
        start = next(iter(nxt))
        w, steps = start, 0
        while True:
            w = nxt[w]
            steps += 1
            if w == start:
                break
        if steps != len(fl):
            raise NonManifold(f"corner {positions[v]} is non-manifold")
    mesh = PolycubeMesh(positions, faces)
    # boundary connectivity (a closed void would give two boundary parts)
    adj: dict[int, set[int]] = {i: set() for i in range(len(positions))}
    for a, b in edge_faces:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(positions):
        raise Disconnected("boundary surface has several components")
    return mesh


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def extract_dual(mesh: PolycubeMesh) -> LoopStructure:
    """Loop structure dual to a polycube mesh.

    Crossing ids are face indices.  Each loop is oriented so that its plus
    side faces the positive direction of its axis; loops are numbered in the
    order their strips are first met.
    """
    pos = [tuple(p) for p in mesh.positions]
    faces = [tuple(f) for f in mesh.faces]
    edge_owner: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for fi, f in enumerate(faces):
        for k in range(4):
            a, b = f[k], f[(k + 1) % 4]
            edge_owner.setdefault((a, b) if a < b else (b, a), []).append((fi, k))

    def across(fi: int, k: int) -> tuple[int, int]:
        f = faces[fi]
        a, b = f[k], f[(k + 1) % 4]
        for g, j in edge_owner[(a, b) if a < b else (b, a)]:
            if g != fi:
                return g, j
        raise NonManifold(f"edge {a}-{b} has one face")

    normals = []
    for f in faces:
        p0 = pos[f[0]]
        normals.append(_cross(_sub(pos[f[1]], p0), _sub(pos[f[3]], p0)))

    def travel(fi: int, k: int) -> tuple[int, int, int]:
        # direction of a strip entering face fi through edge k (doubled midpoints)
        f = faces[fi]
        a, b, c, d = pos[f[k]], pos[f[(k + 1) % 4]], pos[f[(k + 2) % 4]], pos[f[(k + 3) % 4]]
        return (c[0] + d[0] - a[0] - b[0], c[1] + d[1] - a[1] - b[1], c[2] + d[2] - a[2] - b[2])

    visited: set[tuple[int, int]] = set()  # (face, edge pair)
    strips: list[tuple[int, list[tuple[int, int]]]] = []  # axis, [(face, entry edge)]
    for f0 in range(len(faces)):
        for pair in (0, 1):
            if (f0, pair) in visited:
                continue
            seq = []
            fi, k = f0, pair
            while (fi, k % 2) not in visited:
                visited.add((fi, k % 2))
                seq.append((fi, k))
                fi, k = across(fi, (k + 2) % 4)
            if (fi, k % 2) != (f0, pair):
                raise NonManifold("strip does not close up")
            f = faces[f0]
            e = _sub(pos[f[(pair + 1) % 4]], pos[f[pair]])
            axis = 0 if e[0] else (1 if e[1] else 2)
            right = _cross(travel(f0, pair), normals[f0])
            if right[axis] < 0:
                # walk the strip the other way: enter through the opposite edge
                seq = [(g, (j + 2) % 4) for g, j in reversed(seq)]
            strips.append((axis, seq))
    dirs = {}
    for _, seq in strips:
        for g, j in seq:
            dirs[(g, j % 2)] = travel(g, j)
    loops = []
    for li, (axis, seq) in enumerate(strips):
        crossings = []
        for g, j in seq:
            t_a = dirs[(g, j % 2)]
            t_b = dirs[(g, 1 - j % 2)]
            crossings.append((g, _dot(t_b, _cross(t_a, normals[g])) < 0))
        loops.append(Loop(li, Axis(axis), tuple(crossings)))
    chi = len(pos) - len(edge_owner) + len(faces)
    return LoopStructure((2 - chi) // 2, loops)


def solid_to_structure(solid: VoxelSolid) -> LoopStructure:
    return extract_dual(voxel_to_polycube(solid))


# -- exhaustive enumeration ----------------------------------------------------------

MAX_ENUMERATION_BOUND = 3


def _cell_index(bound: int, x: int, y: int, z: int) -> int:
    return (x * bound + y) * bound + z


def _shift_masks(bound: int):
    """(shift, keep-mask) pairs moving every cell to one of its six face neighbours."""
    n = bound**3
    out = []
    for d, step in ((0, bound * bound), (1, bound), (2, 1)):
        lo = hi = 0
        for i in range(n):
            c = (i // (bound * bound), (i // bound) % bound, i % bound)
            if c[d] < bound - 1:
                lo |= 1 << i  # cells that have a +d neighbour
            if c[d] > 0:
                hi |= 1 << i
        out.append((step, lo, hi))
    return out


def _dilate(front: np.ndarray, shifts) -> np.ndarray:
    out = front.copy()
    for step, lo, hi in shifts:
        out |= (front & lo) << step
        out |= (front & hi) >> step
    return out


def _flood(seed: np.ndarray, within: np.ndarray, shifts) -> np.ndarray:
    cur = seed & within
    while True:
        nxt = _dilate(cur, shifts) & within
        if np.array_equal(nxt, cur):
            return cur
        cur = nxt


def _manifold_vertex_table() -> np.ndarray:
    """Octant patterns around a lattice vertex whose boundary is a single disk (or empty)."""
    table = np.zeros(256, dtype=bool)
    octs = [(i >> 2 & 1, i >> 1 & 1, i & 1) for i in range(8)]

    def connected(members):
        if not members:
            return True
        seen = {members[0]}
        stack = [members[0]]
        while stack:
            a = stack.pop()
            for b in members:
                if b not in seen and sum(x != y for x, y in zip(octs[a], octs[b])) == 1:
                    seen.add(b)
                    stack.append(b)
        return len(seen) == len(members)

    for pat in range(256):
        full = [i for i in range(8) if pat >> i & 1]
        empty = [i for i in range(8) if not pat >> i & 1]
        table[pat] = connected(full) and connected(empty)
    return table


def enumerate_small_masks(bound: int, chunk: int = 1 << 22) -> np.ndarray:
    """Bit masks of all valid solids in a ``bound``-cube, up to translation.

    Bit ``(x*bound + y)*bound + z`` marks cell (x, y, z).  A mask is kept if
    its cells are face-connected, touch the three minimum planes, have a
    manifold boundary at every lattice vertex and enclose no cavity.
    """
    if bound <= 0:
        return np.zeros(0, dtype=np.int64)
    if bound > MAX_ENUMERATION_BOUND:
        raise ValueError(f"exhaustive enumeration supports bound <= {MAX_ENUMERATION_BOUND}")
    n = bound**3
    shifts = _shift_masks(bound)
    planes = [
        sum(1 << _cell_index(bound, *c) for c in np.ndindex(bound, bound, bound) if c[d] == 0) for d in range(3)
    ]
    surface = sum(
        1 << _cell_index(bound, *c) for c in np.ndindex(bound, bound, bound) if min(c) == 0 or max(c) == bound - 1
    )
    table = _manifold_vertex_table()
    vertex_cells = []
    for v in np.ndindex(bound + 1, bound + 1, bound + 1):
        cells = []
        for k in range(8):
            c = (v[0] - 1 + (k >> 2 & 1), v[1] - 1 + (k >> 1 & 1), v[2] - 1 + (k & 1))
            cells.append(_cell_index(bound, *c) if all(0 <= x < bound for x in c) else -1)
        vertex_cells.append(cells)
    full = (1 << n) - 1
    keep = []
    for start in range(1, 1 << n, chunk):
        m = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        for p in planes:
            m = m[(m & p) != 0]
        low = m & -m
        m = m[_flood(low, m, shifts) == m]
        ok = np.ones(len(m), dtype=bool)
        for cells in vertex_cells:
            pat = np.zeros(len(m), dtype=np.int64)
            for k, i in enumerate(cells):
                if i >= 0:
                    pat |= ((m >> i) & 1) << k
            ok &= table[pat]
        m = m[ok]
        comp = full & ~m
        outside = _flood(comp & surface, comp, shifts)
        keep.append(m[outside == comp])
    return np.concatenate(keep)


def _symmetry_permutations(bound: int) -> list[list[int]]:
    perms = []
    for axes in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for flips in np.ndindex(2, 2, 2):
            perm = []
            for i in range(bound**3):
                c = (i // (bound * bound), (i // bound) % bound, i % bound)
                d = [c[a] for a in axes]
                d = [bound - 1 - x if f else x for x, f in zip(d, flips)]
                perm.append(_cell_index(bound, *d))
            perms.append(perm)
    return perms


def _normalize_translation(m: np.ndarray, bound: int) -> np.ndarray:
    planes = [
        (sum(1 << _cell_index(bound, *c) for c in np.ndindex(bound, bound, bound) if c[d] == 0), bound ** (2 - d))
        for d in range(3)
    ]
    m = m.copy()
    for plane, step in planes:
        for _ in range(bound - 1):
            empty = (m & plane) == 0
            m[empty] >>= step
    return m


def canonical_masks(masks: np.ndarray, bound: int) -> np.ndarray:
    """Smallest image of each mask under the 48 symmetries of the cube, re-translated."""
    best = None
    for perm in _symmetry_permutations(bound):
        img = np.zeros_like(masks)
        for i, j in enumerate(perm):
            img |= ((masks >> i) & 1) << j
        img = _normalize_translation(img, bound)
        best = img if best is None else np.minimum(best, img)
    return best


def symmetry_classes(bound: int) -> np.ndarray:
    """One canonical mask per symmetry class of :func:`enumerate_small_masks`."""
    return np.unique(canonical_masks(enumerate_small_masks(bound), bound))


def mask_to_solid(mask: int, bound: int) -> VoxelSolid:
    mask = int(mask)
    return VoxelSolid.of(
        (i // (bound * bound), (i // bound) % bound, i % bound) for i in range(bound**3) if mask >> i & 1
    )


def enumerate_small_solids(bound: int, up_to_symmetry: bool = False) -> Iterator[VoxelSolid]:
    """All valid solids within a ``bound``-cube up to translation, in mask order."""
    masks = symmetry_classes(bound) if up_to_symmetry else enumerate_small_masks(bound)
    for m in masks:
        yield mask_to_solid(m, bound)


# -- round trip ------------------------------------------------------------------------


@dataclass
class RoundTripSummary:
    """Outcome of checking many solids; ``failures`` pairs a solid's cells with the reason."""

    bound: int
    up_to_symmetry: bool
    checked: int = 0
    failures: list[tuple[tuple[Cell, ...], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def roundtrip_problems(solid: VoxelSolid) -> list[str]:
    """Why the dual structure of ``solid`` fails to reproduce it; empty if it does.

    Checks that the extracted structure is a valid polycube loop structure,
    that the genus identity holds on every axis, and that the polycube built
    from the structure alone is order-equivalent to the voxel boundary.
    """
    from dualloops.core import check_genus_identity
    from dualloops.primalize import assign_coordinates, order_equivalent
    from dualloops.validate import check_polycube

    mesh = voxel_to_polycube(solid)
    structure = extract_dual(mesh)
    report = check_polycube(structure)
    if not report.valid:
        return [f"invalid dual: {report.summary()}"]
    problems = [
        f"genus identity fails on {axis}" for axis, g in check_genus_identity(structure).items() if not g.holds
    ]
    eq = order_equivalent(assign_coordinates(structure, check=False), mesh)
    if not eq.equivalent:
        problems.append(f"primal not order-equivalent: {eq.reason}")
    return problems


def run_roundtrip(bound: int, up_to_symmetry: bool = True, limit: int | None = None) -> RoundTripSummary:
    """Round-trip every solid within a ``bound``-cube (one per symmetry class by default)."""
    summary = RoundTripSummary(bound, up_to_symmetry)
    for k, solid in enumerate(enumerate_small_solids(bound, up_to_symmetry)):
        if limit is not None and k >= limit:
            break
        summary.checked += 1
        try:
            problems = roundtrip_problems(solid)
        except Exception as exc:  # a crash is a failure of the round trip, reported with the solid
            problems = [f"{type(exc).__name__}: {exc}"]
        if problems:
            summary.failures.append((tuple(sorted(solid.cells)), "; ".join(problems)))
    return summary
