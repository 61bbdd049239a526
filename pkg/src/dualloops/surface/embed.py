"""Loop structures drawn on triangle meshes.

Loops run along mesh edges and cross each other at mesh vertices.  Because
every loop is an edge path, the regions of the drawing are unions of whole
triangles and every combinatorial quantity can be read off exactly.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from dualloops.core import AXES, Axis, Loop, LoopStructure
from dualloops.edit import CandidateLoop, add_loop, remove_loop
from dualloops.errors import EmbeddingFailed, GenusMismatch, InvalidStructure
from dualloops.primalize import longest_path_layers
from dualloops.surface.mesh import TriMesh, cut_by_plane, safe_level, subdivide
from dualloops.validate import check_polycube


@dataclass(frozen=True)
class SurfaceConfig:
    """Parameters of embedding, segmentation and optimization.

    Attributes
    ----------
    beta : float
        Weight of the direction penalty in path lengths.
    lam : int
        Offspring per generation of the evolutionary search.
    max_len : int
        Longest candidate loop (segments crossed) considered by mutations.
    relax_rounds : int
        Rounds of zone alignment when placing corners.
    corner_tolerance : float
        Slack, relative to the mesh diagonal, when picking the most extreme
        vertex of a region as its corner.
    """

    beta: float = 5.0
    lam: int = 4
    max_len: int = 12
    relax_rounds: int = 10
    corner_tolerance: float = 1e-3

    @classmethod
    def from_dict(cls, doc: dict) -> "SurfaceConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass(eq=False)
class EmbeddedStructure:
    """A loop structure together with its drawing on ``mesh``.

    ``paths[loop_id]`` lists the loop's vertices in walking order, starting
    at the vertex of its first crossing; ``crossing_vertex`` maps crossing
    ids to mesh vertices.
    """

    mesh: TriMesh
    structure: LoopStructure
    paths: dict[int, tuple[int, ...]]
    crossing_vertex: dict[int, int]
    _cache: dict = field(default_factory=dict, repr=False)

    # -- derived geometry ------------------------------------------------------

    @cached_property
    def loop_edges(self) -> set[tuple[int, int]]:
        out = set()
        for path in self.paths.values():
            for a, b in zip(path, path[1:] + path[:1]):
                out.add((min(a, b), max(a, b)))
        return out

    @cached_property
    def on_loop(self) -> np.ndarray:
        mask = np.zeros(self.mesh.vertex_count, dtype=bool)
        for path in self.paths.values():
            mask[list(path)] = True
        return mask

    @cached_property
    def segment_vertices(self) -> list[tuple[int, ...]]:
        """Vertices of each segment from its start crossing to its end crossing."""
        s = self.structure
        out: list[tuple[int, ...]] = [()] * s.segment_count
        for li, loop in enumerate(s.loops):
            path = self.paths[loop.id]
            idx = [path.index(self.crossing_vertex[c]) for c, _ in loop.crossings]
            n = len(path)
            for p, seg in enumerate(s.loop_segs[li]):
                a = idx[p]
                b = idx[(p + 1) % len(idx)] if idx else a
                length = (b - a) % n or n
                out[seg] = tuple(path[(a + i) % n] for i in range(length + 1))
        return out

    @cached_property
    def triangle_region(self) -> np.ndarray:
        """Region id of every triangle (components across non-loop edges)."""
        mesh = self.mesh
        he = mesh.halfedges
        comp = -np.ones(len(mesh.triangles), dtype=np.int64)
        tris = mesh.triangles.tolist()
        ncomp = 0
        for t0 in range(len(tris)):
            if comp[t0] >= 0:
                continue
            comp[t0] = ncomp
            stack = [t0]
            while stack:
                t = stack.pop()
                a, b, c = tris[t]
                for x, y in ((a, b), (b, c), (c, a)):
                    if (min(x, y), max(x, y)) in self.loop_edges:
                        continue
                    u = he[(y, x)]
                    if comp[u] < 0:
                        comp[u] = ncomp
                        stack.append(u)
            ncomp += 1
        s = self.structure
        to_region = {}
        for seg, verts in enumerate(self.segment_vertices):
            a, b = verts[0], verts[1]
            for tri, region in ((he[(a, b)], s.dart_region[2 * seg]), (he[(b, a)], s.dart_region[2 * seg + 1])):
                if to_region.setdefault(int(comp[tri]), region) != region:
                    raise EmbeddingFailed("drawing merges two regions")
        if len(to_region) != ncomp or len(set(to_region.values())) != len(s.regions):
            raise EmbeddingFailed("drawing does not realize the region structure")
        return np.array([to_region[int(c)] for c in comp], dtype=np.int64)

    @cached_property
    def vertex_region(self) -> np.ndarray:
        """Region of every vertex off the loops, -1 for loop vertices."""
        out = -np.ones(self.mesh.vertex_count, dtype=np.int64)
        tr = self.triangle_region
        for t, tri in enumerate(self.mesh.triangles.tolist()):
            for v in tri:
                if not self.on_loop[v]:
                    out[v] = tr[t]
        return out

    def roomy(self) -> bool:
        """Whether every region has a vertex off the loops."""
        vr = self.vertex_region
        return len(set(vr[vr >= 0].tolist())) == len(self.structure.regions)

    def edge_region(self, a: int, b: int) -> int:
        """Region containing a non-loop edge, -1 for loop edges."""
        if (min(a, b), max(a, b)) in self.loop_edges:
            return -1
        return int(self.triangle_region[self.mesh.halfedges[(a, b)]])

    def loop_polyline(self, loop_id: int) -> np.ndarray:
        return self.mesh.vertices[list(self.paths[loop_id])]

    def verify(self) -> "EmbeddedStructure":
        """Re-read the structure from the drawing and compare."""
        drawn, _, _ = read_structure(
            self.mesh, [(l.axis, self.paths[l.id]) for l in self.structure.loops], self.structure.genus
        )
        if drawn.canonical_key() != self.structure.canonical_key():
            raise EmbeddingFailed("drawing does not realize the loop structure")
        self.triangle_region  # noqa: B018 - raises if regions disagree
        return self


# -- reading a structure off a drawing -------------------------------------------------


def _left_sector(mesh: TriMesh, v: int, out: int, into: int) -> set[int]:
    """Neighbors of ``v`` strictly counterclockwise between ``out`` and ``into``."""
    nxt = mesh.ccw_next[v]
    res = set()
    w = nxt[out]
    while w != into:
        res.add(w)
        w = nxt[w]
    return res


def read_structure(mesh: TriMesh, drawn: list[tuple[Axis, tuple[int, ...]]], genus: int):
    """Loop structure of closed vertex paths on ``mesh``.

    Returns ``(structure, paths, crossing_vertex)``; loop ``i`` is the
    ``i``-th drawn path, crossing ids number crossing vertices in order of
    appearance.

    Raises
    ------
    EmbeddingFailed
        If paths revisit a vertex, share an edge, touch without crossing or
        meet three at a point.
    """
    where: dict[int, list[tuple[int, int]]] = {}
    for li, (_, path) in enumerate(drawn):
        if len(set(path)) != len(path):
            raise EmbeddingFailed(f"path {li} is not simple")
        for i, v in enumerate(path):
            where.setdefault(v, []).append((li, i))
    cid: dict[int, int] = {}
    handed: dict[tuple[int, int], bool] = {}
    for v, occ in where.items():
        if len(occ) == 1:
            continue
        if len(occ) > 2:
            raise EmbeddingFailed(f"{len(occ)} loops meet at vertex {v}")
        (la, ia), (lb, ib) = occ
        pa, pb = drawn[la][1], drawn[lb][1]
        a_in, a_out = pa[ia - 1], pa[(ia + 1) % len(pa)]
        b_in, b_out = pb[ib - 1], pb[(ib + 1) % len(pb)]
        if {a_in, a_out} & {b_in, b_out}:
            raise EmbeddingFailed(f"loops {la} and {lb} share an edge at vertex {v}")
        left = _left_sector(mesh, v, a_out, a_in)
        if (b_out in left) == (b_in in left):
            raise EmbeddingFailed(f"loops {la} and {lb} touch at vertex {v} without crossing")
        cid[v] = len(cid)
        handed[(la, v)] = b_out in left
        handed[(lb, v)] = b_in in left
    loops, paths = [], []
    for li, (axis, path) in enumerate(drawn):
        marks = [i for i, v in enumerate(path) if v in cid]
        if marks:
            path = path[marks[0]:] + path[: marks[0]]
        paths.append(tuple(path))
        loops.append(Loop(li, Axis(axis), tuple((cid[v], handed[(li, v)]) for v in path if v in cid)))
    try:
        structure = LoopStructure(genus, loops)
    except Exception as exc:
        raise EmbeddingFailed(f"drawn loops do not form a loop structure: {exc}") from exc
    return structure, paths, {c: v for v, c in cid.items()}


# -- initial embedding by plane cuts ---------------------------------------------------------


def _level_cycles(mesh: TriMesh, tag) -> list[tuple[int, ...]]:
    on = [tag in t for t in mesh.tags]
    adj: dict[int, list[int]] = {}
    for a, b in mesh.edges:
        if on[a] and on[b]:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
    cycles, seen = [], set()
    for start in sorted(adj, key=lambda v: mesh.position_rank[v]):
        if start in seen:
            continue
        if len(adj[start]) != 2:
            raise EmbeddingFailed("level curve is not a simple closed curve")
        cyc = [start]
        seen.add(start)
        prev, cur = start, min(adj[start], key=lambda v: mesh.position_rank[v])
        while cur != start:
            if len(adj[cur]) != 2:
                raise EmbeddingFailed("level curve is not a simple closed curve")
            cyc.append(cur)
            seen.add(cur)
            prev, cur = cur, adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        cycles.append(tuple(cyc))
    return cycles


def _orient_upward(mesh: TriMesh, path: tuple[int, ...], axis: int, t: float) -> tuple[int, ...]:
    """Walk direction with the higher ``axis`` coordinate on the right."""
    he = mesh.halfedges
    tri = mesh.triangles
    vote = 0.0
    for a, b in zip(path, path[1:] + path[:1]):
        right = tri[he[(b, a)]]
        left = tri[he[(a, b)]]
        vote += mesh.vertices[right, axis].sum() - mesh.vertices[left, axis].sum()
    return path if vote > 0 else (path[0],) + tuple(reversed(path[1:]))


def embed_structure(
    structure: LoopStructure, mesh: TriMesh, config: SurfaceConfig | None = None, max_refinements: int = 2
) -> EmbeddedStructure:
    """Draw ``structure`` on ``mesh`` with every loop on an axis-orthogonal plane.

    The level of a loop follows the longest-path layers of its level graph,
    spread linearly over the mesh's extent along the axis or, if that does
    not reproduce the structure, at quantiles of surface area.  The mesh is cut along
    these planes so the loops become edge paths; the drawing is accepted only
    if it reproduces ``structure`` exactly.  If some region has no vertex
    off the loops, the mesh is subdivided (at most ``max_refinements``
    times) so every region can hold a polycube corner.

    Raises
    ------
    GenusMismatch
        If the structure and the mesh have different genus.
    EmbeddingFailed
        If the plane curves do not realize the structure.
    """
    if structure.genus != mesh.genus:
        raise GenusMismatch(f"structure has genus {structure.genus}, mesh has genus {mesh.genus}")
    report = check_polycube(structure)
    if not report.valid:
        raise InvalidStructure("not a polycube loop structure", report)
    for placement in LEVEL_PLACEMENTS:
        drawing = _plane_drawing(structure, mesh, placement)
        if drawing is not None:
            break
    else:
        raise EmbeddingFailed("plane curves do not realize the structure")
    cut, got, paths, cv = drawing
    emb = EmbeddedStructure(cut, got, {l.id: paths[i] for i, l in enumerate(got.loops)}, cv)
    emb.triangle_region  # noqa: B018
    for _ in range(max_refinements):
        if emb.roomy():
            break
        emb = refine(emb)
    return emb


LEVEL_PLACEMENTS = ("extent", "area")
"""How layer levels map to plane positions, tried in order: linearly over the
mesh's extent, or at quantiles of surface area along the axis."""


def _level_position(mesh: TriMesh, axis: int, fraction: float, placement: str) -> float:
    coord = mesh.vertices[:, axis]
    if placement == "extent":
        lo, hi = float(coord.min()), float(coord.max())
        return lo + (hi - lo) * fraction
    centers = mesh.vertices[mesh.triangles][:, :, axis].mean(axis=1)
    order = np.argsort(centers, kind="stable")
    cum = np.cumsum(mesh.face_areas[order])
    k = int(np.searchsorted(cum, fraction * cum[-1]))
    return float(centers[order[min(k, len(order) - 1)]])


def _plane_drawing(structure: LoopStructure, mesh: TriMesh, placement: str):
    """Cut ``mesh`` with one plane per level-graph edge; ``None`` unless the curves realize ``structure``."""
    cut = mesh
    levels = []
    for axis in AXES:
        graph = structure.level_graph(axis)
        layer = longest_path_layers(graph)
        top = max(layer.values())
        mids = sorted({(layer[u] + layer[v]) / 2 for u, v in graph.edges})
        for k, m in enumerate(mids):
            t = safe_level(cut.vertices[:, axis], _level_position(mesh, int(axis), m / top, placement))
            tag = (int(axis), k)
            cut = cut_by_plane(cut, int(axis), t, tag)
            levels.append((axis, tag, t))
    drawn = []
    for axis, tag, t in levels:
        for cyc in _level_cycles(cut, tag):
            drawn.append((axis, _orient_upward(cut, cyc, int(axis), t)))
    try:
        got, paths, cv = read_structure(cut, drawn, structure.genus)
    except EmbeddingFailed:
        return None
    if got.canonical_key() != structure.canonical_key():
        return None
    return cut, got, paths, cv


def refine(embedded: EmbeddedStructure) -> EmbeddedStructure:
    """The same drawing on the 1-to-4 subdivided mesh."""
    mesh, mid = subdivide(embedded.mesh)
    paths = {}
    for lid, path in embedded.paths.items():
        out = []
        for a, b in zip(path, path[1:] + path[:1]):
            out += [a, mid[(min(a, b), max(a, b))]]
        paths[lid] = tuple(out)
    return EmbeddedStructure(mesh, embedded.structure, paths, dict(embedded.crossing_vertex))


# -- adding and removing loops ------------------------------------------------------


def _path_weight(mesh: TriMesh, axis: int, beta: float, along: bool):
    v = mesh.vertices

    def w(a: int, b: int) -> float:
        d = v[b] - v[a]
        length = float(np.sqrt(d @ d))
        c = abs(d[axis]) / length if length > 0 else 0.0
        return length * (1.0 + beta * ((1.0 - c) if along else c))

    return w


def _crossable(mesh: TriMesh, seg_vertices: tuple[int, ...]) -> tuple[int, ...]:
    """Inner vertices in the middle half (by arc length) of a segment, or its middle vertex."""
    pts = mesh.vertices[list(seg_vertices)]
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    if arc[-1] <= 0:
        return tuple(seg_vertices[1:-1])
    pos = arc / arc[-1]
    inner = [v for v, p in zip(seg_vertices[1:-1], pos[1:-1]) if 0.25 <= p <= 0.75]
    if inner:
        return tuple(inner)
    mid = len(seg_vertices) // 2
    return (seg_vertices[mid],) if len(seg_vertices) > 2 else ()


CROWDING_PENALTY = 10.0
"""Cost factor for stepping next to an existing loop, which keeps new loops from squeezing regions shut."""


def embed_candidate(
    embedded: EmbeddedStructure, candidate: CandidateLoop, config: SurfaceConfig | None = None
) -> EmbeddedStructure:
    """Draw a new loop crossing exactly the candidate's segments, in order.

    The loop is a shortest closed path through a layered graph: layer ``i``
    holds the free vertices of the ``i``-th region and the inner vertices of
    the segment crossed to leave it.  Every layer visits at least one free
    vertex, and steps next to existing loops are penalized, so the new loop
    keeps its distance from the old ones.  The input is never modified.

    Raises
    ------
    StaleCandidate
        If the candidate does not belong to the embedded structure.
    EmbeddingFailed
        If no such path exists on the mesh, or the path leaves a region
        without a vertex off the loops.
    """
    cfg = config or SurfaceConfig()
    new_structure = add_loop(embedded.structure, candidate)
    mesh = embedded.mesh
    steps = list(candidate.steps)
    k = len(steps)
    inner = [set(_crossable(mesh, embedded.segment_vertices[s])) for s, _ in steps]
    shift = min(range(k), key=lambda i: (len(inner[i]), i))
    order = [(i + shift) % k for i in range(k)]
    segs = [steps[i][0] for i in order]
    regions = [steps[i][1] for i in order]
    inner = [inner[i] for i in order]
    vreg = embedded.vertex_region
    rank = mesh.position_rank
    weight = _path_weight(mesh, int(candidate.axis), cfg.beta, along=False)
    nbrs = mesh.neighbors
    nv = mesh.vertex_count
    on_loop = embedded.on_loop
    crowded = np.zeros(nv, dtype=bool)
    for v in np.flatnonzero(on_loop).tolist():
        crowded[nbrs[v]] = True
    crowded &= ~on_loop

    def search(v0: int, bound: float):
        start = v0
        goal = k * nv + v0
        dist = {start: 0.0}
        prev = {}
        heap = [(0.0, 0, rank[v0], start)]
        while heap:
            d, layer, _, node = heapq.heappop(heap)
            if d > dist.get(node, np.inf) or d > bound:
                continue
            if node == goal:
                path = [node]
                while path[-1] in prev:
                    path.append(prev[path[-1]])
                return d, [x % nv for x in reversed(path)]
            u = node % nv
            region = regions[layer]
            nxt_inner = inner[(layer + 1) % k]
            for w in nbrs[u]:
                if vreg[w] == region:
                    tgt = layer * nv + w
                elif w in nxt_inner and vreg[u] == region:
                    if layer + 1 == k and w != v0:
                        continue
                    tgt = (layer + 1) * nv + w
                else:
                    continue
                nd = d + weight(u, w) * (CROWDING_PENALTY if crowded[w] else 1.0)
                if nd < dist.get(tgt, np.inf):
                    dist[tgt] = nd
                    prev[tgt] = node
                    heapq.heappush(heap, (nd, tgt // nv, rank[w], tgt))
        return None

    best = None
    for v0 in sorted(inner[0], key=lambda v: rank[v]):
        found = search(v0, best[0] if best else np.inf)
        if found and (best is None or found[0] < best[0]):
            best = found
    if best is None:
        raise EmbeddingFailed("no path realizes the candidate on this mesh")
    cyc = best[1][:-1]
    hits = [v for v in cyc if embedded.on_loop[v]]
    crossing_at = dict(zip(order, hits))  # original step index -> vertex
    start = cyc.index(crossing_at[0])
    path = tuple(cyc[start:] + cyc[:start])
    new_loop = new_structure.loops[-1]
    cv = dict(embedded.crossing_vertex)
    for i, (c, _) in enumerate(new_loop.crossings):
        cv[c] = crossing_at[i]
    paths = dict(embedded.paths)
    paths[new_loop.id] = path
    out = EmbeddedStructure(mesh, new_structure, _normalize_paths(new_structure, paths, cv), cv).verify()
    if not out.roomy():
        raise EmbeddingFailed("the new loop leaves a region without a free vertex")
    return out


def _normalize_paths(structure: LoopStructure, paths: dict, cv: dict) -> dict[int, tuple[int, ...]]:
    out = {}
    for loop in structure.loops:
        path = tuple(paths[loop.id])
        if loop.crossings:
            i = path.index(cv[loop.crossings[0][0]])
            path = path[i:] + path[:i]
        out[loop.id] = path
    return out


def remove_embedded_loop(embedded: EmbeddedStructure, loop_id: int) -> EmbeddedStructure:
    """Erase a removable loop from the drawing."""
    gone = {c for c, _ in embedded.structure.loop(loop_id).crossings}
    structure = remove_loop(embedded.structure, loop_id)
    cv = {c: v for c, v in embedded.crossing_vertex.items() if c not in gone}
    paths = {i: p for i, p in embedded.paths.items() if i != loop_id}
    return EmbeddedStructure(embedded.mesh, structure, _normalize_paths(structure, paths, cv), cv)
