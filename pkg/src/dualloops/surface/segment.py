"""Surface segmentation from an embedded loop structure.

Every region receives one polycube corner, every segment one path joining
the corners on its two sides, and the paths cut the surface into patches,
one per crossing.  Each patch takes the signed axis of the corresponding
face of the primal polycube.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dualloops.errors import IoError, PrimalizationFailed
from dualloops.primalize import LABEL_NAMES, PolycubeMesh, assign_coordinates
from dualloops.surface.embed import EmbeddedStructure, SurfaceConfig, _path_weight

LABEL_VECTORS = np.array([[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]], dtype=float)


@dataclass
class Segmentation:
    """Patches of the surface.

    ``patch_of_triangle[t]`` is the index of the primal face (crossings in
    increasing id order) whose patch contains triangle ``t``;
    ``labels[f]`` is the signed-axis label of primal face ``f``.
    """

    polycube: PolycubeMesh
    crossings: list[int]
    corners: dict[int, int]
    paths: dict[int, tuple[int, ...]]
    patch_of_triangle: np.ndarray
    labels: list[int]

    @property
    def patch_count(self) -> int:
        return len(self.labels)

    def label_name(self, patch: int) -> str:
        return LABEL_NAMES[self.labels[patch]]


def _place_corners(emb: EmbeddedStructure, polycube: PolycubeMesh, cfg: SurfaceConfig) -> dict[int, int]:
    s = emb.structure
    mesh = emb.mesh
    pos = mesh.vertices
    rank = mesh.position_rank
    diag = float(np.linalg.norm(pos.max(axis=0) - pos.min(axis=0)))
    members: dict[int, list[int]] = {}
    for v, r in enumerate(emb.vertex_region.tolist()):
        if r >= 0:
            members.setdefault(r, []).append(v)
    region_labels: dict[int, set[int]] = {r.id: set() for r in s.regions}
    for fi, face in enumerate(polycube.faces):
        lab = polycube.face_label(fi)
        for r in face:
            region_labels[r].add(lab)
    shortlist: dict[int, np.ndarray] = {}
    corners: dict[int, int] = {}
    tri_region = emb.triangle_region
    centroids = {}
    areas = mesh.face_areas
    tri_centers = pos[mesh.triangles].mean(axis=1)
    for r in s.regions:
        verts = np.array(members.get(r.id, []), dtype=np.int64)
        if len(verts) == 0:
            raise PrimalizationFailed(f"region {r.id} has no vertex off the loops")
        # a corner needs a separate exit for each of its paths
        vreg = emb.vertex_region
        room = np.array([sum(vreg[w] == r.id for w in mesh.neighbors[v]) for v in verts.tolist()])
        verts = verts[room >= min(len(r.boundary), int(room.max()))]
        direction = LABEL_VECTORS[sorted(region_labels[r.id])].sum(axis=0)
        extent = pos[verts] @ direction
        keep = verts[extent >= extent.max() - cfg.corner_tolerance * diag]
        shortlist[r.id] = keep
        sel = tri_region == r.id
        centroids[r.id] = (tri_centers[sel] * areas[sel, None]).sum(axis=0) / areas[sel].sum()

    def closest(cands: np.ndarray, target: np.ndarray) -> int:
        d = np.linalg.norm(pos[cands] - target, axis=1)
        best = d.min()
        ties = cands[d <= best + 1e-12]
        return int(min(ties, key=lambda v: rank[v]))

    for r in s.regions:
        corners[r.id] = closest(shortlist[r.id], centroids[r.id])
    zone_maps = [s.zones(axis)[1] for axis in range(3)]
    for _ in range(cfg.relax_rounds):
        current = {r: pos[v] for r, v in corners.items()}
        means = []
        for axis in range(3):
            acc: dict[int, list[float]] = {}
            for r, p in current.items():
                acc.setdefault(zone_maps[axis][r], []).append(p[axis])
            means.append({z: float(np.mean(v)) for z, v in acc.items()})
        moved = False
        for r in sorted(corners):
            target = np.array([means[a][zone_maps[a][r]] for a in range(3)])
            v = closest(shortlist[r], target)
            if v != corners[r]:
                corners[r] = v
                moved = True
        if not moved:
            break
    return corners


def _route(
    emb: EmbeddedStructure,
    seg: int,
    a: int,
    b: int,
    blocked: np.ndarray,
    cfg: SurfaceConfig,
    ring_owner: dict[int, frozenset[int]] | None = None,
):
    """Shortest path from corner ``a`` through one inner vertex of ``seg`` to corner ``b``.

    Vertices next to a corner other than ``a`` and ``b`` (``ring_owner``)
    are avoided so that no corner gets walled in by foreign paths.
    """
    s = emb.structure
    mesh = emb.mesh
    minus, plus = s.segment_regions(seg)
    inner = set(emb.segment_vertices[seg][1:-1])
    vreg = emb.vertex_region
    rank = mesh.position_rank
    weight = _path_weight(mesh, int(s.segment_axis(seg)), cfg.beta, along=True)
    nv = mesh.vertex_count
    regions = (minus, plus)
    ring_owner = ring_owner or {}
    dist = {a: 0.0}
    prev = {}
    heap = [(0.0, 0, rank[a], a)]
    goal = nv + b
    while heap:
        d, layer, _, node = heapq.heappop(heap)
        if d > dist.get(node, np.inf):
            continue
        if node == goal:
            path = [node % nv]
            while node in prev:
                node = prev[node]
                path.append(node % nv)
            return path[::-1]
        u = node % nv
        for w in mesh.neighbors[u]:
            owners = ring_owner.get(w)
            if owners is not None and a not in owners and b not in owners:
                continue
            if layer == 0 and w in inner and (vreg[u] >= 0 or emb.edge_region(u, w) == minus):
                tgt = nv + w
            elif vreg[w] == regions[layer] and (not blocked[w] or (layer == 1 and w == b)):
                tgt = layer * nv + w
            else:
                continue
            nd = d + weight(u, w)
            if nd < dist.get(tgt, np.inf):
                dist[tgt] = nd
                prev[tgt] = node
                heapq.heappush(heap, (nd, tgt // nv, rank[w], tgt))
    raise PrimalizationFailed(f"no corner path across segment {seg}")


def _path_length(mesh, path) -> float:
    pts = mesh.vertices[list(path)]
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def _route_all(emb: EmbeddedStructure, corners: dict[int, int], cfg: SurfaceConfig) -> dict[int, tuple[int, ...]]:
    """Route every segment's corner path without two paths meeting.

    Segments are routed shortest first; one that gets boxed in is moved to
    the front and routing restarts.
    """
    s = emb.structure
    mesh = emb.mesh
    ring: dict[int, set[int]] = {}
    for v in corners.values():
        for w in mesh.neighbors[v]:
            ring.setdefault(w, set()).add(v)
    ring_owner = {w: frozenset(o) for w, o in ring.items()}
    base = np.zeros(mesh.vertex_count, dtype=bool)
    base[list(corners.values())] = True
    ends = {seg: tuple(corners[r] for r in s.segment_regions(seg)) for seg in range(s.segment_count)}
    free_length = {}
    for seg in range(s.segment_count):
        free_length[seg] = _path_length(mesh, _route(emb, seg, *ends[seg], base, cfg, ring_owner))
    order = sorted(range(s.segment_count), key=lambda seg: (free_length[seg], seg))
    last_error = None
    for _ in range(max(1, s.segment_count)):
        blocked = base.copy()
        paths: dict[int, tuple[int, ...]] = {}
        try:
            for seg in order:
                path = _route(emb, seg, *ends[seg], blocked, cfg, ring_owner)
                blocked[path[1:-1]] = True
                paths[seg] = tuple(path)
        except PrimalizationFailed as exc:
            last_error = exc
            if order[0] == seg:
                break
            order.remove(seg)
            order.insert(0, seg)
            continue
        return dict(sorted(paths.items()))
    raise last_error


def primalize_on_surface(embedded: EmbeddedStructure, config: SurfaceConfig | None = None) -> Segmentation:
    """Patch layout of the primal polycube on the embedding's mesh.

    Raises
    ------
    PrimalizationFailed
        If a region has no room for a corner, paths cannot be routed without
        meeting, or the patches do not match the primal faces.
    """
    cfg = config or SurfaceConfig()
    cached = embedded._cache.get(("segmentation", cfg))
    if cached is not None:
        return cached
    s = embedded.structure
    mesh = embedded.mesh
    polycube = assign_coordinates(s)
    crossings = sorted(s.crossing_records)
    corners = _place_corners(embedded, polycube, cfg)
    paths = _route_all(embedded, corners, cfg)
    cut = set()
    for path in paths.values():
        for x, y in zip(path, path[1:]):
            cut.add((min(x, y), max(x, y)))
    he = mesh.halfedges
    tris = mesh.triangles.tolist()
    comp = -np.ones(len(tris), dtype=np.int64)
    n = 0
    for t0 in range(len(tris)):
        if comp[t0] >= 0:
            continue
        comp[t0] = n
        stack = [t0]
        while stack:
            t = stack.pop()
            a, b, c = tris[t]
            for x, y in ((a, b), (b, c), (c, a)):
                if (min(x, y), max(x, y)) not in cut:
                    u = he[(y, x)]
                    if comp[u] < 0:
                        comp[u] = n
                        stack.append(u)
        n += 1
    if n != len(crossings):
        raise PrimalizationFailed(f"{n} patches for {len(crossings)} polycube faces")
    face_of_comp = {}
    star: dict[int, list[int]] = {}
    for t, tri in enumerate(tris):
        for v in tri:
            star.setdefault(v, []).append(t)
    for fi, c in enumerate(crossings):
        got = {int(comp[t]) for t in star[embedded.crossing_vertex[c]]}
        if len(got) != 1:
            raise PrimalizationFailed(f"a path runs through crossing {c}")
        (cc,) = got
        if cc in face_of_comp:
            raise PrimalizationFailed(f"crossings {crossings[face_of_comp[cc]]} and {c} share a patch")
        face_of_comp[cc] = fi
    face_index = {c: i for i, c in enumerate(crossings)}
    for seg, path in paths.items():
        ends = {face_index[c] for c in s.segment_crossings(seg)}
        for x, y in zip(path, path[1:]):
            sides = {face_of_comp[int(comp[he[(x, y)]])], face_of_comp[int(comp[he[(y, x)]])]}
            if sides != ends:
                raise PrimalizationFailed(f"path of segment {seg} does not separate its two faces")
    patch = np.array([face_of_comp[int(c)] for c in comp], dtype=np.int64)
    labels = [polycube.face_label(fi) for fi in range(len(crossings))]
    seg_out = Segmentation(polycube, crossings, corners, paths, patch, labels)
    embedded._cache[("segmentation", cfg)] = seg_out
    return seg_out


def score(embedded: EmbeddedStructure, config: SurfaceConfig | None = None) -> float:
    """Area-weighted alignment of triangle normals with their patch's signed axis, in [0, 1]."""
    seg = primalize_on_surface(embedded, config)
    mesh = embedded.mesh
    axes = LABEL_VECTORS[np.asarray(seg.labels)[seg.patch_of_triangle]]
    dots = np.einsum("ij,ij->i", mesh.face_normals, axes)
    areas = mesh.face_areas
    value = float((areas * dots).sum() / areas.sum())
    return min(1.0, max(0.0, value))


# -- exports ---------------------------------------------------------------------------


def segmentation_text(seg: Segmentation) -> str:
    lines = ["# triangle patch label"]
    lines += [f"{t} {p} {seg.label_name(p)}" for t, p in enumerate(seg.patch_of_triangle.tolist())]
    return "\n".join(lines) + "\n"


def loops_obj_text(embedded: EmbeddedStructure) -> str:
    mesh = embedded.mesh
    used = sorted({v for p in embedded.paths.values() for v in p})
    index = {v: i + 1 for i, v in enumerate(used)}
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.vertices[used].tolist()]
    for loop in embedded.structure.loops:
        path = embedded.paths[loop.id]
        lines.append(f"# loop {loop.id} {loop.axis}")
        lines.append("l " + " ".join(str(index[v]) for v in path + path[:1]))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return path
