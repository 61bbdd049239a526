"""Primal polycube meshes built from polycube loop structures."""

from __future__ import annotations

import enum
import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from dualloops.core import AXES, Axis, LevelGraph, LoopStructure
from dualloops.errors import InvalidStructure, IoError

# edge direction labels: 2*axis + (1 if positive)
LABEL_NAMES = ("-X", "+X", "-Y", "+Y", "-Z", "+Z")


def _label(axis: int, positive: bool) -> int:
    return 2 * axis + (1 if positive else 0)


@dataclass
class PolycubeMesh:
    """Quad mesh with integer corner positions.

    ``faces`` list corner indices counterclockwise seen from the side the
    surface orientation calls outside.
    """

    positions: list[tuple[int, int, int]]
    faces: list[tuple[int, int, int, int]]
    _nbr: list[dict[int, int]] | None = field(default=None, repr=False, compare=False)

    @property
    def corner_count(self) -> int:
        return len(self.positions)

    def edges(self) -> list[tuple[int, int]]:
        out = set()
        for f in self.faces:
            for k in range(4):
                a, b = f[k], f[(k + 1) % 4]
                out.add((min(a, b), max(a, b)))
        return sorted(out)

    def edge_label(self, a: int, b: int) -> int | None:
        """Direction label of edge a->b, or ``None`` unless exactly one coordinate differs."""
        pa, pb = self.positions[a], self.positions[b]
        diff = [i for i in range(3) if pa[i] != pb[i]]
        if len(diff) != 1:
            return None
        d = diff[0]
        return _label(d, pb[d] > pa[d])

    def labeled_neighbors(self) -> list[dict[int, int]]:
        """Per corner: direction label -> neighbor corner (Def.-conforming meshes only)."""
        if self._nbr is None:
            nbr: list[dict[int, int]] = [{} for _ in self.positions]
            for a, b in self.edges():
                la, lb = self.edge_label(a, b), self.edge_label(b, a)
                nbr[a][la] = b
                nbr[b][lb] = a
            self._nbr = nbr
        return self._nbr

    def degree(self, v: int) -> int:
        return sum(1 for a, b in self.edges() if v in (a, b))

    def problems(self) -> list[str]:
        """Violations of the polycube conditions; empty for a polycube."""
        out = []
        n = len(self.positions)
        if n == 0 or not self.faces:
            return ["empty mesh"]
        half: Counter = Counter()
        for f in self.faces:
            if len(set(f)) != 4:
                out.append(f"face {f} repeats a corner")
            for k in range(4):
                half[(f[k], f[(k + 1) % 4])] += 1
        for (a, b), cnt in half.items():
            if cnt != 1:
                out.append(f"half-edge {(a, b)} used {cnt} times (not orientable/manifold)")
            if half.get((b, a), 0) != 1:
                out.append(f"edge {(a, b)} is not shared by exactly two faces")
        edges = self.edges()
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
            if self.edge_label(a, b) is None:
                out.append(f"edge {(a, b)} is not axis-aligned")
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != n:
            out.append("mesh is not connected")
        for v in range(n):
            if len(adj[v]) < 3:
                out.append(f"corner {v} has degree {len(adj[v])} < 3")
            if len(adj[v]) > 6:
                out.append(f"corner {v} has degree {len(adj[v])} > 6")
            labels = [self.edge_label(v, w) for w in adj[v]]
            if len(set(labels)) != len(labels):
                out.append(f"corner {v} has overlapping edges")
        # faces must be axis-aligned rectangles
        for f in self.faces:
            p = [self.positions[i] for i in f]
            for k in range(4):
                if self.edge_label(f[k], f[(k + 1) % 4]) is None:
                    break
            else:
                d0 = [p[1][i] - p[0][i] for i in range(3)]
                d1 = [p[2][i] - p[1][i] for i in range(3)]
                opposite = all(p[2][i] - p[3][i] == d0[i] and p[3][i] - p[0][i] == d1[i] for i in range(3))
                if not opposite or sum(x * y for x, y in zip(d0, d1)) != 0:
                    out.append(f"face {f} is not a rectangle")
        return out

    def is_polycube(self) -> bool:
        return not self.problems()

    def genus(self) -> int:
        chi = len(self.positions) - len(self.edges()) + len(self.faces)
        return (2 - chi) // 2

    def face_normal(self, fi: int) -> tuple[int, int, int]:
        p = [self.positions[i] for i in self.faces[fi]]
        u = [p[1][i] - p[0][i] for i in range(3)]
        w = [p[3][i] - p[0][i] for i in range(3)]
        return (u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0])

    def face_label(self, fi: int) -> int:
        """Direction label of the face normal."""
        n = self.face_normal(fi)
        d = max(range(3), key=lambda i: abs(n[i]))
        return _label(d, n[d] > 0)

    def signed_volume(self) -> float:
        vol = 0.0
        for f in self.faces:
            p = [self.positions[i] for i in f]
            for a, b, c in ((p[0], p[1], p[2]), (p[0], p[2], p[3])):
                vol += (
                    a[0] * (b[1] * c[2] - b[2] * c[1])
                    - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0])
                )
        return vol / 6.0

    def to_dict(self) -> dict:
        return {"corners": [list(p) for p in self.positions], "faces": [list(f) for f in self.faces]}

    @classmethod
    def from_dict(cls, doc: dict) -> "PolycubeMesh":
        return cls([tuple(int(x) for x in p) for p in doc["corners"]], [tuple(int(x) for x in f) for f in doc["faces"]])


# -- coordinates --------------------------------------------------------------


def longest_path_layers(graph: LevelGraph) -> dict[int, int]:
    """Layer of each zone = length of the longest directed path ending in it."""
    indeg = {v: 0 for v in graph.vertices}
    succ: dict[int, list[int]] = {v: [] for v in graph.vertices}
    for u, v in graph.edges:
        succ[u].append(v)
        indeg[v] += 1
    layer = dict.fromkeys(graph.vertices, 0)
    queue = [v for v in graph.vertices if indeg[v] == 0]
    done = 0
    while queue:
        u = queue.pop()
        done += 1
        for v in succ[u]:
            layer[v] = max(layer[v], layer[u] + 1)
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if done != len(graph.vertices):
        raise InvalidStructure(f"{graph.axis}-graph has a cycle")
    return layer


def random_order_layers(graph: LevelGraph, rng: random.Random, max_gap: int = 3) -> dict[int, int]:
    """Values from a random topological order with random positive gaps."""
    indeg = {v: 0 for v in graph.vertices}
    succ: dict[int, list[int]] = {v: [] for v in graph.vertices}
    for u, v in graph.edges:
        succ[u].append(v)
        indeg[v] += 1
    ready = sorted(v for v in graph.vertices if indeg[v] == 0)
    value, out = 0, {}
    while ready:
        u = ready.pop(rng.randrange(len(ready)))
        value += rng.randint(1, max_gap)
        out[u] = value
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(out) != len(graph.vertices):
        raise InvalidStructure(f"{graph.axis}-graph has a cycle")
    return out


def assign_coordinates(
    structure: LoopStructure,
    layering: Callable[[LevelGraph], dict[int, int]] = longest_path_layers,
    check: bool = True,
) -> PolycubeMesh:
    """Primal polycube of a polycube loop structure.

    Every region becomes a corner placed at the layer values of its X-, Y- and
    Z-zone; every crossing becomes a quad whose corners are the four regions
    around it.
    """
    if check:
        from dualloops.validate import check_polycube

        report = check_polycube(structure)
        if not report.valid:
            raise InvalidStructure("not a polycube loop structure", report)
    layers = []
    for axis in AXES:
        graph = structure.level_graph(axis)
        zl = layering(graph)
        _, region_zone = structure.zones(axis)
        layers.append([zl[z] for z in region_zone])
    positions = [(layers[0][r], layers[1][r], layers[2][r]) for r in range(len(structure.regions))]
    faces = [tuple(structure.crossing_regions(c)) for c in sorted(structure.crossing_records)]
    return PolycubeMesh(positions, faces)


# -- corners -------------------------------------------------------------------


class CornerCategory(enum.Enum):
    SIMPLE = "simple"
    EDGE = "edge"
    FLAT = "flat"
    BENT = "bent"
    COMPLEX_SYMMETRIC = "complex-symmetric"
    COMPLEX_ASYMMETRIC = "complex-asymmetric"


def corner_labels(structure: LoopStructure, rid: int) -> tuple[int, ...]:
    """Cyclic sequence of outgoing edge labels of the corner of region ``rid``.

    A segment whose minus side faces the region leads to a corner on the
    plus side, i.e. an edge in the positive direction.
    """
    out = []
    for d in structure.regions[rid].boundary:
        axis = structure.segment_axis(d >> 1)
        out.append(_label(axis, not (d & 1)))
    return tuple(out)


def classify_labels(labels: Sequence[int]) -> CornerCategory:
    n = len(labels)
    axes = [l // 2 for l in labels]
    if n == 3:
        return CornerCategory.SIMPLE
    if n == 4:
        return CornerCategory.EDGE if len(set(axes)) == 3 else CornerCategory.FLAT
    if n == 5:
        return CornerCategory.BENT
    if n == 6:
        opposite = all(axes[i] == axes[(i + 3) % 6] for i in range(6))
        return CornerCategory.COMPLEX_SYMMETRIC if opposite else CornerCategory.COMPLEX_ASYMMETRIC
    raise ValueError(f"a polycube corner has 3 to 6 edges, got {n}")


def classify_corner(structure: LoopStructure, rid: int) -> CornerCategory:
    return classify_labels(corner_labels(structure, rid))


def canonical_rotation(labels: Sequence[int]) -> tuple[int, ...]:
    labels = tuple(labels)
    return min(labels[i:] + labels[:i] for i in range(len(labels)))


def enumerate_corner_configurations() -> dict[CornerCategory, list[tuple[int, ...]]]:
    """All cyclic edge-label arrangements a polycube corner can have.

    Arrangements use 3 to 6 distinct labels from {+-X, +-Y, +-Z}, never put
    two labels of one axis next to each other, and are identified up to
    rotation (mirror images are distinct corners).
    """
    seen: set[tuple[int, ...]] = set()
    out: dict[CornerCategory, list[tuple[int, ...]]] = {c: [] for c in CornerCategory}
    for n in range(3, 7):
        for combo in itertools.combinations(range(6), n):
            first, rest = combo[0], combo[1:]
            for perm in itertools.permutations(rest):
                seq = (first,) + perm
                if any(seq[i] // 2 == seq[(i + 1) % n] // 2 for i in range(n)):
                    continue
                key = canonical_rotation(seq)
                if key not in seen:
                    seen.add(key)
                    out[classify_labels(key)].append(key)
    for v in out.values():
        v.sort()
    return out


# -- order equivalence -----------------------------------------------------------


def _face_key(f: Sequence[int]) -> tuple[int, ...]:
    f = tuple(f)
    r = tuple(reversed(f))
    return min(min(f[i:] + f[:i] for i in range(4)), min(r[i:] + r[:i] for i in range(4)))


@dataclass
class Equivalence:
    equivalent: bool
    mapping: list[int] | None = None
    reason: str = ""

    def __bool__(self):
        return self.equivalent


def order_equivalent(q1: PolycubeMesh, q2: PolycubeMesh) -> Equivalence:
    """Decide order-equivalence by propagating directed axis labels.

    At a polycube corner every edge direction occurs at most once, so fixing
    the image of one corner forces the image of every other corner.
    """
    n = q1.corner_count
    if n != q2.corner_count or len(q1.faces) != len(q2.faces):
        return Equivalence(False, reason="different corner or face counts")
    if n == 0:
        return Equivalence(True, [])
    nb1, nb2 = q1.labeled_neighbors(), q2.labeled_neighbors()
    faces2 = {_face_key(f) for f in q2.faces}
    sig0 = sorted(nb1[0])
    for seed in range(n):
        if sorted(nb2[seed]) != sig0:
            continue
        mapping = [-1] * n
        used = [False] * n
        mapping[0] = seed
        used[seed] = True
        stack = [0]
        ok = True
        while stack and ok:
            v = stack.pop()
            w = mapping[v]
            if nb1[v].keys() != nb2[w].keys():
                ok = False
                break
            for lab, v2 in nb1[v].items():
                w2 = nb2[w][lab]
                if mapping[v2] == -1:
                    if used[w2]:
                        ok = False
                        break
                    mapping[v2] = w2
                    used[w2] = True
                    stack.append(v2)
                elif mapping[v2] != w2:
                    ok = False
                    break
        if not ok or -1 in mapping:
            continue
        if all(_face_key([mapping[i] for i in f]) in faces2 for f in q1.faces):
            return Equivalence(True, mapping)
    return Equivalence(False, reason="no label-preserving isomorphism")


# -- export ----------------------------------------------------------------------


def obj_text(mesh: PolycubeMesh) -> str:
    if not mesh.positions or not mesh.faces:
        raise IoError("refusing to export an empty mesh")
    lines = [f"v {x} {y} {z}" for x, y, z in mesh.positions]
    lines += ["f " + " ".join(str(i + 1) for i in f) for f in mesh.faces]
    return "\n".join(lines) + "\n"


def export_obj(mesh: PolycubeMesh, path) -> Path:
    text = obj_text(mesh)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return path
