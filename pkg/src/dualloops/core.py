"""Oriented loop structures encoded as rotation systems.

A loop structure is given by its loops, each a cyclic sequence of crossing
records ``(crossing id, handed)``.  ``handed`` is ``True`` when the other loop
passes from the right side to the left side as seen while walking along this
loop.  On an orientable surface the two records of one crossing carry opposite
bits, and that is enough to fix the cyclic order of the four darts around the
crossing.

Darts are numbered ``2*s`` (forward along the loop of segment ``s``) and
``2*s + 1`` (backward).  Regions are traced with the region on the left of each
dart, so a forward dart sees the negative side of its loop and a backward dart
the positive side; ``dart & 1`` is therefore the side label (1 = ``+``).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from dualloops.errors import (
    DanglingCrossing,
    GenusMismatch,
    HandednessMismatch,
    LoopStructureError,
    SelfCrossing,
    UnorientedLoop,
)

FORMAT_VERSION = 1


class Axis(enum.IntEnum):
    X = 0
    Y = 1
    Z = 2

    def __str__(self):
        return self.name

    @classmethod
    def parse(cls, value) -> "Axis":
        if isinstance(value, Axis):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown axis {value!r}") from None
        return cls(int(value))


AXES = (Axis.X, Axis.Y, Axis.Z)


@dataclass(frozen=True)
class Loop:
    id: int
    axis: Axis
    crossings: tuple[tuple[int, bool], ...]
    oriented: bool = True

    def reversed(self) -> "Loop":
        """The same curve walked the other way; every handedness bit flips.

        The loops it crosses must flip their bits too, see
        :meth:`LoopStructure.reverse_loops`.
        """
        seq = tuple((c, not h) for c, h in reversed(self.crossings))
        return Loop(self.id, self.axis, seq, self.oriented)


@dataclass(frozen=True)
class Region:
    id: int
    boundary: tuple[int, ...]  # darts, region on their left


@dataclass(frozen=True)
class Zone:
    id: int
    axis: Axis
    regions: frozenset[int]
    genus: int
    boundary_count: int
    euler: int


@dataclass
class LevelGraph:
    axis: Axis
    vertices: list[int]
    edges: list[tuple[int, int]]  # one per loop of the axis, (minus zone, plus zone)
    loops: list[int]  # loop id of each edge

    def find_cycle(self) -> list[int] | None:
        """Return the zones of one directed cycle, or ``None`` if acyclic."""
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            if u == v:
                return [u]
            adj[u].append(v)
        return _find_cycle(adj)


def _find_cycle(adj: dict[int, list[int]]) -> list[int] | None:
    color = dict.fromkeys(adj, 0)
    parent: dict[int, int] = {}
    for root in adj:
        if color[root]:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if color[nxt] == 0:
                    color[nxt] = 1
                    parent[nxt] = node
                    stack.append((nxt, iter(adj[nxt])))
                    break
                if color[nxt] == 1:
                    cycle = [node]
                    while cycle[-1] != nxt:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
            else:
                color[node] = 2
                stack.pop()
    return None


class LoopStructure:
    """Immutable arrangement of axis-labeled loops on a closed surface.

    Parameters
    ----------
    genus : int
        Declared genus of the underlying surface.
    loops : iterable of Loop
        Loops with unique ids.
    strict : bool
        When true, raise :class:`GenusMismatch` if the traced Euler
        characteristic disagrees with ``2 - 2*genus``.
    """

    def __init__(self, genus: int, loops: Iterable[Loop], strict: bool = True):
        if genus < 0:
            raise LoopStructureError("genus must be non-negative")
        self.genus = int(genus)
        self.loops: tuple[Loop, ...] = tuple(sorted(loops, key=lambda l: l.id))
        self._loop_index = {l.id: i for i, l in enumerate(self.loops)}
        if len(self._loop_index) != len(self.loops):
            raise LoopStructureError("duplicate loop ids")
        self._zones: dict[Axis, tuple[list[Zone], list[int]]] = {}
        self._build()
        if strict and self.euler_characteristic != 2 - 2 * self.genus:
            raise GenusMismatch(
                f"traced Euler characteristic {self.euler_characteristic} "
                f"!= {2 - 2 * self.genus} for genus {self.genus}"
            )

    # -- construction -------------------------------------------------------

    def _build(self):
        records: dict[int, list[tuple[int, int, bool]]] = {}
        seg_loop: list[int] = []
        seg_pos: list[int] = []
        loop_segs: list[list[int]] = []
        for li, loop in enumerate(self.loops):
            k = len(loop.crossings)
            segs = list(range(len(seg_loop), len(seg_loop) + max(k, 1)))
            loop_segs.append(segs)
            seg_loop.extend([li] * len(segs))
            seg_pos.extend(range(len(segs)))
            for pos, (c, h) in enumerate(loop.crossings):
                records.setdefault(c, []).append((li, pos, bool(h)))
        for c, recs in records.items():
            if len(recs) == 1:
                raise DanglingCrossing(f"crossing {c} appears only once")
            if len(recs) > 2:
                raise LoopStructureError(f"crossing {c} appears {len(recs)} times")
            (a, _, ha), (b, _, hb) = recs
            if a == b:
                raise SelfCrossing(f"crossing {c} appears twice in loop {self.loops[a].id}")
            if ha == hb:
                raise HandednessMismatch(f"crossing {c} has equal handedness on both loops")
        self.seg_loop = seg_loop
        self.seg_pos = seg_pos
        self.loop_segs = loop_segs
        self.crossing_records = records
        nd = 2 * len(seg_loop)
        cw = [0] * nd
        for c, recs in records.items():
            (a, pa, ha), (b, pb, _) = recs
            sa, sb = loop_segs[a], loop_segs[b]
            a_out, a_back = 2 * sa[pa], 2 * sa[pa - 1] + 1
            b_out, b_back = 2 * sb[pb], 2 * sb[pb - 1] + 1
            ccw = (a_out, b_out, a_back, b_back) if ha else (a_out, b_back, a_back, b_out)
            for i in range(4):
                cw[ccw[i]] = ccw[i - 1]
        for li, loop in enumerate(self.loops):
            if not loop.crossings:
                s = loop_segs[li][0]
                cw[2 * s], cw[2 * s + 1] = 2 * s + 1, 2 * s
        self._cw = cw
        dart_region = [-1] * nd
        regions: list[Region] = []
        for d0 in range(nd):
            if dart_region[d0] >= 0:
                continue
            rid = len(regions)
            cyc = []
            d = d0
            while dart_region[d] < 0:
                dart_region[d] = rid
                cyc.append(d)
                d = cw[d ^ 1]
            regions.append(Region(rid, tuple(cyc)))
        self.regions: tuple[Region, ...] = tuple(regions)
        self.dart_region = dart_region
        n_free = sum(1 for l in self.loops if not l.crossings)
        self.vertex_count = len(records) + n_free
        self.euler_characteristic = self.vertex_count - len(seg_loop) + len(regions)

    # -- basic queries ------------------------------------------------------

    @property
    def segment_count(self) -> int:
        return len(self.seg_loop)

    @property
    def intersection_count(self) -> int:
        return len(self.crossing_records)

    @property
    def loop_ids(self) -> list[int]:
        return [l.id for l in self.loops]

    def loop(self, loop_id: int) -> Loop:
        return self.loops[self._loop_index[loop_id]]

    def has_loop(self, loop_id: int) -> bool:
        return loop_id in self._loop_index

    def loop_index(self, loop_id: int) -> int:
        return self._loop_index[loop_id]

    def segment_axis(self, s: int) -> Axis:
        return self.loops[self.seg_loop[s]].axis

    def segment_loop_id(self, s: int) -> int:
        return self.loops[self.seg_loop[s]].id

    def segment_crossings(self, s: int) -> tuple[int | None, int | None]:
        """Crossing ids at the start and end of segment ``s``."""
        loop = self.loops[self.seg_loop[s]]
        if not loop.crossings:
            return None, None
        p = self.seg_pos[s]
        k = len(loop.crossings)
        return loop.crossings[p][0], loop.crossings[(p + 1) % k][0]

    def dart_label(self, d: int) -> tuple[Axis, int]:
        """(axis, side) of the segment of dart ``d`` facing its region; side is +1/-1."""
        return self.segment_axis(d >> 1), (1 if d & 1 else -1)

    def region_labels(self, rid: int) -> list[tuple[Axis, int]]:
        return [self.dart_label(d) for d in self.regions[rid].boundary]

    def segment_regions(self, s: int) -> tuple[int, int]:
        """(region on the minus side, region on the plus side) of segment ``s``."""
        return self.dart_region[2 * s], self.dart_region[2 * s + 1]

    def is_oriented(self) -> bool:
        return all(l.oriented for l in self.loops)

    def loops_of_axis(self, axis: Axis) -> list[Loop]:
        return [l for l in self.loops if l.axis == axis]

    def same_axis_crossings(self) -> list[int]:
        out = []
        for c, ((a, _, _), (b, _, _)) in self.crossing_records.items():
            if self.loops[a].axis == self.loops[b].axis:
                out.append(c)
        return sorted(out)

    def crossing_regions(self, c: int) -> list[int]:
        """The regions around crossing ``c`` in counterclockwise order."""
        (a, pa, ha), _ = self.crossing_records[c]
        d = 2 * self.loop_segs[a][pa]
        out = []
        for _ in range(4):
            out.append(self.dart_region[d])
            d = self._ccw_next(d)
        return out

    def _ccw_next(self, d: int) -> int:
        # inverse of cw; rotations have length 4 (or 2 for free loops)
        e = self._cw[d]
        while self._cw[e] != d:
            e = self._cw[e]
        return e

    # -- zones and level graphs ---------------------------------------------

    def zones(self, axis: Axis) -> tuple[list[Zone], list[int]]:
        """Zones of ``axis`` and the zone index of every region."""
        axis = Axis(axis)
        if axis not in self._zones:
            self._zones[axis] = self._compute_zones(axis)
        return self._zones[axis]

    def _compute_zones(self, axis: Axis):
        nr = len(self.regions)
        parent = list(range(nr))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        seg_axis = [self.loops[li].axis for li in self.seg_loop]
        dr = self.dart_region
        for s in range(len(seg_axis)):
            if seg_axis[s] != axis:
                ra, rb = find(dr[2 * s]), find(dr[2 * s + 1])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        roots: dict[int, int] = {}
        region_zone = [0] * nr
        for r in range(nr):
            region_zone[r] = roots.setdefault(find(r), len(roots))
        k = len(roots)
        faces = [0] * k
        for r in range(nr):
            faces[region_zone[r]] += 1
        edges = [0] * k
        verts: list[set] = [set() for _ in range(k)]
        for s in range(len(seg_axis)):
            za, zb = region_zone[dr[2 * s]], region_zone[dr[2 * s + 1]]
            start, _ = self.segment_crossings(s)
            vkey = start if start is not None else ("free", s)
            for z in {za, zb}:
                edges[z] += 1
                verts[z].add(vkey)
                end = self.segment_crossings(s)[1]
                if end is not None:
                    verts[z].add(end)
        bounds = [0] * k
        for li, loop in enumerate(self.loops):
            if loop.axis == axis:
                s = self.loop_segs[li][0]
                bounds[region_zone[dr[2 * s]]] += 1
                bounds[region_zone[dr[2 * s + 1]]] += 1
        members: list[list[int]] = [[] for _ in range(k)]
        for r in range(nr):
            members[region_zone[r]].append(r)
        zones = []
        for z in range(k):
            chi = len(verts[z]) - edges[z] + faces[z]
            g2 = 2 - chi - bounds[z]
            genus = g2 // 2 if g2 % 2 == 0 else g2 / 2
            zones.append(Zone(z, axis, frozenset(members[z]), genus, bounds[z], chi))
        return zones, region_zone

    def level_graph(self, axis: Axis) -> LevelGraph:
        axis = Axis(axis)
        zones, region_zone = self.zones(axis)
        edges, loop_ids = [], []
        for li, loop in enumerate(self.loops):
            if loop.axis != axis:
                continue
            if not loop.oriented:
                raise UnorientedLoop(f"loop {loop.id} has no orientation")
            s = self.loop_segs[li][0]
            edges.append((region_zone[self.dart_region[2 * s]], region_zone[self.dart_region[2 * s + 1]]))
            loop_ids.append(loop.id)
        return LevelGraph(axis, [z.id for z in zones], edges, loop_ids)

    # -- derived structures ---------------------------------------------------

    def reverse_loops(self, loop_ids: Iterable[int], strict: bool = False) -> "LoopStructure":
        """The structure with the given loops walked the other way.

        A reversed loop flips its own handedness bits and, since it now
        heads the other way, the bits of every loop it crosses at those
        crossings (twice for a crossing of two reversed loops).
        """
        ids = set(loop_ids)
        flipped: dict[int, int] = {}
        for l in self.loops:
            if l.id in ids:
                for c, _ in l.crossings:
                    flipped[c] = flipped.get(c, 0) + 1
        loops = []
        for l in self.loops:
            seq = tuple((c, h ^ (flipped.get(c, 0) % 2 == 1)) for c, h in l.crossings)
            if l.id in ids:
                seq = tuple(reversed(seq))
            loops.append(Loop(l.id, l.axis, seq, l.oriented))
        return self.replace_loops(loops, strict=strict)

    def replace_loops(self, loops: Iterable[Loop], strict: bool = False) -> "LoopStructure":
        return LoopStructure(self.genus, loops, strict=strict)

    def canonical_key(self) -> tuple:
        """Relabeling-invariant key: equal keys mean equal structures up to ids."""
        comps = []
        for comp in self._component_loops():
            best = None
            for li in comp:
                loop = self.loops[li]
                for p in range(len(loop.crossings)) if loop.crossings else [0]:
                    code = self._code_from(li, p)
                    if best is None or code < best:
                        best = code
            comps.append(best)
        return (self.genus, tuple(sorted(comps)))

    def _component_loops(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for li in range(len(self.loops)):
            if li in seen:
                continue
            comp, stack = [], [li]
            seen.add(li)
            while stack:
                a = stack.pop()
                comp.append(a)
                for c, _ in self.loops[a].crossings:
                    for b, _, _ in self.crossing_records[c]:
                        if b not in seen:
                            seen.add(b)
                            stack.append(b)
            comps.append(sorted(comp))
        return comps

    def _code_from(self, li0: int, p0: int) -> tuple:
        loop_num = {li0: 0}
        starts = {li0: p0}
        order = [li0]
        cross_num: dict[int, int] = {}
        code = []
        i = 0
        while i < len(order):
            li = order[i]
            loop = self.loops[li]
            seq = loop.crossings
            k = len(seq)
            p = starts[li]
            entries = []
            for j in range(k):
                c, h = seq[(p + j) % k]
                if c not in cross_num:
                    cross_num[c] = len(cross_num)
                    for b, pb, _ in self.crossing_records[c]:
                        if b != li and b not in loop_num:
                            loop_num[b] = len(order)
                            starts[b] = pb
                            order.append(b)
                entries.append((cross_num[c], h))
            code.append((int(loop.axis), loop.oriented, tuple(entries)))
            i += 1
        return tuple(code)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "genus": self.genus,
            "loops": [
                {
                    "id": l.id,
                    "axis": l.axis.name,
                    "oriented": l.oriented,
                    "crossings": [{"crossing": c, "handed": "+" if h else "-"} for c, h in l.crossings],
                }
                for l in self.loops
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def __eq__(self, other):
        if not isinstance(other, LoopStructure):
            return NotImplemented
        return self.genus == other.genus and self.loops == other.loops

    def __hash__(self):
        return hash((self.genus, self.loops))

    def __repr__(self):
        counts = [len(self.loops_of_axis(a)) for a in AXES]
        return (
            f"LoopStructure(genus={self.genus}, loops={len(self.loops)} {counts}, "
            f"V={self.vertex_count}, E={self.segment_count}, F={len(self.regions)})"
        )


def build_structure(genus: int, loop_specs: Sequence, strict: bool = True) -> LoopStructure:
    """Build a loop structure from loop specifications.

    Each spec is a :class:`Loop`, a mapping in the document format, or a tuple
    ``(axis, [(crossing, handed), ...])`` whose loop id is its list index.
    """
    loops = []
    for i, spec in enumerate(loop_specs):
        if isinstance(spec, Loop):
            loops.append(spec)
        elif isinstance(spec, dict):
            loops.append(_loop_from_dict(spec))
        else:
            axis, seq = spec[0], spec[1]
            oriented = spec[2] if len(spec) > 2 else True
            loops.append(Loop(i, Axis.parse(axis), tuple((int(c), _handed(h)) for c, h in seq), oriented))
    return LoopStructure(genus, loops, strict=strict)


def _handed(h) -> bool:
    if isinstance(h, str):
        if h not in ("+", "-"):
            raise LoopStructureError(f"handedness must be '+' or '-', got {h!r}")
        return h == "+"
    return bool(h)


def _loop_from_dict(d: dict) -> Loop:
    try:
        seq = tuple((int(x["crossing"]), _handed(x["handed"])) for x in d["crossings"])
        return Loop(int(d["id"]), Axis.parse(d["axis"]), seq, bool(d.get("oriented", True)))
    except (KeyError, TypeError) as exc:
        raise LoopStructureError(f"malformed loop entry: {d!r}") from exc


def structure_from_dict(doc: dict, strict: bool = True) -> LoopStructure:
    if "genus" not in doc or "loops" not in doc:
        raise LoopStructureError("document needs 'genus' and 'loops'")
    return LoopStructure(int(doc["genus"]), [_loop_from_dict(l) for l in doc["loops"]], strict=strict)


def loads_structure(text: str, strict: bool = True) -> LoopStructure:
    return structure_from_dict(json.loads(text), strict=strict)


def resolve_path(path) -> Path:
    p = Path(path)
    if not p.exists() and p.with_suffix(".json").exists():
        return p.with_suffix(".json")
    return p


def load_structure(path, strict: bool = True) -> LoopStructure:
    return loads_structure(resolve_path(path).read_text(), strict=strict)


def save_structure(structure: LoopStructure, path) -> None:
    Path(path).write_text(structure.dumps() + "\n")


# -- functional surface -------------------------------------------------------


def trace_regions(structure: LoopStructure) -> list[Region]:
    return list(structure.regions)


def compute_zones(structure: LoopStructure, axis) -> list[Zone]:
    return structure.zones(Axis.parse(axis))[0]


def build_level_graph(structure: LoopStructure, axis) -> LevelGraph:
    return structure.level_graph(Axis.parse(axis))


@dataclass
class GenusIdentity:
    axis: Axis
    edges: int
    vertices: int
    genus: int
    zone_genus_sum: int | float
    holds: bool = field(init=False)

    def __post_init__(self):
        self.holds = self.edges == self.genus + self.vertices - 1 - self.zone_genus_sum


def check_genus_identity(structure: LoopStructure) -> dict[Axis, GenusIdentity]:
    """Per-axis evaluation of ``|E| = g + |V| - 1 - sum of zone genera``."""
    out = {}
    for axis in AXES:
        zones, _ = structure.zones(axis)
        n_edges = len(structure.loops_of_axis(axis))
        out[axis] = GenusIdentity(axis, n_edges, len(zones), structure.genus, sum(z.genus for z in zones))
    return out
