"""Loop additions and removals that keep a polycube loop structure valid.

A new loop is a closed walk through regions: it enters a region through one
boundary segment and leaves through another.  Walking from segment ``u`` to
segment ``v`` inside region ``r`` is an edge of the *edge graph*; the
*validity graph* of an axis keeps only the walks that leave both halves of the
split region valid.  Region-distinct simple cycles of the validity graph are
exactly the valid additions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterator

from dualloops.core import AXES, Axis, Loop, LoopStructure
from dualloops.errors import InvalidStructure, NotRemovable, StaleCandidate, UnknownLoop
from dualloops.validate import Violation, check_polycube


def fingerprint(structure: LoopStructure) -> str:
    """Digest of the labeled structure; segment and region ids are only meaningful against it."""
    return hashlib.sha1(structure.dumps().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Traversal:
    """Walk inside ``region`` from segment ``src`` to segment ``dst``."""

    src: int
    dst: int
    region: int


@dataclass
class EdgeGraph:
    vertices: list[int]
    edges: list[Traversal]

    def successors(self) -> dict[int, list[Traversal]]:
        out: dict[int, list[Traversal]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.src].append(e)
        return out


@dataclass
class ValidityGraph(EdgeGraph):
    axis: Axis = Axis.X


@dataclass(frozen=True)
class CandidateLoop:
    """A loop that can be added.

    ``steps[i] = (segment, region)``: cross ``segment``, then walk through
    ``region`` to the segment of the next step.  The walking direction fixes
    the orientation: the minus side is on the left.
    """

    axis: Axis
    steps: tuple[tuple[int, int], ...]
    structure_fingerprint: str = ""

    def __len__(self):
        return len(self.steps)

    @property
    def segments(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.steps)

    @property
    def regions(self) -> tuple[int, ...]:
        return tuple(r for _, r in self.steps)

    def to_dict(self) -> dict:
        return {
            "axis": str(self.axis),
            "fingerprint": self.structure_fingerprint,
            "steps": [list(s) for s in self.steps],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "CandidateLoop":
        return cls(
            Axis.parse(doc["axis"]),
            tuple((int(s), int(r)) for s, r in doc["steps"]),
            doc.get("fingerprint", ""),
        )


def _require_valid(structure: LoopStructure) -> None:
    report = check_polycube(structure)
    if not report.valid:
        raise InvalidStructure("not a polycube loop structure", report)


def build_edge_graph(structure: LoopStructure, check: bool = True) -> EdgeGraph:
    """All ordered pairs of distinct boundary segments of every region."""
    if check:
        _require_valid(structure)
    edges = []
    for r in structure.regions:
        segs = [d >> 1 for d in r.boundary]
        for u in segs:
            for v in segs:
                if u != v:
                    edges.append(Traversal(u, v, r.id))
    return EdgeGraph(list(range(structure.segment_count)), edges)


def _traversal_ok(structure: LoopStructure, bnd: tuple[int, ...], i: int, j: int, axis: Axis) -> bool:
    """Whether walking from boundary position i to j keeps both halves valid for a new ``axis`` loop.

    Darts strictly after i up to j end up on the plus (right) side of the
    new loop.  A dart whose region lies on the plus side of its own
    ``axis`` loop must stay on the minus side and vice versa.
    """
    k = len(bnd)
    if structure.segment_axis(bnd[i] >> 1) == axis or structure.segment_axis(bnd[j] >> 1) == axis:
        return False
    p = (i + 1) % k
    while p != j:
        d = bnd[p]
        if structure.segment_axis(d >> 1) == axis and d & 1:
            return False
        p = (p + 1) % k
    p = (j + 1) % k
    while p != i:
        d = bnd[p]
        if structure.segment_axis(d >> 1) == axis and not d & 1:
            return False
        p = (p + 1) % k
    return True


def build_validity_graph(structure: LoopStructure, axis, check: bool = True) -> ValidityGraph:
    """Traversals of the edge graph that a valid new ``axis`` loop may use."""
    axis = Axis(axis)
    if check:
        _require_valid(structure)
    edges = []
    for r in structure.regions:
        bnd = r.boundary
        for i in range(len(bnd)):
            for j in range(len(bnd)):
                if i != j and _traversal_ok(structure, bnd, i, j, axis):
                    edges.append(Traversal(bnd[i] >> 1, bnd[j] >> 1, r.id))
    return ValidityGraph(list(range(structure.segment_count)), edges, axis)


def _region_distinct_cycles(graph: EdgeGraph, max_len: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Simple cycles visiting each segment and each region at most once.

    Every cycle is reported once, rotated to start at its smallest segment.
    """
    succ = graph.successors()
    for start in graph.vertices:
        # stack entries: (segment, iterator over its traversals)
        path: list[Traversal] = []
        on_path = {start}
        regions: set[int] = set()
        stack = [iter(succ[start])]
        while stack:
            advanced = False
            for e in stack[-1]:
                if e.region in regions or e.dst < start:
                    continue
                if e.dst == start:
                    cyc = path + [e]
                    # steps: (segment crossed, region then traversed)
                    yield tuple((t.src, t.region) for t in cyc)
                    continue
                if e.dst in on_path or len(path) + 1 >= max_len:
                    continue
                path.append(e)
                on_path.add(e.dst)
                regions.add(e.region)
                stack.append(iter(succ[e.dst]))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if path:
                    e = path.pop()
                    on_path.discard(e.dst)
                    regions.discard(e.region)


def default_max_len(structure: LoopStructure) -> int:
    return 2 * len(structure.loops) + 8


def apply_steps(structure: LoopStructure, axis, steps, strict: bool = False) -> LoopStructure:
    """Insert a loop walking ``steps`` without any validity checks."""
    axis = Axis(axis)
    s = structure
    next_c = max(s.crossing_records, default=-1) + 1
    new_id = max(s.loop_ids, default=-1) + 1
    inserts: dict[int, list[tuple[int, int, bool]]] = {}
    new_crossings = []
    k = len(steps)
    for i, (seg, region) in enumerate(steps):
        prev_region = steps[i - 1][1]
        minus, plus = s.segment_regions(seg)
        if {minus, plus} != {prev_region, region} or minus == plus:
            raise InvalidStructure(f"segment {seg} does not separate regions {prev_region} and {region}")
        # coming from the minus side of seg means the crossed loop heads to our left
        handed = plus == region
        c = next_c + i
        new_crossings.append((c, handed))
        inserts.setdefault(s.seg_loop[seg], []).append((s.seg_pos[seg], c, not handed))
    loops = []
    for li, loop in enumerate(s.loops):
        if li not in inserts:
            loops.append(loop)
            continue
        cr = list(loop.crossings)
        for pos, c, h in sorted(inserts[li], reverse=True):
            cr.insert(pos + 1, (c, h))
        loops.append(Loop(loop.id, loop.axis, tuple(cr), loop.oriented))
    loops.append(Loop(new_id, axis, tuple(new_crossings)))
    return LoopStructure(s.genus, loops, strict=strict)


def _separates(result: LoopStructure) -> bool:
    new = result.loops[-1]
    minus, plus = result.segment_regions(result.loop_segs[-1][0])
    _, zone_of = result.zones(new.axis)
    return zone_of[minus] != zone_of[plus]


def enumerate_valid_loops(
    structure: LoopStructure, axis, max_len: int | None = None, check: bool = True
) -> list[CandidateLoop]:
    """All valid additions of an ``axis`` loop crossing at most ``max_len`` segments.

    On surfaces of positive genus a cycle may run around a handle without
    splitting its zone; such cycles are dropped.
    """
    axis = Axis(axis)
    if max_len is None:
        max_len = default_max_len(structure)
    graph = build_validity_graph(structure, axis, check=check)
    fp = fingerprint(structure)
    out = []
    for steps in _region_distinct_cycles(graph, max_len):
        if structure.genus > 0 and not _separates(apply_steps(structure, axis, steps)):
            continue
        out.append(CandidateLoop(axis, steps, fp))
    out.sort(key=lambda c: (len(c.steps), c.steps))
    return out


def edge_graph_cycles(structure: LoopStructure, max_len: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every region-distinct simple cycle of the unfiltered edge graph."""
    return _region_distinct_cycles(build_edge_graph(structure, check=False), max_len)


def add_loop(structure: LoopStructure, candidate: CandidateLoop) -> LoopStructure:
    """Apply a candidate from :func:`enumerate_valid_loops`.

    Raises
    ------
    StaleCandidate
        If the candidate was computed for another structure or names
        segments or regions this structure does not have.
    """
    s = structure
    if candidate.structure_fingerprint and candidate.structure_fingerprint != fingerprint(s):
        raise StaleCandidate("candidate was enumerated on a different structure")
    for seg, region in candidate.steps:
        if not (0 <= seg < s.segment_count and 0 <= region < len(s.regions)):
            raise StaleCandidate(f"step ({seg}, {region}) is not part of this structure")
        if seg not in {d >> 1 for d in s.regions[region].boundary}:
            raise StaleCandidate(f"segment {seg} does not bound region {region}")
    k = len(candidate.steps)
    for i in range(k):
        seg, region = candidate.steps[i]
        nxt = candidate.steps[(i + 1) % k][0]
        bnd = s.regions[region].boundary
        pos = {d >> 1: p for p, d in enumerate(bnd)}
        if nxt not in pos or not _traversal_ok(s, bnd, pos[seg], pos[nxt], candidate.axis):
            raise StaleCandidate(f"step {i} is not a valid traversal of region {region}")
    try:
        return apply_steps(s, candidate.axis, candidate.steps, strict=True)
    except InvalidStructure as exc:
        raise StaleCandidate(str(exc)) from exc


# -- removal -----------------------------------------------------------------------


@dataclass
class Removability:
    loop_id: int
    removable: bool
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self):
        return self.removable


class _DSU:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[x] = p
        return p

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def removable(structure: LoopStructure, loop_id: int) -> Removability:
    """Decide locally whether removing a loop leaves a polycube loop structure.

    Regions on both sides of each segment of the loop merge; the merged
    regions are checked for disk topology, boundary length and repeated
    labels.  The loop's level-graph edge is then contracted and a
    depth-first search looks for a cycle through the merged vertex.
    """
    s = structure
    if not s.has_loop(loop_id):
        raise UnknownLoop(f"no loop {loop_id}")
    li = s.loop_index(loop_id)
    loop = s.loops[li]
    out: list[Violation] = []
    segs = s.loop_segs[li]
    regions = _DSU()
    for seg in segs:
        a, b = s.segment_regions(seg)
        if not regions.union(a, b):
            out.append(
                Violation("P4", "region", (a, b), f"merging across segment {seg} closes a ring: not a disk")
            )
    # other loops: their two segments at each removed crossing join up
    darts = _DSU()
    touched: dict[int, int] = {}
    for c, _ in loop.crossings:
        recs = s.crossing_records[c]
        oi, op, _ = recs[0] if recs[0][0] != li else recs[1]
        osegs = s.loop_segs[oi]
        prev_seg, next_seg = osegs[op - 1], osegs[op]
        touched[oi] = touched.get(oi, 0) + 1
        for side in (0, 1):
            darts.union(2 * prev_seg + side, 2 * next_seg + side)
    for oi, n in touched.items():
        if n == len(s.loops[oi].crossings):
            other = s.loops[oi]
            out.append(
                Violation("P2", "region", (), f"loop {other.id} would be left without crossings")
            )
    if not out:
        bounds: dict[int, dict[int, int]] = {}
        for seg in range(s.segment_count):
            if s.seg_loop[seg] == li:
                continue
            for side in (0, 1):
                d = 2 * seg + side
                g = regions.find(s.dart_region[d])
                comp = darts.find(d)
                bounds.setdefault(g, {})[comp] = d
        merged_roots = {regions.find(r) for seg in segs for r in s.segment_regions(seg)}
        for g in sorted(merged_roots):
            comps = bounds.get(g, {})
            if len(comps) < 3:
                out.append(
                    Violation("P2", "region", (g,), f"merged region would have {len(comps)} boundary segments")
                )
            seen: dict = {}
            for d in comps.values():
                lab = s.dart_label(d)
                if lab in seen:
                    out.append(
                        Violation(
                            "P3", "region", (g, seen[lab] >> 1, d >> 1), f"merged region repeats label {lab}"
                        )
                    )
                seen[lab] = d
    if not out:
        graph = s.level_graph(loop.axis)
        _, zone_of = s.zones(loop.axis)
        lo, hi = s.segment_regions(segs[0])
        zl, zh = zone_of[lo], zone_of[hi]
        own = graph.loops.index(loop_id)
        succ: dict[int, list[int]] = {}
        for k, (u, v) in enumerate(graph.edges):
            if k != own:
                succ.setdefault(u, []).append(v)
        seen_z = {zl}
        stack = [zl]
        while stack:
            u = stack.pop()
            for v in succ.get(u, []):
                if v == zh:
                    out.append(
                        Violation(
                            "P5",
                            "zone-cycle",
                            (loop.axis, zl, zh),
                            f"contracting zones {zl}-{zh} closes a cycle in the {loop.axis}-graph",
                        )
                    )
                    stack = []
                    break
                if v not in seen_z:
                    seen_z.add(v)
                    stack.append(v)
    return Removability(loop_id, not out, out)


def drop_loop(structure: LoopStructure, loop_id: int, strict: bool = False) -> LoopStructure:
    """Structure without the given loop; no validity checks."""
    s = structure
    if not s.has_loop(loop_id):
        raise UnknownLoop(f"no loop {loop_id}")
    gone = {c for c, _ in s.loop(loop_id).crossings}
    loops = [
        Loop(l.id, l.axis, tuple(x for x in l.crossings if x[0] not in gone), l.oriented)
        for l in s.loops
        if l.id != loop_id
    ]
    return LoopStructure(s.genus, loops, strict=strict)


def remove_loop(structure: LoopStructure, loop_id: int) -> LoopStructure:
    """Remove a loop, refusing if the result would not be a polycube loop structure."""
    verdict = removable(structure, loop_id)
    if not verdict:
        raise NotRemovable(f"loop {loop_id} cannot be removed", witness=verdict.violations)
    return drop_loop(structure, loop_id, strict=True)


def all_candidates(structure: LoopStructure, max_len: int | None = None) -> list[CandidateLoop]:
    out = []
    for axis in AXES:
        out += enumerate_valid_loops(structure, axis, max_len)
    return out
