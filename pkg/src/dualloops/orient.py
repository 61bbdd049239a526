"""Choosing loop orientations for a labeled loop structure.

Each loop has two sides.  Two sides must get different signs if they belong
to the same loop or if they both face one region (otherwise the region would
see the same axis and side label twice).  These constraints form the
*side-conflict graph*; orientations exist only if it is bipartite, and every
bipartite component can be colored in exactly two ways.  A coloring is
accepted if the level graphs it induces are acyclic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from dualloops.core import AXES, Axis, Loop, LoopStructure, _find_cycle
from dualloops.errors import InvalidStructure
from dualloops.validate import check_polycube, check_quad


def side_node(loop_index: int, plus: bool) -> int:
    """Node of the right (``plus=True``) or left side of a loop as currently stored."""
    return 2 * loop_index + (1 if plus else 0)


@dataclass
class SideConflictGraph:
    """Conflicts among the sides of one axis' loops.

    Node ``2*i`` is the left side and ``2*i + 1`` the right side of the
    ``i``-th loop of the axis (in structure order).  ``own_edges`` join the
    two sides of a loop, ``region_edges`` join sides facing a common region.
    """

    axis: Axis
    loop_ids: list[int]
    own_edges: list[tuple[int, int]]
    region_edges: list[tuple[int, int]]

    @property
    def node_count(self) -> int:
        return 2 * len(self.loop_ids)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return self.own_edges + self.region_edges

    def two_coloring(self) -> tuple[list[int] | None, list[list[int]], list[int] | None]:
        """(colors, components, odd cycle).

        ``colors`` is ``None`` if the graph is not bipartite; the odd cycle
        is then returned as a list of nodes.  Components are lists of loop
        positions.
        """
        n = self.node_count
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        color = [-1] * n
        parent = [-1] * n
        depth = [0] * n
        comps = []
        for s in range(n):
            if color[s] >= 0:
                continue
            color[s] = 0
            comp = [s]
            queue = [s]
            for u in queue:
                for v in adj[u]:
                    if color[v] < 0:
                        color[v] = 1 - color[u]
                        parent[v] = u
                        depth[v] = depth[u] + 1
                        comp.append(v)
                        queue.append(v)
                    elif color[v] == color[u]:
                        return None, [], _odd_cycle(u, v, parent, depth)
            comps.append(sorted({x >> 1 for x in comp}))
        return color, comps, None


def _odd_cycle(u: int, v: int, parent: list[int], depth: list[int]) -> list[int]:
    a, b = [u], [v]
    while a[-1] != b[-1]:
        if depth[a[-1]] >= depth[b[-1]] and parent[a[-1]] >= 0:
            a.append(parent[a[-1]])
        else:
            b.append(parent[b[-1]])
    return a + b[-2::-1] if len(b) > 1 else a


def _check_preconditions(structure: LoopStructure) -> None:
    quad = check_quad(structure)
    if not quad.valid:
        raise InvalidStructure("not a quad loop structure", quad)
    short = [r.id for r in structure.regions if len(r.boundary) < 3]
    if short:
        raise InvalidStructure(f"regions {short} have fewer than three boundary segments")


def build_side_conflict_graph(structure: LoopStructure, axis, check: bool = True) -> SideConflictGraph:
    axis = Axis(axis)
    if check:
        _check_preconditions(structure)
    idx = [li for li, l in enumerate(structure.loops) if l.axis == axis]
    pos = {li: k for k, li in enumerate(idx)}
    own = [(2 * k, 2 * k + 1) for k in range(len(idx))]
    region_edges: set[tuple[int, int]] = set()
    for r in structure.regions:
        sides = sorted(
            {side_node(pos[structure.seg_loop[d >> 1]], bool(d & 1)) for d in r.boundary if structure.seg_loop[d >> 1] in pos}
        )
        counts = [side_node(pos[structure.seg_loop[d >> 1]], bool(d & 1)) for d in r.boundary if structure.seg_loop[d >> 1] in pos]
        for a, b in itertools.combinations(sides, 2):
            if a >> 1 != b >> 1:
                region_edges.add((a, b))
        for node in sides:
            if counts.count(node) > 1:
                region_edges.add((node, node))  # one side facing a region twice is a conflict with itself
    return SideConflictGraph(axis, [structure.loops[li].id for li in idx], own, sorted(region_edges))


@dataclass
class OrientationResult:
    """Outcome of :func:`orient_structure`.

    ``stage`` is ``"ok"``, ``"non-bipartite"`` or ``"cyclic"``; ``axis`` and
    ``witness`` describe the failure (an odd cycle of side nodes, or the
    number of colorings that all produced cycles).
    """

    success: bool
    structure: LoopStructure | None = None
    stage: str = "ok"
    axis: Axis | None = None
    witness: list = field(default_factory=list)
    flips: dict[Axis, tuple[int, ...]] = field(default_factory=dict)
    tried: dict[Axis, int] = field(default_factory=dict)

    def __bool__(self):
        return self.success


def strip_orientations(structure: LoopStructure) -> LoopStructure:
    return structure.replace_loops([Loop(l.id, l.axis, l.crossings, False) for l in structure.loops])


@dataclass
class AxisColorings:
    """Everything needed to test the 2-colorings of one axis.

    ``base[k]`` is the level-graph edge of the ``k``-th loop of the axis
    under the base coloring; ``components`` group loop positions whose
    orientations flip together.
    """

    axis: Axis
    loop_indices: list[int]
    components: list[list[int]]
    base: list[tuple[int, int]]
    keeps: list[bool]
    zones: list[int]

    @property
    def count(self) -> int:
        return 2 ** len(self.components)

    def flips(self, bits) -> list[int]:
        flip = [0] * len(self.loop_indices)
        for b, comp in zip(bits, self.components):
            for k in comp:
                flip[k] = b
        return flip

    def acyclic(self, bits) -> bool:
        adj: dict[int, list[int]] = {z: [] for z in self.zones}
        for f, (u, v) in zip(self.flips(bits), self.base):
            if f:
                u, v = v, u
            adj[u].append(v)
        return _find_cycle(adj) is None

    def all_bits(self):
        return itertools.product((0, 1), repeat=len(self.components))


def axis_colorings(structure: LoopStructure, axis) -> AxisColorings | list[int]:
    """Colorings of one axis, or an odd cycle of side nodes if there are none."""
    s = structure
    axis = Axis(axis)
    graph = build_side_conflict_graph(s, axis, check=False)
    color, comps, odd = graph.two_coloring()
    if color is None:
        return odd
    idx = [li for li, l in enumerate(s.loops) if l.axis == axis]
    _, zone_of = s.zones(axis)
    base, keeps = [], []
    for k, li in enumerate(idx):
        minus, plus = s.segment_regions(s.loop_segs[li][0])
        edge = (zone_of[minus], zone_of[plus])
        # color 1 on the right side = keep the stored direction
        keep = color[2 * k + 1] == 1
        keeps.append(keep)
        base.append(edge if keep else edge[::-1])
    return AxisColorings(axis, idx, comps, base, keeps, sorted(set(zone_of)))


def orient_structure(structure: LoopStructure, check: bool = True) -> OrientationResult:
    """Find loop orientations making ``structure`` a polycube loop structure.

    Axes are independent: zones of an axis only depend on its loops, and
    orientations only direct their level-graph edges.  Per axis the
    component flip bits are tried in counting order, so the first
    acyclic assignment is the lexicographically smallest one.
    """
    if check:
        _check_preconditions(structure)
    s = structure
    chosen: dict[int, bool] = {}  # loop index -> reverse stored direction
    result = OrientationResult(True)
    for axis in AXES:
        col = axis_colorings(s, axis)
        if not isinstance(col, AxisColorings):
            return OrientationResult(False, None, "non-bipartite", axis, col)
        tried = 0
        found = None
        for bits in col.all_bits():
            tried += 1
            if col.acyclic(bits):
                found = bits
                break
        result.tried[axis] = tried
        if found is None:
            return OrientationResult(False, None, "cyclic", axis, [tried], tried=result.tried)
        result.flips[axis] = found
        for k, (li, f) in enumerate(zip(col.loop_indices, col.flips(found))):
            chosen[li] = col.keeps[k] == bool(f)
    marked = s.replace_loops([Loop(l.id, l.axis, l.crossings, True) for l in s.loops])
    oriented = marked.reverse_loops([l.id for li, l in enumerate(s.loops) if chosen[li]], strict=True)
    report = check_polycube(oriented)
    if not report.valid:
        # conditions independent of orientation failed; cannot happen after the precondition check
        return OrientationResult(False, None, "invalid", None, [v.condition for v in report.violations])
    result.structure = oriented
    return result
