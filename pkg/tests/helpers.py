"""Independent oracles and shared solids for the test suite.

The oracles here deliberately avoid the shortcuts of the code under test:
candidate loops are found by applying every region-distinct cycle and fully
validating the result, and removability is decided by deleting the loop
and validating from scratch.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from dualloops.core import Axis, LoopStructure
from dualloops.edit import add_loop, apply_steps, drop_loop, edge_graph_cycles, enumerate_valid_loops, removable, remove_loop
from dualloops.errors import LoopStructureError
from dualloops.oracle import VoxelSolid, solid_to_structure
from dualloops.validate import check_polycube

FRAME_CELLS = [(x, y, 0) for x in range(3) for y in range(3) if (x, y) != (1, 1)]
L_CELLS = [(0, 0, 0), (1, 0, 0), (0, 1, 0)]

SOLIDS = {
    "cube": VoxelSolid.box(1, 1, 1),
    "box-1x1x2": VoxelSolid.box(1, 1, 2),
    "l-shape": VoxelSolid.of(L_CELLS),
    "frame": VoxelSolid.of(FRAME_CELLS),
}


def structure_of(name: str) -> LoopStructure:
    return solid_to_structure(SOLIDS[name])


def brute_force_candidates(structure: LoopStructure, axis: Axis, max_len: int) -> set[tuple]:
    """Step sequences of every region-distinct edge-graph cycle whose addition validates."""
    found = set()
    for cycle in edge_graph_cycles(structure, max_len):
        try:
            result = apply_steps(structure, axis, cycle)
        except LoopStructureError:
            continue
        if check_polycube(result).valid:
            found.add(tuple(cycle))
    return found


def blindly_removable(structure: LoopStructure, loop_id: int) -> bool:
    """Whether deleting the loop and validating from scratch succeeds."""
    try:
        return check_polycube(drop_loop(structure, loop_id)).valid
    except LoopStructureError:
        return False


@dataclass
class WalkLog:
    steps: int = 0
    queries: int = 0
    additions: int = 0
    removals: int = 0
    disagreements: list = field(default_factory=list)
    invalid_results: list = field(default_factory=list)


def removal_walk(
    start: LoopStructure, operations: int, rng: random.Random, log: WalkLog, max_len: int = 8, max_loops: int = 14
) -> LoopStructure:
    """Perform ``operations`` random valid additions or removals, querying every loop before each.

    Removal is chosen with probability 0.4, or always once the structure
    holds ``max_loops`` loops, which keeps the walk at desk scale.
    """
    s = start
    done = 0
    while done < operations:
        for loop in s.loops:
            log.queries += 1
            if bool(removable(s, loop.id)) != blindly_removable(s, loop.id):
                log.disagreements.append((s.dumps(), loop.id))
        can_remove = [l.id for l in s.loops if removable(s, l.id)]
        if can_remove and (rng.random() < 0.4 or len(s.loops) >= max_loops):
            s = remove_loop(s, rng.choice(can_remove))
            log.removals += 1
        else:
            axes = list(Axis)
            rng.shuffle(axes)
            cands = []
            for axis in axes:
                cands = enumerate_valid_loops(s, axis, max_len)
                if cands:
                    break
            if cands:
                s = add_loop(s, rng.choice(cands))
                log.additions += 1
            elif can_remove:
                s = remove_loop(s, rng.choice(can_remove))
                log.removals += 1
            else:
                raise AssertionError("walk is stuck: nothing to add or remove")
        if not check_polycube(s).valid:
            log.invalid_results.append(s.dumps())
        done += 1
        log.steps += 1
    return s


# -- hypothesis strategies ---------------------------------------------------------------

from hypothesis import assume  # noqa: E402
from hypothesis import strategies as st  # noqa: E402

from dualloops.errors import Disconnected, NonManifold  # noqa: E402
from dualloops.oracle import voxel_to_polycube  # noqa: E402

GRID = [(x, y, z) for x in range(3) for y in range(2) for z in range(2)]


@st.composite
def voxel_solids(draw, grid=tuple(GRID)):
    """Connected solids with manifold boundary inside a 3 x 2 x 2 grid."""
    cells = draw(st.sets(st.sampled_from(grid), min_size=1))
    solid = VoxelSolid.of(cells)
    try:
        voxel_to_polycube(solid)
    except (NonManifold, Disconnected):
        assume(False)
    return solid
