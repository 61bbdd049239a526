"""Random add/remove walk comparing local removability with blind re-validation.

Before every step each loop is queried twice: once with the local
removability test and once by deleting it and validating the result from
scratch.  Any disagreement is printed as a JSON structure plus loop id.

Usage::

    python scripts/removal_walk.py --start frame --steps 10000 --seed 1
"""

from __future__ import annotations

import argparse
import random
import time

from dualloops.core import Axis, LoopStructure
from dualloops.edit import add_loop, drop_loop, enumerate_valid_loops, removable, remove_loop
from dualloops.errors import LoopStructureError
from dualloops.oracle import VoxelSolid, solid_to_structure
from dualloops.validate import check_polycube

STARTS = {
    "cube": VoxelSolid.box(1, 1, 1),
    "l-shape": VoxelSolid.of([(0, 0, 0), (1, 0, 0), (0, 1, 0)]),
    "frame": VoxelSolid.of([(x, y, 0) for x in range(3) for y in range(3) if (x, y) != (1, 1)]),
}


def blindly_removable(s: LoopStructure, loop_id: int) -> bool:
    try:
        return check_polycube(drop_loop(s, loop_id)).valid
    except LoopStructureError:
        return False


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--start", choices=sorted(STARTS), default="cube")
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-len", type=int, default=8)
    parser.add_argument("--max-loops", type=int, default=14)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    s = solid_to_structure(STARTS[args.start])
    queries = disagreements = adds = removes = 0
    t0 = time.perf_counter()
    for _ in range(args.steps):
        for loop in s.loops:
            queries += 1
            if bool(removable(s, loop.id)) != blindly_removable(s, loop.id):
                disagreements += 1
                print(s.dumps(), loop.id)
        can_remove = [l.id for l in s.loops if removable(s, l.id)]
        if can_remove and (rng.random() < 0.4 or len(s.loops) >= args.max_loops):
            s = remove_loop(s, rng.choice(can_remove))
            removes += 1
            continue
        axes = list(Axis)
        rng.shuffle(axes)
        cands = next((c for c in (enumerate_valid_loops(s, a, args.max_len) for a in axes) if c), [])
        if cands:
            s = add_loop(s, rng.choice(cands))
            adds += 1
        elif can_remove:
            s = remove_loop(s, rng.choice(can_remove))
            removes += 1
        else:
            print("walk is stuck")
            return 1
    elapsed = time.perf_counter() - t0
    print(
        f"{args.steps} steps ({adds} additions, {removes} removals), {queries} queries, "
        f"{disagreements} disagreements, {elapsed:.1f} s"
    )
    return 0 if disagreements == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
