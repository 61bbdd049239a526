"""Regenerate the structure fixtures from voxel solids.

Every fixture except the flipped frame is the dual loop structure of a voxel
solid's boundary, so the files are correct by construction.  The flipped
frame reverses the Z-loop that runs around the frame's hole, which keeps the
structure well formed but puts a cycle into the Z level graph.

Usage: ``python scripts/make_fixtures.py [out_dir]`` (default ``fixtures``).
"""

from __future__ import annotations

import sys
from pathlib import Path

from dualloops.core import Axis, save_structure
from dualloops.oracle import VoxelSolid, solid_to_structure, voxel_to_polycube

FRAME_CELLS = [(x, y, 0) for x in range(3) for y in range(3) if (x, y) != (1, 1)]

SOLIDS = {
    "cube": VoxelSolid.box(1, 1, 1),
    "box-1x1x2": VoxelSolid.box(1, 1, 2),
    "l-shape": VoxelSolid.of([(0, 0, 0), (1, 0, 0), (0, 1, 0)]),
    "frame": VoxelSolid.of(FRAME_CELLS),
}


def flipped_inner_z_frame():
    """The frame with its hole's Z-loop reversed."""
    solid = SOLIDS["frame"]
    structure = solid_to_structure(solid)
    mesh = voxel_to_polycube(solid)

    def hole_distance(loop) -> float:
        # crossings are boundary quads; the hole's loop hugs the axis x = y = 1.5
        total = 0.0
        for c, _ in loop.crossings:
            xs = [mesh.positions[k] for k in mesh.faces[c]]
            cx = sum(p[0] for p in xs) / 4 - 1.5
            cy = sum(p[1] for p in xs) / 4 - 1.5
            total += (cx * cx + cy * cy) ** 0.5
        return total / len(loop.crossings)

    inner = min(structure.loops_of_axis(Axis.Z), key=hole_distance)
    return structure.reverse_loops([inner.id])


def main(argv: list[str]) -> int:
    out = Path(argv[0] if argv else "fixtures")
    out.mkdir(parents=True, exist_ok=True)
    for name, solid in SOLIDS.items():
        save_structure(solid_to_structure(solid), out / f"{name}.json")
    save_structure(flipped_inner_z_frame(), out / "frame-flipped-inner-z.json")
    print(f"wrote {len(SOLIDS) + 1} fixtures to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
