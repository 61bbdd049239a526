"""Exhaustive dual round trip over small voxel solids, with timings.

For every connected solid with a manifold, connected boundary inside a
``bound``-cube, the dual loop structure of the boundary is extracted, checked
as a polycube loop structure, checked against the per-axis genus identity and
turned back into a polycube that must be order-equivalent to the boundary.

Usage::

    python scripts/run_roundtrip.py --bound 3            # one solid per symmetry class
    python scripts/run_roundtrip.py --bound 2 --all      # every solid up to translation
"""

from __future__ import annotations

import argparse
import json
import time

from dualloops.oracle import MAX_ENUMERATION_BOUND, enumerate_small_masks, run_roundtrip, symmetry_classes


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bound", type=int, default=3, choices=range(1, MAX_ENUMERATION_BOUND + 1))
    parser.add_argument("--all", action="store_true", help="every translation class, not one per symmetry class")
    parser.add_argument("--limit", type=int, help="check only the first N solids")
    args = parser.parse_args()

    t0 = time.perf_counter()
    solids = len(enumerate_small_masks(args.bound))
    classes = len(symmetry_classes(args.bound))
    t1 = time.perf_counter()
    print(f"bound {args.bound}: {solids} solids up to translation, {classes} symmetry classes ({t1 - t0:.1f} s)")

    summary = run_roundtrip(args.bound, up_to_symmetry=not args.all, limit=args.limit)
    t2 = time.perf_counter()
    print(f"checked {summary.checked}, failures {len(summary.failures)} ({t2 - t1:.1f} s)")
    for cells, reason in summary.failures[:10]:
        print(json.dumps({"cells": [list(c) for c in cells], "reason": reason}))
    return 0 if summary.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
