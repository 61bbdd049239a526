"""Quad and polycube conditions on loop structures.

Quad conditions
    Q1 intersections are transversal, Q2 no three loops meet in a point,
    Q3 every region is a disk, Q4 every region has at least two boundary
    segments.
Polycube conditions
    P1 no three loops meet in a point, P2 every region has at least three
    boundary segments, P3 no two boundary segments of a region carry the same
    axis and side label, P4 every region is a disk, P5 the X-, Y- and
    Z-level graphs are acyclic.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from dualloops.core import AXES, LoopStructure
from dualloops.errors import UnorientedLoop

CONDITIONS = ("Q1", "Q2", "Q3", "Q4", "P1", "P2", "P3", "P4", "P5")


@dataclass(frozen=True)
class Violation:
    """One failed condition.

    ``locus`` names what the witness refers to: ``"region"``,
    ``"intersection"``, ``"surface"`` or ``"zone-cycle"``.
    """

    condition: str
    locus: str
    witness: tuple
    message: str


@dataclass
class ValidationReport:
    kind: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def verdict(self) -> str:
        return "valid" if self.valid else "invalid"

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}

    def of(self, condition: str) -> list[Violation]:
        return [v for v in self.violations if v.condition == condition]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "violations": [
                {**asdict(v), "witness": _jsonable(v.witness)} for v in self.violations
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> str:
        if self.valid:
            return f"{self.kind}: valid"
        lines = [f"{self.kind}: invalid ({len(self.violations)} violations)"]
        lines += [
            f"  {v.condition} [{v.locus} {json.dumps(_jsonable(v.witness))}] {v.message}" for v in self.violations
        ]
        return "\n".join(lines)

    def __bool__(self):
        return self.valid


def _jsonable(x):
    if isinstance(x, (tuple, list)):
        return [_jsonable(y) for y in x]
    if hasattr(x, "name") and hasattr(x, "value"):
        return str(x)
    return x


def _no_triple_points(s: LoopStructure, cond: str) -> list[Violation]:
    out = []
    for c in sorted(s.crossing_records):
        recs = s.crossing_records[c]
        if len(recs) != 2:
            out.append(Violation(cond, "intersection", (c,), f"{len(recs)} loop passes meet at crossing {c}"))
    return out


def _transversal(s: LoopStructure) -> list[Violation]:
    out = []
    for c in sorted(s.crossing_records):
        (a, pa, _), _ = s.crossing_records[c]
        d = 2 * s.loop_segs[a][pa]
        owners = []
        for _ in range(4):
            owners.append(s.seg_loop[d >> 1])
            d = s._ccw_next(d)
        if owners[0] != owners[2] or owners[1] != owners[3] or owners[0] == owners[1]:
            out.append(Violation("Q1", "intersection", (c,), f"loops do not alternate around crossing {c}"))
    return out


def _disks(s: LoopStructure, cond: str) -> list[Violation]:
    expected = 2 - 2 * s.genus
    if s.euler_characteristic == expected:
        return []
    return [
        Violation(
            cond,
            "surface",
            (s.vertex_count, s.segment_count, len(s.regions), expected),
            f"V - E + F = {s.euler_characteristic}, a disk decomposition needs {expected}",
        )
    ]


def _min_boundary(s: LoopStructure, cond: str, k: int) -> list[Violation]:
    out = []
    for r in s.regions:
        if len(r.boundary) < k:
            out.append(
                Violation(cond, "region", (r.id,), f"region {r.id} has {len(r.boundary)} boundary segments, needs {k}")
            )
    return out


def check_quad(structure: LoopStructure) -> ValidationReport:
    """Report all violations of Q1-Q4."""
    s = structure
    v = _transversal(s) + _no_triple_points(s, "Q2") + _disks(s, "Q3") + _min_boundary(s, "Q4", 2)
    return ValidationReport("quad", v)


def check_polycube(structure: LoopStructure) -> ValidationReport:
    """Report all violations of P1-P5.

    Raises
    ------
    UnorientedLoop
        If some loop carries no orientation.
    """
    s = structure
    for loop in s.loops:
        if not loop.oriented:
            raise UnorientedLoop(f"loop {loop.id} has no orientation")
    v = _no_triple_points(s, "P1") + _min_boundary(s, "P2", 3)
    p3 = []
    for r in s.regions:
        seen: dict[tuple, int] = {}
        for d in r.boundary:
            lab = s.dart_label(d)
            if lab in seen:
                axis, side = lab
                sign = "+" if side > 0 else "-"
                p3.append(
                    Violation(
                        "P3",
                        "region",
                        (r.id, seen[lab], d >> 1),
                        f"region {r.id} sees segments {seen[lab]} and {d >> 1} both as {sign}{axis}",
                    )
                )
            else:
                seen[lab] = d >> 1
    v += p3
    v += _disks(s, "P4")
    for axis in AXES:
        cyc = s.level_graph(axis).find_cycle()
        if cyc is not None:
            v.append(Violation("P5", "zone-cycle", (axis, tuple(cyc)), f"{axis}-graph has cycle {cyc}"))
    if s.same_axis_crossings() and not p3 and not any(x.condition in ("P2", "P4") for x in v):
        raise AssertionError("same-axis crossing without a P3 violation; the structure is inconsistent")
    return ValidationReport("polycube", v)
