from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualloops.core import AXES, Axis, Loop, build_structure
from dualloops.errors import InvalidStructure
from dualloops.oracle import VoxelSolid, solid_to_structure, voxel_to_polycube
from dualloops.orient import (
    AxisColorings,
    axis_colorings,
    build_side_conflict_graph,
    orient_structure,
    strip_orientations,
)
from dualloops.primalize import assign_coordinates, order_equivalent
from dualloops.validate import check_polycube
from helpers import SOLIDS, structure_of, voxel_solids


@pytest.mark.parametrize("name", ["cube", "box-1x1x2", "l-shape", "frame", "frame-flipped-inner-z"])
def test_fixtures_reorient(name, fixture_structure):
    s = fixture_structure(name)
    result = orient_structure(strip_orientations(s))
    assert result and result.stage == "ok"
    assert check_polycube(result.structure).valid
    # the arrangement is untouched; only directions may change
    assert [(l.id, l.axis) for l in result.structure.loops] == [(l.id, l.axis) for l in s.loops]


def test_orientation_only_changes_directions():
    s = structure_of("l-shape")
    result = orient_structure(strip_orientations(s))
    for a, b in zip(s.loops, result.structure.loops):
        assert {c for c, _ in a.crossings} == {c for c, _ in b.crossings}
        assert all(l.oriented for l in result.structure.loops)


def test_cube_side_conflict_graph():
    s = structure_of("cube")
    for axis in AXES:
        g = build_side_conflict_graph(s, axis)
        # one loop per axis: its two sides conflict, nothing else
        assert g.node_count == 2 and g.edges == [(0, 1)]


def test_same_axis_loops_are_not_bipartite():
    # relabel the cube's Y loop as a second X loop: every corner region then
    # sees a side of both X loops, which forms a triangle of side conflicts
    s = structure_of("cube")
    relabeled = s.replace_loops(
        [Loop(l.id, Axis.X if l.axis == Axis.Y else l.axis, l.crossings, False) for l in s.loops]
    )
    result = orient_structure(relabeled)
    assert not result and result.stage == "non-bipartite" and result.axis == Axis.X
    cycle = result.witness
    assert len(cycle) % 2 == 1
    g = build_side_conflict_graph(relabeled, Axis.X)
    edges = {frozenset(e) for e in g.edges}
    assert all(frozenset((cycle[i], cycle[(i + 1) % len(cycle)])) in edges for i in range(len(cycle)))


def test_short_regions_are_rejected():
    s = build_structure(0, [("X", [(0, True), (1, False)]), ("Y", [(0, False), (1, True)])])
    with pytest.raises(InvalidStructure):
        orient_structure(strip_orientations(s))


def test_frame_z_colorings():
    s = strip_orientations(structure_of("frame"))
    col = axis_colorings(s, Axis.Z)
    assert isinstance(col, AxisColorings)
    assert col.count == 4
    # the two Z loops around the hole must point the same way
    assert sum(col.acyclic(bits) for bits in col.all_bits()) == 2
    for axis in (Axis.X, Axis.Y):
        col = axis_colorings(s, axis)
        assert all(col.acyclic(bits) for bits in col.all_bits())


def test_first_acyclic_coloring_is_chosen():
    s = strip_orientations(structure_of("frame"))
    result = orient_structure(s)
    for axis in AXES:
        col = axis_colorings(s, axis)
        first = next(bits for bits in col.all_bits() if col.acyclic(bits))
        assert result.flips[axis] == first


@given(voxel_solids())
def test_genus_zero_colorings_are_all_acyclic(solid):
    s = solid_to_structure(solid)
    if s.genus:
        return
    for axis in AXES:
        col = axis_colorings(strip_orientations(s), axis)
        assert all(col.acyclic(bits) for bits in col.all_bits())


@given(voxel_solids(), st.integers(0, 10**6))
def test_scrambled_orientations_are_recovered(solid, seed):
    s = solid_to_structure(solid)
    rng = random.Random(seed)
    scrambled = s.reverse_loops([l.id for l in s.loops if rng.random() < 0.5])
    result = orient_structure(strip_orientations(scrambled))
    assert result
    assert check_polycube(result.structure).valid


@pytest.mark.parametrize("name", sorted(SOLIDS))
def test_reoriented_fixtures_realize_the_solid_up_to_reflection(name):
    # each axis may come out mirrored, so compare after reflecting the
    # reference along the axes whose orientation differs
    s = structure_of(name)
    oriented = orient_structure(strip_orientations(s)).structure
    q = assign_coordinates(oriented)
    mirrors = []
    for flips in range(8):
        cells = [tuple(-c[d] if flips >> d & 1 else c[d] for d in range(3)) for c in SOLIDS[name].cells]
        mirrors.append(voxel_to_polycube(VoxelSolid.of(cells)))
    assert any(order_equivalent(q, m).equivalent for m in mirrors)
