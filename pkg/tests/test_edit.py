from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualloops.core import AXES, Axis
from dualloops.edit import (
    CandidateLoop,
    add_loop,
    all_candidates,
    build_validity_graph,
    default_max_len,
    enumerate_valid_loops,
    fingerprint,
    removable,
    remove_loop,
)
from dualloops.errors import InvalidStructure, NotRemovable, StaleCandidate, UnknownLoop
from dualloops.oracle import VoxelSolid, solid_to_structure, voxel_to_polycube
from dualloops.primalize import assign_coordinates, order_equivalent
from dualloops.validate import check_polycube
from helpers import WalkLog, blindly_removable, brute_force_candidates, removal_walk, structure_of, voxel_solids

# -- enumeration -------------------------------------------------------------------------


def test_cube_has_two_candidates_per_axis():
    s = structure_of("cube")
    for axis in AXES:
        cands = enumerate_valid_loops(s, axis)
        assert len(cands) == 2
        assert all(len(c) == 4 for c in cands)


def test_adding_to_the_cube_gives_a_box():
    s = structure_of("cube")
    box = voxel_to_polycube(VoxelSolid.box(1, 1, 2))
    for cand in all_candidates(s):
        t = add_loop(s, cand)
        assert check_polycube(t).valid
        q = assign_coordinates(t)
        # the split direction only renames axes, so compare against a box
        # stretched along the candidate's axis
        stretched = voxel_to_polycube(VoxelSolid.box(*[2 if a == cand.axis else 1 for a in AXES]))
        assert order_equivalent(q, stretched).equivalent
        if cand.axis == Axis.Z:
            assert order_equivalent(q, box).equivalent


@pytest.mark.parametrize(
    "name, counts",
    [("cube", (2, 2, 2)), ("box-1x1x2", (6, 6, 3)), ("l-shape", (6, 6, 12))],
)
def test_enumeration_is_complete(name, counts):
    # independent oracle: apply every region-distinct edge-graph cycle and
    # validate the result from scratch
    s = structure_of(name)
    for axis, expected in zip(AXES, counts):
        got = {c.steps for c in enumerate_valid_loops(s, axis, 12)}
        assert got == brute_force_candidates(s, axis, 12)
        assert len(got) == expected


@given(voxel_solids(), st.sampled_from(AXES))
@settings(max_examples=25)
def test_enumeration_matches_brute_force(solid, axis):
    s = solid_to_structure(solid)
    if s.genus > 0:
        return  # the separation filter is not part of the brute-force oracle
    got = {c.steps for c in enumerate_valid_loops(s, axis, 8)}
    assert got == brute_force_candidates(s, axis, 8)


def test_frame_candidates_all_validate():
    s = structure_of("frame")
    cands = all_candidates(s, 10)
    assert cands
    for c in cands:
        assert check_polycube(add_loop(s, c)).valid


def test_candidates_respect_max_len():
    s = structure_of("l-shape")
    assert all(len(c) <= 4 for c in enumerate_valid_loops(s, Axis.Z, 4))
    assert default_max_len(s) == 2 * len(s.loops) + 8


def test_validity_graph_refuses_invalid_input(fixture_structure):
    with pytest.raises(InvalidStructure):
        build_validity_graph(fixture_structure("frame-flipped-inner-z"), Axis.X)


def test_candidate_serialization():
    s = structure_of("box-1x1x2")
    for c in all_candidates(s):
        again = CandidateLoop.from_dict(json.loads(c.dumps()))
        assert again == c
        assert again.structure_fingerprint == fingerprint(s)


# -- stale candidates --------------------------------------------------------------------


def test_stale_fingerprint():
    cube, box = structure_of("cube"), structure_of("box-1x1x2")
    cand = enumerate_valid_loops(cube, Axis.X)[0]
    with pytest.raises(StaleCandidate):
        add_loop(box, cand)


def test_stale_steps():
    s = structure_of("cube")
    cand = enumerate_valid_loops(s, Axis.X)[0]
    bare = CandidateLoop(cand.axis, cand.steps)
    assert check_polycube(add_loop(s, bare)).valid
    with pytest.raises(StaleCandidate):
        add_loop(s, CandidateLoop(cand.axis, ((999, 0),) + cand.steps[1:]))
    with pytest.raises(StaleCandidate):
        # an X loop may not walk the route of a valid Y loop
        y = enumerate_valid_loops(s, Axis.Y)[0]
        add_loop(s, CandidateLoop(Axis.X, y.steps))


# -- removal -----------------------------------------------------------------------------


def test_cube_has_no_removable_loop():
    s = structure_of("cube")
    for l in s.loops:
        verdict = removable(s, l.id)
        assert not verdict and verdict.violations
        with pytest.raises(NotRemovable) as err:
            remove_loop(s, l.id)
        assert err.value.witness


def test_box_removes_exactly_its_z_loops():
    s = structure_of("box-1x1x2")
    ok = {l.axis for l in s.loops if removable(s, l.id)}
    assert ok == {Axis.Z}
    for l in s.loops_of_axis(Axis.Z):
        t = remove_loop(s, l.id)
        assert t.canonical_key() == structure_of("cube").canonical_key()


def test_frame_has_no_removable_loop():
    s = structure_of("frame")
    assert not any(removable(s, l.id) for l in s.loops)


def test_unknown_loop():
    s = structure_of("cube")
    with pytest.raises(UnknownLoop):
        removable(s, 99)
    with pytest.raises(UnknownLoop):
        remove_loop(s, 99)


@given(voxel_solids())
def test_removability_matches_blind_deletion(solid):
    s = solid_to_structure(solid)
    for l in s.loops:
        assert bool(removable(s, l.id)) == blindly_removable(s, l.id)


def test_add_then_remove_restores():
    s = structure_of("l-shape")
    for c in all_candidates(s, 8):
        t = add_loop(s, c)
        new = t.loops[-1].id
        assert removable(t, new)
        assert remove_loop(t, new).canonical_key() == s.canonical_key()


@given(st.sampled_from(["cube", "l-shape", "frame"]), st.integers(0, 10**6))
@settings(max_examples=10)
def test_short_random_walk(name, seed):
    log = WalkLog()
    removal_walk(structure_of(name), 20, random.Random(seed), log)
    assert log.steps == 20
    assert log.disagreements == [] and log.invalid_results == []
