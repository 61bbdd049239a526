"""Acceptance criteria, one test each, at their stated tolerances and time limits.

Every test prints a single ``CRITERION n: PASS|FAIL`` line with its runtime,
whatever the outcome, so a plain ``pytest -v`` run shows the verdicts.
"""

from __future__ import annotations

import random
import time
from contextlib import contextmanager

import pytest

from dualloops.core import AXES, Axis, loads_structure
from dualloops.edit import add_loop, enumerate_valid_loops
from dualloops.oracle import mask_to_solid, run_roundtrip, solid_to_structure, symmetry_classes
from dualloops.orient import axis_colorings, orient_structure, strip_orientations
from dualloops.primalize import (
    CornerCategory,
    assign_coordinates,
    enumerate_corner_configurations,
    order_equivalent,
    random_order_layers,
)
from dualloops.surface import cube_mesh, embed_structure, icosphere, optimize, primalize_on_surface, score
from dualloops.surface.segment import segmentation_text
from dualloops.validate import check_polycube
from helpers import WalkLog, brute_force_candidates, removal_walk, structure_of


@contextmanager
def criterion(capsys, number: int, title: str, limit: float):
    """Time the block, print one verdict line and fail on errors or overtime."""
    start = time.perf_counter()
    detail = {"text": ""}
    error = None
    try:
        yield detail
    except BaseException as exc:  # noqa: BLE001 - reported, then re-raised
        error = exc
    elapsed = time.perf_counter() - start
    ok = error is None and elapsed < limit
    why = ""
    if error is not None:
        why = f" -- {type(error).__name__}: {str(error).splitlines()[0] if str(error) else ''}"
    elif elapsed >= limit:
        why = f" -- over the {limit:g} s limit"
    with capsys.disabled():
        extra = f" ({detail['text']})" if detail["text"] else ""
        print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} {title}{extra} [{elapsed:.2f} s / {limit:g} s]{why}")
    if error is not None:
        raise error
    assert elapsed < limit, f"criterion {number} took {elapsed:.1f} s, limit {limit} s"


def test_criterion_1_corner_configurations(capsys):
    with criterion(capsys, 1, "corner configurations", 1.0) as d:
        configs = enumerate_corner_configurations()
        counts = [len(configs[c]) for c in CornerCategory]
        d["text"] = f"{sum(counts)} total, per category {counts}"
        assert sum(counts) == 126
        assert counts == [16, 24, 6, 48, 8, 24]


def test_criterion_2_exhaustive_roundtrip(capsys):
    with criterion(capsys, 2, "exhaustive voxel round trip, bound 3", 300.0) as d:
        summary = run_roundtrip(3)
        d["text"] = f"{summary.checked} symmetry classes, {len(summary.failures)} failures"
        assert summary.checked == 62_778
        assert summary.ok, summary.failures[:3]


def test_criterion_3_frame(capsys, fixture_structure):
    with criterion(capsys, 3, "frame fixture and inner-loop flip", 1.0) as d:
        s = fixture_structure("frame")
        assert len(s.loops) == 10
        assert [len(s.loops_of_axis(a)) for a in AXES] == [4, 4, 2]
        z = s.level_graph(Axis.Z)
        assert len(z.vertices) == 2 and len(z.edges) == 2 and len(set(z.edges)) == 1
        for axis in (Axis.X, Axis.Y):
            g = s.level_graph(axis)
            assert len(g.vertices) == 4 and len(g.edges) == 4
        report = check_polycube(fixture_structure("frame-flipped-inner-z"))
        assert len(report.violations) == 1
        (v,) = report.violations
        axis, cycle = v.witness
        assert v.condition == "P5" and axis == Axis.Z and len(cycle) == 2
        d["text"] = f"flip gives {v.condition} {axis}-cycle {list(cycle)}"


def test_criterion_4_addition_soundness(capsys):
    with criterion(capsys, 4, "addition soundness", 60.0) as d:
        total = 0
        for name in ("cube", "box-1x1x2", "l-shape", "frame"):
            s = structure_of(name)
            for axis in AXES:
                for cand in enumerate_valid_loops(s, axis, 12):
                    t = add_loop(s, cand)
                    assert check_polycube(t).valid, (name, cand)
                    assert all(t.level_graph(a).find_cycle() is None for a in AXES), (name, cand)
                    total += 1
        d["text"] = f"{total} additions, 0 failures"


def test_criterion_5_addition_completeness(capsys):
    with criterion(capsys, 5, "addition completeness on the cube", 60.0) as d:
        s = structure_of("cube")
        sizes = []
        for axis in AXES:
            got = {c.steps for c in enumerate_valid_loops(s, axis, 12)}
            assert got == brute_force_candidates(s, axis, 12)
            sizes.append(len(got))
        d["text"] = f"candidates per axis {sizes}"
        assert sizes == [2, 2, 2]


def test_criterion_6_removal_oracle(capsys):
    with criterion(capsys, 6, "removal agrees with blind removal", 300.0) as d:
        logs = {}
        for name, seed in (("cube", 0), ("frame", 1)):
            log = WalkLog()
            removal_walk(structure_of(name), 10_000, random.Random(seed), log)
            logs[name] = log
        d["text"] = ", ".join(
            f"{n}: {l.steps} steps, {l.queries} queries, {len(l.disagreements)} disagreements" for n, l in logs.items()
        )
        for log in logs.values():
            assert log.steps == 10_000
            assert log.disagreements == [] and log.invalid_results == []


def test_criterion_7_orientation_recovery(capsys):
    with criterion(capsys, 7, "orientation recovery on the bound-3 corpus", 300.0) as d:
        failures, rejected, genus0 = [], [], 0
        classes = symmetry_classes(3)
        for mask in classes.tolist():
            s = solid_to_structure(mask_to_solid(mask, 3))
            bare = strip_orientations(s)
            result = orient_structure(bare)
            if not result or not check_polycube(result.structure).valid:
                failures.append(mask)
            if s.genus == 0:
                genus0 += 1
                for axis in AXES:
                    col = axis_colorings(bare, axis)
                    if not all(col.acyclic(bits) for bits in col.all_bits()):
                        rejected.append((mask, axis))
        d["text"] = f"{len(classes)} structures ({genus0} genus 0), {len(failures)} failures, {len(rejected)} rejected colorings"
        assert failures == [] and rejected == []


def test_criterion_8_uniqueness(capsys):
    with criterion(capsys, 8, "layerings give order-equivalent polycubes", 60.0) as d:
        rng = random.Random(8)
        classes = symmetry_classes(3).tolist()
        picked = rng.sample(classes, 100)
        distinct = 0
        for mask in picked:
            s = solid_to_structure(mask_to_solid(mask, 3))
            a = assign_coordinates(s)
            b = assign_coordinates(s, layering=lambda g: random_order_layers(g, rng))
            distinct += a.positions != b.positions
            assert order_equivalent(a, b).equivalent, mask
        d["text"] = f"100 structures, {distinct} with different coordinates, 0 failures"


def _segment_run(seed: int):
    e = embed_structure(structure_of("cube"), icosphere(3))
    history = []
    best = optimize(e, 50, seed=seed, history=history)
    return e, best, history


def test_criterion_9_segmentation(capsys):
    with criterion(capsys, 9, "segmentation pipeline", 120.0) as d:
        cube = embed_structure(structure_of("cube"), cube_mesh(4))
        cube_score = score(cube)
        assert cube_score == pytest.approx(1.0, abs=1e-9)
        e, best, history = _segment_run(seed=9)
        scores = [score(e)] + [h.parent_score for h in history]
        assert len(history) == 50
        assert all(b >= a for a, b in zip(scores, scores[1:]))
        assert all(check_polycube(loads_structure(h.structure)).valid for h in history)
        _, best2, history2 = _segment_run(seed=9)
        assert [(h.parent_score, h.best_offspring, h.accepted, h.mutation, h.structure) for h in history] == [
            (h.parent_score, h.best_offspring, h.accepted, h.mutation, h.structure) for h in history2
        ]
        assert best.structure.dumps() == best2.structure.dumps()
        assert segmentation_text(primalize_on_surface(best)) == segmentation_text(primalize_on_surface(best2))
        d["text"] = f"cube {cube_score:.12f}; sphere {scores[0]:.4f} -> {scores[-1]:.4f}, reruns identical"
