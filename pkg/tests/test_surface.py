from __future__ import annotations

import numpy as np
import pytest

from dualloops.core import Axis, loads_structure
from dualloops.edit import enumerate_valid_loops, removable
from dualloops.errors import (
    Disconnected,
    EmbeddingFailed,
    GenusMismatch,
    InvalidStructure,
    IoError,
    NonManifold,
    NotClosed,
    ParseError,
    StaleCandidate,
)
from dualloops.oracle import VoxelSolid, voxel_to_polycube
from dualloops.primalize import LABEL_NAMES
from dualloops.surface import (
    SurfaceConfig,
    TriMesh,
    cube_mesh,
    cut_by_plane,
    embed_candidate,
    embed_structure,
    icosphere,
    load_trimesh,
    loops_obj_text,
    open_patch,
    optimize,
    parse_obj,
    primalize_on_surface,
    quad_trimesh,
    read_structure,
    remove_embedded_loop,
    save_trimesh,
    score,
    segmentation_text,
    torus_mesh,
)
from dualloops.surface.mesh import safe_level, subdivide
from dualloops.validate import check_polycube
from helpers import SOLIDS, structure_of

# -- meshes ------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "mesh, genus",
    [(cube_mesh(3), 0), (icosphere(2), 0), (torus_mesh(nu=16, nv=8), 1)],
)
def test_generators_are_closed_manifolds(mesh, genus):
    mesh.check()
    assert mesh.genus == genus
    # outward orientation: positive enclosed volume
    v, t = mesh.vertices, mesh.triangles
    volume = np.einsum("ij,ij->i", v[t[:, 0]], np.cross(v[t[:, 1]], v[t[:, 2]])).sum() / 6
    assert volume > 0


def test_open_patch_is_not_closed():
    with pytest.raises(NotClosed):
        open_patch().check()


def test_disconnected_mesh():
    a = cube_mesh(1)
    b = TriMesh(np.vstack([a.vertices, a.vertices + 5]), np.vstack([a.triangles, a.triangles + a.vertex_count]))
    with pytest.raises(Disconnected):
        b.check()


def test_inconsistent_orientation():
    a = cube_mesh(1)
    tris = a.triangles.copy()
    tris[0] = tris[0][::-1]
    with pytest.raises(NonManifold):
        TriMesh(a.vertices, tris).check()


def test_parse_obj_errors():
    with pytest.raises(ParseError):
        parse_obj("")
    with pytest.raises(ParseError):
        parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
    with pytest.raises(ParseError):
        parse_obj("v 0 0 x\nf 1 2 3\n")
    with pytest.raises(ParseError):
        parse_obj("v 0 0 0\nv 1 0 0\nf 1 2\n")


def test_parse_obj_polygons_and_negative_indices():
    m = parse_obj("# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf -4/1 -3/2 -2/3 -1/4\n")
    assert m.triangles.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_round_trip(tmp_path):
    m = icosphere(1)
    save_trimesh(m, tmp_path / "s.obj")
    again = load_trimesh(tmp_path / "s.obj")
    assert np.allclose(again.vertices, m.vertices) and (again.triangles == m.triangles).all()
    with pytest.raises(IoError):
        load_trimesh(tmp_path / "missing.obj")


def test_safe_level_moves_off_vertices():
    values = np.array([0.0, 1.0, 2.0])
    assert safe_level(values, 0.5) == 0.5
    assert safe_level(values, 1.0) == pytest.approx(1.5)
    assert safe_level(values, 2.0) == pytest.approx(2.5)


def test_cut_by_plane():
    m = cube_mesh(2)
    cut = cut_by_plane(m, 2, 0.25, "z0")
    cut.check()
    assert cut.genus == 0
    on = [i for i, t in enumerate(cut.tags) if "z0" in t]
    assert on and np.allclose(cut.vertices[on, 2], 0.25)
    # surface area is unchanged
    assert cut.face_areas.sum() == pytest.approx(m.face_areas.sum())
    with pytest.raises(ValueError):
        cut_by_plane(m, 2, 0.0, "bad")


def test_subdivide():
    m = icosphere(0)
    fine, mid = subdivide(m)
    fine.check()
    assert len(fine.triangles) == 4 * len(m.triangles)
    assert fine.vertex_count == m.vertex_count + len(m.edges) == m.vertex_count + len(mid)


def test_quad_trimesh():
    q = voxel_to_polycube(SOLIDS["l-shape"])
    m = quad_trimesh(q.positions, q.faces, 3)
    m.check()
    assert m.genus == 0
    assert m.face_areas.sum() == pytest.approx(14.0)
    assert len(m.triangles) == 2 * 9 * len(q.faces)


# -- embedding -----------------------------------------------------------------------------


def test_cube_on_cube_scores_one():
    e = embed_structure(structure_of("cube"), cube_mesh(4))
    assert score(e) == pytest.approx(1.0, abs=1e-9)
    seg = primalize_on_surface(e)
    assert seg.patch_count == 6
    assert sorted(seg.label_name(p) for p in range(6)) == sorted(LABEL_NAMES)


def test_embedding_reads_back_the_structure():
    s = structure_of("l-shape")
    q = voxel_to_polycube(SOLIDS["l-shape"])
    e = embed_structure(s, quad_trimesh(q.positions, q.faces, 4))
    assert e.structure.canonical_key() == s.canonical_key()
    drawn, _, _ = read_structure(e.mesh, [(l.axis, e.paths[l.id]) for l in e.structure.loops], s.genus)
    assert drawn.canonical_key() == s.canonical_key()
    assert e.roomy()
    assert score(e) > 0.9


def test_frame_on_torus():
    e = embed_structure(structure_of("frame"), torus_mesh(nu=48, nv=24))
    assert check_polycube(e.structure).valid
    assert 0.5 < score(e) <= 1.0


def test_genus_mismatch():
    with pytest.raises(GenusMismatch):
        embed_structure(structure_of("frame"), icosphere(2))


def test_invalid_structure_is_refused(fixture_structure):
    with pytest.raises(InvalidStructure):
        embed_structure(fixture_structure("frame-flipped-inner-z"), torus_mesh(nu=32, nv=16))


def test_embed_candidate_and_remove():
    e = embed_structure(structure_of("cube"), cube_mesh(8))
    for axis in (Axis.X, Axis.Z):
        cand = enumerate_valid_loops(e.structure, axis)[0]
        bigger = embed_candidate(e, cand)
        assert check_polycube(bigger.structure).valid
        assert len(bigger.structure.loops) == 4 and bigger.roomy()
        assert 0.0 < score(bigger) <= 1.0
        new = bigger.structure.loops[-1].id
        assert removable(bigger.structure, new)
        back = remove_embedded_loop(bigger, new)
        assert back.structure.canonical_key() == e.structure.canonical_key()
        assert score(back) == pytest.approx(score(e))
    # the input drawing is untouched
    assert len(e.structure.loops) == 3


def test_stale_candidate_on_surface():
    e = embed_structure(structure_of("cube"), cube_mesh(8))
    other = structure_of("box-1x1x2")
    with pytest.raises(StaleCandidate):
        embed_candidate(e, enumerate_valid_loops(other, Axis.X)[0])


def test_coarse_mesh_has_no_room_for_a_candidate():
    e = embed_structure(structure_of("cube"), cube_mesh(4))
    with pytest.raises(EmbeddingFailed):
        embed_candidate(e, enumerate_valid_loops(e.structure, Axis.X)[0])


# -- segmentation and score ----------------------------------------------------------------


def test_segmentation_covers_every_triangle():
    e = embed_structure(structure_of("cube"), icosphere(3))
    seg = primalize_on_surface(e)
    assert seg.patch_of_triangle.shape == (len(e.mesh.triangles),)
    assert set(seg.patch_of_triangle.tolist()) == set(range(6))
    text = segmentation_text(seg)
    assert text.count("\n") == len(e.mesh.triangles) + 1
    assert loops_obj_text(e).count("\nl ") + loops_obj_text(e).startswith("l ") == 3


def test_score_ignores_vertex_order():
    mesh = icosphere(3)
    rng = np.random.default_rng(0)
    perm = rng.permutation(mesh.vertex_count)
    inverse = np.argsort(perm)
    shuffled = TriMesh(mesh.vertices[perm], inverse[mesh.triangles][rng.permutation(len(mesh.triangles))])
    s = structure_of("cube")
    assert score(embed_structure(s, shuffled)) == pytest.approx(score(embed_structure(s, mesh)), abs=1e-9)


def test_config_from_dict():
    cfg = SurfaceConfig.from_dict({"beta": 2.0, "lam": 2})
    assert cfg.beta == 2.0 and cfg.lam == 2 and cfg.max_len == 12
    with pytest.raises(ValueError):
        SurfaceConfig.from_dict({"gamma": 1})


# -- optimization --------------------------------------------------------------------------


def _l_mesh():
    q = voxel_to_polycube(VoxelSolid.of([(0, 0, 0), (1, 0, 0), (0, 1, 0)]))
    return quad_trimesh(q.positions, q.faces, 4)


def test_optimization_is_monotone_and_valid():
    e = embed_structure(structure_of("cube"), _l_mesh())
    history = []
    best = optimize(e, 12, seed=3, history=history)
    scores = [score(e)] + [h.parent_score for h in history]
    assert all(b >= a for a, b in zip(scores, scores[1:]))
    assert score(best) == pytest.approx(scores[-1])
    for h in history:
        assert check_polycube(loads_structure(h.structure)).valid


def test_optimization_improves_a_poor_start():
    e = embed_structure(structure_of("cube"), _l_mesh())
    start = score(e)
    best = optimize(e, 50, seed=3)
    assert score(best) > start + 0.01


def test_equal_seeds_give_equal_runs():
    s = structure_of("cube")
    runs = []
    for _ in range(2):
        history = []
        best = optimize(embed_structure(s, _l_mesh()), 5, seed=11, history=history)
        runs.append((best.structure.dumps(), [(h.parent_score, h.accepted, h.structure) for h in history]))
    assert runs[0] == runs[1]


def test_zero_iterations_return_the_input():
    e = embed_structure(structure_of("cube"), icosphere(2))
    assert optimize(e, 0, seed=1) is e


def test_failed_embedding_leaves_the_input_intact():
    e = embed_structure(structure_of("cube"), cube_mesh(4))
    before = (e.structure.dumps(), dict(e.paths), dict(e.crossing_vertex))
    with pytest.raises(EmbeddingFailed):
        embed_candidate(e, enumerate_valid_loops(e.structure, Axis.Y)[0])
    assert (e.structure.dumps(), dict(e.paths), dict(e.crossing_vertex)) == before


def test_sphere_scores_strictly_between_zero_and_one():
    mesh = icosphere(2)
    assert len(mesh.triangles) == 320 and mesh.genus == 0
    assert 0.0 < score(embed_structure(structure_of("cube"), mesh)) < 1.0


def test_frame_on_torus_has_one_patch_per_polycube_face():
    e = embed_structure(structure_of("frame"), torus_mesh(nu=48, nv=24))
    assert primalize_on_surface(e).patch_count == 32
