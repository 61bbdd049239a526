"""Loop structures on triangle meshes: embedding, segmentation and optimization."""

from dualloops.surface.embed import (
    EmbeddedStructure,
    SurfaceConfig,
    embed_candidate,
    embed_structure,
    read_structure,
    remove_embedded_loop,
)
from dualloops.surface.mesh import (
    TriMesh,
    cube_mesh,
    cut_by_plane,
    icosphere,
    load_trimesh,
    open_patch,
    parse_obj,
    quad_trimesh,
    save_trimesh,
    torus_mesh,
)
from dualloops.surface.optimize import Step, mutate, optimize
from dualloops.surface.segment import (
    Segmentation,
    loops_obj_text,
    primalize_on_surface,
    score,
    segmentation_text,
)

__all__ = [
    "EmbeddedStructure",
    "Segmentation",
    "Step",
    "SurfaceConfig",
    "TriMesh",
    "cube_mesh",
    "cut_by_plane",
    "embed_candidate",
    "embed_structure",
    "icosphere",
    "load_trimesh",
    "loops_obj_text",
    "mutate",
    "open_patch",
    "optimize",
    "parse_obj",
    "primalize_on_surface",
    "quad_trimesh",
    "read_structure",
    "remove_embedded_loop",
    "save_trimesh",
    "score",
    "segmentation_text",
    "torus_mesh",
]
