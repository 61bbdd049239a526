"""Polycube loop structures: validation, editing, orientation and primalization."""

from dualloops.core import (
    AXES,
    Axis,
    LevelGraph,
    Loop,
    LoopStructure,
    Region,
    Zone,
    build_level_graph,
    build_structure,
    check_genus_identity,
    compute_zones,
    load_structure,
    loads_structure,
    save_structure,
    trace_regions,
)

__all__ = [
    "AXES",
    "Axis",
    "LevelGraph",
    "Loop",
    "LoopStructure",
    "Region",
    "Zone",
    "build_level_graph",
    "build_structure",
    "check_genus_identity",
    "compute_zones",
    "load_structure",
    "loads_structure",
    "save_structure",
    "trace_regions",
]
