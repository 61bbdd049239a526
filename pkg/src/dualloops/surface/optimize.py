"""Elitist (1 + lambda) search over loop additions and removals."""

from __future__ import annotations

import random
from dataclasses import dataclass

from dualloops.core import AXES
from dualloops.edit import enumerate_valid_loops, removable
from dualloops.errors import EmbeddingFailed, PrimalizationFailed
from dualloops.surface.embed import EmbeddedStructure, SurfaceConfig, embed_candidate, remove_embedded_loop
from dualloops.surface.segment import score
from dualloops.validate import check_polycube


@dataclass
class Step:
    """One generation: the best offspring score and whether it replaced the parent."""

    iteration: int
    parent_score: float
    best_offspring: float | None
    accepted: bool
    mutation: str
    structure: str


def mutate(embedded: EmbeddedStructure, rng: random.Random, cfg: SurfaceConfig) -> tuple[EmbeddedStructure, str]:
    """Add a random valid loop or remove a random removable loop.

    Raises
    ------
    EmbeddingFailed
        If no mutation is possible or the chosen loop cannot be drawn.
    """
    s = embedded.structure
    can_remove = [l.id for l in s.loops if removable(s, l.id)]
    candidates = []
    for axis in AXES:
        candidates += enumerate_valid_loops(s, axis, cfg.max_len, check=False)
    if candidates and (not can_remove or rng.random() < 0.5):
        cand = candidates[rng.randrange(len(candidates))]
        return embed_candidate(embedded, cand, cfg), f"add {cand.axis} loop across {len(cand)} segments"
    if can_remove:
        lid = can_remove[rng.randrange(len(can_remove))]
        return remove_embedded_loop(embedded, lid), f"remove loop {lid}"
    raise EmbeddingFailed("no mutation available")


def optimize(
    embedded: EmbeddedStructure,
    iterations: int,
    seed: int,
    lam: int | None = None,
    config: SurfaceConfig | None = None,
    history: list[Step] | None = None,
) -> EmbeddedStructure:
    """Improve the alignment score by mutation and selection.

    Each generation creates ``lam`` offspring, each from its own random
    stream derived from ``(seed, generation, index)``, and keeps the best
    one if it scores strictly higher than the parent.  Offspring that
    cannot be drawn or segmented are discarded.
    """
    cfg = config or SurfaceConfig()
    lam = cfg.lam if lam is None else lam
    parent = embedded
    parent_score = score(parent, cfg)
    for it in range(iterations):
        best, best_score, best_desc = None, None, ""
        for j in range(lam):
            rng = random.Random(f"{seed}:{it}:{j}")
            try:
                child, desc = mutate(parent, rng, cfg)
                if not check_polycube(child.structure).valid:
                    raise AssertionError("mutation produced an invalid structure")
                value = score(child, cfg)
            except (EmbeddingFailed, PrimalizationFailed):
                continue
            if best_score is None or value > best_score:
                best, best_score, best_desc = child, value, desc
        accepted = best is not None and best_score > parent_score
        if accepted:
            parent, parent_score = best, best_score
        if history is not None:
            history.append(Step(it, parent_score, best_score, accepted, best_desc, parent.structure.dumps()))
    return parent
