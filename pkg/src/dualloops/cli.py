"""Command-line front end.

Every subcommand reads its inputs from files, writes documents (structures,
candidates, reports, meshes) either to ``--out`` or to standard output, and
prints short human-readable remarks unless ``--quiet`` is given.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path
from typing import Sequence, TextIO

from dualloops.core import Axis, LoopStructure, load_structure
from dualloops.edit import CandidateLoop, add_loop, enumerate_valid_loops, remove_loop
from dualloops.errors import (
    EmbeddingFailed,
    LoopStructureError,
    MeshError,
    NotRemovable,
    PrimalizationFailed,
)
from dualloops.oracle import MAX_ENUMERATION_BOUND, run_roundtrip
from dualloops.orient import orient_structure
from dualloops.primalize import assign_coordinates, obj_text
from dualloops.validate import check_polycube, check_quad

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_FAILURE = 3


class UsageError(Exception):
    """Malformed command line or configuration."""


class InputError(Exception):
    """An input file is missing, unreadable or malformed."""


class RuntimeFailure(Exception):
    """A well-formed request that could not be carried out."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- i/o helpers -----------------------------------------------------------------------


class _Output:
    def __init__(self, quiet: bool, stdout: TextIO):
        self.quiet = quiet
        self.stdout = stdout

    def say(self, text: str) -> None:
        if not self.quiet:
            print(text, file=self.stdout)

    def document(self, text: str, path: str | None) -> None:
        """Write a document to ``path``, or to standard output if there is none."""
        if not text.endswith("\n"):
            text += "\n"
        if path is None:
            self.stdout.write(text)
        else:
            _write(path, text)
            self.say(f"wrote {path}")


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise RuntimeFailure(f"cannot write {path}: {exc}") from exc


def _read_structure(path: str, strict: bool = True) -> LoopStructure:
    try:
        return load_structure(path, strict=strict)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not JSON: {exc}") from exc


def _read_candidate(path: str, index: int) -> CandidateLoop:
    try:
        lines = [l for l in Path(path).read_text().splitlines() if l.strip()]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not 0 <= index < len(lines):
        raise InputError(f"{path} has {len(lines)} candidates, no index {index}")
    try:
        return CandidateLoop.from_dict(json.loads(lines[index]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed candidate in {path}: {exc}") from exc


def _surface_config(path: str | None, overrides: dict):
    """Optimizer settings: defaults, then the JSON config file, then command-line flags."""
    from dualloops.surface import SurfaceConfig

    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = SurfaceConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    types = {f.name: f.type for f in fields(SurfaceConfig)}
    for key, value in doc.items():
        want = float if types[key] in (float, "float") else int
        if not isinstance(value, (int, float)) or isinstance(value, bool) or (want is int and value != int(value)):
            raise UsageError(f"config value {key}={value!r} is not a number of the right kind")
    return cfg


# -- subcommands -----------------------------------------------------------------------


def cmd_validate(args, out: _Output) -> int:
    structure = _read_structure(args.structure, strict=False)
    if args.kind == "quad":
        report = check_quad(structure)
    else:
        try:
            report = check_polycube(structure)
        except LoopStructureError as exc:  # unoriented loops
            raise InputError(str(exc)) from exc
    out.say(report.summary())
    out.document(report.dumps(), args.out)
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_primalize(args, out: _Output) -> int:
    structure = _read_structure(args.structure)
    mesh = assign_coordinates(structure)
    out.say(f"polycube with {mesh.corner_count} corners and {len(mesh.faces)} faces")
    out.document(obj_text(mesh), args.out)
    return EXIT_OK


def cmd_enumerate(args, out: _Output) -> int:
    structure = _read_structure(args.structure)
    axes = [Axis.parse(args.axis)] if args.axis else list(Axis)
    cands = []
    for axis in axes:
        cands += enumerate_valid_loops(structure, axis, args.max_len)
    out.say(f"{len(cands)} candidates")
    if cands or args.out:
        out.document("".join(c.dumps() + "\n" for c in cands), args.out)
    return EXIT_OK


def cmd_add(args, out: _Output) -> int:
    structure = _read_structure(args.structure)
    cand = _read_candidate(args.candidate, args.index)
    result = add_loop(structure, cand)
    out.say(f"added {cand.axis} loop {result.loops[-1].id} across {len(cand)} segments")
    out.document(result.dumps(), args.out)
    return EXIT_OK


def cmd_remove(args, out: _Output) -> int:
    structure = _read_structure(args.structure)
    try:
        result = remove_loop(structure, args.loop)
    except NotRemovable as exc:
        reasons = "; ".join(v.message for v in exc.witness or [])
        raise RuntimeFailure(f"{exc}: {reasons}" if reasons else str(exc)) from exc
    out.say(f"removed loop {args.loop}")
    out.document(result.dumps(), args.out)
    return EXIT_OK


def cmd_orient(args, out: _Output) -> int:
    structure = _read_structure(args.structure)
    result = orient_structure(structure)
    if not result.success:
        raise RuntimeFailure(f"no orientation: stage {result.stage}, axis {result.axis}, witness {result.witness}")
    out.say("oriented")
    out.document(result.structure.dumps(), args.out)
    return EXIT_OK


def cmd_roundtrip(args, out: _Output) -> int:
    if not 1 <= args.bound <= MAX_ENUMERATION_BOUND:
        raise UsageError(f"--bound must be between 1 and {MAX_ENUMERATION_BOUND}")
    summary = run_roundtrip(args.bound, up_to_symmetry=not args.all_translations)
    kind = "solids" if args.all_translations else "symmetry classes"
    out.say(f"{summary.checked} {kind} checked, {len(summary.failures)} failures")
    doc = {
        "bound": summary.bound,
        "up_to_symmetry": summary.up_to_symmetry,
        "checked": summary.checked,
        "failures": [{"cells": [list(c) for c in cells], "reason": why} for cells, why in summary.failures],
    }
    out.document(json.dumps(doc, indent=1, sort_keys=True), args.out)
    return EXIT_OK if summary.ok else EXIT_FAILURE


def cmd_segment(args, out: _Output) -> int:
    from dualloops.surface import (
        embed_structure,
        load_trimesh,
        loops_obj_text,
        optimize,
        primalize_on_surface,
        score,
        segmentation_text,
    )

    cfg = _surface_config(args.config, {"lam": args.lam})
    structure = _read_structure(args.structure)
    try:
        mesh = load_trimesh(args.mesh)
    except OSError as exc:
        raise InputError(f"cannot read {args.mesh}: {exc}") from exc
    embedded = embed_structure(structure, mesh, cfg)
    start = score(embedded, cfg)
    best = optimize(embedded, args.iters, args.seed, config=cfg)
    seg = primalize_on_surface(best, cfg)
    final = score(best, cfg)
    prefix = args.out_prefix
    _write(f"{prefix}.segmentation.txt", segmentation_text(seg))
    _write(f"{prefix}.polycube.obj", obj_text(seg.polycube))
    _write(f"{prefix}.loops.obj", loops_obj_text(best))
    _write(f"{prefix}.structure.json", best.structure.dumps() + "\n")
    out.say(f"score {start:.6f} -> {final:.6f} with {len(best.structure.loops)} loops, {seg.patch_count} patches")
    out.say(f"wrote {prefix}.segmentation.txt, .polycube.obj, .loops.obj, .structure.json")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dualloops", description="Polycube loop structures from the command line.")
    p.add_argument("--quiet", action="store_true", help="print documents only, no remarks")
    # --quiet is also accepted after the subcommand; SUPPRESS keeps it from resetting the top-level flag
    common = _Parser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common])

    v = command("validate", "check a structure and print the report")
    v.add_argument("structure")
    v.add_argument("--kind", choices=("polycube", "quad"), default="polycube")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    q = command("primalize", "write the primal polycube as OBJ")
    q.add_argument("structure")
    q.add_argument("--out")
    q.set_defaults(func=cmd_primalize)

    e = command("enumerate", "list valid loops that can be added, one JSON line each")
    e.add_argument("structure")
    e.add_argument("--axis", choices=("X", "Y", "Z"))
    e.add_argument("--max-len", type=int, default=12)
    e.add_argument("--out")
    e.set_defaults(func=cmd_enumerate)

    a = command("add", "add a candidate loop")
    a.add_argument("structure")
    a.add_argument("--candidate", required=True, help="file of candidates as printed by enumerate")
    a.add_argument("--index", type=int, default=0, help="which line of the candidate file to use")
    a.add_argument("--out")
    a.set_defaults(func=cmd_add)

    r = command("remove", "remove a loop")
    r.add_argument("structure")
    r.add_argument("--loop", type=int, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_remove)

    o = command("orient", "assign loop orientations")
    o.add_argument("structure")
    o.add_argument("--out")
    o.set_defaults(func=cmd_orient)

    t = command("oracle-roundtrip", "check every small voxel solid against its dual structure")
    t.add_argument("--bound", type=int, required=True)
    t.add_argument("--all-translations", action="store_true", help="check every solid, not one per symmetry class")
    t.add_argument("--out")
    t.set_defaults(func=cmd_roundtrip)

    s = command("segment", "optimize a structure on a mesh and write the segmentation")
    s.add_argument("--mesh", required=True)
    s.add_argument("--structure", required=True)
    s.add_argument("--iters", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lambda", dest="lam", type=int)
    s.add_argument("--config", help="JSON file overriding beta, lambda and max_len")
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(func=cmd_segment)
    return p


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Run one command; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    out = _Output(args.quiet, stdout)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (InputError, LoopStructureError, MeshError) as exc:
        print(f"invalid input: {exc}", file=stderr)
        report = getattr(exc, "report", None)
        if report is not None:
            print(report.summary(), file=stderr)
        return EXIT_INVALID
    except (RuntimeFailure, EmbeddingFailed, PrimalizationFailed) as exc:
        print(f"failed: {exc}", file=stderr)
        return EXIT_FAILURE


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
