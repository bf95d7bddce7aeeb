"""``s3forge`` command line: generate, analyze, preset, list-presets."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import scene as sc
from .errors import IoFailure, SchemaError

log = logging.getLogger("s3forge")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="s3forge", description="Printable meshes from designs in the three-sphere.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def mesh_flags(q):
        q.add_argument("--format", choices=("stl", "obj"), help="override the scene's output format")
        q.add_argument(
            "--seed-tolerance", type=float, default=0.0, metavar="MM",
            help="vertex weld tolerance in millimetres (default 0: exact duplicates only)",
        )

    g = sub.add_parser("generate", help="build, validate and export a scene file")
    g.add_argument("scene", type=Path)
    g.add_argument("--out", type=Path, help="mesh output path (default: the scene's output.path)")
    mesh_flags(g)

    a = sub.add_parser("analyze", help="feature ratio, bounding box and printable scale, without meshing")
    a.add_argument("scene", type=Path)

    r = sub.add_parser("preset", help="generate one of the built-in sculptures")
    r.add_argument("name", choices=sc.PRESET_NAMES)
    r.add_argument("--out", type=Path, help="mesh output path (default: ./<name>.<format>)")
    mesh_flags(r)

    sub.add_parser("list-presets", help="list the built-in sculptures")
    return p


def _report(result: sc.RunResult) -> None:
    if result.diagnostics is not None:
        print(result.diagnostics.to_json())
    if result.mesh_path is not None:
        print(f"wrote {result.mesh_path} and {result.diagnostics_path}", file=sys.stderr)
    if result.message:
        print(f"s3forge: {result.message}", file=sys.stderr)


def _generate(scene: sc.Scene, args) -> int:
    if args.seed_tolerance < 0:
        raise SchemaError("--seed-tolerance must be non-negative")
    result = sc.run(scene, out_path=args.out, fmt=args.format, weld_tol_mm=args.seed_tolerance)
    _report(result)
    return result.exit_code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "list-presets":
            print(sc.list_presets())
            return sc.EXIT_OK
        if args.command == "analyze":
            analysis = sc.analyze(sc.load_scene(args.scene))
            print(analysis.to_json())
            if analysis.refused:
                print(f"s3forge: refused: {analysis.message}", file=sys.stderr)
            return sc.EXIT_OK
        if args.command == "generate":
            scene = sc.load_scene(args.scene)
        else:
            scene = sc.load_preset(args.name)
            if args.out is None:
                fmt = args.format or scene.output_format
                args.out = Path(f"{args.name}.{fmt}")
        log.info("generating %s", scene.name)
        return _generate(scene, args)
    except SchemaError as exc:
        print(f"s3forge: invalid scene: {exc}", file=sys.stderr)
        return sc.EXIT_SCHEMA
    except IoFailure as exc:
        print(f"s3forge: I/O failure: {exc}", file=sys.stderr)
        return sc.EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
