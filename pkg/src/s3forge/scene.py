"""Declarative scenes: JSON in, validated mesh and diagnostics out.

A scene names one design (a polytope skeleton or a thickened surface), the
projection frame, the tube profile for skeletons, the physical bounding box
and the output file.  :func:`run` performs the whole
build, orient, cut, mesh, weld, validate, scale and export sequence.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import jsonschema
import numpy as np

from . import meshkit, polytope4, shells, tubes
from .errors import AtPole, IoFailure, PoleCollision, S3ForgeError, SchemaError, ZeroQuaternion
from .meshkit import Diagnostics, TriMesh
from .polytope4 import Kind, Orientation
from .quat import UnitQuaternion
from .s3geom import ProjectionFrame, frame_from_pole
from .surfaces import NormalMode, SurfaceKind, SurfaceSpec, eval_p, offset_r
from .tubes import CapStyle, TubeSpec

MIN_FEATURE_MM = 1.0

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_POLE = 3
EXIT_SCHEMA = 4
EXIT_IO = 5

_VEC4 = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCENE_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "s3forge scene",
    "type": "object",
    "required": ["design", "target_bbox_mm"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "provenance": {"type": "string"},
        "design": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type", "kind"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "polytope"},
                        "kind": {"enum": [k.value for k in Kind]},
                        "orientation": {"enum": [o.value for o in Orientation]},
                        "rotation": _VEC4,
                        "half": {"type": "boolean"},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "surface", "shell"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "surface"},
                        "surface": {
                            "type": "object",
                            "required": ["kind"],
                            "additionalProperties": False,
                            "properties": {
                                "kind": {"enum": [k.value for k in SurfaceKind]},
                                "num": {"type": "integer", "minimum": 1},
                                "den": {"type": "integer", "minimum": 1},
                                "theta0": {"type": "number"},
                                "half_width": _POS,
                            },
                        },
                        "shell": {
                            "type": "object",
                            "required": ["thickness_s3"],
                            "additionalProperties": False,
                            "properties": {
                                "thickness_s3": _POS,
                                "grid_theta": {"type": "integer", "minimum": 2},
                                "grid_phi": {"type": "integer", "minimum": 2},
                                "strut_fraction": {"type": "number", "minimum": 0.1, "maximum": 0.9},
                                "holes": {"type": "boolean"},
                                "psi_layers": {"type": "integer", "minimum": 1},
                                "normal_mode": {"enum": [m.value for m in NormalMode]},
                                "punctures": {"type": "array", "items": _VEC4},
                                "puncture_scale": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                            },
                        },
                        "cogs": {
                            "type": "object",
                            "required": ["tooth_count", "tooth_height"],
                            "additionalProperties": False,
                            "properties": {
                                "tooth_count": {"type": "integer", "minimum": 3},
                                "tooth_height": _POS,
                                "top_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                "base_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                            },
                        },
                    },
                },
            ]
        },
        "frame": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"pole": _VEC4, "extra_rotation": _VEC4},
        },
        "tube": {
            "type": "object",
            "required": ["radius_s3"],
            "additionalProperties": False,
            "properties": {
                "radius_s3": _POS,
                "segments_along": {"type": "integer", "minimum": 2},
                "segments_around": {"type": "integer", "minimum": 3},
                "cap_style": {"enum": [c.value for c in CapStyle]},
            },
        },
        "target_bbox_mm": {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"format": {"enum": ["stl", "obj"]}, "path": {"type": "string"}},
        },
    },
}


@dataclass(frozen=True)
class PolytopeDesign:
    kind: Kind
    orientation: Orientation = Orientation.CELL_CENTERED
    half: bool = False
    rotation: Optional[UnitQuaternion] = None


@dataclass(frozen=True)
class SurfaceDesign:
    surface: SurfaceSpec
    shell: shells.ShellSpec
    cogs: Optional[shells.CogSpec] = None


@dataclass
class Scene:
    design: Union[PolytopeDesign, SurfaceDesign]
    frame: ProjectionFrame
    target_bbox_mm: tuple
    tube: Optional[TubeSpec] = None
    output_format: str = "stl"
    output_path: Optional[Path] = None
    name: str = "scene"
    provenance: str = ""


def _unit(values, what: str) -> UnitQuaternion:
    try:
        return UnitQuaternion.normalized(np.asarray(values, dtype=float))
    except ZeroQuaternion as exc:
        raise SchemaError(f"{what} must be a nonzero quaternion") from exc


def _surface_design(d: dict, frame: ProjectionFrame) -> SurfaceDesign:
    surf = SurfaceSpec(**d["surface"])
    sh = dict(d["shell"])
    scale = sh.pop("puncture_scale", None)
    if "punctures" in sh and scale is not None:
        raise SchemaError("give either punctures or puncture_scale, not both")
    shell = shells.ShellSpec(**sh)
    if scale is not None:
        rects = shells.default_punctures(surf, shell, frame, tuple(scale))
        shell = shells.ShellSpec(**{**sh, "punctures": rects})
    cogs = shells.CogSpec(**d["cogs"]) if "cogs" in d else None
    return SurfaceDesign(surf, shell, cogs)


def scene_from_dict(data: Any, base_dir: Union[str, Path, None] = None) -> Scene:
    """Validate ``data`` against :data:`SCENE_SCHEMA` and build a :class:`Scene`.

    Relative output paths are resolved against ``base_dir``.
    """
    try:
        jsonschema.validate(data, SCENE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from exc
    fr = data.get("frame", {})
    pole = _unit(fr.get("pole", [0.0, 0.0, 0.0, 1.0]), "frame.pole")
    extra = _unit(fr.get("extra_rotation", [1.0, 0.0, 0.0, 0.0]), "frame.extra_rotation")
    d = data["design"]
    try:
        frame = frame_from_pole(pole, extra)
        tube = TubeSpec(**data["tube"]) if "tube" in data else None
        if d["type"] == "polytope":
            rot = _unit(d["rotation"], "design.rotation") if "rotation" in d else None
            design = PolytopeDesign(
                Kind(d["kind"]),
                Orientation(d.get("orientation", Orientation.CELL_CENTERED.value)),
                bool(d.get("half", False)),
                rot,
            )
            if design.orientation is Orientation.GENERIC and rot is None:
                raise SchemaError("Generic orientation needs design.rotation")
            if tube is None:
                raise SchemaError("polytope designs need a tube section")
        else:
            design = _surface_design(d, frame)
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc
    out = data.get("output", {})
    fmt = out.get("format", "stl")
    path = out.get("path")
    if path is not None:
        path = Path(path)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
    return Scene(
        design=design,
        frame=frame,
        target_bbox_mm=tuple(float(x) for x in data["target_bbox_mm"]),
        tube=tube,
        output_format=fmt,
        output_path=path,
        name=data.get("name", "scene"),
        provenance=data.get("provenance", ""),
    )


def load_scene(path: Union[str, Path]) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read scene {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return scene_from_dict(data, path.parent)


# presets ----------------------------------------------------------------

PRESET_NAMES = (
    "24-cell",
    "half-120-cell",
    "half-600-cell",
    "clifford-torus",
    "mobius",
    "klein",
    "knotted-cog",
)


def preset_data(name: str) -> dict:
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    text = resources.files("s3forge").joinpath("presets").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_preset(name: str) -> Scene:
    return scene_from_dict(preset_data(name))


def list_presets() -> str:
    """One line per preset: name, then where its bounding box comes from."""
    lines = []
    for name in PRESET_NAMES:
        lines.append(f"{name:15s} {preset_data(name).get('provenance', '')}")
    return "\n".join(lines)


# design construction -----------------------------------------------------

def design_arcs(scene: Scene) -> list:
    """Great arcs of a polytope scene after orientation and optional cut."""
    d = scene.design
    p = polytope4.orient(polytope4.build(d.kind), d.orientation, scene.frame, d.rotation)
    arcs = polytope4.skeleton_arcs(p)
    if d.half:
        arcs = polytope4.half_cut(arcs, scene.frame)
    return arcs


def _check_polytope_pole(arcs, scene: Scene) -> None:
    lam_max = polytope4.design_scale_range(arcs, scene.frame)[1]
    if math.isinf(lam_max):
        raise PoleCollision("the design passes through the projection point; use half=true")
    for arc in arcs:
        tubes.check_pole(arc, scene.tube, scene.frame)


@dataclass
class BuiltMesh:
    mesh: TriMesh
    expected_euler: list
    design_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))


def build_mesh(scene: Scene) -> BuiltMesh:
    """Unscaled mesh of the scene together with its predicted per-shell Euler numbers."""
    d = scene.design
    f = scene.frame
    if isinstance(d, PolytopeDesign):
        arcs = design_arcs(scene)
        _check_polytope_pole(arcs, scene)
        mesh = tubes.mesh_design(arcs, scene.tube, f)
        pts = np.vstack([f.project(a.points(17)) for a in arcs])
        return BuiltMesh(mesh, [2] * len(arcs), pts)
    lat = shells.build_lattice(d.surface, d.shell, f)
    body = shells.mesh_lattice(lat, f)
    expected = [shells.combinatorial_euler(lat)]
    if d.cogs is None:
        return BuiltMesh(body, expected)
    teeth = shells.mesh_cogs(d.surface, d.shell, d.cogs, f)
    return BuiltMesh(TriMesh.concatenate([body] + teeth), expected + [2] * len(teeth))


# running ---------------------------------------------------------------

@dataclass
class RunResult:
    diagnostics: Optional[Diagnostics]
    exit_code: int
    message: str = ""
    mesh_path: Optional[Path] = None
    diagnostics_path: Optional[Path] = None
    expected_euler: list = field(default_factory=list)
    mesh: Optional[TriMesh] = None

    @property
    def euler_matches(self) -> bool:
        return self.diagnostics is not None and list(self.diagnostics.euler_characteristic) == list(self.expected_euler)


def diagnostics_path_for(mesh_path: Path) -> Path:
    return mesh_path.with_name(mesh_path.stem + ".diagnostics.json")


def _problems(diag: Diagnostics, expected: list) -> list:
    out = []
    if not diag.all_watertight:
        bad = [k for k, ok in enumerate(diag.watertight) if not ok]
        out.append(f"shells {bad[:10]} are not watertight")
    if not math.isfinite(diag.min_feature_mm) or diag.min_feature_mm < MIN_FEATURE_MM:
        out.append(f"min_feature_mm {diag.min_feature_mm:.3f} is below {MIN_FEATURE_MM} mm")
    if list(diag.euler_characteristic) != list(expected):
        out.append("Euler characteristics differ from the combinatorial prediction")
    return out


def run(scene: Scene, out_path: Union[str, Path, None] = None, fmt: Optional[str] = None,
        weld_tol_mm: float = 0.0, write: bool = True) -> RunResult:
    """Build, validate, scale and export one scene.

    Never raises for pole collisions or I/O problems; those become exit codes
    3 and 5 in the returned :class:`RunResult`.
    """
    fmt = fmt or scene.output_format
    if fmt not in ("stl", "obj"):
        raise SchemaError(f"unknown output format {fmt!r}")
    try:
        built = build_mesh(scene)
    except (PoleCollision, AtPole) as exc:
        return RunResult(None, EXIT_POLE, str(exc))
    mesh = built.mesh
    if weld_tol_mm > 0.0:
        # the tolerance is physical, so convert it to model units first
        s = max(scene.target_bbox_mm) / float(mesh.bbox().max())
        mesh = meshkit.weld(mesh, weld_tol_mm / s)
    else:
        mesh = meshkit.weld(mesh, 0.0)
    mesh = meshkit.scale_to(mesh, scene.target_bbox_mm)
    diag = meshkit.validate(mesh)
    problems = _problems(diag, built.expected_euler)
    code = EXIT_VALIDATION if problems else EXIT_OK
    result = RunResult(diag, code, "; ".join(problems), expected_euler=built.expected_euler, mesh=mesh)
    if not write:
        return result
    path = Path(out_path) if out_path is not None else scene.output_path
    if path is None:
        path = Path(f"{scene.name}.{fmt}")
    path = path.with_suffix("." + fmt)
    try:
        if fmt == "stl":
            meshkit.export_stl(mesh, path)
        else:
            meshkit.export_obj(mesh, path)
        dpath = diagnostics_path_for(path)
        dpath.write_text(diag.to_json() + "\n", encoding="utf-8")
    except (IoFailure, OSError) as exc:
        result.exit_code = EXIT_IO
        result.message = str(exc)
        return result
    result.mesh_path, result.diagnostics_path = path, dpath
    return result


# analysis without meshing -------------------------------------------------

@dataclass
class Analysis:
    feature_ratio: float
    bbox: list
    scale: float
    min_feature_mm: float
    min_scale: float
    refused: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        fl = meshkit._json_float
        return {
            "feature_ratio": fl(self.feature_ratio),
            "bbox": [fl(x) for x in self.bbox],
            "bbox_mm": [fl(x * self.scale) for x in self.bbox],
            "scale": fl(self.scale),
            "min_feature_mm": fl(self.min_feature_mm),
            "min_scale_for_1mm": fl(self.min_scale),
            "refused": self.refused,
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


INFINITE_VOLUME = "the design reaches the projection point; its image is unbounded (infinite volume)"


def _refusal(message: str) -> Analysis:
    nan = math.nan
    return Analysis(math.inf, [math.inf] * 3, nan, nan, nan, True, message)


def _finish(feature_ratio, lo, hi, features, scene: Scene) -> Analysis:
    bbox = hi - lo
    scale = max(scene.target_bbox_mm) / float(bbox.max())
    fmin = float(np.min(features))
    return Analysis(feature_ratio, [float(x) for x in bbox], scale, fmin * scale, MIN_FEATURE_MM / fmin)


def _analyze_polytope(scene: Scene) -> Analysis:
    f = scene.frame
    arcs = design_arcs(scene)
    lam_lo, lam_hi = polytope4.design_scale_range(arcs, f)
    if math.isinf(lam_hi):
        return _refusal(INFINITE_VOLUME)
    try:
        for arc in arcs:
            tubes.check_pole(arc, scene.tube, f)
    except PoleCollision:
        return _refusal(INFINITE_VOLUME)
    eps = scene.tube.radius_s3
    lam_min = lam_lo
    pts, rad, _ = tubes._core_samples(arcs, scene.tube, f, 0.5)
    lo = (pts - rad[:, None]).min(axis=0)
    hi = (pts + rad[:, None]).max(axis=0)
    features = np.concatenate([[2.0 * math.sin(eps) * lam_min], tubes.tube_clearances(arcs, scene.tube, f)])
    return _finish(lam_hi / lam_lo, lo, hi, features, scene)


def _analyze_surface(scene: Scene) -> Analysis:
    d = scene.design
    f = scene.frame
    lat = shells.build_lattice(d.surface, d.shell, f, refine=False)
    try:
        shells._check_pole(lat, f)
    except PoleCollision:
        return _refusal(INFINITE_VOLUME)
    I, J = np.nonzero(lat.material)
    nodes_t = np.concatenate([lat.theta[I], lat.theta[I + 1]])
    nodes_f = np.concatenate([lat.phi[J], lat.phi[J + 1]])
    eps = d.shell.thickness_s3
    pts = np.vstack([
        f.project(offset_r(d.surface, nodes_t, nodes_f, s, d.shell.normal_mode)) for s in (-eps, eps)
    ])
    lam = f.scale(eval_p(d.surface, nodes_t, nodes_f))
    features = shells._feature_lengths(lat, f)
    return _finish(float(lam.max() / lam.min()), pts.min(axis=0), pts.max(axis=0), features, scene)


def analyze(scene: Scene) -> Analysis:
    """Feature ratio, projected bounding box and printable scale, without meshing.

    Designs that reach the projection point are refused with an infinite
    feature ratio.
    """
    if isinstance(scene.design, PolytopeDesign):
        return _analyze_polytope(scene)
    return _analyze_surface(scene)


__all__ = [
    "SCENE_SCHEMA", "Scene", "PolytopeDesign", "SurfaceDesign", "scene_from_dict", "load_scene",
    "PRESET_NAMES", "preset_data", "load_preset", "list_presets", "build_mesh", "run", "RunResult",
    "analyze", "Analysis", "S3ForgeError",
]
