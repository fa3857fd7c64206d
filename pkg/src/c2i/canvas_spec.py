"""Declarative canvas descriptions: schema, validation, and prompt composition.

The JSON carrier format (documented in the README) has the top-level keys
task, width, height, background, subjects, poses, boxes, prompt and
pose_alpha. Unknown keys anywhere in the document are schema errors.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import InvariantError, SchemaError, SpecSyntaxError
from .imagebuf import AssetMap

POSE_KEYPOINT_COUNT = 18

MIN_CANVAS_DIM = 64
MAX_CANVAS_DIM = 4096


class TaskKind(enum.Enum):
    SPATIAL = "spatial"
    POSE = "pose"
    BOX = "box"
    MULTI = "multi"

    @property
    def indicator(self) -> str:
        return _INDICATORS[self]


_INDICATORS = {
    TaskKind.SPATIAL: "[Spatial]",
    TaskKind.POSE: "[Pose]",
    TaskKind.BOX: "[Box]",
    TaskKind.MULTI: "[Multi]",
}


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    severity: Severity
    code: str
    message: str
    path: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple = ()

    @property
    def ok(self) -> bool:
        return not any(i.severity is Severity.ERROR for i in self.issues)

    def to_doc(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {"severity": i.severity.value, "code": i.code, "message": i.message, "path": i.path}
                for i in self.issues
            ],
        }


@dataclass(frozen=True)
class AffinePlacement:
    """Where a cutout lands: normalized center, uniform scale, rotation."""

    center_x: float
    center_y: float
    scale: float
    rotation_deg: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.center_x <= 1.0 and 0.0 <= self.center_y <= 1.0):
            raise InvariantError("placement center must lie in [0,1]")
        if not self.scale > 0.0:
            raise InvariantError("scale must be > 0")
        if not (-180.0 <= self.rotation_deg <= 180.0):
            raise InvariantError("rotation must lie in [-180,180] degrees")


@dataclass(frozen=True)
class SubjectElement:
    subject_id: str
    asset_key: str
    placement: AffinePlacement
    z_order: int = 0

    def __post_init__(self):
        if not self.asset_key:
            raise InvariantError("asset_key must be nonempty")


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    visible: bool

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise InvariantError("keypoint coordinates must lie in [0,1]")


@dataclass(frozen=True)
class PoseElement:
    slot_id: str
    keypoints: tuple  # exactly 18 Keypoints, BODY-18 order
    confidence: float = 1.0

    def __post_init__(self):
        if len(self.keypoints) != POSE_KEYPOINT_COUNT:
            raise InvariantError(
                f"pose needs exactly {POSE_KEYPOINT_COUNT} keypoints, got {len(self.keypoints)}"
            )
        if not any(k.visible for k in self.keypoints):
            raise InvariantError("pose needs at least one visible keypoint")
        if not (0.0 <= self.confidence <= 1.0):
            raise InvariantError("confidence must lie in [0,1]")


@dataclass(frozen=True)
class BoxElement:
    label: str
    rect: tuple  # (x0, y0, x1, y1) normalized
    is_person: bool = False
    ordinal: Optional[int] = None

    def __post_init__(self):
        if not self.label:
            raise InvariantError("label must be nonempty")
        x0, y0, x1, y1 = self.rect
        if not all(0.0 <= v <= 1.0 for v in self.rect):
            raise InvariantError("rect coordinates must lie in [0,1]")
        if not x0 < x1:
            raise InvariantError("x0<x1 violated")
        if not y0 < y1:
            raise InvariantError("y0<y1 violated")
        if self.ordinal is not None and self.ordinal < 1:
            raise InvariantError("ordinal must be positive")


@dataclass(frozen=True)
class CanvasSpec:
    """Pre-render description of one composite canvas image."""

    task: TaskKind
    width: int
    height: int
    background_asset: Optional[str] = None  # None means masked uniform fill
    subjects: tuple = ()
    poses: tuple = ()
    boxes: tuple = ()
    user_prompt: str = ""
    pose_alpha: float = 0.6

    def __post_init__(self):
        for name, v in (("width", self.width), ("height", self.height)):
            if not (MIN_CANVAS_DIM <= v <= MAX_CANVAS_DIM):
                raise InvariantError(
                    f"{name} must lie in [{MIN_CANVAS_DIM},{MAX_CANVAS_DIM}], got {v}"
                )
        if not (0.0 <= self.pose_alpha <= 1.0):
            raise InvariantError("pose_alpha must lie in [0,1]")


def _task_mix_problem(spec: CanvasSpec) -> Optional[str]:
    """Element kinds a task forbids, or None if the mix is legal."""
    t = spec.task
    if t is TaskKind.SPATIAL and (spec.poses or spec.boxes):
        return "spatial task forbids poses and boxes"
    if t is TaskKind.POSE and spec.boxes:
        return "pose task forbids boxes"
    if t is TaskKind.BOX and (spec.subjects or spec.poses):
        return "box task forbids subjects and poses"
    return None


# --- JSON carrier ----------------------------------------------------------

def _expect(doc, typ, path, what):
    if typ is float:
        if isinstance(doc, bool) or not isinstance(doc, (int, float)):
            raise SchemaError(f"expected {what}", path)
        return float(doc)
    if typ is int:
        if isinstance(doc, bool) or not isinstance(doc, int):
            raise SchemaError(f"expected {what}", path)
        return doc
    if not isinstance(doc, typ):
        raise SchemaError(f"expected {what}", path)
    return doc


def _check_keys(obj: dict, allowed, path: str):
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r}", f"{path}.{key}")


def _pop(obj: dict, key: str, typ, path: str, default=_expect):
    if key not in obj:
        if default is _expect:
            raise SchemaError("missing required key", f"{path}.{key}")
        return default
    return _expect(obj[key], typ, f"{path}.{key}", typ.__name__)


def _parse_placement(doc, path: str) -> AffinePlacement:
    obj = _expect(doc, dict, path, "object")
    _check_keys(obj, {"cx", "cy", "scale", "rotation"}, path)
    cx = _pop(obj, "cx", float, path)
    cy = _pop(obj, "cy", float, path)
    scale = _pop(obj, "scale", float, path)
    rot = _pop(obj, "rotation", float, path, default=0.0)
    try:
        return AffinePlacement(cx, cy, scale, rot)
    except InvariantError as exc:
        raise InvariantError(exc.message, path) from None


def _parse_subject(doc, path: str) -> SubjectElement:
    obj = _expect(doc, dict, path, "object")
    _check_keys(obj, {"id", "asset", "placement", "z"}, path)
    sid = _pop(obj, "id", str, path)
    asset = _pop(obj, "asset", str, path)
    if not asset:
        raise InvariantError("asset_key must be nonempty", f"{path}.asset")
    if "placement" not in obj:
        raise SchemaError("missing required key", f"{path}.placement")
    placement = _parse_placement(obj["placement"], f"{path}.placement")
    z = _pop(obj, "z", int, path, default=0)
    return SubjectElement(sid, asset, placement, z)


def _parse_keypoint(doc, path: str) -> Keypoint:
    row = _expect(doc, list, path, "[x, y, v] triple")
    if len(row) != 3:
        raise SchemaError("expected [x, y, v] triple", path)
    x = _expect(row[0], float, f"{path}[0]", "float")
    y = _expect(row[1], float, f"{path}[1]", "float")
    v = row[2]
    if isinstance(v, bool):
        visible = v
    elif v in (0, 1):
        visible = bool(v)
    else:
        raise SchemaError("visibility must be a flag (true/false or 0/1)", f"{path}[2]")
    try:
        return Keypoint(x, y, visible)
    except InvariantError as exc:
        raise InvariantError(exc.message, path) from None


def _parse_pose(doc, path: str) -> PoseElement:
    obj = _expect(doc, dict, path, "object")
    _check_keys(obj, {"id", "keypoints", "confidence"}, path)
    pid = _pop(obj, "id", str, path)
    if "keypoints" not in obj:
        raise SchemaError("missing required key", f"{path}.keypoints")
    rows = _expect(obj["keypoints"], list, f"{path}.keypoints", "array")
    kps = tuple(
        _parse_keypoint(row, f"{path}.keypoints[{i}]") for i, row in enumerate(rows)
    )
    conf = _pop(obj, "confidence", float, path, default=1.0)
    if not (0.0 <= conf <= 1.0):
        raise InvariantError("confidence must lie in [0,1]", f"{path}.confidence")
    try:
        return PoseElement(pid, kps, conf)
    except InvariantError as exc:
        raise InvariantError(exc.message, f"{path}.keypoints") from None


def _parse_box(doc, path: str) -> BoxElement:
    obj = _expect(doc, dict, path, "object")
    _check_keys(obj, {"label", "rect", "person", "ordinal"}, path)
    label = _pop(obj, "label", str, path)
    if "rect" not in obj:
        raise SchemaError("missing required key", f"{path}.rect")
    raw = _expect(obj["rect"], list, f"{path}.rect", "array")
    if len(raw) != 4:
        raise SchemaError("rect must be [x0, y0, x1, y1]", f"{path}.rect")
    rect = tuple(_expect(v, float, f"{path}.rect[{i}]", "float") for i, v in enumerate(raw))
    person = _pop(obj, "person", bool, path, default=False)
    ordinal = _pop(obj, "ordinal", int, path, default=None)
    if not label:
        raise InvariantError("label must be nonempty", f"{path}.label")
    if ordinal is not None and ordinal < 1:
        raise InvariantError("ordinal must be positive", f"{path}.ordinal")
    try:
        return BoxElement(label, rect, person, ordinal)
    except InvariantError as exc:
        raise InvariantError(exc.message, f"{path}.rect") from None


_TOP_KEYS = {
    "task", "width", "height", "background", "subjects", "poses", "boxes",
    "prompt", "pose_alpha",
}


def parse_spec_doc(doc) -> CanvasSpec:
    """Build a CanvasSpec from an already-decoded JSON document."""
    obj = _expect(doc, dict, "$", "object")
    _check_keys(obj, _TOP_KEYS, "$")

    raw_task = _pop(obj, "task", str, "$")
    try:
        task = TaskKind(raw_task)
    except ValueError:
        raise SchemaError(f"unknown task {raw_task!r}", "$.task") from None

    width = _pop(obj, "width", int, "$")
    height = _pop(obj, "height", int, "$")
    for name, v in (("width", width), ("height", height)):
        if not (MIN_CANVAS_DIM <= v <= MAX_CANVAS_DIM):
            raise InvariantError(
                f"{name} must lie in [{MIN_CANVAS_DIM},{MAX_CANVAS_DIM}], got {v}",
                f"$.{name}",
            )

    if "background" not in obj:
        raise SchemaError("missing required key", "$.background")
    bg = obj["background"]
    if bg == "masked":
        background_asset = None
    elif isinstance(bg, dict):
        _check_keys(bg, {"asset"}, "$.background")
        background_asset = _pop(bg, "asset", str, "$.background")
        if not background_asset:
            raise InvariantError("background asset key must be nonempty", "$.background.asset")
    else:
        raise SchemaError('expected "masked" or {"asset": key}', "$.background")

    subjects = tuple(
        _parse_subject(s, f"$.subjects[{i}]")
        for i, s in enumerate(_expect(obj.get("subjects", []), list, "$.subjects", "array"))
    )
    poses = tuple(
        _parse_pose(p, f"$.poses[{i}]")
        for i, p in enumerate(_expect(obj.get("poses", []), list, "$.poses", "array"))
    )
    boxes = tuple(
        _parse_box(b, f"$.boxes[{i}]")
        for i, b in enumerate(_expect(obj.get("boxes", []), list, "$.boxes", "array"))
    )

    prompt = _pop(obj, "prompt", str, "$")
    pose_alpha = _pop(obj, "pose_alpha", float, "$", default=0.6)
    if not (0.0 <= pose_alpha <= 1.0):
        raise InvariantError("pose_alpha must lie in [0,1]", "$.pose_alpha")

    spec = CanvasSpec(
        task=task,
        width=width,
        height=height,
        background_asset=background_asset,
        subjects=subjects,
        poses=poses,
        boxes=boxes,
        user_prompt=prompt,
        pose_alpha=pose_alpha,
    )

    problem = _task_mix_problem(spec)
    if problem is not None:
        raise InvariantError(problem, "$.task")
    return spec


def parse_spec(text: str) -> CanvasSpec:
    """Parse a UTF-8 spec document into a fully defaulted CanvasSpec."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"malformed JSON: {exc.msg}", "$") from None
    return parse_spec_doc(doc)


def spec_to_doc(spec: CanvasSpec) -> dict:
    """Canonical document form: fixed key order, defaults written explicitly."""
    return {
        "task": spec.task.value,
        "width": spec.width,
        "height": spec.height,
        "background": (
            "masked" if spec.background_asset is None else {"asset": spec.background_asset}
        ),
        "subjects": [
            {
                "id": s.subject_id,
                "asset": s.asset_key,
                "placement": {
                    "cx": s.placement.center_x,
                    "cy": s.placement.center_y,
                    "scale": s.placement.scale,
                    "rotation": s.placement.rotation_deg,
                },
                "z": s.z_order,
            }
            for s in spec.subjects
        ],
        "poses": [
            {
                "id": p.slot_id,
                "keypoints": [[k.x, k.y, k.visible] for k in p.keypoints],
                "confidence": p.confidence,
            }
            for p in spec.poses
        ],
        "boxes": [
            {
                "label": b.label,
                "rect": list(b.rect),
                "person": b.is_person,
                **({"ordinal": b.ordinal} if b.ordinal is not None else {}),
            }
            for b in spec.boxes
        ],
        "prompt": spec.user_prompt,
        "pose_alpha": spec.pose_alpha,
    }


def serialize_spec(spec: CanvasSpec) -> str:
    """Canonical serialization; parse_spec round-trips it field for field."""
    return json.dumps(spec_to_doc(spec), separators=(",", ":"), ensure_ascii=True)


def spec_digest(spec: CanvasSpec) -> str:
    """SHA-256 hex of the canonical serialization."""
    return hashlib.sha256(serialize_spec(spec).encode("utf-8")).hexdigest()


# --- validation ------------------------------------------------------------

def _rect_area(r) -> float:
    return (r[2] - r[0]) * (r[3] - r[1])


def _rect_intersection(a, b) -> float:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    return w * h if (w > 0 and h > 0) else 0.0


def _clip_polygon(points, axis, bound, keep_below):
    """Sutherland-Hodgman clip of a convex polygon against one half-plane."""
    out = []
    n = len(points)
    for i in range(n):
        cur, nxt = points[i], points[(i + 1) % n]
        cur_in = (cur[axis] <= bound) if keep_below else (cur[axis] >= bound)
        nxt_in = (nxt[axis] <= bound) if keep_below else (nxt[axis] >= bound)
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            t = (bound - cur[axis]) / (nxt[axis] - cur[axis])
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return out


def _polygon_area(points) -> float:
    area = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return abs(area) / 2.0


def _on_canvas_fraction(subject: SubjectElement, asset, width: int, height: int) -> float:
    """Fraction of the placed cutout quad that lands inside the canvas."""
    p = subject.placement
    cx, cy = p.center_x * width, p.center_y * height
    hw = asset.width * p.scale / 2.0
    hh = asset.height * p.scale / 2.0
    theta = math.radians(p.rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    quad = []
    for dx, dy in ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)):
        quad.append((cx + cos_t * dx - sin_t * dy, cy + sin_t * dx + cos_t * dy))
    total = _polygon_area(quad)
    if total == 0.0:
        return 0.0
    clipped = quad
    for axis, bound, keep_below in ((0, 0.0, False), (0, float(width), True),
                                    (1, 0.0, False), (1, float(height), True)):
        clipped = _clip_polygon(clipped, axis, bound, keep_below)
        if not clipped:
            return 0.0
    return _polygon_area(clipped) / total


def validate_spec(spec: CanvasSpec, assets: AssetMap) -> ValidationReport:
    """Check asset resolvability and placement sanity; never raises."""
    issues = []

    problem = _task_mix_problem(spec)
    if problem is not None:
        issues.append(Issue(Severity.ERROR, "task-element-mismatch", problem, "$.task"))

    if spec.background_asset is not None and spec.background_asset not in assets:
        issues.append(Issue(
            Severity.ERROR, "asset-missing",
            f"background asset {spec.background_asset!r} not provided", "$.background",
        ))

    for i, subject in enumerate(spec.subjects):
        path = f"$.subjects[{i}]"
        asset = assets.get(subject.asset_key)
        if asset is None:
            issues.append(Issue(
                Severity.ERROR, "asset-missing",
                f"asset {subject.asset_key!r} not provided", f"{path}.asset",
            ))
            continue
        if not asset.has_alpha:
            issues.append(Issue(
                Severity.ERROR, "asset-no-alpha",
                f"cutout {subject.asset_key!r} has no alpha channel", f"{path}.asset",
            ))
            continue
        if _on_canvas_fraction(subject, asset, spec.width, spec.height) < 0.1:
            issues.append(Issue(
                Severity.WARNING, "subject-offcanvas",
                "more than 90% of the cutout falls outside the canvas", path,
            ))

    for j in range(len(spec.boxes)):
        for i in range(j):
            a, b = spec.boxes[i].rect, spec.boxes[j].rect
            inter = _rect_intersection(a, b)
            if inter > 0 and math.isclose(inter, min(_rect_area(a), _rect_area(b))):
                issues.append(Issue(
                    Severity.WARNING, "box-overlap",
                    f"box fully overlaps box {i}", f"$.boxes[{j}]",
                ))
                break

    return ValidationReport(tuple(issues))


# --- person ordinals and prompts -------------------------------------------

def assign_person_ordinals(spec: CanvasSpec) -> CanvasSpec:
    """Relabel person boxes "Person 1..k" left to right; idempotent."""
    persons = [(i, b) for i, b in enumerate(spec.boxes) if b.is_person]
    if not persons:
        return spec
    # left to right, ties by top edge, then input order
    persons.sort(key=lambda item: (item[1].rect[0], item[1].rect[1], item[0]))
    new_boxes = list(spec.boxes)
    for rank, (i, box) in enumerate(persons, start=1):
        new_boxes[i] = replace(box, ordinal=rank, label=f"Person {rank}")
    return replace(spec, boxes=tuple(new_boxes))


def compose_prompt(task: TaskKind, user_prompt: str) -> str:
    """Indicator token, one space, then the user prompt (if any)."""
    if not user_prompt:
        return task.indicator
    return f"{task.indicator} {user_prompt}"
