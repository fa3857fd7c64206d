"""Benchmark canvas suites: 4-person, pose-guided, layout, multi-control.

Inputs arrive pre-extracted (boxes and poses detected from prior images
elsewhere); this module only assembles canvas specs from them.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

from .canvas_spec import (
    AffinePlacement,
    BoxElement,
    CanvasSpec,
    Keypoint,
    PoseElement,
    SubjectElement,
    TaskKind,
    assign_person_ordinals,
)
from .dataset import PERSON_LABEL
from .errors import ArityError, InvariantError
from .imagebuf import AssetMap


class BenchmarkMode(enum.Enum):
    FOUR_P = "4p"
    POSE_FOUR_P = "pose4p"
    LAYOUT = "layout"
    MULTI_CONTROL = "multi"


@dataclass(frozen=True)
class BenchmarkInputs:
    rows: tuple      # decoded JSON row objects
    assets: AssetMap  # identity cutouts referenced by the rows


def load_benchmark_inputs(path, assets: AssetMap) -> BenchmarkInputs:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = doc["rows"] if isinstance(doc, dict) else doc
    return BenchmarkInputs(rows=tuple(rows), assets=assets)


def _placement_in_rect(rect, cutout, width: int, height: int) -> AffinePlacement:
    x0, y0, x1, y1 = rect
    return AffinePlacement(
        center_x=(x0 + x1) / 2.0,
        center_y=(y0 + y1) / 2.0,
        scale=(y1 - y0) * height / cutout.height,
        rotation_deg=0.0,
    )


def _pose_bbox(keypoints) -> tuple:
    xs = [k.x for k in keypoints if k.visible]
    ys = [k.y for k in keypoints if k.visible]
    return (min(xs), min(ys), max(xs), max(ys))


def _parse_pose_rows(rows, slot_id: str) -> PoseElement:
    kps = tuple(Keypoint(r[0], r[1], bool(r[2])) for r in rows)
    return PoseElement(slot_id=slot_id, keypoints=kps)


def _subjects_for(identities, rects, assets, width, height):
    subjects = []
    for i, (key, rect) in enumerate(zip(identities, rects)):
        if key not in assets:
            raise InvariantError(f"identity asset {key!r} not provided")
        subjects.append(SubjectElement(
            subject_id=f"id{i + 1}",
            asset_key=key,
            placement=_placement_in_rect(rect, assets[key], width, height),
            z_order=i,
        ))
    return tuple(subjects)


def _entity_boxes(entities) -> tuple:
    if not entities:
        raise InvariantError("layout row needs at least one entity")
    return tuple(
        BoxElement(label=label, rect=tuple(float(v) for v in rect),
                   is_person=(label == PERSON_LABEL))
        for label, rect in entities
    )


def build_benchmark_canvas(mode: BenchmarkMode, inputs: BenchmarkInputs) -> list:
    """One canvas spec per input row, following the dataset placement rules."""
    specs = []
    for row in inputs.rows:
        width, height = int(row["width"]), int(row["height"])
        prompt = row.get("prompt", "")

        if mode in (BenchmarkMode.FOUR_P, BenchmarkMode.POSE_FOUR_P):
            identities = row["identities"]
            boxes = row["boxes"]
            if len(identities) != 4 or len(boxes) != 4:
                raise ArityError(
                    f"4P rows need exactly 4 identities and 4 boxes, got "
                    f"{len(identities)} and {len(boxes)}"
                )
            subjects = _subjects_for(identities, boxes, inputs.assets, width, height)
            if mode is BenchmarkMode.FOUR_P:
                specs.append(CanvasSpec(
                    task=TaskKind.SPATIAL, width=width, height=height,
                    subjects=subjects, user_prompt=prompt,
                ))
            else:
                poses = row["poses"]
                if len(poses) != 4:
                    raise ArityError(f"pose4p rows need exactly 4 poses, got {len(poses)}")
                pose_elements = tuple(
                    _parse_pose_rows(p, f"id{i + 1}") for i, p in enumerate(poses)
                )
                specs.append(CanvasSpec(
                    task=TaskKind.POSE, width=width, height=height,
                    subjects=subjects, poses=pose_elements, user_prompt=prompt,
                ))

        elif mode is BenchmarkMode.LAYOUT:
            specs.append(assign_person_ordinals(CanvasSpec(
                task=TaskKind.BOX, width=width, height=height,
                boxes=_entity_boxes(row["entities"]), user_prompt=prompt,
            )))

        else:  # multi-control
            identities = row["identities"]
            poses = row["poses"]
            if len(identities) != len(poses):
                raise ArityError(
                    f"multi-control rows need one pose per identity, got "
                    f"{len(identities)} identities and {len(poses)} poses"
                )
            pose_elements = tuple(
                _parse_pose_rows(p, f"id{i + 1}") for i, p in enumerate(poses)
            )
            # each cutout sits where its skeleton is
            subjects = _subjects_for(
                identities,
                [_pose_bbox(p.keypoints) for p in pose_elements],
                inputs.assets, width, height,
            )
            boxes = _entity_boxes(row["entities"]) if row.get("entities") else ()
            specs.append(assign_person_ordinals(CanvasSpec(
                task=TaskKind.MULTI, width=width, height=height,
                subjects=subjects, poses=pose_elements, boxes=boxes,
                user_prompt=prompt,
            )))
    return specs
