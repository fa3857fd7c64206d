"""Cross-frame training-pair construction and manifest IO.

Scenes arrive as JSONL records pointing at frame images and RGBA cutouts
on disk. Builders pick a target frame, source each subject's cutout from a
*different* frame of the same scene, and render the control canvas next to
the untouched target image. Every random choice flows through one seeded
splitmix64 stream, so a corpus build is a pure function of (scenes, seed).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
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
    compose_prompt,
    parse_spec_doc,
    spec_to_doc,
)
from .compositor import make_background, render_canvas
from .errors import InsufficientDataError, InvariantError, LineError, SpecError
from .imagebuf import ImageBuffer
from .rng import Rng, derive_scene_seed

PERSON_LABEL = "Person"  # entity label that marks person boxes


@dataclass(frozen=True)
class InstanceRecord:
    identity_id: str
    mask_ref: str              # RGBA cutout path, relative to the scenes root
    bbox: tuple                # normalized (x0, y0, x1, y1)
    pose: tuple | None = None  # 18 Keypoints, or None

    def __post_init__(self):
        if not self.identity_id:
            raise InvariantError("identity_id must be nonempty")
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise InvariantError("bbox must satisfy x0<x1 and y0<y1")


@dataclass(frozen=True)
class FrameRecord:
    frame_id: str
    image_ref: str
    instances: tuple = ()


@dataclass(frozen=True)
class SceneRecord:
    scene_id: str
    frames: tuple

    def __post_init__(self):
        if not self.frames:
            raise InvariantError("scene needs at least one frame")
        ids = [f.frame_id for f in self.frames]
        if len(set(ids)) != len(ids):
            raise InvariantError("frame ids must be unique within a scene")


@dataclass(frozen=True)
class TrainingPair:
    pair_id: str
    task: TaskKind
    canvas_spec: CanvasSpec
    canvas_ref: str
    target_ref: str
    prompt: str
    meta: dict

    def __post_init__(self):
        if self.task not in (TaskKind.SPATIAL, TaskKind.POSE, TaskKind.BOX):
            raise InvariantError("training pairs cover spatial/pose/box tasks only")
        if not self.prompt.startswith(self.task.indicator):
            raise InvariantError("prompt must start with the task indicator")


def sample_task(rng: Rng) -> TaskKind:
    """Spatial, Pose, or Box, each with probability exactly 1/3."""
    return (TaskKind.SPATIAL, TaskKind.POSE, TaskKind.BOX)[rng.rand_below(3)]


# --- scene file IO -----------------------------------------------------------

def _parse_scene_doc(doc: dict) -> SceneRecord:
    frames = []
    for f in doc["frames"]:
        instances = []
        for inst in f.get("instances", []):
            pose_rows = inst.get("pose")
            pose = None
            if pose_rows is not None:
                pose = tuple(Keypoint(r[0], r[1], bool(r[2])) for r in pose_rows)
            instances.append(InstanceRecord(
                identity_id=inst["identity_id"],
                mask_ref=inst["mask_ref"],
                bbox=tuple(float(v) for v in inst["bbox"]),
                pose=pose,
            ))
        frames.append(FrameRecord(
            frame_id=f["frame_id"],
            image_ref=f["image_ref"],
            instances=tuple(instances),
        ))
    return SceneRecord(scene_id=doc["scene_id"], frames=tuple(frames))


def load_scenes(path) -> list:
    """Read scenes.jsonl; paths inside stay relative to the file's directory."""
    scenes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                scenes.append(_parse_scene_doc(doc))
            except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                raise LineError(lineno, f"bad scene record: {exc}") from None
    return scenes


# --- pair builders -----------------------------------------------------------

def _donor_candidates(scene: SceneRecord, target_idx: int, identity_id: str):
    """(frame_idx, instance_idx) pairs for an identity outside the target frame."""
    out = []
    for fi, frame in enumerate(scene.frames):
        if fi == target_idx:
            continue
        for ii, inst in enumerate(frame.instances):
            if inst.identity_id == identity_id:
                out.append((fi, ii))
    return out


def _has_cross_frame_instance(scene, target_idx) -> bool:
    frame = scene.frames[target_idx]
    return any(
        _donor_candidates(scene, target_idx, inst.identity_id)
        for inst in frame.instances
    )


def _load_rgb(root: Path, ref: str) -> ImageBuffer:
    return ImageBuffer.load_png(root / ref)


def _asset_key_for(ref: str) -> str:
    return Path(ref).with_suffix("").as_posix()


def _subject_for(inst: InstanceRecord, cutout: ImageBuffer, subject_id: str,
                 asset_key: str, width: int, height: int, z: int) -> SubjectElement:
    """Donor cutout placed at the target bbox center, scaled to its height."""
    x0, y0, x1, y1 = inst.bbox
    target_h_px = (y1 - y0) * height
    return SubjectElement(
        subject_id=subject_id,
        asset_key=asset_key,
        placement=AffinePlacement(
            center_x=(x0 + x1) / 2.0,
            center_y=(y0 + y1) / 2.0,
            scale=target_h_px / cutout.height,
            rotation_deg=0.0,
        ),
        z_order=z,
    )


def _write_canvas(spec: CanvasSpec, assets, out_dir: Path, pair_id: str) -> str:
    rendered = render_canvas(spec, assets)
    rel = f"canvases/{pair_id}.png"
    path = out_dir / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    rendered.image.save_png(path)
    return rel


def _prepare_background(scene, target_idx, root: Path, out_dir: Path):
    """Target frame image with every instance bbox masked, saved as an asset."""
    frame = scene.frames[target_idx]
    base = _load_rgb(root, frame.image_ref)
    width, height = base.width, base.height
    bg = make_background(width, height, base, [inst.bbox for inst in frame.instances])
    key = f"backgrounds/{scene.scene_id}_{frame.frame_id}"
    path = out_dir / f"{key}.png"
    path.parent.mkdir(parents=True, exist_ok=True)
    bg.save_png(path)
    return key, bg, width, height


def build_spatial_pair(scene: SceneRecord, rng: Rng, *, root, out_dir,
                       pair_id: str | None = None) -> TrainingPair:
    """Cross-frame composition canvas against the untouched target frame."""
    root, out_dir = Path(root), Path(out_dir)
    entry_state = rng.state
    eligible = [i for i in range(len(scene.frames)) if _has_cross_frame_instance(scene, i)]
    if len(scene.frames) < 2 or not eligible:
        raise InsufficientDataError(
            f"scene {scene.scene_id}: no identity appears in more than one frame"
        )
    target_idx = eligible[rng.rand_below(len(eligible))]
    frame = scene.frames[target_idx]
    if pair_id is None:
        pair_id = f"{scene.scene_id}-{frame.frame_id}-spatial"

    bg_key, bg, width, height = _prepare_background(scene, target_idx, root, out_dir)
    assets = {bg_key: bg}
    subjects = []
    sources = {}
    for ii, inst in enumerate(frame.instances):
        candidates = _donor_candidates(scene, target_idx, inst.identity_id)
        if not candidates:
            continue
        fi, di = candidates[rng.rand_below(len(candidates))]
        donor = scene.frames[fi].instances[di]
        cutout = ImageBuffer.load_png(root / donor.mask_ref)
        key = _asset_key_for(donor.mask_ref)
        assets[key] = cutout
        subject_id = f"{inst.identity_id}@{ii}"
        subjects.append(_subject_for(inst, cutout, subject_id, key, width, height, z=ii))
        sources[subject_id] = scene.frames[fi].frame_id

    spec = CanvasSpec(
        task=TaskKind.SPATIAL,
        width=width,
        height=height,
        background_asset=bg_key,
        subjects=tuple(subjects),
        user_prompt="",
    )
    canvas_ref = _write_canvas(spec, assets, out_dir, pair_id)
    return TrainingPair(
        pair_id=pair_id,
        task=TaskKind.SPATIAL,
        canvas_spec=spec,
        canvas_ref=canvas_ref,
        target_ref=frame.image_ref,
        prompt=compose_prompt(TaskKind.SPATIAL, ""),
        meta={
            "scene_id": scene.scene_id,
            "target_frame_id": frame.frame_id,
            "seed": f"0x{entry_state:016x}",
            "sources": sources,
        },
    )


def build_pose_pair(scene: SceneRecord, rng: Rng, drop_prob: float = 0.5, *,
                    root, out_dir, pair_id: str | None = None) -> TrainingPair:
    """Pose-overlay canvas; subject segments drop out independently."""
    root, out_dir = Path(root), Path(out_dir)
    entry_state = rng.state
    eligible = [
        i for i in range(len(scene.frames))
        if any(inst.pose is not None for inst in scene.frames[i].instances)
    ]
    if not eligible:
        raise InsufficientDataError(f"scene {scene.scene_id}: no instance carries a pose")
    target_idx = eligible[rng.rand_below(len(eligible))]
    frame = scene.frames[target_idx]
    if pair_id is None:
        pair_id = f"{scene.scene_id}-{frame.frame_id}-pose"

    bg_key, bg, width, height = _prepare_background(scene, target_idx, root, out_dir)
    assets = {bg_key: bg}

    # donor picks first (stream-aligned with the spatial builder), drops after
    donor_picks = []
    for ii, inst in enumerate(frame.instances):
        candidates = _donor_candidates(scene, target_idx, inst.identity_id)
        if not candidates:
            donor_picks.append(None)
            continue
        donor_picks.append(candidates[rng.rand_below(len(candidates))])

    subjects = []
    poses = []
    sources = {}
    dropped = {}
    for ii, inst in enumerate(frame.instances):
        subject_id = f"{inst.identity_id}@{ii}"
        pick = donor_picks[ii]
        if pick is not None:
            drop = rng.bernoulli(drop_prob)
            dropped[subject_id] = drop
            if not drop:
                fi, di = pick
                donor = scene.frames[fi].instances[di]
                cutout = ImageBuffer.load_png(root / donor.mask_ref)
                key = _asset_key_for(donor.mask_ref)
                assets[key] = cutout
                subjects.append(_subject_for(inst, cutout, subject_id, key,
                                             width, height, z=ii))
                sources[subject_id] = scene.frames[fi].frame_id
        if inst.pose is not None:
            poses.append(PoseElement(slot_id=subject_id, keypoints=inst.pose))

    spec = CanvasSpec(
        task=TaskKind.POSE,
        width=width,
        height=height,
        background_asset=bg_key,
        subjects=tuple(subjects),
        poses=tuple(poses),
        user_prompt="",
    )
    canvas_ref = _write_canvas(spec, assets, out_dir, pair_id)
    return TrainingPair(
        pair_id=pair_id,
        task=TaskKind.POSE,
        canvas_spec=spec,
        canvas_ref=canvas_ref,
        target_ref=frame.image_ref,
        prompt=compose_prompt(TaskKind.POSE, ""),
        meta={
            "scene_id": scene.scene_id,
            "target_frame_id": frame.frame_id,
            "seed": f"0x{entry_state:016x}",
            "sources": sources,
            "dropped": dropped,
            "drop_prob": drop_prob,
        },
    )


def build_box_pair(frame: FrameRecord, entities, prompt: str, *, root, out_dir,
                   scene_id: str = "", pair_id: str | None = None) -> TrainingPair:
    """Labeled-box canvas over a masked background; target is the frame image."""
    root, out_dir = Path(root), Path(out_dir)
    entities = list(entities)
    if not entities:
        raise InvariantError("box pair needs at least one entity")
    if pair_id is None:
        pair_id = f"{scene_id or 'frame'}-{frame.frame_id}-box"

    target = _load_rgb(root, frame.image_ref)
    boxes = tuple(
        BoxElement(label=label, rect=tuple(float(v) for v in rect),
                   is_person=(label == PERSON_LABEL))
        for label, rect in entities
    )
    spec = assign_person_ordinals(CanvasSpec(
        task=TaskKind.BOX,
        width=target.width,
        height=target.height,
        background_asset=None,
        boxes=boxes,
        user_prompt=prompt,
    ))
    canvas_ref = _write_canvas(spec, {}, out_dir, pair_id)
    return TrainingPair(
        pair_id=pair_id,
        task=TaskKind.BOX,
        canvas_spec=spec,
        canvas_ref=canvas_ref,
        target_ref=frame.image_ref,
        prompt=compose_prompt(TaskKind.BOX, prompt),
        meta={"scene_id": scene_id, "target_frame_id": frame.frame_id},
    )


# --- corpus orchestration ----------------------------------------------------

def _build_for_scene(scene: SceneRecord, corpus_seed: int, drop_prob: float,
                     per_scene: int, root: Path, out_dir: Path):
    rng = Rng(derive_scene_seed(corpus_seed, scene.scene_id))
    pairs = []
    skips = []
    for k in range(per_scene):
        task = sample_task(rng)
        pair_id = f"{scene.scene_id}-{k:03d}-{task.value}"
        try:
            if task is TaskKind.SPATIAL:
                pairs.append(build_spatial_pair(scene, rng, root=root,
                                                out_dir=out_dir, pair_id=pair_id))
            elif task is TaskKind.POSE:
                pairs.append(build_pose_pair(scene, rng, drop_prob, root=root,
                                             out_dir=out_dir, pair_id=pair_id))
            else:
                eligible = [f for f in scene.frames if f.instances]
                if not eligible:
                    raise InsufficientDataError(
                        f"scene {scene.scene_id}: no frame has instances"
                    )
                frame = eligible[rng.rand_below(len(eligible))]
                entities = [(PERSON_LABEL, inst.bbox) for inst in frame.instances]
                pairs.append(build_box_pair(frame, entities, "", root=root,
                                            out_dir=out_dir, scene_id=scene.scene_id,
                                            pair_id=pair_id))
        except InsufficientDataError as exc:
            skips.append(str(exc))
    return pairs, skips


def build_corpus(scenes, *, root, out_dir, seed: int, drop_prob: float = 0.5,
                 per_scene: int = 1, jobs: int = 1):
    """Build pairs for every scene and write the manifest.

    Per-scene seeds are derived from (seed, scene_id), so the result is
    identical no matter how scenes are scheduled across workers.
    """
    root, out_dir = Path(root), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_pairs = []
    all_skips = []
    if jobs <= 1:
        results = [
            _build_for_scene(s, seed, drop_prob, per_scene, root, out_dir)
            for s in scenes
        ]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                lambda s: _build_for_scene(s, seed, drop_prob, per_scene, root, out_dir),
                scenes,
            ))
    for pairs, skips in results:
        all_pairs.extend(pairs)
        all_skips.extend(skips)
    all_pairs.sort(key=lambda p: (p.meta.get("scene_id", ""), p.pair_id))
    write_manifest(all_pairs, out_dir / "manifest.jsonl")
    return all_pairs, all_skips


# --- manifest IO -------------------------------------------------------------

def _deep_sorted(obj):
    if isinstance(obj, dict):
        return {k: _deep_sorted(obj[k]) for k in sorted(obj)}
    if isinstance(obj, list):
        return [_deep_sorted(v) for v in obj]
    return obj


def pair_to_row(pair: TrainingPair) -> dict:
    return {
        "pair_id": pair.pair_id,
        "task": pair.task.value,
        "canvas_spec": spec_to_doc(pair.canvas_spec),
        "canvas_ref": pair.canvas_ref,
        "target_ref": pair.target_ref,
        "prompt": pair.prompt,
        "meta": _deep_sorted(pair.meta),
    }


def write_manifest(pairs, path) -> int:
    """JSONL, one pair per line, fixed key order; returns the row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_row(pair), separators=(",", ":"),
                                ensure_ascii=True))
            fh.write("\n")
    return len(pairs)


def read_manifest(path) -> list:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                pairs.append(TrainingPair(
                    pair_id=row["pair_id"],
                    task=TaskKind(row["task"]),
                    canvas_spec=parse_spec_doc(row["canvas_spec"]),
                    canvas_ref=row["canvas_ref"],
                    target_ref=row["target_ref"],
                    prompt=row["prompt"],
                    meta=row["meta"],
                ))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError, SpecError) as exc:
                raise LineError(lineno, f"bad manifest row: {exc}") from None
    return pairs
