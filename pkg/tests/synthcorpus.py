"""Deterministic synthetic scene corpus for dataset tests.

Writes small frame images and RGBA cutouts plus a scenes.jsonl that the
corpus builder can consume. Everything derives from one Rng seed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from c2i.imagebuf import ImageBuffer
from c2i.rng import Rng

FRAME_W, FRAME_H = 96, 72
CUT_W, CUT_H = 16, 24


def _frame_image(rng: Rng) -> ImageBuffer:
    base = np.zeros((FRAME_H, FRAME_W, 3), dtype=np.uint8)
    base[:, :, 0] = rng.rand_below(200) + 20
    base[:, :, 1] = np.linspace(30, 220, FRAME_W, dtype=np.uint8)[None, :]
    base[:, :, 2] = rng.rand_below(200) + 20
    return ImageBuffer(base)


def _cutout(rng: Rng) -> ImageBuffer:
    arr = np.zeros((CUT_H, CUT_W, 4), dtype=np.uint8)
    color = (rng.rand_below(200) + 55, rng.rand_below(200) + 55, rng.rand_below(200) + 55)
    ys, xs = np.mgrid[0:CUT_H, 0:CUT_W]
    inside = ((xs - CUT_W / 2) / (CUT_W / 2)) ** 2 + ((ys - CUT_H / 2) / (CUT_H / 2)) ** 2 <= 1.0
    arr[inside] = (*color, 255)
    return ImageBuffer(arr)


def _figure_pose(cx: float, cy: float, h: float):
    """18 visible keypoints of a rough standing figure, clipped to [0,1]."""
    sw, hw = 0.12 * h, 0.07 * h
    head = cy - h / 2
    neck = head + 0.15 * h
    hip = cy + 0.1 * h
    knee = cy + 0.3 * h
    ankle = cy + 0.48 * h
    pts = [
        (cx, head + 0.05 * h), (cx, neck),
        (cx - sw, neck), (cx - sw - 0.03 * h, neck + 0.12 * h), (cx - sw - 0.05 * h, neck + 0.24 * h),
        (cx + sw, neck), (cx + sw + 0.03 * h, neck + 0.12 * h), (cx + sw + 0.05 * h, neck + 0.24 * h),
        (cx - hw, hip), (cx - hw, knee), (cx - hw, ankle),
        (cx + hw, hip), (cx + hw, knee), (cx + hw, ankle),
        (cx - 0.02 * h, head + 0.03 * h), (cx + 0.02 * h, head + 0.03 * h),
        (cx - 0.04 * h, head + 0.05 * h), (cx + 0.04 * h, head + 0.05 * h),
    ]
    clip = lambda v: min(max(v, 0.0), 1.0)
    return [[clip(x), clip(y), 1] for x, y in pts]


def write_corpus(root: Path, num_scenes: int, seed: int = 2024) -> Path:
    """Write PNGs + scenes.jsonl under root; returns the scenes.jsonl path."""
    root = Path(root)
    rng = Rng(seed)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    (root / "cutouts").mkdir(parents=True, exist_ok=True)
    rows = []
    for s in range(num_scenes):
        scene_id = f"scene-{s:04d}"
        num_frames = 2 + rng.rand_below(2)
        num_ids = 1 + rng.rand_below(2)
        identities = [f"{scene_id}-id{k}" for k in range(num_ids)]
        frames = []
        for f in range(num_frames):
            frame_id = f"f{f}"
            image_rel = f"frames/{scene_id}_{frame_id}.png"
            _frame_image(rng).save_png(root / image_rel)
            instances = []
            for k, identity in enumerate(identities):
                cut_rel = f"cutouts/{scene_id}_{frame_id}_{k}.png"
                _cutout(rng).save_png(root / cut_rel)
                cx = 0.2 + 0.6 * rng.rand_float()
                cy = 0.35 + 0.3 * rng.rand_float()
                w = 0.1 + 0.1 * rng.rand_float()
                h = 0.25 + 0.15 * rng.rand_float()
                bbox = [
                    max(cx - w / 2, 0.0), max(cy - h / 2, 0.0),
                    min(cx + w / 2, 1.0), min(cy + h / 2, 1.0),
                ]
                instances.append({
                    "identity_id": identity,
                    "mask_ref": cut_rel,
                    "bbox": bbox,
                    "pose": _figure_pose(cx, cy, h),
                })
            frames.append({
                "frame_id": frame_id,
                "image_ref": image_rel,
                "instances": instances,
            })
        rows.append({"scene_id": scene_id, "frames": frames})
    scenes_path = root / "scenes.jsonl"
    with open(scenes_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
    return scenes_path
