"""Regenerates the checked-in golden fixtures: assets, specs, digests.

Run from the repo root after an intentional rendering change:

    python scripts/make_fixtures.py

Everything written here is deterministic; the digests file is what CI
compares renders against.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from c2i.canvas_spec import parse_spec
from c2i.compositor import render_canvas
from c2i.imagebuf import ImageBuffer, load_assets

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"


def clip01(v):
    return min(max(v, 0.0), 1.0)


def figure_pose(cx, cy, h, hidden=()):
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
    return [
        [round(clip01(x), 4), round(clip01(y), 4), 0 if i in hidden else 1]
        for i, (x, y) in enumerate(pts)
    ]


def make_assets(out: Path):
    out.mkdir(parents=True, exist_ok=True)

    # soft-edged ellipse with a radial color ramp
    h, w = 56, 40
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    r = np.sqrt(((xs - w / 2) / (w / 2)) ** 2 + ((ys - h / 2) / (h / 2)) ** 2)
    arr = np.zeros((h, w, 4), dtype=np.uint8)
    arr[:, :, 0] = np.clip(240 - 160 * r, 0, 255).astype(np.uint8)
    arr[:, :, 1] = np.clip(90 + 120 * r, 0, 255).astype(np.uint8)
    arr[:, :, 2] = 60
    arr[:, :, 3] = np.where(r <= 1.0, np.clip(255 * (1.15 - r) / 0.3, 0, 255), 0).astype(np.uint8)
    ImageBuffer(arr).save_png(out / "cutout_round.png")

    # opaque square with a contrasting border
    s = 32
    arr = np.zeros((s, s, 4), dtype=np.uint8)
    arr[:, :] = (200, 60, 40, 255)
    arr[:3, :, :3] = arr[-3:, :, :3] = (20, 20, 160)
    arr[:, :3, :3] = arr[:, -3:, :3] = (20, 20, 160)
    ImageBuffer(arr).save_png(out / "cutout_square.png")

    # ring with a transparent hole
    s = 48
    ys, xs = np.mgrid[0:s, 0:s].astype(np.float64)
    r = np.sqrt((xs - s / 2) ** 2 + (ys - s / 2) ** 2)
    arr = np.zeros((s, s, 4), dtype=np.uint8)
    ring = (r >= 10) & (r <= 22)
    arr[ring] = (60, 120, 220, 255)
    ImageBuffer(arr).save_png(out / "cutout_ring.png")

    # vertical alpha gradient
    h, w = 48, 36
    arr = np.zeros((h, w, 4), dtype=np.uint8)
    arr[:, :, :3] = (70, 160, 90)
    arr[:, :, 3] = np.linspace(255, 0, h, dtype=np.uint8)[:, None]
    ImageBuffer(arr).save_png(out / "cutout_soft.png")

    # small RGB background, forces a real resample
    h, w = 60, 80
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    arr = np.zeros((h, w, 3), dtype=np.uint8)
    arr[:, :, 0] = (255 * xs / (w - 1)).astype(np.uint8)
    arr[:, :, 1] = (255 * ys / (h - 1)).astype(np.uint8)
    arr[:, :, 2] = (255 * (1 - xs / (w - 1)) * (1 - ys / (h - 1))).astype(np.uint8)
    ImageBuffer(arr).save_png(out / "bg_gradient.png")


def make_specs(out: Path):
    out.mkdir(parents=True, exist_ok=True)

    def subject(sid, asset, cx, cy, scale, rot=0.0, z=0):
        return {"id": sid, "asset": asset,
                "placement": {"cx": cx, "cy": cy, "scale": scale, "rotation": rot},
                "z": z}

    specs = {
        "01_spatial_empty": {
            "task": "spatial", "width": 256, "height": 256,
            "background": "masked", "subjects": [], "prompt": "an empty stage",
        },
        "02_spatial_one_subject": {
            "task": "spatial", "width": 192, "height": 192,
            "background": "masked",
            "subjects": [subject("a", "cutout_round", 0.5, 0.5, 2.0)],
            "prompt": "a portrait",
        },
        "03_spatial_multi_z": {
            "task": "spatial", "width": 256, "height": 192,
            "background": "masked",
            "subjects": [
                subject("a", "cutout_round", 0.35, 0.5, 1.5, 30.0, z=2),
                subject("b", "cutout_square", 0.5, 0.55, 2.5, -45.0, z=0),
                subject("c", "cutout_ring", 0.65, 0.5, 2.0, 0.0, z=1),
            ],
            "prompt": "three friends at a cafe",
        },
        "04_spatial_bg": {
            "task": "spatial", "width": 224, "height": 160,
            "background": {"asset": "bg_gradient"},
            "subjects": [subject("a", "cutout_square", 0.3, 0.6, 1.8, 15.0)],
            "prompt": "a crate on a sunset beach",
        },
        "05_spatial_offcanvas": {
            "task": "spatial", "width": 128, "height": 128,
            "background": "masked",
            "subjects": [
                subject("a", "cutout_ring", 0.0, 1.0, 3.0),
                subject("b", "cutout_soft", 0.98, 0.02, 1.2, -90.0, z=1),
            ],
            "prompt": "edge cases",
        },
        "06_pose_only": {
            "task": "pose", "width": 256, "height": 256,
            "background": "masked",
            "poses": [
                {"id": "p1", "keypoints": figure_pose(0.3, 0.5, 0.7)},
                {"id": "p2", "keypoints": figure_pose(0.7, 0.55, 0.6, hidden=(4, 7, 16, 17)),
                 "confidence": 0.9},
            ],
            "prompt": "two dancers",
        },
        "07_pose_subjects": {
            "task": "pose", "width": 240, "height": 180,
            "background": {"asset": "bg_gradient"},
            "subjects": [subject("a", "cutout_round", 0.4, 0.5, 2.2)],
            "poses": [{"id": "a", "keypoints": figure_pose(0.4, 0.5, 0.8)}],
            "prompt": "a figure by the window",
            "pose_alpha": 0.35,
        },
        "08_pose_alpha1": {
            "task": "pose", "width": 96, "height": 96,
            "background": "masked",
            "poses": [{"id": "p", "keypoints": figure_pose(0.5, 0.5, 0.8)}],
            "prompt": "skeleton only",
            "pose_alpha": 1.0,
        },
        "09_box_simple": {
            "task": "box", "width": 320, "height": 240,
            "background": "masked",
            "boxes": [
                {"label": "Person", "rect": [0.55, 0.2, 0.8, 0.85], "person": True},
                {"label": "Person", "rect": [0.1, 0.25, 0.38, 0.9], "person": True},
                {"label": "Stone", "rect": [0.4, 0.65, 0.52, 0.8]},
            ],
            "prompt": "two people and a stone",
        },
        "10_box_many": {
            "task": "box", "width": 256, "height": 256,
            "background": "masked",
            "boxes": (
                [{"label": f"obj{i}",
                  "rect": [round(0.02 + 0.1 * i, 3), round(0.03 + 0.09 * i, 3),
                           round(0.14 + 0.1 * i, 3), round(0.16 + 0.09 * i, 3)]}
                 for i in range(8)]
                + [{"label": "a very long label that clips at the box edge",
                    "rect": [0.1, 0.85, 0.55, 0.98]}]
            ),
            "prompt": "a cluttered shelf",
        },
        "11_multi_full": {
            "task": "multi", "width": 320, "height": 256,
            "background": {"asset": "bg_gradient"},
            "subjects": [
                subject("a", "cutout_round", 0.15, 0.55, 1.6, 0.0, z=0),
                subject("b", "cutout_square", 0.38, 0.6, 1.9, 20.0, z=1),
                subject("c", "cutout_ring", 0.62, 0.55, 1.7, 0.0, z=2),
                subject("d", "cutout_soft", 0.85, 0.6, 1.5, -10.0, z=3),
            ],
            "poses": [
                {"id": "a", "keypoints": figure_pose(0.15, 0.55, 0.6)},
                {"id": "c", "keypoints": figure_pose(0.62, 0.55, 0.65)},
            ],
            "boxes": [
                {"label": "Person", "rect": [0.05, 0.2, 0.28, 0.9], "person": True},
                {"label": "Person", "rect": [0.52, 0.22, 0.75, 0.88], "person": True},
                {"label": "Stone", "rect": [0.4, 0.7, 0.5, 0.82]},
            ],
            "prompt": "full control stack",
        },
        "12_multi_min": {
            "task": "multi", "width": 64, "height": 64,
            "background": "masked",
            "subjects": [subject("a", "cutout_square", 0.5, 0.6, 0.5)],
            "poses": [{"id": "a", "keypoints": figure_pose(0.5, 0.5, 0.7)}],
            "boxes": [{"label": "P", "rect": [0.1, 0.1, 0.9, 0.95], "person": True}],
            "prompt": "tiny",
        },
    }
    for name, doc in specs.items():
        if isinstance(doc.get("boxes"), tuple):
            doc["boxes"] = list(doc["boxes"])
        (out / f"{name}.json").write_text(
            json.dumps(doc, indent=2) + "\n", encoding="utf-8"
        )


def freeze_digests():
    assets = load_assets(FIXTURES / "assets")
    digests = {}
    for path in sorted((FIXTURES / "specs").glob("*.json")):
        spec = parse_spec(path.read_text(encoding="utf-8"))
        rendered = render_canvas(spec, assets)
        digests[path.stem] = {
            "png_sha256": hashlib.sha256(rendered.image.to_png_bytes()).hexdigest(),
            "prompt": rendered.prompt,
            "spec_digest": rendered.provenance,
        }
    golden = FIXTURES / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    (golden / "digests.json").write_text(
        json.dumps(digests, indent=2) + "\n", encoding="utf-8"
    )
    print(f"froze {len(digests)} digests")


if __name__ == "__main__":
    make_assets(FIXTURES / "assets")
    make_specs(FIXTURES / "specs")
    freeze_digests()
