"""Keypoint similarity and average precision for pose adherence scoring.

Similarity follows the standard object-keypoint form: a Gaussian of the
squared distance scaled by object area and per-keypoint constants. AP is
the 101-point interpolated area under the precision/recall curve at a
single similarity threshold (0.5 by default).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateError, InvariantError, LineError
from .canvas_spec import POSE_KEYPOINT_COUNT

# Per-keypoint tolerance constants, BODY-18 order: COCO sigmas doubled,
# with the neck reusing the shoulder value.
KEYPOINT_K = np.array(
    [
        2 * s for s in (
            0.026, 0.079, 0.079, 0.072, 0.062, 0.079, 0.072, 0.062,
            0.107, 0.087, 0.089, 0.107, 0.087, 0.089,
            0.025, 0.025, 0.035, 0.035,
        )
    ],
    dtype=np.float64,
)

_RECALL_GRID = np.arange(101, dtype=np.float64) / 100.0


@dataclass(frozen=True, eq=False)
class KeypointSet:
    """One person's 18 keypoints plus the normalized bounding-box area."""

    xy: np.ndarray        # (18, 2) float64, normalized coordinates
    visible: np.ndarray   # (18,) bool
    area: float
    confidence: float = 1.0

    def __post_init__(self):
        xy = np.ascontiguousarray(np.asarray(self.xy, dtype=np.float64))
        visible = np.ascontiguousarray(np.asarray(self.visible, dtype=bool))
        if xy.shape != (POSE_KEYPOINT_COUNT, 2):
            raise InvariantError(f"expected ({POSE_KEYPOINT_COUNT}, 2) coordinates, got {xy.shape}")
        if visible.shape != (POSE_KEYPOINT_COUNT,):
            raise InvariantError(f"expected {POSE_KEYPOINT_COUNT} visibility flags")
        if not self.area > 0:
            raise InvariantError("area must be positive")
        if not visible.any():
            raise DegenerateError("keypoint set has no visible keypoints")
        if not (0.0 <= self.confidence <= 1.0):
            raise InvariantError("confidence must lie in [0,1]")
        xy.setflags(write=False)
        visible.setflags(write=False)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "visible", visible)
        object.__setattr__(self, "area", float(self.area))
        object.__setattr__(self, "confidence", float(self.confidence))

    @classmethod
    def from_rows(cls, rows, area: float, confidence: float = 1.0) -> "KeypointSet":
        """Build from 18 [x, y, v] rows."""
        rows = list(rows)
        xy = [(r[0], r[1]) for r in rows]
        vis = [bool(r[2]) for r in rows]
        return cls(np.array(xy, dtype=np.float64), np.array(vis, dtype=bool), area, confidence)


@dataclass(frozen=True)
class MatchRecord:
    pred_index: int
    confidence: float
    gt_index: int | None
    oks: float
    is_tp: bool


@dataclass(frozen=True)
class PerImageMatches:
    image_id: str
    matches: tuple  # MatchRecords in confidence order


@dataclass(frozen=True)
class ApResult:
    ap: float
    true_positives: int
    num_gt: int
    num_pred: int
    per_image: tuple  # PerImageMatches


def compute_oks(gt: KeypointSet, pred: KeypointSet) -> float:
    """Mean Gaussian similarity over the gt-visible keypoints, in [0, 1]."""
    if not gt.visible.any():
        raise DegenerateError("gt has no visible keypoints")
    d2 = ((gt.xy - pred.xy) ** 2).sum(axis=1)
    per_kp = np.exp(-d2 / (2.0 * gt.area * KEYPOINT_K**2))
    return float(per_kp[gt.visible].mean())


def _match_image(image_id: str, gts, preds, threshold: float) -> PerImageMatches:
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    taken = [False] * len(gts)
    records = []
    for pred_idx in order:
        pred = preds[pred_idx]
        best_gt = None
        best_oks = -1.0
        for gt_idx, gt in enumerate(gts):
            if taken[gt_idx]:
                continue
            oks = compute_oks(gt, pred)
            if oks > best_oks:
                best_oks = oks
                best_gt = gt_idx
        is_tp = best_gt is not None and best_oks >= threshold
        if is_tp:
            taken[best_gt] = True
        records.append(MatchRecord(
            pred_index=pred_idx,
            confidence=preds[pred_idx].confidence,
            gt_index=best_gt if is_tp else None,
            oks=best_oks if best_gt is not None else 0.0,
            is_tp=is_tp,
        ))
    return PerImageMatches(image_id=image_id, matches=tuple(records))


def interpolated_ap(tp_flags, num_gt: int) -> float:
    """101-point interpolated AP from globally ranked true-positive flags."""
    if num_gt == 0 or not tp_flags:
        return 0.0
    flags = np.asarray(tp_flags, dtype=bool)
    tp_cum = np.cumsum(flags)
    ranks = np.arange(1, len(flags) + 1, dtype=np.float64)
    precisions = tp_cum / ranks
    recalls = tp_cum / float(num_gt)
    # max precision at recall >= r, for each grid point
    ap = 0.0
    for r in _RECALL_GRID:
        eligible = precisions[recalls >= r]
        ap += float(eligible.max()) if eligible.size else 0.0
    return ap / len(_RECALL_GRID)


def pose_ap(gt_by_image: dict, pred_by_image: dict, oks_threshold: float = 0.5) -> ApResult:
    """Greedy per-image matching, then global 101-point interpolated AP.

    Image ids missing from either side are treated as empty lists. The
    global ranking is ordered by (confidence desc, image id asc, list
    index asc) so parallel per-image matching cannot reorder results.
    """
    image_ids = sorted(set(gt_by_image) | set(pred_by_image))
    per_image = []
    ranked = []  # (confidence, image_id, pred_index, is_tp)
    num_gt = 0
    num_pred = 0
    for image_id in image_ids:
        gts = gt_by_image.get(image_id, [])
        preds = pred_by_image.get(image_id, [])
        num_gt += len(gts)
        num_pred += len(preds)
        matches = _match_image(image_id, gts, preds, oks_threshold)
        per_image.append(matches)
        for record in matches.matches:
            ranked.append((record.confidence, image_id, record.pred_index, record.is_tp))

    ranked.sort(key=lambda row: (-row[0], row[1], row[2]))
    tp_flags = [row[3] for row in ranked]
    return ApResult(
        ap=interpolated_ap(tp_flags, num_gt),
        true_positives=sum(tp_flags),
        num_gt=num_gt,
        num_pred=num_pred,
        per_image=tuple(per_image),
    )


# --- keypoint file format ---------------------------------------------------
# {"image_id": [{"keypoints": [[x, y, v], ...x18], "area": a, "confidence": c}]}

def load_keypoint_file(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LineError(exc.lineno, f"malformed keypoint JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InvariantError("keypoint file must map image ids to person lists")
    result = {}
    for image_id, persons in doc.items():
        sets = []
        for person in persons:
            sets.append(KeypointSet.from_rows(
                person["keypoints"],
                area=person["area"],
                confidence=person.get("confidence", 1.0),
            ))
        result[image_id] = sets
    return result
