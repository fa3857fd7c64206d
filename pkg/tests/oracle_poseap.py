"""Independent straight-line reimplementation of keypoint AP.

Written against the evaluation rules alone, before the optimized module,
and kept free of any c2i imports so the two routes cannot share bugs.
Plain dicts and loops only; small inputs (a few persons per image).
"""

import math

# 18-entry per-keypoint constants: COCO sigmas x2, neck reuses the shoulder value.
ORACLE_K = [
    2 * s for s in (
        0.026, 0.079, 0.079, 0.072, 0.062, 0.079, 0.072, 0.062,
        0.107, 0.087, 0.089, 0.107, 0.087, 0.089,
        0.025, 0.025, 0.035, 0.035,
    )
]


def oracle_oks(gt, pred):
    """gt/pred: {"xy": [(x, y)] * 18, "visible": [bool] * 18, "area": float}."""
    total = 0.0
    count = 0
    for i in range(18):
        if not gt["visible"][i]:
            continue
        dx = gt["xy"][i][0] - pred["xy"][i][0]
        dy = gt["xy"][i][1] - pred["xy"][i][1]
        d2 = dx * dx + dy * dy
        total += math.exp(-d2 / (2.0 * gt["area"] * ORACLE_K[i] ** 2))
        count += 1
    if count == 0:
        raise ValueError("no visible gt keypoints")
    return total / count


def oracle_ap(gt_by_image, pred_by_image, threshold=0.5):
    """101-point interpolated AP with greedy per-image OKS matching.

    Predictions are matched in confidence order (ties by list index) to the
    unmatched gt with the highest OKS; only matches at or above the
    threshold consume a gt and count as true positives.
    """
    num_gt = sum(len(v) for v in gt_by_image.values())
    ranked = []  # (confidence, image_id, index, is_tp)
    image_ids = sorted(set(gt_by_image) | set(pred_by_image))
    for image_id in image_ids:
        gts = gt_by_image.get(image_id, [])
        preds = pred_by_image.get(image_id, [])
        order = sorted(range(len(preds)), key=lambda i: (-preds[i]["confidence"], i))
        taken = [False] * len(gts)
        for pred_idx in order:
            pred = preds[pred_idx]
            best_gt = None
            best_oks = -1.0
            for gt_idx, gt in enumerate(gts):
                if taken[gt_idx]:
                    continue
                oks = oracle_oks(gt, pred)
                if oks > best_oks:
                    best_oks = oks
                    best_gt = gt_idx
            is_tp = best_gt is not None and best_oks >= threshold
            if is_tp:
                taken[best_gt] = True
            ranked.append((pred["confidence"], image_id, pred_idx, is_tp))

    ranked.sort(key=lambda row: (-row[0], row[1], row[2]))
    if num_gt == 0:
        return 0.0

    precisions = []
    recalls = []
    tp = 0
    for rank, row in enumerate(ranked, start=1):
        if row[3]:
            tp += 1
        precisions.append(tp / rank)
        recalls.append(tp / num_gt)

    ap_total = 0.0
    for step in range(101):
        r = step / 100.0
        best = 0.0
        for precision, recall in zip(precisions, recalls):
            if recall >= r and precision > best:
                best = precision
        ap_total += best
    return ap_total / 101.0
