"""Evaluation reports: CSV tables plus matplotlib figures rendered to files."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .posekit import ApResult


def _ranked_rows(result: ApResult):
    rows = []
    for per_image in result.per_image:
        for record in per_image.matches:
            rows.append((record.confidence, per_image.image_id, record.pred_index,
                         record.gt_index, record.oks, record.is_tp))
    rows.sort(key=lambda r: (-r[0], r[1], r[2]))
    return rows


def write_pose_report(result: ApResult, out_dir, threshold: float) -> list:
    """matches.csv + PR-curve figure; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _ranked_rows(result)

    csv_path = out_dir / "matches.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "pred_index", "confidence", "gt_index", "oks", "tp"])
        for conf, image_id, pred_idx, gt_idx, oks, tp in rows:
            writer.writerow([image_id, pred_idx, f"{conf:.6f}",
                             "" if gt_idx is None else gt_idx, f"{oks:.6f}", int(tp)])

    fig_path = out_dir / "pr_curve.png"
    fig, ax = plt.subplots(figsize=(5, 4))
    if rows and result.num_gt:
        flags = np.array([r[5] for r in rows], dtype=bool)
        tp_cum = np.cumsum(flags)
        precision = tp_cum / np.arange(1, len(flags) + 1)
        recall = tp_cum / result.num_gt
        ax.plot(np.concatenate([[0.0], recall]),
                np.concatenate([[1.0], precision]), drawstyle="steps-post")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_title(f"keypoint AP@{threshold:g} = {result.ap:.4f}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return [csv_path, fig_path]


def write_layout_report(mean_iou: float, per_box, out_dir) -> list:
    """per_box.csv + IoU bar chart; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    csv_path = out_dir / "per_box.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "iou", "matched_index"])
        for score in per_box:
            writer.writerow([score.label, f"{score.iou:.6f}",
                             "" if score.matched_index is None else score.matched_index])

    fig_path = out_dir / "layout_iou.png"
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(per_box) + 2), 4))
    labels = [f"{i}:{s.label}" for i, s in enumerate(per_box)]
    ax.bar(range(len(per_box)), [s.iou for s in per_box], color="#4878a8")
    ax.axhline(mean_iou, color="#b04030", linestyle="--",
               label=f"mean IoU = {mean_iou:.3f}")
    ax.set_xticks(range(len(per_box)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("IoU")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return [csv_path, fig_path]
