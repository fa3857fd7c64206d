"""Command-line entry point for batch use of the toolkit.

Exit codes: 0 success, 1 validation/metric failure, 2 usage error.
Diagnostics go to stderr; machine output goes to files or stdout.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .bench import BenchmarkInputs, BenchmarkMode, build_benchmark_canvas
from .canvas_spec import TaskKind, parse_spec, spec_to_doc, validate_spec
from .compositor import render_canvas
from .dataset import build_corpus, load_scenes
from .errors import C2IError, ParseError
from .evalkit import (
    HttpJudgeClient,
    ReplayJudgeClient,
    controlqa_prompt_for,
    layout_adherence,
    run_controlqa,
)
from .flowcore import flow_matching_loss, gradient_check, velocity_target
from .imagebuf import load_assets
from .posekit import load_keypoint_file, pose_ap
from .rng import Rng

_TASK_CHOICES = [t.value for t in TaskKind]


def _fail(message: str) -> "SystemExit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(1)


@click.group()
@click.version_option(version=__version__, prog_name="c2i")
def main():
    """Compositional-control canvas toolkit."""


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="Canvas spec JSON document.")
@click.option("--assets", "assets_dir", type=click.Path(exists=True, file_okay=False),
              help="Directory of PNG assets (keys = extension-less relative paths).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output canvas PNG; a sidecar <out>.json carries prompt and digest.")
def render(spec_path, assets_dir, out_path):
    """Render a canvas spec to a PNG plus sidecar metadata."""
    try:
        spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
        assets = load_assets(assets_dir) if assets_dir else {}
        rendered = render_canvas(spec, assets)
    except C2IError as exc:
        raise _fail(str(exc))
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    rendered.image.save_png(out)
    sidecar = {"prompt": rendered.prompt, "spec_digest": rendered.provenance}
    Path(str(out) + ".json").write_text(
        json.dumps(sidecar, separators=(",", ":")) + "\n", encoding="utf-8"
    )
    click.echo(f"wrote {out}", err=True)


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--assets", "assets_dir", type=click.Path(exists=True, file_okay=False))
def validate(spec_path, assets_dir):
    """Validate a spec against its assets; report JSON on stdout."""
    try:
        spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
    except C2IError as exc:
        raise _fail(str(exc))
    report = validate_spec(spec, load_assets(assets_dir) if assets_dir else {})
    click.echo(json.dumps(report.to_doc(), indent=2))
    if not report.ok:
        raise SystemExit(1)


@main.group()
def dataset():
    """Training-pair construction."""


@dataset.command("build")
@click.option("--scenes", "scenes_path", required=True, type=click.Path(exists=True),
              help="scenes.jsonl; asset paths inside are relative to its directory.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int,
              help="Corpus seed; per-scene streams derive from it.")
@click.option("--drop-prob", default=0.5, show_default=True, type=float,
              help="Segment drop probability for pose pairs.")
@click.option("--per-scene", default=1, show_default=True, type=int,
              help="Pairs to sample per scene.")
@click.option("--jobs", default=None, type=int,
              help="Parallel scene builds (default: logical CPUs).")
def dataset_build(scenes_path, out_dir, seed, drop_prob, per_scene, jobs):
    """Build the cross-frame pair corpus and manifest.jsonl."""
    import os

    if jobs is None:
        jobs = os.cpu_count() or 1
    try:
        scenes = load_scenes(scenes_path)
        pairs, skips = build_corpus(
            scenes,
            root=Path(scenes_path).parent,
            out_dir=out_dir,
            seed=seed,
            drop_prob=drop_prob,
            per_scene=per_scene,
            jobs=jobs,
        )
    except C2IError as exc:
        raise _fail(str(exc))
    for skip in skips:
        click.echo(f"skipped: {skip}", err=True)
    click.echo(f"built {len(pairs)} pairs ({len(skips)} skipped) -> {out_dir}", err=True)


@main.group()
def bench():
    """Benchmark canvas suites."""


@bench.command("gen")
@click.option("--mode", required=True, type=click.Choice([m.value for m in BenchmarkMode]))
@click.option("--inputs", "inputs_path", required=True, type=click.Path(exists=True))
@click.option("--assets", "assets_dir", type=click.Path(exists=True, file_okay=False),
              help="Identity cutouts referenced by the input rows.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def bench_gen(mode, inputs_path, assets_dir, out_dir):
    """Emit one canvas spec JSON per benchmark row."""
    from .bench import load_benchmark_inputs

    try:
        assets = load_assets(assets_dir) if assets_dir else {}
        inputs = load_benchmark_inputs(inputs_path, assets)
        specs = build_benchmark_canvas(BenchmarkMode(mode), inputs)
    except (C2IError, KeyError) as exc:
        raise _fail(str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for row, spec in zip(inputs.rows, specs):
        path = out / f"{row['id']}.json"
        path.write_text(json.dumps(spec_to_doc(spec), indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {len(specs)} specs -> {out_dir}", err=True)


@main.group(name="eval")
def eval_group():
    """Control-adherence metrics."""


@eval_group.command("pose")
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--thr", default=0.5, show_default=True, type=float,
              help="OKS threshold for a true positive.")
@click.option("--report", "report_dir", type=click.Path(),
              help="Write matches.csv and pr_curve.png here.")
def eval_pose(gt_path, pred_path, thr, report_dir):
    """Keypoint AP between ground-truth and predicted keypoint files."""
    try:
        gt = load_keypoint_file(gt_path)
        pred = load_keypoint_file(pred_path)
        result = pose_ap(gt, pred, oks_threshold=thr)
    except C2IError as exc:
        raise _fail(str(exc))
    click.echo(f"ap={result.ap:.6f}")
    click.echo(f"tp={result.true_positives} gt={result.num_gt} pred={result.num_pred}")
    if report_dir:
        from .report import write_pose_report

        for path in write_pose_report(result, report_dir, thr):
            click.echo(f"wrote {path}", err=True)


@eval_group.command("layout")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="Canvas spec whose boxes define the target layout.")
@click.option("--detected", "detected_path", required=True, type=click.Path(exists=True),
              help='JSON array of {"label", "rect"} detections.')
@click.option("--report", "report_dir", type=click.Path(),
              help="Write per_box.csv and layout_iou.png here.")
def eval_layout(spec_path, detected_path, report_dir):
    """Mean IoU of detected boxes against a spec's layout."""
    try:
        spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
        detected_doc = json.loads(Path(detected_path).read_text(encoding="utf-8"))
        spec_boxes = [(b.label, b.rect) for b in spec.boxes]
        detected = [(d["label"], tuple(d["rect"])) for d in detected_doc]
        mean_iou, per_box = layout_adherence(spec_boxes, detected)
    except (C2IError, KeyError, TypeError) as exc:
        raise _fail(str(exc))
    click.echo(f"mean_iou={mean_iou:.6f}")
    if report_dir:
        from .report import write_layout_report

        for path in write_layout_report(mean_iou, per_box, report_dir):
            click.echo(f"wrote {path}", err=True)


@main.group()
def controlqa():
    """LLM-judge protocol."""


@controlqa.command("export")
@click.option("--task", required=True, type=click.Choice(_TASK_CHOICES))
@click.option("--out", "out_path", type=click.Path(),
              help="Write the prompt here instead of stdout.")
def controlqa_export(task, out_path):
    """Print the verbatim system prompt for a task."""
    prompt = controlqa_prompt_for(TaskKind(task))
    if out_path:
        Path(out_path).write_text(prompt, encoding="utf-8")
        click.echo(f"wrote {out_path}", err=True)
    else:
        click.echo(prompt, nl=False)


@controlqa.command("run")
@click.option("--task", required=True, type=click.Choice(_TASK_CHOICES))
@click.option("--images", required=True, multiple=True, type=click.Path(exists=True),
              help="Ordered images per the task protocol (repeat the flag).")
@click.option("--replay", "replay_path", type=click.Path(exists=True),
              help="Use a canned response file instead of the HTTP backend.")
@click.option("--out", "out_path", type=click.Path(),
              help="Append the verdict JSON here instead of stdout.")
def controlqa_run(task, images, replay_path, out_path):
    """Score one generation against its control images."""
    if replay_path:
        client = ReplayJudgeClient([Path(replay_path).read_text(encoding="utf-8")])
    else:
        try:
            client = HttpJudgeClient()
        except C2IError as exc:
            raise _fail(str(exc))
    try:
        verdict = run_controlqa(TaskKind(task), list(images), client)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        click.echo(f"raw response:\n{exc.raw}", err=True)
        raise SystemExit(1)
    except C2IError as exc:
        raise _fail(str(exc))
    doc = json.dumps(verdict.to_doc(), separators=(",", ":"))
    if out_path:
        with open(out_path, "a", encoding="utf-8") as fh:
            fh.write(doc + "\n")
        click.echo(f"wrote {out_path}", err=True)
    else:
        click.echo(doc)


@main.command()
@click.option("--dims", default=16, show_default=True, type=int)
@click.option("--trials", default=1000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
def flowcheck(dims, trials, seed):
    """Gradient-check the velocity loss against finite differences."""
    rng = Rng(seed)
    worst = 0.0
    losses_ok = True
    for _ in range(trials):
        x0 = [rng.rand_float() * 4 - 2 for _ in range(dims)]
        x1 = [rng.rand_float() * 4 - 2 for _ in range(dims)]
        target = velocity_target(x0, x1)
        # keep residuals away from zero: central differences lose all
        # significant digits where the true gradient vanishes
        delta = [
            (0.05 + rng.rand_float()) * (1 if rng.bernoulli(0.5) else -1)
            for _ in range(dims)
        ]
        pred = [t + d for t, d in zip(target, delta)]
        worst = max(worst, gradient_check(pred, x0, x1))
        if flow_matching_loss(pred, x0, x1) < 0:
            losses_ok = False
        if flow_matching_loss(target, x0, x1) != 0.0:
            losses_ok = False
    passed = worst < 1e-6 and losses_ok
    click.echo(f"trials={trials} dims={dims} max_rel_err={worst:.3e} "
               f"loss_identities={'ok' if losses_ok else 'FAILED'}")
    click.echo("flowcheck: PASS" if passed else "flowcheck: FAIL")
    if not passed:
        raise SystemExit(1)


@main.command()
@click.option("--port", default=8787, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--static", "static_dir", type=click.Path(file_okay=False),
              help="Serve a built UI from this directory at /.")
def serve(port, host, static_dir):
    """Run the render/validate HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
