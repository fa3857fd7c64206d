"""Compositional-control canvas toolkit.

Compiles subject cutouts, pose skeletons, and labeled boxes into a single
deterministic control canvas; builds cross-frame training pairs and
benchmark suites; scores control adherence with keypoint AP, layout IoU,
and an LLM-judge protocol.
"""

__version__ = "0.1.0"

from .canvas_spec import (
    AffinePlacement,
    BoxElement,
    CanvasSpec,
    Keypoint,
    PoseElement,
    SubjectElement,
    TaskKind,
    ValidationReport,
    assign_person_ordinals,
    compose_prompt,
    parse_spec,
    serialize_spec,
    spec_digest,
    validate_spec,
)
from .compositor import (
    RenderedCanvas,
    draw_box_annotation,
    make_background,
    overlay_pose,
    paste_segment,
    render_canvas,
)
from .imagebuf import AssetMap, ImageBuffer, load_assets
from .posekit import ApResult, KeypointSet, compute_oks, pose_ap
from .flowcore import (
    FlowSample,
    flow_matching_loss,
    interpolate_latent,
    loss_gradient,
    velocity_target,
)
from .rng import Rng
from .dataset import (
    FrameRecord,
    InstanceRecord,
    SceneRecord,
    TrainingPair,
    build_box_pair,
    build_corpus,
    build_pose_pair,
    build_spatial_pair,
    read_manifest,
    sample_task,
    write_manifest,
)
from .bench import BenchmarkInputs, BenchmarkMode, build_benchmark_canvas
from .evalkit import (
    ControlQaVerdict,
    HttpJudgeClient,
    JudgeClient,
    ReplayJudgeClient,
    box_iou,
    controlqa_prompt_for,
    layout_adherence,
    run_controlqa,
    run_controlqa_batch,
)
