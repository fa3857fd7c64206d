"""Deterministic canvas rendering.

Everything here is integer-in, integer-out 8-bit raster work: float64
intermediates, round-half-up quantization, no anti-aliasing, no platform
fonts. Same spec + same assets = same bytes, on any machine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canvas_spec import (
    AffinePlacement,
    BoxElement,
    CanvasSpec,
    PoseElement,
    assign_person_ordinals,
    compose_prompt,
    spec_digest,
    validate_spec,
)
from .errors import AssetError, DimensionError, RenderError
from .font8x16 import GLYPH_H, GLYPH_W, glyph_mask
from .imagebuf import AssetMap, ImageBuffer
from .palettes import BOX_PALETTE, MASK_FILL, POSE_LIMBS, POSE_PALETTE

from .canvas_spec import MAX_CANVAS_DIM, MIN_CANVAS_DIM

TAG_PADDING = 4  # px around box labels


@dataclass(frozen=True)
class RenderedCanvas:
    image: ImageBuffer  # RGB
    prompt: str
    provenance: str  # hex digest of the canonical spec serialization


def _round_u8(values: np.ndarray) -> np.ndarray:
    """Quantize float64 to uint8 with round-half-up."""
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _edge_px(v: float, size: int) -> int:
    """Continuous normalized edge -> integer pixel boundary."""
    return min(max(_round_half_up(v * size), 0), size)


def make_background(
    width: int,
    height: int,
    base: ImageBuffer | None = None,
    mask_rects: list | tuple = (),
) -> ImageBuffer:
    """Gray fill or a bilinearly resampled base, with masked-out regions."""
    if not (MIN_CANVAS_DIM <= width <= MAX_CANVAS_DIM
            and MIN_CANVAS_DIM <= height <= MAX_CANVAS_DIM):
        raise DimensionError(
            f"canvas dimensions must lie in [{MIN_CANVAS_DIM},{MAX_CANVAS_DIM}], "
            f"got {width}x{height}"
        )
    if base is None:
        out = np.empty((height, width, 3), dtype=np.uint8)
        out[:] = MASK_FILL
    else:
        out = _resample_bilinear(base.data[:, :, :3], width, height)
    for rect in mask_rects:
        x0, y0, x1, y1 = rect
        px0, px1 = _edge_px(x0, width), _edge_px(x1, width)
        py0, py1 = _edge_px(y0, height), _edge_px(y1, height)
        out[py0:py1, px0:px1] = MASK_FILL
    return ImageBuffer(out)


def _resample_bilinear(src: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Separable bilinear resampling with half-pixel centers and edge clamp."""
    src_h, src_w = src.shape[:2]
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (src_w / out_w) - 0.5
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (src_h / out_h) - 0.5
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0i = np.clip(x0.astype(np.int64), 0, src_w - 1)
    x1i = np.clip(x0i + 1, 0, src_w - 1)
    y0i = np.clip(y0.astype(np.int64), 0, src_h - 1)
    y1i = np.clip(y0i + 1, 0, src_h - 1)

    vals = src.astype(np.float64)
    top = vals[y0i][:, x0i] * (1 - fx)[None, :, None] + vals[y0i][:, x1i] * fx[None, :, None]
    bot = vals[y1i][:, x0i] * (1 - fx)[None, :, None] + vals[y1i][:, x1i] * fx[None, :, None]
    out = top * (1 - fy)[:, None, None] + bot * fy[:, None, None]
    return _round_u8(out)


def paste_segment(
    canvas: ImageBuffer,
    cutout: ImageBuffer,
    placement: AffinePlacement,
) -> ImageBuffer:
    """Source-over composite of an affinely placed RGBA cutout onto RGB canvas.

    Destination pixels are inverse-mapped into the cutout and sampled with
    bilinear interpolation over premultiplied alpha; samples outside the
    cutout are fully transparent.
    """
    if not cutout.has_alpha:
        raise AssetError("cutout must carry an alpha channel")
    w, h = canvas.width, canvas.height
    out = np.array(canvas.data[:, :, :3], dtype=np.uint8)
    window = _paste_window(placement, cutout.width, cutout.height, w, h)
    if window is None:
        return ImageBuffer(out)
    wx0, wy0, wx1, wy1 = window

    cx = placement.center_x * w
    cy = placement.center_y * h
    theta = math.radians(placement.rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    xs = np.arange(wx0, wx1, dtype=np.float64) + 0.5 - cx
    ys = np.arange(wy0, wy1, dtype=np.float64) + 0.5 - cy
    vx = xs[None, :]
    vy = ys[:, None]
    # rotate by -rotation, then undo the scale
    sx = (cos_t * vx + sin_t * vy) / placement.scale + cutout.width / 2.0
    sy = (-sin_t * vx + cos_t * vy) / placement.scale + cutout.height / 2.0

    rgba = cutout.data.astype(np.float64)
    alpha = rgba[:, :, 3] / 255.0
    prgb = rgba[:, :, :3] * alpha[:, :, None]

    sampled_rgb, sampled_a = _sample_premultiplied(prgb, alpha, sx - 0.5, sy - 0.5)

    dst = out[wy0:wy1, wx0:wx1].astype(np.float64)
    blended = sampled_rgb + (1.0 - sampled_a)[:, :, None] * dst
    out[wy0:wy1, wx0:wx1] = _round_u8(blended)
    return ImageBuffer(out)


def _paste_window(placement, cut_w, cut_h, canvas_w, canvas_h):
    """Clipped destination bounding box of the transformed cutout, or None."""
    cx = placement.center_x * canvas_w
    cy = placement.center_y * canvas_h
    theta = math.radians(placement.rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    hw = cut_w * placement.scale / 2.0
    hh = cut_h * placement.scale / 2.0
    ext_x = abs(cos_t) * hw + abs(sin_t) * hh
    ext_y = abs(sin_t) * hw + abs(cos_t) * hh
    x0 = max(int(math.floor(cx - ext_x)) - 1, 0)
    y0 = max(int(math.floor(cy - ext_y)) - 1, 0)
    x1 = min(int(math.ceil(cx + ext_x)) + 1, canvas_w)
    y1 = min(int(math.ceil(cy + ext_y)) + 1, canvas_h)
    if x0 >= x1 or y0 >= y1:
        return None
    return x0, y0, x1, y1


def _sample_premultiplied(prgb, alpha, ix, iy):
    """Bilinear sample at index coords; outside-image taps are transparent."""
    src_h, src_w = alpha.shape
    x0 = np.floor(ix)
    y0 = np.floor(iy)
    fx = ix - x0
    fy = iy - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    out_rgb = np.zeros(ix.shape + (3,), dtype=np.float64)
    out_a = np.zeros(ix.shape, dtype=np.float64)
    for dy_i, wy in ((0, (1 - fy)), (1, fy)):
        for dx_i, wx in ((0, (1 - fx)), (1, fx)):
            xi = x0 + dx_i
            yi = y0 + dy_i
            valid = (xi >= 0) & (xi < src_w) & (yi >= 0) & (yi < src_h)
            xi_c = np.clip(xi, 0, src_w - 1)
            yi_c = np.clip(yi, 0, src_h - 1)
            weight = np.where(valid, wx * wy, 0.0)
            out_rgb += prgb[yi_c, xi_c] * weight[:, :, None]
            out_a += alpha[yi_c, xi_c] * weight
    return out_rgb, out_a


def _blend_mask(out: np.ndarray, window, mask: np.ndarray, color, alpha: float) -> None:
    """In-place out = alpha*color + (1-alpha)*out on masked pixels."""
    x0, y0, x1, y1 = window
    region = out[y0:y1, x0:x1]
    src = np.array(color, dtype=np.float64)
    blended = alpha * src[None, None, :] + (1.0 - alpha) * region.astype(np.float64)
    region[mask] = _round_u8(blended)[mask]


def _clip_window(x0, y0, x1, y1, w, h):
    x0 = max(int(math.floor(x0)), 0)
    y0 = max(int(math.floor(y0)), 0)
    x1 = min(int(math.ceil(x1)) + 1, w)
    y1 = min(int(math.ceil(y1)) + 1, h)
    if x0 >= x1 or y0 >= y1:
        return None
    return x0, y0, x1, y1


def _centers(window):
    x0, y0, x1, y1 = window
    xs = np.arange(x0, x1, dtype=np.float64) + 0.5
    ys = np.arange(y0, y1, dtype=np.float64) + 0.5
    return xs[None, :], ys[:, None]


def _fill_segment(out, p0, p1, thickness, color, alpha, w, h):
    """Oriented-rectangle scanline fill for one limb."""
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    length = math.hypot(dx, dy)
    if length == 0.0:
        return
    half = thickness / 2.0
    window = _clip_window(
        min(p0[0], p1[0]) - half, min(p0[1], p1[1]) - half,
        max(p0[0], p1[0]) + half, max(p0[1], p1[1]) + half, w, h,
    )
    if window is None:
        return
    ux, uy = dx / length, dy / length
    cxs, cys = _centers(window)
    qx = cxs - p0[0]
    qy = cys - p0[1]
    along = qx * ux + qy * uy
    across = qx * (-uy) + qy * ux
    mask = (along >= 0.0) & (along <= length) & (np.abs(across) <= half)
    _blend_mask(out, window, mask, color, alpha)


def _fill_disc(out, center, radius, color, alpha, w, h):
    window = _clip_window(
        center[0] - radius, center[1] - radius,
        center[0] + radius, center[1] + radius, w, h,
    )
    if window is None:
        return
    cxs, cys = _centers(window)
    mask = (cxs - center[0]) ** 2 + (cys - center[1]) ** 2 <= radius * radius
    _blend_mask(out, window, mask, color, alpha)


def pose_line_thickness(width: int, height: int) -> int:
    return max(2, _round_half_up(0.006 * min(width, height)))


def pose_disc_radius(width: int, height: int) -> int:
    return max(3, _round_half_up(0.008 * min(width, height)))


def box_stroke_width(width: int, height: int) -> int:
    return max(2, _round_half_up(0.004 * min(width, height)))


def overlay_pose(
    canvas: ImageBuffer,
    pose: PoseElement,
    alpha: float,
    thickness: int | None = None,
    radius: int | None = None,
) -> ImageBuffer:
    """Semi-transparent skeleton: limbs in topology order, then joint discs."""
    w, h = canvas.width, canvas.height
    if thickness is None:
        thickness = pose_line_thickness(w, h)
    if radius is None:
        radius = pose_disc_radius(w, h)
    out = np.array(canvas.data[:, :, :3], dtype=np.uint8)
    pts = [(k.x * w, k.y * h) for k in pose.keypoints]
    for limb_idx, (a, b) in enumerate(POSE_LIMBS):
        if pose.keypoints[a].visible and pose.keypoints[b].visible:
            _fill_segment(out, pts[a], pts[b], thickness,
                          POSE_PALETTE[limb_idx], alpha, w, h)
    for kp_idx, kp in enumerate(pose.keypoints):
        if kp.visible:
            _fill_disc(out, pts[kp_idx], radius, POSE_PALETTE[kp_idx], alpha, w, h)
    return ImageBuffer(out)


def draw_box_annotation(
    canvas: ImageBuffer,
    box: BoxElement,
    color_index: int,
) -> ImageBuffer:
    """Opaque rectangle stroke plus a labeled tag at the box's top-left."""
    w, h = canvas.width, canvas.height
    color = np.array(BOX_PALETTE[color_index % len(BOX_PALETTE)], dtype=np.uint8)
    stroke = box_stroke_width(w, h)
    out = np.array(canvas.data[:, :, :3], dtype=np.uint8)

    px0, px1 = _edge_px(box.rect[0], w), _edge_px(box.rect[2], w)
    py0, py1 = _edge_px(box.rect[1], h), _edge_px(box.rect[3], h)

    # stroke bands drawn inward from each edge
    out[py0:min(py0 + stroke, py1), px0:px1] = color
    out[max(py1 - stroke, py0):py1, px0:px1] = color
    out[py0:py1, px0:min(px0 + stroke, px1)] = color
    out[py0:py1, max(px1 - stroke, px0):px1] = color

    # label tag: filled block of the box color, white glyphs, clipped to the box
    tag_w = GLYPH_W * len(box.label) + 2 * TAG_PADDING
    tag_h = GLYPH_H + 2 * TAG_PADDING
    tx1 = min(px0 + tag_w, px1, w)
    ty1 = min(py0 + tag_h, py1, h)
    out[py0:ty1, px0:tx1] = color
    for slot, char in enumerate(box.label):
        gx = px0 + TAG_PADDING + slot * GLYPH_W
        gy = py0 + TAG_PADDING
        if gx >= tx1:
            break
        mask = glyph_mask(char)
        gx1 = min(gx + GLYPH_W, tx1)
        gy1 = min(gy + GLYPH_H, ty1)
        if gx1 <= gx or gy1 <= gy:
            continue
        sub = mask[: gy1 - gy, : gx1 - gx]
        region = out[gy:gy1, gx:gx1]
        region[sub] = 255
    return ImageBuffer(out)


def render_canvas(spec: CanvasSpec, assets: AssetMap) -> RenderedCanvas:
    """Full deterministic pipeline: background, subjects, poses, boxes, prompt."""
    report = validate_spec(spec, assets)
    if not report.ok:
        raise RenderError(report)

    base = assets[spec.background_asset] if spec.background_asset is not None else None
    image = make_background(spec.width, spec.height, base)

    ordered = sorted(enumerate(spec.subjects), key=lambda item: (item[1].z_order, item[0]))
    for _, subject in ordered:
        image = paste_segment(image, assets[subject.asset_key], subject.placement)

    for pose in spec.poses:
        image = overlay_pose(image, pose, spec.pose_alpha)

    labeled = assign_person_ordinals(spec)
    for idx, box in enumerate(labeled.boxes):
        image = draw_box_annotation(image, box, color_index=idx)

    return RenderedCanvas(
        image=image,
        prompt=compose_prompt(spec.task, spec.user_prompt),
        provenance=spec_digest(spec),
    )
