"""8-bit raster buffers, the PNG codec, and asset maps.

PNG output is produced by a small built-in encoder (filter 0, one IDAT,
fixed zlib level) so identical pixels always yield identical bytes.
Reading accepts anything Pillow can decode.
"""

from __future__ import annotations

import io
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import AssetError

# zlib level is pinned: byte-stable output matters more than ratio here.
_PNG_ZLIB_LEVEL = 6
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Row-major interleaved 8-bit image, RGB (3 channels) or RGBA (4)."""

    data: np.ndarray  # (H, W, C) uint8

    def __post_init__(self):
        arr = self.data
        if not isinstance(arr, np.ndarray) or arr.dtype != np.uint8:
            raise AssetError("pixel data must be a uint8 ndarray")
        if arr.ndim != 3 or arr.shape[2] not in (3, 4):
            raise AssetError(f"expected (H, W, 3|4) pixels, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise AssetError("image must be at least 1x1")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def has_alpha(self) -> bool:
        return self.channels == 4

    @classmethod
    def new(cls, width: int, height: int, fill=(0, 0, 0)) -> "ImageBuffer":
        """Uniformly filled buffer; channel count follows len(fill)."""
        fill = tuple(int(v) for v in fill)
        arr = np.empty((height, width, len(fill)), dtype=np.uint8)
        arr[:] = fill
        return cls(arr)

    def same_pixels(self, other: "ImageBuffer") -> bool:
        return self.data.shape == other.data.shape and np.array_equal(self.data, other.data)

    def to_png_bytes(self) -> bytes:
        return png_encode(self.data)

    def save_png(self, path) -> None:
        Path(path).write_bytes(self.to_png_bytes())

    @classmethod
    def from_png_bytes(cls, blob: bytes) -> "ImageBuffer":
        try:
            img = Image.open(io.BytesIO(blob))
            img.load()
        except Exception as exc:
            raise AssetError(f"undecodable image: {exc}") from exc
        if img.mode in ("RGBA", "LA", "PA") or "transparency" in img.info:
            img = img.convert("RGBA")
        elif img.mode != "RGB":
            img = img.convert("RGB")
        return cls(np.asarray(img, dtype=np.uint8))

    @classmethod
    def load_png(cls, path) -> "ImageBuffer":
        return cls.from_png_bytes(Path(path).read_bytes())


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def png_encode(arr: np.ndarray) -> bytes:
    """Minimal deterministic PNG writer (8-bit RGB/RGBA, no ancillary chunks)."""
    h, w, c = arr.shape
    color_type = 2 if c == 3 else 6
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    # filter byte 0 in front of every scanline
    raw = np.empty((h, w * c + 1), dtype=np.uint8)
    raw[:, 0] = 0
    raw[:, 1:] = arr.reshape(h, w * c)
    idat = zlib.compress(raw.tobytes(), _PNG_ZLIB_LEVEL)
    return (
        _PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", idat)
        + _png_chunk(b"IEND", b"")
    )


# Asset maps are plain dicts: asset_key -> ImageBuffer.
AssetMap = dict


def load_assets(root) -> AssetMap:
    """Load every *.png under ``root`` keyed by its extension-less posix relpath."""
    root = Path(root)
    assets: AssetMap = {}
    for path in sorted(root.rglob("*.png")):
        key = path.relative_to(root).with_suffix("").as_posix()
        assets[key] = ImageBuffer.load_png(path)
    return assets
