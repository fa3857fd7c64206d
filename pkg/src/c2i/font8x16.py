"""Frozen 8x16 monospaced bitmap font (printable ASCII).

Rasterized once from DejaVu Sans Mono (see scripts/gen_font.py) and checked
in as data so label rendering never touches platform font stacks. One byte
per row, MSB = leftmost column; 16 rows per glyph, codes 32..126.
"""

import base64

import numpy as np

GLYPH_W = 8
GLYPH_H = 16
_FIRST, _LAST = 32, 126

_FONT_B64 = (
    "AAAAAAAAAAAAAAAAAAAAAAAAABgYGBgYEAAYGAAAAAAAAAAkJCQkAAAAAAAAAAAAAAASEhR/"
    "JCT+KEhIAAAAAAAAAAA8YEA4DAJCPAAAAAAAAABgkJBmGE4LCw4AAAAAAAAAPCAgMFHIxkY6"
    "AAAAAAAAABAQEBAAAAAAAAAAAAAACAgYEBAQEBAQGAgIAAAAACAQEAgICAgICBAQIAAAAAAA"
    "AABAODhAAAAAAAAAAAAAAAAAEBAQfhAQEAAAAAAAAAAAAAAAAAAAABgYEBAAAAAAAAAAAAAA"
    "PAAAAAAAAAAAAAAAAAAAAAAAGBgAAAAAAAAABgQECAgQECAgYEAAAAAAADxkRkJaQkZkPAAA"
    "AAAAAAA4CAgICAgICD4AAAAAAAAAOEQGBAwYMGB+AAAAAAAAADhEBgQ8BAJGPAAAAAAAAAAM"
    "HBQkJER+BAQAAAAAAAAAfEBAeAQGBkQ4AAAAAAAAABwgQFxmQkJmPAAAAAAAAAB+BAQMCAgQ"
    "EDAAAAAAAAAAPGZGZDxmQmY8AAAAAAAAADxkRkZmPgYEOAAAAAAAAAAAABgYAAAAGBgAAAAA"
    "AAAAAAAYGAAAABgYEBAAAAAAAAAAAhxgYBwCAAAAAAAAAAAAAAB+AAB+AAAAAAAAAAAAAABA"
    "OAYGOEAAAAAAAAAAADwEBAwYEAAQEAAAAAAAAAAcYkKOkpCSjkAgHAAAAAAAGBg4JCRkfkLC"
    "AAAAAAAAAHxGQkZ8RkJGfAAAAAAAAAAcImBAQEBgIhwAAAAAAAAAeERGQkJCRkR4AAAAAAAA"
    "AH5gYGB+YGBgfgAAAAAAAAB+YGBgfmBgYGAAAAAAAAAAHGBAQE5CQmI8AAAAAAAAAEJCQkJ+"
    "QkJCQgAAAAAAAAB+GBgYGBgYGH4AAAAAAAAAPAQEBAQEBEx4AAAAAAAAAEJESHB4SERGQgAA"
    "AAAAAABgYGBgYGBgYH4AAAAAAAAARmZmSlpaQkJCAAAAAAAAAGJiclJSSk5GRgAAAAAAAAA8"
    "ZEJCQkJCZDwAAAAAAAAAfGZiYmZ8YGBgAAAAAAAAADxkQkJCQkJkPAQEAAAAAAB8RkZEeERG"
    "QkMAAAAAAAAAPGBAYDwGAkY8AAAAAAAAAP8YGBgYGBgYGAAAAAAAAABCQkJCQkJCZjwAAAAA"
    "AAAAQkJGZCQkKBgYAAAAAAAAAIGDwlpaWmZmZAAAAAAAAABCJCQYGDgkRsIAAAAAAAAAQkYk"
    "OBgYGBgYAAAAAAAAAH4GBAgYECBgfgAAAAAAHBAQEBAQEBAQEBAcAAAAAAAAQGAgIBAQCAgE"
    "BAYAAAA4CAgICAgICAgICDgAAAAAAAAYPCRCAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAD/AAAA"
    "IBAAAAAAAAAAAAAAAAAAAAAAADxEAj5GRj4AAAAAAEBAQEB8ZmJCYmZ8AAAAAAAAAAAAHCBg"
    "YGAgHAAAAAAABgYGBj5mRkZGZj4AAAAAAAAAAAA8ZkJ+QGI8AAAAAAAOGBAQfhAQEBAQEAAA"
    "AAAAAAAAAD5mRkZGZj4EBDgAAEBAQEB8ZEZGRkZGAAAAAAAYAAAAOBgYGBgYfgAAAAAACAAA"
    "ADgICAgICAgIGHAAAGBgYGBmbHh4bGZiAAAAAABwEBAQEBAQEBAQDgAAAAAAAAAAAHZaUlJS"
    "UlIAAAAAAAAAAAB8ZEZGRkZGAAAAAAAAAAAAPGRCQkJkPAAAAAAAAAAAAHxmYkJiZnxAQEAA"
    "AAAAAAA+ZkZGRmY+AgICAAAAAAAAPjAwICAgIAAAAAAAAAAAADhkYDwERDwAAAAAAAAAEBB+"
    "EBAQEBAeAAAAAAAAAAAARkZGRkZmPgAAAAAAAAAAAEJGJCQsGBgAAAAAAAAAAACBglpaWmYk"
    "AAAAAAAAAAAARiQYGDgkQgAAAAAAAAAAAEJCJCQ8GBgQEGAAAAAAAAB+BAgYMCB+AAAAAAAM"
    "GBgYEHAQGBgYGAwAAAAAEBAQEBAQEBAQEBAQEAAAAHAQEBAYDBgYEBAQcAAAAAAAAAAAAABw"
    "DgAAAAAAAAA="
)

_BITS = np.unpackbits(
    np.frombuffer(base64.b64decode(_FONT_B64), dtype=np.uint8)
).reshape(_LAST - _FIRST + 1, GLYPH_H, GLYPH_W).astype(bool)


def glyph_mask(char: str) -> np.ndarray:
    """(16, 8) bool mask for one character; non-ASCII falls back to '?'."""
    code = ord(char)
    if not _FIRST <= code <= _LAST:
        code = ord("?")
    return _BITS[code - _FIRST]
