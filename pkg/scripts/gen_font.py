"""One-off generator for the frozen 8x16 bitmap font table.

Rasterizes printable ASCII from the DejaVu Sans Mono TTF bundled with
matplotlib into 8x16 cells, thresholds to 1-bit, and emits the base64
blob pasted into c2i/font8x16.py. Run manually; output is checked in.
"""

import base64

import numpy as np
from matplotlib import font_manager
from PIL import Image, ImageDraw, ImageFont

CELL_W, CELL_H = 8, 16
FIRST, LAST = 32, 126


def main():
    path = font_manager.findfont("DejaVu Sans Mono")
    font = ImageFont.truetype(path, 13)
    blob = bytearray()
    for code in range(FIRST, LAST + 1):
        img = Image.new("L", (CELL_W, CELL_H), 0)
        draw = ImageDraw.Draw(img)
        draw.text((0, -1), chr(code), fill=255, font=font)
        bits = np.asarray(img) >= 128
        for row in bits:
            byte = 0
            for col in range(CELL_W):
                if row[col]:
                    byte |= 1 << (7 - col)
            blob.append(byte)
    encoded = base64.b64encode(bytes(blob)).decode("ascii")
    for i in range(0, len(encoded), 72):
        print(f'    "{encoded[i:i + 72]}"')


if __name__ == "__main__":
    main()
