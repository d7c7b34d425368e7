#!/usr/bin/env python3
"""Writes the raster fixtures for the raster loader tests and prints the
expected luminance, round(0.299 R + 0.587 G + 0.114 B), computed exactly."""

import os
from fractions import Fraction

from PIL import Image

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "raster")

RGB = [
    [(255, 0, 0), (0, 255, 0), (0, 0, 255), (255, 255, 255)],
    [(12, 34, 56), (200, 100, 50), (7, 7, 7), (128, 64, 32)],
    [(0, 0, 0), (90, 180, 45), (33, 66, 99), (250, 5, 125)],
]


def lum(r, g, b):
    v = Fraction(299, 1000) * r + Fraction(587, 1000) * g + Fraction(114, 1000) * b
    assert v.denominator == 1 or (v * 2).denominator != 1, "avoid exact .5 ties"
    return int(v + Fraction(1, 2))


def main():
    os.makedirs(HERE, exist_ok=True)
    img = Image.new("RGB", (4, 3))
    for y, row in enumerate(RGB):
        for x, px in enumerate(row):
            img.putpixel((x, y), px)
    img.save(os.path.join(HERE, "rgb.png"))
    gray = Image.new("L", (5, 2))
    gray.putdata([0, 50, 100, 150, 200, 255, 1, 2, 3, 4])
    gray.save(os.path.join(HERE, "gray.png"))
    Image.new("RGB", (16, 16), (200, 200, 200)).save(os.path.join(HERE, "flat.jpg"), quality=95)
    with open(os.path.join(HERE, "not_an_image.png"), "wb") as f:
        f.write(b"\x89PNG\r\n\x1a\nthis is not really a png")
    print([lum(*px) for row in RGB for px in row])


if __name__ == "__main__":
    main()
