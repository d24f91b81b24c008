"""Minimal P2 (ASCII) PGM reading and writing; pixels in [0, 255], row-major."""

import numpy as np


def read_pgm(path) -> np.ndarray:
    """Read an ASCII PGM file into a float array scaled to [0, 255]."""
    with open(path, "r") as fh:
        text = fh.read()
    tokens = []
    for line in text.splitlines():
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("not an ASCII PGM (P2) file")
    if len(tokens) < 4:
        raise ValueError("truncated PGM header")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if width < 1 or height < 1 or maxval < 1:
        raise ValueError("invalid PGM header")
    data = tokens[4:]
    if len(data) != width * height:
        raise ValueError(f"expected {width * height} pixels, found {len(data)}")
    img = np.array([float(t) for t in data]).reshape(height, width)
    if maxval != 255:
        img = img * (255.0 / maxval)
    return img


def write_pgm(path, img) -> None:
    """Write a 2-D array as ASCII PGM, clipping and rounding to [0, 255]."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    pixels = np.clip(np.rint(img), 0, 255).astype(int)
    height, width = pixels.shape
    lines = ["P2", f"{width} {height}", "255"]
    for row in pixels:
        lines.append(" ".join(str(p) for p in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
