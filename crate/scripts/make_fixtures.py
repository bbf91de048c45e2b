#!/usr/bin/env python3
"""Regenerates the test fixtures under fixtures/.

Images are cropped and resized from scikit-image's bundled samples. The
motion kernel is a synthetic stand-in drawn from a seeded random walk.
"""
import pathlib

import numpy as np
from PIL import Image
from skimage import data

ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
SIZE = 128


def center_square(img):
    h, w = img.shape[:2]
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    return img[top:top + s, left:left + s]


def save_image(name, arr):
    img = Image.fromarray(center_square(arr))
    img = img.resize((SIZE, SIZE), Image.LANCZOS)
    img.save(ROOT / "images" / name, optimize=False)


def write_kernel(name, k):
    k = k / k.sum()
    lines = [f"{k.shape[0]} {k.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in k]
    (ROOT / "kernels" / name).write_text("\n".join(lines) + "\n")


def gaussian(sigma, size):
    r = np.arange(size) - size // 2
    g = np.exp(-(r[:, None] ** 2 + r[None, :] ** 2) / (2 * sigma**2))
    return g


def motion(size, steps, seed):
    rng = np.random.default_rng(seed)
    pos = np.zeros(2)
    vel = rng.normal(size=2)
    vel /= np.linalg.norm(vel)
    pts = [pos.copy()]
    for _ in range(steps):
        vel += 0.35 * rng.normal(size=2)
        vel /= np.linalg.norm(vel)
        pos += 0.5 * vel
        pts.append(pos.copy())
    pts = np.array(pts)
    pts -= pts.mean(axis=0)
    k = np.zeros((size, size))
    c = size // 2
    for y, x in pts:
        yy, xx = y + c, x + c
        y0, x0 = int(np.floor(yy)), int(np.floor(xx))
        fy, fx = yy - y0, xx - x0
        for dy, wy in ((0, 1 - fy), (1, fy)):
            for dx, wx in ((0, 1 - fx), (1, fx)):
                if 0 <= y0 + dy < size and 0 <= x0 + dx < size:
                    k[y0 + dy, x0 + dx] += wy * wx
    return k


def main():
    (ROOT / "images").mkdir(parents=True, exist_ok=True)
    (ROOT / "kernels").mkdir(parents=True, exist_ok=True)
    save_image("camera_gray.png", data.camera())
    save_image("astronaut_rgb.png", data.astronaut())
    save_image("coffee_rgb.png", data.coffee())
    write_kernel("delta.txt", np.ones((1, 1)))
    for s in (0.7, 1.2, 1.6, 2.0):
        size = 2 * int(np.ceil(3 * s)) + 1
        write_kernel(f"gaussian_{s:.1f}.txt", gaussian(s, size))
    write_kernel("motion_standin.txt", motion(17, 28, 2020))


if __name__ == "__main__":
    main()
