"""PNG frame-sequence IO: directories of zero-padded %06d.png files.

Frames are RGB (H, W, 3) uint8 or grayscale (H, W); masks are single
channel, 255 = masked/fill.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .errors import ValidationError


def frame_name(i: int) -> str:
    return f"{i:06d}.png"


def save_frames(dirpath, frames) -> None:
    os.makedirs(dirpath, exist_ok=True)
    for i, frame in enumerate(frames):
        arr = np.asarray(frame)
        if arr.dtype != np.uint8:
            arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
        Image.fromarray(arr).save(os.path.join(dirpath, frame_name(i)))


def save_masks(dirpath, masks) -> None:
    os.makedirs(dirpath, exist_ok=True)
    for i, mask in enumerate(masks):
        arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
        Image.fromarray(arr, mode="L").save(os.path.join(dirpath, frame_name(i)))


def list_frame_files(dirpath) -> list[str]:
    if not os.path.isdir(dirpath):
        raise ValidationError(f"frame directory not found: {dirpath}")
    names = sorted(n for n in os.listdir(dirpath) if n.endswith(".png"))
    if not names:
        raise ValidationError(f"no .png frames in {dirpath}")
    return [os.path.join(dirpath, n) for n in names]


def load_frames(dirpath) -> np.ndarray:
    files = list_frame_files(dirpath)
    frames = []
    shape = None
    for path in files:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB") if im.mode not in ("L", "RGB") else im)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ValidationError(
                f"frame {path} has shape {arr.shape}, expected {shape}"
            )
        frames.append(arr)
    return np.stack(frames)


def load_masks(dirpath) -> np.ndarray:
    files = list_frame_files(dirpath)
    masks = []
    shape = None
    for path in files:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"))
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ValidationError(f"mask {path} has shape {arr.shape}, expected {shape}")
        masks.append(arr >= 128)
    return np.stack(masks)
