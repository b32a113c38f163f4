"""Videographer removal: rotate the masked region to the image center,
inpaint there, rotate back, composite only masked pixels.

Inpainting quality on equirectangular frames depends on where the hole
sits: content near the bottom rows is heavily stretched, while content at
the center row is nearly undistorted. The pipeline therefore recenters
the hole (one shared rotation per sequence, derived from frame 0's mask
centroid, so the sequence stays temporally consistent), fills it, warps
back, and composites so every pixel outside the dilated mask and its
blend ring stays bit-identical to the input.

The built-in inpainter is harmonic diffusion: deterministic and cheap, a
placeholder for real video inpainting models, which plug in through the
external-command hook (`<command> <in_frames> <in_masks> <out_frames>`,
PNG sequences, masks single channel with 255 = fill).
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

from . import frameio, geometry
from .errors import ValidationError
from .kernels import harmonic_fill


# -- masks ---------------------------------------------------------------------


def band_mask(width: int, height: int, phi_top: float) -> np.ndarray:
    """Boolean (H, W) mask of all pixels with latitude <= phi_top.

    phi_top must lie in (-pi/2, 0): the masked band hangs below the
    horizon and covers the nadir.
    """
    if not (-np.pi / 2 < phi_top < 0):
        raise ValidationError(f"phi_top must be in (-pi/2, 0), got {phi_top}")
    v = np.arange(height, dtype=np.float64)
    phi = np.pi / 2 - np.pi * (v + 0.5) / height
    return np.broadcast_to((phi <= phi_top)[:, None], (height, width)).copy()


def dilate_mask(mask: np.ndarray, px: int = 1) -> np.ndarray:
    """Binary dilation by a (2*px+1)^2 neighborhood; columns wrap around
    the longitude seam, rows clamp at the poles."""
    m = np.asarray(mask, dtype=bool)
    for _ in range(px):
        mm = m | np.roll(m, 1, axis=1) | np.roll(m, -1, axis=1)
        out = mm.copy()
        out[1:] |= mm[:-1]
        out[:-1] |= mm[1:]
        m = out
    return m


def mask_centroid(mask: np.ndarray) -> np.ndarray:
    """Spherical mean direction of the masked pixel centers."""
    m = np.asarray(mask, dtype=bool)
    vs, us = np.nonzero(m)
    if us.size == 0:
        raise ValidationError("mask has no set pixels")
    h, w = m.shape
    dirs = geometry.pixel_to_dir(us.astype(np.float64), vs.astype(np.float64), w, h)
    total = np.sum(dirs, axis=0)
    norm = float(np.linalg.norm(total))
    if norm < 1e-9:
        raise ValidationError("mask directions cancel out; centroid undefined")
    return total / norm


# -- recentering ------------------------------------------------------------------


def recenter(frames, masks, interp: str = "bilinear"):
    """Rotate the whole sequence so frame 0's mask centroid faces forward.

    Returns (frames', masks', R). One rotation for all frames keeps the
    sequence temporally consistent for inpainters that use it. Masks are
    warped nearest-neighbor and dilated 1 px to absorb resampling bleed.
    """
    frames = np.asarray(frames)
    masks = np.asarray(masks, dtype=bool)
    if frames.shape[0] != masks.shape[0] or frames.shape[1:3] != masks.shape[1:3]:
        raise ValidationError(
            f"frames {frames.shape} and masks {masks.shape} do not line up"
        )
    R = geometry.rotation_to_center(mask_centroid(masks[0]))
    out_frames = np.stack([geometry.warp_erp(f, R, interp=interp) for f in frames])
    out_masks = np.stack(
        [
            dilate_mask(geometry.warp_erp(m.astype(np.uint8), R, interp="nearest") > 0)
            for m in masks
        ]
    )
    return out_frames, out_masks, R


# -- inpainters -------------------------------------------------------------------


def inpaint_diffusion(
    frame: np.ndarray,
    mask: np.ndarray,
    max_iters: int = 20000,
    tol: float = 1e-3,
) -> np.ndarray:
    """Replace masked pixels with the converged harmonic fill (iterative
    4-neighbor averaging; columns wrap, rows clamp). Unmasked pixels come
    back bit-identical."""
    frame = np.asarray(frame)
    mask = np.asarray(mask, dtype=bool)
    if frame.shape[:2] != mask.shape:
        raise ValidationError(f"frame {frame.shape} vs mask {mask.shape}")
    if not mask.any():
        return frame.copy()
    if mask.all():
        raise ValidationError("mask covers the entire frame; nothing to diffuse from")
    channels = frame[..., None] if frame.ndim == 2 else frame
    out = np.empty_like(channels)
    mean_boundary = None
    for c in range(channels.shape[2]):
        work = channels[..., c].astype(np.float64)
        # start the fill from the mean of the unmasked neighbors of the mask
        if mean_boundary is None:
            ring = dilate_mask(mask) & ~mask
            mean_all = float(np.mean(channels[..., :][ring])) if ring.any() else 0.0
            mean_boundary = mean_all
        work[mask] = mean_boundary
        harmonic_fill(work, mask, max_iters, tol)
        filled = work
        if np.issubdtype(channels.dtype, np.integer):
            filled = np.clip(np.rint(filled), 0, 255)
        out[..., c] = filled.astype(channels.dtype)
    out[~mask] = channels[~mask]
    return out[..., 0] if frame.ndim == 2 else out


def inpaint_external(frames, masks, command: str, workdir=None) -> np.ndarray:
    """Run an external inpainter: write PNG sequences, invoke
    `<command> <in_frames> <in_masks> <out_frames>`, read the results.

    Fails with the captured exit code and stderr when the command fails,
    and validates that outputs exist with matching dimensions.
    """
    frames = np.asarray(frames)
    masks = np.asarray(masks, dtype=bool)
    argv = shlex.split(command)
    if not argv:
        raise ValidationError("empty external inpainter command")
    ctx = tempfile.TemporaryDirectory(prefix="panowalk-inpaint-") if workdir is None else None
    base = ctx.name if ctx is not None else str(workdir)
    try:
        in_frames = os.path.join(base, "in_frames")
        in_masks = os.path.join(base, "in_masks")
        out_frames = os.path.join(base, "out_frames")
        frameio.save_frames(in_frames, frames)
        frameio.save_masks(in_masks, masks)
        os.makedirs(out_frames, exist_ok=True)
        proc = subprocess.run(
            argv + [in_frames, in_masks, out_frames],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout or "").strip()[-2000:]
            raise ValidationError(
                f"external inpainter exited {proc.returncode}: {tail}"
            )
        results = []
        for i in range(frames.shape[0]):
            path = os.path.join(out_frames, frameio.frame_name(i))
            if not os.path.exists(path):
                raise ValidationError(f"external inpainter wrote no frame {i}: {path}")
            from PIL import Image

            with Image.open(path) as im:
                arr = np.asarray(im.convert("RGB") if frames.ndim == 4 else im.convert("L"))
            if arr.shape[:2] != frames.shape[1:3]:
                raise ValidationError(
                    f"external inpainter frame {i} has shape {arr.shape[:2]}, "
                    f"expected {frames.shape[1:3]}"
                )
            results.append(arr)
        return np.stack(results)
    finally:
        if ctx is not None:
            ctx.cleanup()


# -- full pipeline ------------------------------------------------------------------


@dataclass(frozen=True)
class CompletionJob:
    """Options for complete_video; frame data is passed separately."""

    inpainter: str = "diffusion"  # "diffusion" or "external:<command>"
    blend_width: int = 3
    recenter: bool = True
    interp: str = "bilinear"
    max_iters: int = 20000
    tol: float = 1e-3

    def __post_init__(self):
        if self.blend_width < 0:
            raise ValidationError("blend_width must be >= 0")
        if self.inpainter != "diffusion" and not self.inpainter.startswith("external:"):
            raise ValidationError(
                f"inpainter must be 'diffusion' or 'external:<command>', got {self.inpainter!r}"
            )


def _blend_alpha(mask: np.ndarray, blend_width: int) -> np.ndarray:
    """1 inside the dilated mask, linear falloff over blend_width rings."""
    m1 = dilate_mask(mask)
    alpha = np.zeros(mask.shape, dtype=np.float64)
    alpha[m1] = 1.0
    prev = m1
    for i in range(1, blend_width + 1):
        cur = dilate_mask(prev)
        ring = cur & ~prev
        alpha[ring] = (blend_width + 1 - i) / (blend_width + 1)
        prev = cur
    return alpha


def complete_video(frames, masks, job: CompletionJob | None = None) -> np.ndarray:
    """Remove the masked region from every frame.

    Per frame: recenter (shared rotation) -> inpaint -> inverse warp ->
    composite. The output equals the input exactly outside the dilated
    mask and its blend ring.
    """
    job = job or CompletionJob()
    frames = np.asarray(frames)
    masks = np.asarray(masks, dtype=bool)
    if frames.ndim not in (3, 4):
        raise ValidationError(f"frames must be (N,H,W) or (N,H,W,C), got {frames.shape}")
    if masks.shape != frames.shape[:3]:
        raise ValidationError(f"masks {masks.shape} do not match frames {frames.shape}")

    if job.recenter:
        work_frames, work_masks, R = recenter(frames, masks, interp=job.interp)
    else:
        work_frames = frames
        work_masks = np.stack([dilate_mask(m) for m in masks])
        R = None

    if job.inpainter == "diffusion":
        completed = np.stack(
            [
                inpaint_diffusion(f, m, max_iters=job.max_iters, tol=job.tol)
                for f, m in zip(work_frames, work_masks)
            ]
        )
    else:
        command = job.inpainter[len("external:") :]
        completed = inpaint_external(work_frames, work_masks, command)

    if R is not None:
        completed = np.stack(
            [geometry.warp_erp(f, R.T, interp=job.interp) for f in completed]
        )

    out = np.empty_like(frames)
    for i in range(frames.shape[0]):
        alpha = _blend_alpha(masks[i], job.blend_width)
        orig = frames[i].astype(np.float64)
        comp = completed[i].astype(np.float64)
        if frames.ndim == 4:
            alpha = alpha[..., None]
        mixed = orig + alpha * (comp - orig)
        if np.issubdtype(frames.dtype, np.integer):
            mixed = np.clip(np.rint(mixed), 0, 255)
        frame_out = mixed.astype(frames.dtype)
        untouched = alpha[..., 0] == 0.0 if frames.ndim == 4 else alpha == 0.0
        frame_out[untouched] = frames[i][untouched]
        out[i] = frame_out
    return out


# -- quality metric ----------------------------------------------------------------


def boundary_gradient_discrepancy(frame: np.ndarray, mask: np.ndarray) -> float:
    """How badly image gradients break across the mask boundary.

    Mean over all 4-neighbor pairs (p masked, q unmasked) and channels of
    |grad(p) - grad(q)|_1, gradients by central differences with column
    wrap and row clamp. Lower means the fill continues the surrounding
    pattern more faithfully.
    """
    frame = np.asarray(frame, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if frame.ndim == 2:
        frame = frame[..., None]
    if frame.shape[:2] != mask.shape:
        raise ValidationError(f"frame {frame.shape} vs mask {mask.shape}")

    up = np.empty_like(frame)
    up[1:] = frame[:-1]
    up[0] = frame[0]
    down = np.empty_like(frame)
    down[:-1] = frame[1:]
    down[-1] = frame[-1]
    gx = (np.roll(frame, -1, axis=1) - np.roll(frame, 1, axis=1)) * 0.5
    gy = (down - up) * 0.5

    total = 0.0
    count = 0
    h, w = mask.shape
    for axis, shift in ((1, 1), (1, -1), (0, 1), (0, -1)):
        if axis == 1:
            pair = mask & ~np.roll(mask, shift, axis=1)
            ps_v, ps_u = np.nonzero(pair)
            qs_v, qs_u = ps_v, (ps_u - shift) % w
        else:
            ps_v, ps_u = np.nonzero(mask)
            qs_v = ps_v - shift
            ok = (qs_v >= 0) & (qs_v < h)
            ps_v, ps_u = ps_v[ok], ps_u[ok]
            qs_v = qs_v[ok]
            qs_u = ps_u
            keep = ~mask[qs_v, qs_u]
            ps_v, ps_u, qs_v, qs_u = ps_v[keep], ps_u[keep], qs_v[keep], qs_u[keep]
        if ps_v.size == 0:
            continue
        dgx = np.abs(gx[ps_v, ps_u] - gx[qs_v, qs_u])
        dgy = np.abs(gy[ps_v, ps_u] - gy[qs_v, qs_u])
        total += float(np.sum(dgx) + np.sum(dgy))
        count += ps_v.size * frame.shape[2]
    if count == 0:
        raise ValidationError("mask has no boundary (empty or full frame)")
    return total / count
