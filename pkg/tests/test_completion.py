"""Masked-region removal: masks, recentering, inpainting, compositing."""

import math
import sys
import textwrap

import numpy as np
import pytest

from panowalk.completion import (
    CompletionJob,
    band_mask,
    boundary_gradient_discrepancy,
    complete_video,
    dilate_mask,
    inpaint_diffusion,
    inpaint_external,
    mask_centroid,
    recenter,
)
from panowalk.errors import ValidationError
from panowalk.geometry import pixel_to_dir, warp_erp

from _helpers import oracle_pixel_dir, psnr


def smooth_scene(w, h, seed=0):
    u, v = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    img = (
        128
        + 50 * np.sin(2 * np.pi * u / w * 3)
        + 40 * np.cos(2 * np.pi * v / h * 2)
        + 20 * np.sin(2 * np.pi * (u + v) / w * 5)
    )
    return np.clip(img, 0, 255).astype(np.uint8)


class TestBandMask:
    def test_row_cut_matches_latitude_formula(self):
        h, w = 64, 128
        mask = band_mask(w, h, -math.pi / 4)
        # phi(v) = pi/2 - pi (v+0.5)/h <= -pi/4  <=>  v >= 3h/4 - 0.5
        first = int(math.ceil(0.75 * h - 0.5))
        assert not mask[: first].any()
        assert mask[first:].all()

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            band_mask(64, 32, 0.0)
        with pytest.raises(ValidationError):
            band_mask(64, 32, -math.pi / 2)


class TestDilate:
    def test_wraps_columns_clamps_rows(self):
        mask = np.zeros((4, 6), dtype=bool)
        mask[0, 0] = True
        out = dilate_mask(mask)
        expect = np.zeros((4, 6), dtype=bool)
        expect[0:2, [5, 0, 1]] = True  # row -1 clamps away, col -1 wraps to 5
        assert np.array_equal(out, expect)

    def test_px_zero_is_identity(self):
        mask = np.zeros((3, 3), dtype=bool)
        mask[1, 1] = True
        assert np.array_equal(dilate_mask(mask, px=0), mask)

    def test_two_steps_equal_chebyshev_radius_two(self):
        mask = np.zeros((9, 9), dtype=bool)
        mask[4, 4] = True
        out = dilate_mask(mask, px=2)
        vs, us = np.nonzero(out)
        assert np.max(np.abs(vs - 4)) == 2 and np.max(np.abs(us - 4)) == 2
        assert out.sum() == 25


class TestCentroid:
    def test_band_centroid_is_nadir(self):
        c = mask_centroid(band_mask(128, 64, -1.2))
        assert np.allclose(c, [0.0, -1.0, 0.0], atol=1e-9)

    def test_single_pixel(self):
        mask = np.zeros((32, 64), dtype=bool)
        mask[20, 7] = True
        assert np.allclose(mask_centroid(mask), pixel_to_dir(7.0, 20.0, 64, 32), atol=1e-12)

    def test_two_pixels_vector_sum(self):
        mask = np.zeros((32, 64), dtype=bool)
        mask[10, 5] = True
        mask[25, 40] = True
        total = oracle_pixel_dir(5, 10, 64, 32) + oracle_pixel_dir(40, 25, 64, 32)
        expect = total / np.linalg.norm(total)
        assert np.allclose(mask_centroid(mask), expect, atol=1e-12)

    def test_empty_mask_raises(self):
        with pytest.raises(ValidationError, match="no set pixels"):
            mask_centroid(np.zeros((8, 16), dtype=bool))

    def test_cancelling_mask_raises(self):
        mask = np.zeros((32, 64), dtype=bool)
        mask[10, 5] = True
        mask[32 - 1 - 10, 5 + 32] = True  # antipodal partner
        with pytest.raises(ValidationError, match="cancel"):
            mask_centroid(mask)


class TestRecenter:
    def test_rotation_sends_centroid_forward(self):
        h, w = 64, 128
        frames = np.stack([smooth_scene(w, h)] * 2)
        masks = np.stack([band_mask(w, h, -0.9)] * 2)
        _, _, R = recenter(frames, masks)
        assert np.allclose(R @ mask_centroid(masks[0]), [0, 0, 1], atol=1e-12)

    def test_forward_mask_keeps_frames_identical(self):
        h, w = 32, 64
        frames = np.stack([smooth_scene(w, h)])
        mask = np.zeros((h, w), dtype=bool)
        mask[h // 2 - 2 : h // 2 + 2, w // 2 - 3 : w // 2 + 3] = True
        # centroid already faces forward -> identity rotation
        out_frames, out_masks, R = recenter(frames, np.stack([mask]), interp="nearest")
        assert np.array_equal(R, np.eye(3))
        assert np.array_equal(out_frames, frames)
        assert np.array_equal(out_masks[0], dilate_mask(mask))

    def test_mask_solid_angle_roughly_preserved(self):
        h, w = 128, 256
        masks = np.stack([band_mask(w, h, -0.9)])
        frames = np.zeros((1, h, w), dtype=np.uint8)
        _, warped, _ = recenter(frames, masks)

        def solid_angle(m):
            v = np.nonzero(m)[0].astype(np.float64)
            phi = np.pi / 2 - np.pi * (v + 0.5) / h
            return float(np.sum(np.cos(phi)))

        # dilation only grows it; allow 10 percent either way
        assert solid_angle(warped[0]) == pytest.approx(solid_angle(masks[0]), rel=0.10)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError, match="line up"):
            recenter(np.zeros((1, 8, 16)), np.zeros((2, 8, 16), dtype=bool))


class TestDiffusion:
    def test_vertical_ramp_reproduced_exactly(self):
        # a linear ramp is harmonic: the converged fill must restore it
        h, w = 40, 60
        frame = np.broadcast_to((4 * np.arange(h, dtype=np.float64))[:, None], (h, w))
        frame = frame.astype(np.uint8).copy()
        mask = np.zeros((h, w), dtype=bool)
        mask[14:26, 20:40] = True
        hole = frame.copy()
        hole[mask] = 0
        out = inpaint_diffusion(hole, mask, max_iters=200000, tol=1e-8)
        assert np.array_equal(out, frame)

    def test_constant_scene_exact(self):
        frame = np.full((20, 30, 3), 42, dtype=np.uint8)
        mask = np.zeros((20, 30), dtype=bool)
        mask[5:15, 8:22] = True
        out = inpaint_diffusion(frame, mask)
        assert np.array_equal(out, frame)

    def test_unmasked_pixels_bit_identical(self):
        rng = np.random.default_rng(53)
        frame = rng.integers(0, 256, (24, 48, 3), dtype=np.uint8)
        mask = np.zeros((24, 48), dtype=bool)
        mask[8:16, 10:30] = True
        out = inpaint_diffusion(frame, mask, max_iters=200, tol=1e-2)
        assert np.array_equal(out[~mask], frame[~mask])

    def test_empty_mask_copies(self):
        frame = np.arange(60, dtype=np.uint8).reshape(5, 12)
        out = inpaint_diffusion(frame, np.zeros((5, 12), dtype=bool))
        assert np.array_equal(out, frame)
        assert out is not frame

    def test_full_mask_raises(self):
        with pytest.raises(ValidationError, match="entire frame"):
            inpaint_diffusion(np.zeros((4, 8)), np.ones((4, 8), dtype=bool))

    def test_grayscale_supported(self):
        frame = np.full((16, 32), 7, dtype=np.uint8)
        mask = np.zeros((16, 32), dtype=bool)
        mask[6:10, 10:20] = True
        out = inpaint_diffusion(frame, mask)
        assert out.shape == (16, 32)
        assert np.array_equal(out, frame)


IDENTITY_INPAINTER = textwrap.dedent(
    """
    import os, shutil, sys
    src, masks, dst = sys.argv[1], sys.argv[2], sys.argv[3]
    for name in sorted(os.listdir(src)):
        shutil.copy(os.path.join(src, name), os.path.join(dst, name))
    """
)


def write_script(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(body)
    return f"{sys.executable} {p}"


class TestExternal:
    def test_identity_command_round_trips(self, tmp_path):
        rng = np.random.default_rng(59)
        frames = rng.integers(0, 256, (2, 8, 16, 3), dtype=np.uint8)
        masks = np.zeros((2, 8, 16), dtype=bool)
        masks[:, 3:5, 6:10] = True
        cmd = write_script(tmp_path, "ident.py", IDENTITY_INPAINTER)
        out = inpaint_external(frames, masks, cmd)
        assert np.array_equal(out, frames)

    def test_nonzero_exit_reports_code_and_stderr(self, tmp_path):
        cmd = write_script(
            tmp_path, "boom.py", "import sys; print('broken pipe-line', file=sys.stderr); sys.exit(3)"
        )
        with pytest.raises(ValidationError, match="exited 3.*broken pipe-line"):
            inpaint_external(np.zeros((1, 4, 8, 3), np.uint8), np.zeros((1, 4, 8), bool), cmd)

    def test_missing_output_frame(self, tmp_path):
        body = IDENTITY_INPAINTER + "\nos.remove(os.path.join(dst, sorted(os.listdir(dst))[-1]))\n"
        cmd = write_script(tmp_path, "partial.py", body)
        frames = np.zeros((2, 4, 8, 3), np.uint8)
        with pytest.raises(ValidationError, match="wrote no frame 1"):
            inpaint_external(frames, np.zeros((2, 4, 8), bool), cmd)

    def test_wrong_dimensions_rejected(self, tmp_path):
        body = textwrap.dedent(
            """
            import os, sys
            from PIL import Image
            src, masks, dst = sys.argv[1], sys.argv[2], sys.argv[3]
            for name in sorted(os.listdir(src)):
                with Image.open(os.path.join(src, name)) as im:
                    im.crop((0, 0, 4, 4)).save(os.path.join(dst, name))
            """
        )
        cmd = write_script(tmp_path, "crop.py", body)
        with pytest.raises(ValidationError, match="shape"):
            inpaint_external(np.zeros((1, 8, 16, 3), np.uint8), np.zeros((1, 8, 16), bool), cmd)

    def test_empty_command_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            inpaint_external(np.zeros((1, 4, 8, 3), np.uint8), np.zeros((1, 4, 8), bool), "  ")


class TestCompleteVideo:
    def test_untouched_outside_blend_region(self):
        h, w = 64, 128
        frames = np.stack([np.dstack([smooth_scene(w, h)] * 3)] * 2)
        masks = np.stack([band_mask(w, h, -0.8)] * 2)
        job = CompletionJob(blend_width=3, max_iters=400, tol=1e-2)
        out = complete_video(frames, masks, job)
        region = masks[0]
        for _ in range(1 + job.blend_width):
            region = dilate_mask(region)
        assert np.array_equal(out[:, ~region], frames[:, ~region])
        # inside the mask the sky-side fill actually changed something
        assert not np.array_equal(out[0][masks[0]], frames[0][masks[0]])

    def test_sentinel_never_survives(self):
        h, w = 64, 128
        base = np.dstack([smooth_scene(w, h)] * 3)
        mask = band_mask(w, h, -0.9)
        painted = base.copy()
        painted[mask] = (255, 0, 255)  # garish sentinel to be removed
        out = complete_video(np.stack([painted]), np.stack([mask]), CompletionJob(max_iters=2000, tol=1e-3))
        inside = out[0][mask]
        sentinel = np.all(inside == np.array([255, 0, 255]), axis=-1)
        assert int(sentinel.sum()) == 0

    def test_deterministic(self):
        h, w = 32, 64
        frames = np.stack([np.dstack([smooth_scene(w, h)] * 3)])
        masks = np.stack([band_mask(w, h, -1.0)])
        job = CompletionJob(max_iters=300, tol=1e-2)
        a = complete_video(frames, masks, job)
        b = complete_video(frames, masks, job)
        assert np.array_equal(a, b)

    def test_grayscale_pipeline(self):
        h, w = 32, 64
        frames = np.stack([smooth_scene(w, h)])
        masks = np.stack([band_mask(w, h, -1.0)])
        out = complete_video(frames, masks, CompletionJob(max_iters=300, tol=1e-2))
        assert out.shape == frames.shape and out.dtype == frames.dtype

    def test_external_job_string(self, tmp_path):
        cmd = write_script(tmp_path, "ident.py", IDENTITY_INPAINTER)
        frames = np.zeros((1, 16, 32, 3), dtype=np.uint8)
        frames[..., 0] = 90
        masks = np.stack([band_mask(32, 16, -1.0)])
        out = complete_video(frames, masks, CompletionJob(inpainter=f"external:{cmd}"))
        assert out.shape == frames.shape

    def test_job_validation(self):
        with pytest.raises(ValidationError):
            CompletionJob(inpainter="magic")
        with pytest.raises(ValidationError):
            CompletionJob(blend_width=-1)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError, match="masks"):
            complete_video(np.zeros((1, 8, 16, 3), np.uint8), np.zeros((1, 8, 8), bool))

    def test_round_trip_quality_floor(self):
        # warp there and back (the completion pipeline's frame transport)
        # keeps mid-latitudes nearly lossless
        h, w = 128, 256
        img = np.dstack([smooth_scene(w, h, seed=1)] * 3)
        mask = band_mask(w, h, -1.0)
        frames, masks, R = recenter(np.stack([img]), np.stack([mask]))
        back = warp_erp(frames[0], R.T)
        band = slice(h // 6, h - h // 6)  # |phi| <= 60 degrees
        assert psnr(back[band], img[band]) >= 40.0


class TestBoundaryMetric:
    def test_perfect_continuation_scores_zero(self):
        h, w = 32, 64
        frame = np.broadcast_to(np.arange(w, dtype=np.float64)[None, :], (h, w)).copy()
        mask = np.zeros((h, w), dtype=bool)
        mask[10:20, 20:40] = True  # away from the wrap seam
        assert boundary_gradient_discrepancy(frame, mask) == 0.0

    def test_flat_fill_scores_worse_than_continuation(self):
        h, w = 48, 96
        u = np.arange(w, dtype=np.float64)[None, :]
        stripes = 128 + 100 * np.sin(2 * np.pi * u / 16)
        frame = np.broadcast_to(stripes, (h, w)).copy()
        mask = np.zeros((h, w), dtype=bool)
        mask[16:32, 24:72] = True
        flat = frame.copy()
        flat[mask] = float(np.mean(frame[dilate_mask(mask) & ~mask]))
        good = boundary_gradient_discrepancy(frame, mask)
        bad = boundary_gradient_discrepancy(flat, mask)
        assert bad > good + 1.0

    def test_no_boundary_raises(self):
        with pytest.raises(ValidationError, match="boundary"):
            boundary_gradient_discrepancy(np.zeros((4, 8)), np.zeros((4, 8), dtype=bool))
        with pytest.raises(ValidationError, match="boundary"):
            boundary_gradient_discrepancy(np.zeros((4, 8)), np.ones((4, 8), dtype=bool))
