"""Equirectangular (ERP) panorama geometry.

COORDINATE CONVENTIONS
----------------------
These are shared by every module in the package:

  direction   unit 3-vector, x right, y up, z forward
  latitude    phi in [-pi/2, pi/2], positive toward zenith (+y)
  longitude   lam in [-pi, pi), 0 straight ahead (+z), positive toward +x:
                  x = cos(phi) * sin(lam)
                  y = sin(phi)
                  z = cos(phi) * cos(lam)
  ERP pixel   (u, v) continuous coordinates on a WxH raster; integer
              coordinates name pixel centers and the half-texel offset
              lives inside the mapping:
                  lam = 2*pi*(u + 0.5)/W - pi
                  phi = pi/2 - pi*(v + 0.5)/H
              u grows rightward and wraps modulo W; v grows downward and
              clamps to [0, H - 0.5] (v past H-0.5 would leave the valid
              latitude range).

At the poles cos(phi) = 0 makes longitude meaningless; it canonicalizes
to 0 there (atan2(0, 0) == 0), so the nadir of a 1920x960 panorama lands
on (u, v) = (959.5, 959.5).

The oval spheroid used for rendering is the unit sphere stretched by k
along +z (surface x^2 + y^2 + (z/k)^2 = 1) with the camera at the center.
A camera ray at angle theta from +z hits the surface at a point whose
un-stretched direction sits at atan(k * tan(theta)): the panorama texture
ahead of the viewer is magnified, widening the usable field of view
without moving the avatar's screen position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

_TWO_PI = 2.0 * math.pi


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize the last axis; raises on zero-length input."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ValueError("cannot normalize a zero-length vector")
    return v / n


def _require_unit(d: np.ndarray, what: str = "direction") -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.shape[-1] != 3:
        raise ValueError(f"{what} must have 3 components, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise ValueError(f"{what} has non-finite components")
    n = np.linalg.norm(d, axis=-1)
    if np.any(np.abs(n - 1.0) > 1e-9):
        raise ValueError(f"{what} is not unit length (|norm-1| > 1e-9)")
    return d


def dir_from_latlon(phi, lam) -> np.ndarray:
    """Unit direction(s) for latitude/longitude radians; broadcasts."""
    phi = np.asarray(phi, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    cp = np.cos(phi)
    d = np.stack(
        np.broadcast_arrays(cp * np.sin(lam), np.sin(phi), cp * np.cos(lam)),
        axis=-1,
    )
    return d


def latlon_from_dir(d) -> tuple[np.ndarray, np.ndarray]:
    """(phi, lam) of unit direction(s); lam canonicalizes to 0 at the poles."""
    d = _require_unit(d)
    phi = np.arcsin(np.clip(d[..., 1], -1.0, 1.0))
    lam = np.arctan2(d[..., 0], d[..., 2])
    return phi, lam


def _check_dims(w: int, h: int) -> None:
    if w < 2 or h < 2:
        raise ValueError(f"ERP raster needs W >= 2 and H >= 2, got {w}x{h}")


def pixel_to_dir(u, v, w: int, h: int) -> np.ndarray:
    """Direction of continuous ERP coordinates; u wraps, v clamps."""
    _check_dims(w, h)
    u = np.mod(np.asarray(u, dtype=np.float64), w)
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, h - 0.5)
    lam = _TWO_PI * (u + 0.5) / w - math.pi
    phi = 0.5 * math.pi - math.pi * (v + 0.5) / h
    return dir_from_latlon(phi, lam)


def dir_to_pixel(d, w: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact inverse of pixel_to_dir on its range; u lands in [0, W)."""
    _check_dims(w, h)
    phi, lam = latlon_from_dir(d)
    u = np.mod((lam + math.pi) / _TWO_PI * w - 0.5, w)
    v = np.clip((0.5 * math.pi - phi) / math.pi * h - 0.5, 0.0, h - 0.5)
    return u, v


# -- rotations ---------------------------------------------------------------

_FORWARD = np.array([0.0, 0.0, 1.0])


def rotation_to_center(c) -> np.ndarray:
    """Rotation matrix mapping unit direction c onto forward (+z).

    Rotates about the axis perpendicular to both, by the angle between
    them; an antipodal c picks the half-turn about the x-axis.
    """
    c = _require_unit(np.asarray(c, dtype=np.float64), "center direction")
    if c.shape != (3,):
        raise ValueError("rotation_to_center expects a single direction")
    axis = np.cross(c, _FORWARD)
    s = float(np.linalg.norm(axis))
    cos_a = float(np.dot(c, _FORWARD))
    if s < 1e-12:
        if cos_a > 0.0:
            return np.eye(3)
        return np.diag([1.0, -1.0, -1.0])
    k = axis / s
    kx, ky, kz = k
    km = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
    return np.eye(3) + km * s + (km @ km) * (1.0 - cos_a)


def _require_rotation(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        raise ValueError("rotation must be a finite 3x3 matrix")
    if np.max(np.abs(r @ r.T - np.eye(3))) > 1e-6:
        raise ValueError("rotation matrix is not orthonormal")
    return r


# -- ERP warping -------------------------------------------------------------

_SRC_MAP_CACHE: dict[tuple[bytes, int, int], tuple[np.ndarray, np.ndarray]] = {}


def source_pixel_maps(rotation: np.ndarray, w: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    """(su, sv) source coordinates so out[p] = in[su[p], sv[p]] realizes
    out(d) = in(R^-1 d). Cached per (rotation, size): a completion pass
    resamples every frame of a sequence with the same rotation."""
    r = _require_rotation(rotation)
    key = (r.tobytes(), w, h)
    hit = _SRC_MAP_CACHE.get(key)
    if hit is not None:
        return hit
    lam = _TWO_PI * (np.arange(w, dtype=np.float64) + 0.5) / w - math.pi
    phi = 0.5 * math.pi - math.pi * (np.arange(h, dtype=np.float64) + 0.5) / h
    cp = np.cos(phi)[:, None]
    x = cp * np.sin(lam)[None, :]
    y = np.broadcast_to(np.sin(phi)[:, None], (h, w))
    z = cp * np.cos(lam)[None, :]
    rinv = r.T
    xd = rinv[0, 0] * x + rinv[0, 1] * y + rinv[0, 2] * z
    yd = rinv[1, 0] * x + rinv[1, 1] * y + rinv[1, 2] * z
    zd = rinv[2, 0] * x + rinv[2, 1] * y + rinv[2, 2] * z
    phi_s = np.arcsin(np.clip(yd, -1.0, 1.0))
    lam_s = np.arctan2(xd, zd)
    su = np.mod((lam_s + math.pi) / _TWO_PI * w - 0.5, w)
    sv = np.clip((0.5 * math.pi - phi_s) / math.pi * h - 0.5, 0.0, h - 0.5)
    su.setflags(write=False)
    sv.setflags(write=False)
    if len(_SRC_MAP_CACHE) >= 8:
        _SRC_MAP_CACHE.pop(next(iter(_SRC_MAP_CACHE)))
    _SRC_MAP_CACHE[key] = (su, sv)
    return su, sv


def resample(img: np.ndarray, su: np.ndarray, sv: np.ndarray, interp: str = "bilinear") -> np.ndarray:
    """Sample img at continuous source coords; dtype in == dtype out."""
    if img.size == 0:
        raise ValueError("cannot resample an empty image")
    if interp == "nearest":
        return np.ascontiguousarray(kernels.sample_nearest(np.ascontiguousarray(img), su, sv))
    if interp != "bilinear":
        raise ValueError(f"unknown interpolation {interp!r}")
    squeeze = img.ndim == 2
    work = img[..., None] if squeeze else img
    out = kernels.sample_bilinear(np.ascontiguousarray(work, dtype=np.float64), su, sv)
    if squeeze:
        out = out[..., 0]
    if np.issubdtype(img.dtype, np.integer):
        info = np.iinfo(img.dtype)
        return np.clip(np.rint(out), info.min, info.max).astype(img.dtype)
    return out.astype(img.dtype, copy=False)


def warp_erp(img: np.ndarray, rotation: np.ndarray, interp: str = "bilinear") -> np.ndarray:
    """Resample a panorama under a view rotation: out(d) = in(R^-1 d).

    Bilinear wraps across the longitude seam and clamps at the poles;
    nearest is exact for masks. Output has the input's shape and dtype.
    """
    img = np.asarray(img)
    if img.ndim not in (2, 3) or img.size == 0:
        raise ValueError("image must be a non-empty HxW or HxWxC array")
    su, sv = source_pixel_maps(rotation, img.shape[1], img.shape[0])
    return resample(img, su, sv, interp)


# -- oval spheroid -----------------------------------------------------------


@dataclass(frozen=True)
class Spheroid:
    """Render spheroid: unit sphere stretched by k along forward (+z)."""

    k: float
    camera_fov_deg: float = 60.0

    def __post_init__(self):
        if not (self.k >= 1.0 and math.isfinite(self.k)):
            raise ValueError(f"spheroid k must be >= 1, got {self.k}")
        if not (0.0 < self.camera_fov_deg < 180.0):
            raise ValueError(f"camera fov must be in (0, 180), got {self.camera_fov_deg}")


def spheroid_texture_angle(s: Spheroid, theta: float) -> float:
    """Texture angle (radians from forward) seen by a camera ray at theta.

    The ray hits the stretched surface; un-stretching the hit point back
    to the unit sphere turns a ray angle theta into atan(k tan(theta)).
    """
    if not (0.0 <= theta < 0.5 * math.pi):
        raise ValueError(f"ray angle must be in [0, pi/2), got {theta}")
    return math.atan(s.k * math.tan(theta))


def effective_fov(s: Spheroid) -> float:
    """Texture field of view (degrees) covered by the camera frustum."""
    half = math.radians(s.camera_fov_deg) / 2.0
    return math.degrees(2.0 * spheroid_texture_angle(s, half))


def solve_k(target_fov_deg: float, camera_fov_deg: float) -> float:
    """Stretch factor k whose effective_fov equals target_fov_deg."""
    if not (0.0 < camera_fov_deg < target_fov_deg < 180.0):
        raise ValueError(
            f"need 0 < camera_fov < target_fov < 180, got camera={camera_fov_deg} target={target_fov_deg}"
        )
    return math.tan(math.radians(target_fov_deg) / 2.0) / math.tan(math.radians(camera_fov_deg) / 2.0)


@dataclass(frozen=True)
class SpheroidMesh:
    positions: np.ndarray  # (N, 3) float64, z stretched by k
    uvs: np.ndarray        # (N, 2) float64 in [0,1]^2, ERP layout (u right, v down)
    faces: np.ndarray      # (M, 3) int32, wound to face the camera at the origin


def spheroid_mesh(s: Spheroid, n_lat: int, n_lon: int) -> SpheroidMesh:
    """Lat/lon triangle mesh of the spheroid with ERP texture coordinates.

    Rows run zenith to nadir, columns across the full longitude range with
    the seam column duplicated so UVs stay continuous.
    """
    if n_lat < 2 or n_lon < 3:
        raise ValueError(f"mesh needs n_lat >= 2 and n_lon >= 3, got {n_lat}x{n_lon}")
    rows = np.arange(n_lat + 1, dtype=np.float64)
    cols = np.arange(n_lon + 1, dtype=np.float64)
    phi = 0.5 * math.pi - math.pi * rows / n_lat
    lam = -math.pi + _TWO_PI * cols / n_lon
    cp = np.cos(phi)[:, None]
    x = cp * np.sin(lam)[None, :]
    y = np.broadcast_to(np.sin(phi)[:, None], (n_lat + 1, n_lon + 1))
    z = s.k * cp * np.cos(lam)[None, :]
    positions = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    uu = np.broadcast_to((cols / n_lon)[None, :], (n_lat + 1, n_lon + 1))
    vv = np.broadcast_to((rows / n_lat)[:, None], (n_lat + 1, n_lon + 1))
    uvs = np.stack([uu, vv], axis=-1).reshape(-1, 2)
    idx = np.arange((n_lat + 1) * (n_lon + 1), dtype=np.int32).reshape(n_lat + 1, n_lon + 1)
    i00 = idx[:-1, :-1].ravel()
    i01 = idx[:-1, 1:].ravel()
    i10 = idx[1:, :-1].ravel()
    i11 = idx[1:, 1:].ravel()
    # wound so right-hand-rule normals point at the origin: the inside
    # surface, where the camera sits, is the front face
    tri_a = np.stack([i00, i01, i10], axis=1)
    tri_b = np.stack([i10, i01, i11], axis=1)
    faces = np.concatenate([tri_a, tri_b], axis=0).astype(np.int32)
    return SpheroidMesh(positions=positions, uvs=uvs, faces=faces)
