/** Spheroid view geometry.
 *
 * The panorama is textured onto a unit sphere stretched by a factor k along
 * its local +z (the capture-forward axis): x^2 + y^2 + (z/k)^2 = 1. Stretching
 * widens the apparent field of view of a fixed-FoV camera sitting at the
 * center, because surface points slide toward the camera's forward axis.
 */

export type Vec3 = [number, number, number];

const TWO_PI = 2.0 * Math.PI;

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function normalize(a: Vec3): Vec3 {
  const n = norm(a);
  if (n === 0) throw new Error("cannot normalize a zero vector");
  return [a[0] / n, a[1] / n, a[2] / n];
}

/** Unit direction for latitude phi (up positive) and longitude lam
 * (0 = forward +z, increasing toward +x). */
export function dirFromLatLon(phi: number, lam: number): Vec3 {
  const cp = Math.cos(phi);
  return [cp * Math.sin(lam), Math.sin(phi), cp * Math.cos(lam)];
}

/** Rotate about the vertical axis so local +z maps to bearing psi,
 * where a bearing's direction is [sin(psi), 0, cos(psi)]. */
export function rotateYaw(p: Vec3, psi: number): Vec3 {
  const c = Math.cos(psi);
  const s = Math.sin(psi);
  return [p[0] * c + p[2] * s, p[1], -p[0] * s + p[2] * c];
}

/** Texture-space angle seen along a camera ray at angle theta off forward.
 *
 * The ray from the center hits the stretched surface where the underlying
 * unit-sphere direction sits at atan(k tan(theta)) off forward, so the
 * texture content for that larger angle appears at theta on screen.
 * Requires 0 <= theta < pi/2.
 */
export function textureAngle(k: number, theta: number): number {
  if (!(k >= 1)) throw new Error(`stretch factor must be >= 1, got ${k}`);
  if (!(theta >= 0 && theta < Math.PI / 2)) {
    throw new Error(`angle must be in [0, pi/2), got ${theta}`);
  }
  return Math.atan(k * Math.tan(theta));
}

/** Effective field of view, in degrees, of a cameraFovDeg camera looking at
 * a surface stretched by k. */
export function effectiveFovDeg(k: number, cameraFovDeg: number): number {
  if (!(cameraFovDeg > 0 && cameraFovDeg < 180)) {
    throw new Error(`camera fov must be in (0, 180), got ${cameraFovDeg}`);
  }
  const half = (cameraFovDeg * Math.PI) / 360;
  return (textureAngle(k, half) * 360) / Math.PI;
}

/** Stretch factor that makes a cameraFovDeg camera show targetFovDeg of
 * panorama content: tan(target/2) / tan(camera/2). */
export function solveK(targetFovDeg: number, cameraFovDeg: number): number {
  if (!(cameraFovDeg > 0 && cameraFovDeg <= targetFovDeg && targetFovDeg < 180)) {
    throw new Error(
      `need 0 < camera <= target < 180 degrees, got camera=${cameraFovDeg} target=${targetFovDeg}`,
    );
  }
  const t = Math.tan((targetFovDeg * Math.PI) / 360);
  const c = Math.tan((cameraFovDeg * Math.PI) / 360);
  return t / c;
}

export interface SpheroidMesh {
  /** Flat xyz triples, (nLat+1) * (nLon+1) vertices, rows zenith to nadir. */
  positions: number[];
  /** Flat uv pairs in [0,1]^2; u runs with longitude, v zenith to nadir. */
  uvs: number[];
  /** Flat index triples; counter-clockwise as seen from the center. */
  faces: number[];
  vertexCount: number;
}

/** Lat/lon triangle mesh of the spheroid with panorama texture coordinates.
 *
 * The seam column is duplicated so UVs stay continuous, and triangles are
 * wound so right-hand-rule normals point at the origin: the inside surface,
 * where the camera sits, is the front face.
 */
export function buildSpheroidMesh(k: number, nLat: number, nLon: number): SpheroidMesh {
  if (!(k >= 1)) throw new Error(`stretch factor must be >= 1, got ${k}`);
  if (nLat < 2 || nLon < 3) {
    throw new Error(`mesh needs nLat >= 2 and nLon >= 3, got ${nLat}x${nLon}`);
  }
  const positions: number[] = [];
  const uvs: number[] = [];
  for (let row = 0; row <= nLat; row++) {
    const phi = 0.5 * Math.PI - (Math.PI * row) / nLat;
    const cp = Math.cos(phi);
    const sp = Math.sin(phi);
    for (let col = 0; col <= nLon; col++) {
      const lam = -Math.PI + (TWO_PI * col) / nLon;
      positions.push(cp * Math.sin(lam), sp, k * cp * Math.cos(lam));
      uvs.push(col / nLon, row / nLat);
    }
  }
  const quadA: number[] = [];
  const quadB: number[] = [];
  const stride = nLon + 1;
  for (let row = 0; row < nLat; row++) {
    for (let col = 0; col < nLon; col++) {
      const i00 = row * stride + col;
      const i01 = i00 + 1;
      const i10 = i00 + stride;
      const i11 = i10 + 1;
      quadA.push(i00, i01, i10);
      quadB.push(i10, i01, i11);
    }
  }
  return {
    positions,
    uvs,
    faces: quadA.concat(quadB),
    vertexCount: (nLat + 1) * (nLon + 1),
  };
}
