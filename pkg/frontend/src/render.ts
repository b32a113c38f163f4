/** Pure view math behind the renderer.
 *
 * Everything the scene graph does is modeled here with plain numbers so the
 * invariants can be checked headless: the camera sits at the panorama center,
 * turns toward the avatar but keeps a level horizon, and the avatar is a
 * world-anchored object drawn in front of the backdrop. Because the backdrop
 * stretch k only scales the sphere the texture sits on, it never moves the
 * projected avatar.
 */

import { dot, rotateYaw, sub, type Vec3 } from "./geometry.js";
import type { Avatar, CameraPose, SessionState, WorldConfig } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface CameraModel {
  position: Vec3;
  forward: Vec3;
  right: Vec3;
  up: Vec3;
  /** Horizontal bearing of the view direction. */
  bearing: number;
  fovYDeg: number;
  viewport: Viewport;
}

export interface ScreenPoint {
  x: number;
  y: number;
  /** Distance along the view axis, in meters; positive means visible. */
  depth: number;
}

/** Level-gaze camera at the pose position, turned toward the look-at point.
 *
 * Only the horizontal bearing of look_at is used: the horizon stays at
 * mid-screen, so the panorama's forward pixel sits at screen center whenever
 * the avatar is dead ahead, and the ground-anchored avatar hangs below it.
 */
export function cameraFromPose(pose: CameraPose, fovYDeg: number, viewport: Viewport): CameraModel {
  const [px, , pz] = pose.position;
  const [lx, , lz] = pose.look_at;
  const dx = lx - px;
  const dz = lz - pz;
  if (dx === 0 && dz === 0) throw new Error("look_at coincides with the camera position");
  const bearing = Math.atan2(dx, dz);
  const sb = Math.sin(bearing);
  const cb = Math.cos(bearing);
  return {
    position: [pose.position[0], pose.position[1], pose.position[2]],
    forward: [sb, 0, cb],
    right: [cb, 0, -sb],
    up: [0, 1, 0],
    bearing,
    fovYDeg,
    viewport,
  };
}

/** Perspective-project a world point; null when it is behind the camera. */
export function projectPoint(cam: CameraModel, p: Vec3): ScreenPoint | null {
  const d = sub(p, cam.position);
  const depth = dot(d, cam.forward);
  if (depth <= 1e-12) return null;
  const focal = cam.viewport.height / 2 / Math.tan((cam.fovYDeg * Math.PI) / 360);
  return {
    x: cam.viewport.width / 2 + (focal * dot(d, cam.right)) / depth,
    y: cam.viewport.height / 2 - (focal * dot(d, cam.up)) / depth,
    depth,
  };
}

/** Screen position of the avatar's ground anchor. The avatar is drawn as a
 * world object, so this depends only on the camera, never on the backdrop. */
export function avatarScreenPosition(
  pose: CameraPose,
  avatar: Avatar,
  fovYDeg: number,
  viewport: Viewport,
): ScreenPoint | null {
  const cam = cameraFromPose(pose, fovYDeg, viewport);
  return projectPoint(cam, [avatar.x, 0, avatar.y]);
}

/** Screen position of the panorama's forward pixel: the surface point that
 * carries texture coordinate (0.5, 0.5), i.e. the capture-forward direction
 * of the frame. The spheroid is centered on the camera with its local +z
 * turned to the frame's yaw, so that point sits at distance k along the
 * frame-forward bearing. */
export function forwardPixelScreen(
  pose: CameraPose,
  frameYaw: number,
  k: number,
  fovYDeg: number,
  viewport: Viewport,
): ScreenPoint | null {
  const cam = cameraFromPose(pose, fovYDeg, viewport);
  const local: Vec3 = [0, 0, k];
  const world = rotateYaw(local, frameYaw);
  return projectPoint(cam, [
    cam.position[0] + world[0],
    cam.position[1] + world[1],
    cam.position[2] + world[2],
  ]);
}

/** Overlay opacity for the crossfade: 1 right after an edge switch, easing
 * to 0 as the server-side fade clock runs out. Zero outside fades. */
export function fadeAlpha(state: SessionState, config: WorldConfig): number {
  if (state.mode !== "fading" || config.fade_seconds <= 0) return 0;
  const a = state.fade_t / config.fade_seconds;
  return Math.min(1, Math.max(0, a));
}

/** World-space points of a simple standing figure at the avatar: ground
 * anchor, body center, and head top. Used to size and place the marker. */
export function avatarFigurePoints(avatar: Avatar, heightM = 1.6): { feet: Vec3; center: Vec3; head: Vec3 } {
  return {
    feet: [avatar.x, 0, avatar.y],
    center: [avatar.x, heightM / 2, avatar.y],
    head: [avatar.x, heightM, avatar.y],
  };
}
