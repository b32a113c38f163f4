/** Overhead map model.
 *
 * Pure data in, draw operations out: the canvas code just replays the ops.
 * World y grows away from the viewer, canvas y grows downward, so the
 * projection flips the vertical axis. Clicking near a node asks the server
 * for a teleport there.
 */

import type { PresencePayload, SessionState, StepAction } from "./types.js";
import type { WorldIndex } from "./world.js";

export interface MapLayout {
  width: number;
  height: number;
  margin: number;
  scale: number;
  centerX: number;
  centerY: number;
  midX: number;
  midY: number;
}

export type MapPoint = [number, number];

export type DrawOp =
  | { kind: "edge"; id: string; points: MapPoint[] }
  | { kind: "node"; id: string; at: MapPoint }
  | { kind: "self"; at: MapPoint; yaw: number }
  | { kind: "peer"; id: string; at: MapPoint };

export function layoutFor(world: WorldIndex, width: number, height: number, margin = 16): MapLayout {
  const b = world.bounds();
  const spanX = Math.max(b.maxX - b.minX, 1e-9);
  const spanY = Math.max(b.maxY - b.minY, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    width,
    height,
    margin,
    scale,
    centerX: (b.minX + b.maxX) / 2,
    centerY: (b.minY + b.maxY) / 2,
    midX: width / 2,
    midY: height / 2,
  };
}

export function worldToMap(layout: MapLayout, x: number, y: number): MapPoint {
  return [
    layout.midX + (x - layout.centerX) * layout.scale,
    layout.midY - (y - layout.centerY) * layout.scale,
  ];
}

export function mapToWorld(layout: MapLayout, px: number, py: number): MapPoint {
  return [
    layout.centerX + (px - layout.midX) / layout.scale,
    layout.centerY - (py - layout.midY) / layout.scale,
  ];
}

/** Everything to draw, back to front: streets, crossings, peers, self. */
export function buildDrawOps(
  world: WorldIndex,
  layout: MapLayout,
  state: SessionState | null,
  presence: PresencePayload | null,
): DrawOp[] {
  const ops: DrawOp[] = [];
  for (const e of world.manifest.edges) {
    const points: MapPoint[] = [];
    for (let i = 0; i < e.x.length; i++) {
      points.push(worldToMap(layout, e.x[i]!, e.y[i]!));
    }
    ops.push({ kind: "edge", id: e.id, points });
  }
  for (const n of world.manifest.nodes) {
    ops.push({ kind: "node", id: n.id, at: worldToMap(layout, n.x, n.y) });
  }
  if (presence) {
    for (const p of presence.sessions) {
      if (state && p.session_id === state.session_id) continue;
      ops.push({ kind: "peer", id: p.session_id, at: worldToMap(layout, p.avatar.x, p.avatar.y) });
    }
  }
  if (state) {
    ops.push({
      kind: "self",
      at: worldToMap(layout, state.avatar.x, state.avatar.y),
      yaw: state.avatar.yaw,
    });
  }
  return ops;
}

/** Node under a click, or null if none is within radius pixels. */
export function hitTestNode(
  world: WorldIndex,
  layout: MapLayout,
  px: number,
  py: number,
  radius = 12,
): string | null {
  let best: string | null = null;
  let bestD = radius;
  for (const n of world.manifest.nodes) {
    const [nx, ny] = worldToMap(layout, n.x, n.y);
    const d = Math.hypot(nx - px, ny - py);
    if (d <= bestD) {
      bestD = d;
      best = n.id;
    }
  }
  return best;
}

/** Visibility plus the click-to-teleport rule. */
export class MinimapController {
  visible = false;

  toggle(): void {
    this.visible = !this.visible;
  }

  /** Map a click to a teleport request; null when nothing was hit or the
   * map is hidden. */
  click(world: WorldIndex, layout: MapLayout, px: number, py: number): StepAction | null {
    if (!this.visible) return null;
    const node = hitTestNode(world, layout, px, py);
    return node === null ? null : ["teleport", node];
  }
}
