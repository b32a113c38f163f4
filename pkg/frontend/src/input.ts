/** Keyboard state machine.
 *
 * Held movement keys produce a displacement of magnitude speed * dt per tick
 * in the avatar's heading frame. Freshly pressed direction keys pick the
 * offered street in the matching compass sector while standing at a
 * crossing. The reverse key flips to the opposite capture, and the map key
 * is consumed locally. Anything unbound is ignored.
 */

import type { SessionMode, StepAction, StepInput } from "./types.js";
import type { DirectionOption } from "./world.js";

export const DEFAULT_SPEED_MPS = 1.4;

/** Widest angular mismatch a direction key will still accept. */
const SECTOR_TOLERANCE = Math.PI / 3;

export interface Bindings {
  moveForward: string[];
  moveBack: string[];
  strafeLeft: string[];
  strafeRight: string[];
  dirForward: string[];
  dirBack: string[];
  dirLeft: string[];
  dirRight: string[];
  reverse: string[];
  toggleMap: string[];
}

export const DEFAULT_BINDINGS: Bindings = {
  moveForward: ["KeyW"],
  moveBack: ["KeyS"],
  strafeLeft: ["KeyA"],
  strafeRight: ["KeyD"],
  dirForward: ["ArrowUp"],
  dirBack: ["ArrowDown"],
  dirLeft: ["ArrowLeft"],
  dirRight: ["ArrowRight"],
  reverse: ["KeyR"],
  toggleMap: ["KeyM"],
};

export interface InputContext {
  yaw: number;
  mode: SessionMode;
  options: DirectionOption[];
}

function wrapAngle(a: number): number {
  let x = (a + Math.PI) % (2 * Math.PI);
  if (x < 0) x += 2 * Math.PI;
  return x - Math.PI;
}

export class InputController {
  readonly speed: number;
  private readonly bindings: Bindings;
  private readonly held = new Set<string>();
  private readonly fresh = new Set<string>();
  private mapToggles = 0;

  constructor(bindings: Partial<Bindings> = {}, speed = DEFAULT_SPEED_MPS) {
    this.bindings = { ...DEFAULT_BINDINGS, ...bindings };
    this.speed = speed;
  }

  keyDown(code: string): void {
    if (this.held.has(code)) return;
    this.held.add(code);
    this.fresh.add(code);
    if (this.bindings.toggleMap.includes(code)) this.mapToggles += 1;
  }

  keyUp(code: string): void {
    this.held.delete(code);
    this.fresh.delete(code);
  }

  /** True once per map-key press; drains the pending toggles. */
  consumeMapToggle(): boolean {
    const t = this.mapToggles > 0;
    this.mapToggles = 0;
    return t;
  }

  /** One frame of input; null when there is nothing to send. */
  tick(dt: number, ctx: InputContext): StepInput | null {
    if (!(dt > 0)) throw new Error(`dt must be positive, got ${dt}`);
    const action = this.takeAction(ctx);
    this.fresh.clear();
    if (action) return { move: [0, 0], action, dt };
    const move = this.heldMove(dt, ctx.yaw);
    if (move) return { move, dt };
    return null;
  }

  private anyFresh(codes: string[]): boolean {
    return codes.some((c) => this.fresh.has(c));
  }

  private anyHeld(codes: string[]): boolean {
    return codes.some((c) => this.held.has(c));
  }

  private takeAction(ctx: InputContext): StepAction | null {
    if (this.anyFresh(this.bindings.reverse)) return ["reverse"];
    if (ctx.mode !== "at_intersection" || ctx.options.length === 0) return null;
    const sectors: Array<[string[], number]> = [
      [this.bindings.dirForward, 0],
      [this.bindings.dirRight, Math.PI / 2],
      [this.bindings.dirBack, Math.PI],
      [this.bindings.dirLeft, -Math.PI / 2],
    ];
    for (const [codes, offset] of sectors) {
      if (!this.anyFresh(codes)) continue;
      const target = ctx.yaw + offset;
      let best: DirectionOption | null = null;
      let bestGap = Infinity;
      for (const opt of ctx.options) {
        const gap = Math.abs(wrapAngle(opt.bearing - target));
        if (gap < bestGap) {
          bestGap = gap;
          best = opt;
        }
      }
      if (best && bestGap <= SECTOR_TOLERANCE) return ["choose", best.edgeId];
    }
    return null;
  }

  private heldMove(dt: number, yaw: number): [number, number] | null {
    const f = (this.anyHeld(this.bindings.moveForward) ? 1 : 0) - (this.anyHeld(this.bindings.moveBack) ? 1 : 0);
    const r = (this.anyHeld(this.bindings.strafeRight) ? 1 : 0) - (this.anyHeld(this.bindings.strafeLeft) ? 1 : 0);
    if (f === 0 && r === 0) return null;
    const sy = Math.sin(yaw);
    const cy = Math.cos(yaw);
    // heading frame: forward is [sin yaw, cos yaw], right is [cos yaw, -sin yaw]
    let mx = f * sy + r * cy;
    let my = f * cy - r * sy;
    const n = Math.hypot(mx, my);
    const step = this.speed * dt;
    mx = (mx / n) * step;
    my = (my / n) * step;
    return [mx, my];
  }
}
