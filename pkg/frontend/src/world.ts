/** Indexed view of the world manifest.
 *
 * The manifest arrives as arrays; the viewer needs id lookups, world bounds
 * for the map, and the entry bearing of each street offered at a crossing
 * so direction keys can be matched to streets.
 */

import type { Manifest, SessionState, WorldEdge, WorldNode } from "./types.js";

export interface DirectionOption {
  edgeId: string;
  /** World bearing you would start walking in, atan2(dx, dy). */
  bearing: number;
}

export interface WorldBounds {
  minX: number;
  maxX: number;
  minY: number;
  maxY: number;
}

export class WorldIndex {
  readonly manifest: Manifest;
  private readonly nodesById = new Map<string, WorldNode>();
  private readonly edgesById = new Map<string, WorldEdge>();

  constructor(manifest: Manifest) {
    this.manifest = manifest;
    for (const n of manifest.nodes) this.nodesById.set(n.id, n);
    for (const e of manifest.edges) this.edgesById.set(e.id, e);
  }

  node(id: string): WorldNode {
    const n = this.nodesById.get(id);
    if (!n) throw new Error(`unknown node ${id}`);
    return n;
  }

  edge(id: string): WorldEdge {
    const e = this.edgesById.get(id);
    if (!e) throw new Error(`unknown edge ${id}`);
    return e;
  }

  edgeLength(id: string): number {
    const e = this.edge(id);
    const last = e.arclen[e.arclen.length - 1];
    if (last === undefined) throw new Error(`edge ${id} has an empty polyline`);
    return last;
  }

  /** Node id the session is standing near, or null mid-street. Mirrors the
   * server's rule: within delta_end of an end; the nearer end wins. */
  nodeNear(state: SessionState): string | null {
    const e = this.edge(state.edge_id);
    const L = this.edgeLength(state.edge_id);
    const delta = this.manifest.config.delta_end;
    const nearFrom = state.s <= delta;
    const nearTo = state.s >= L - delta;
    if (nearFrom && nearTo) return state.s <= L - state.s ? e.from : e.to;
    if (nearFrom) return e.from;
    if (nearTo) return e.to;
    return null;
  }

  /** Bearing you set off in when entering the edge at the given node: the
   * polyline's start tangent at its from end, the reversed end tangent at
   * its to end (entering there means walking the street backward). */
  entryBearing(edgeId: string, nodeId: string): number {
    const e = this.edge(edgeId);
    const n = e.x.length;
    if (n < 2) throw new Error(`edge ${edgeId} has fewer than 2 points`);
    if (e.from === nodeId) {
      return Math.atan2(e.x[1]! - e.x[0]!, e.y[1]! - e.y[0]!);
    }
    if (e.to === nodeId) {
      return Math.atan2(e.x[n - 2]! - e.x[n - 1]!, e.y[n - 2]! - e.y[n - 1]!);
    }
    throw new Error(`edge ${edgeId} does not touch node ${nodeId}`);
  }

  /** The streets currently offered, each with its entry bearing, in the
   * server's option order. Empty when not standing at a crossing. */
  optionsAt(state: SessionState): DirectionOption[] {
    if (state.mode !== "at_intersection" || state.pending_options.length === 0) return [];
    const nodeId = this.nodeNear(state);
    if (nodeId === null) return [];
    return state.pending_options.map((edgeId) => ({
      edgeId,
      bearing: this.entryBearing(edgeId, nodeId),
    }));
  }

  bounds(): WorldBounds {
    let minX = Infinity;
    let maxX = -Infinity;
    let minY = Infinity;
    let maxY = -Infinity;
    for (const e of this.manifest.edges) {
      for (const v of e.x) {
        if (v < minX) minX = v;
        if (v > maxX) maxX = v;
      }
      for (const v of e.y) {
        if (v < minY) minY = v;
        if (v > maxY) maxY = v;
      }
    }
    for (const n of this.manifest.nodes) {
      if (n.x < minX) minX = n.x;
      if (n.x > maxX) maxX = n.x;
      if (n.y < minY) minY = n.y;
      if (n.y > maxY) maxY = n.y;
    }
    if (!Number.isFinite(minX)) throw new Error("manifest has no geometry");
    return { minX, maxX, minY, maxY };
  }

  /** Frame yaw of an edge at an absolute frame number. */
  frameYaw(edgeId: string, frame: number): number {
    const e = this.edge(edgeId);
    const i = frame - e.frame_start;
    const yaw = e.yaw[i];
    if (yaw === undefined) {
      throw new Error(`frame ${frame} outside edge ${edgeId} [${e.frame_start}, ${e.frame_end}]`);
    }
    return yaw;
  }
}
