/** Wire types for the world service HTTP API.
 *
 * Field names and shapes follow the server's JSON exactly; nothing here is
 * renamed or restructured, so a parsed response can be used as-is.
 */

export interface WorldNode {
  id: string;
  x: number;
  y: number;
}

export interface WorldEdge {
  id: string;
  video_id: string;
  from: string;
  to: string;
  reverse_edge_id: string | null;
  frame_start: number;
  frame_end: number;
  frames_uri: string;
  video_uri: string;
  walkmap_uri: string;
  /** Polyline of camera positions, one entry per frame. */
  x: number[];
  y: number[];
  yaw: number[];
  /** Cumulative arc length along the polyline, arclen[0] = 0. */
  arclen: number[];
}

export interface WorldConfig {
  avatar_distance: number;
  camera_height: number;
  corridor_tol: number;
  delta_end: number;
  delta_preload: number;
  epsilon: number;
  fade_seconds: number;
  fps: number;
  frame_height: number;
  frame_width: number;
  intersection_min_angle_deg: number;
  max_step: number;
  min_frames: number;
  pass_gap_frames: number;
}

export interface Manifest {
  nodes: WorldNode[];
  edges: WorldEdge[];
  config: WorldConfig;
}

export interface Avatar {
  x: number;
  y: number;
  yaw: number;
}

export type SessionMode = "walking" | "at_intersection" | "fading";

export interface SessionState {
  session_id: string;
  edge_id: string;
  avatar: Avatar;
  current_frame: number;
  s: number;
  mode: SessionMode;
  pending_options: string[];
  fade_t: number;
}

export interface CameraPose {
  /** [x, height, y] in world meters; the vertical axis is the middle slot. */
  position: [number, number, number];
  look_at: [number, number, number];
}

export type NavEvent =
  | { type: "fade_out" }
  | { type: "fade_in" }
  | { type: "edge_changed"; edge_id: string }
  | { type: "arrived_at_intersection"; node_id: string }
  | { type: "options_shown"; options: string[] };

export interface EdgeAssets {
  edge_id: string;
  frames_uri: string;
  walkmap_uri: string;
  video_uri: string;
}

export interface CreateSessionResponse {
  session_id: string;
  state: SessionState;
  camera: CameraPose;
}

export interface StepResponse {
  state: SessionState;
  collided: boolean;
  events: NavEvent[];
  camera_pose: CameraPose;
  preload_hints: string[];
  clamped: boolean;
  /** Present only when the step changed edges. */
  assets?: EdgeAssets;
}

export interface PresenceEntry {
  session_id: string;
  edge_id: string;
  current_frame: number;
  avatar: Avatar;
}

export interface PresencePayload {
  sessions: PresenceEntry[];
}

export type StepAction = ["choose", string] | ["reverse"] | ["teleport", string];

export interface StepInput {
  move?: [number, number];
  action?: StepAction;
  dt?: number;
}

export interface ErrorEnvelope {
  error: { code: string; message: string };
}
