/** Thin session client: all navigation state lives on the server.
 *
 * The client never simulates movement locally; it forwards inputs and
 * replaces its snapshot with whatever the server returns. At most one input
 * request is in flight. Moves queued behind it coalesce by vector sum,
 * actions queue in order and are never dropped; while a fade is running the
 * server freezes input, so held actions wait out the fade (heartbeat ticks
 * advance it) and go out once it clears. The frame on screen only advances
 * to the server's current frame once that texture is actually loaded, so
 * the previous panorama persists under the fade while bytes arrive.
 */

import type {
  CameraPose,
  CreateSessionResponse,
  EdgeAssets,
  NavEvent,
  SessionState,
  StepAction,
  StepInput,
  StepResponse,
} from "./types.js";

/** What the session layer needs from the HTTP client; ApiClient satisfies
 * this, and tests substitute scripted fakes. */
export interface SessionApi {
  createSession(spawn?: string): Promise<CreateSessionResponse>;
  sendInput(sessionId: string, input: StepInput): Promise<StepResponse>;
}

export interface FrameRef {
  edgeId: string;
  frame: number;
}

function frameKey(r: FrameRef): string {
  return `${r.edgeId}/${r.frame}`;
}

interface QueuedAction {
  action: StepAction;
  dt: number;
}

export class SessionClient {
  private readonly api: SessionApi;

  state: SessionState | null = null;
  camera: CameraPose | null = null;
  lastEvents: NavEvent[] = [];
  preloadHints: string[] = [];
  lastAssets: EdgeAssets | null = null;
  lastError: unknown = null;

  private inflightP: Promise<void> | null = null;
  private pendingMove: [number, number] = [0, 0];
  private pendingDt = 0;
  private hasPendingMove = false;
  private readonly pendingActions: QueuedAction[] = [];

  private readonly loadedTextures = new Set<string>();
  private displayed: FrameRef | null = null;
  private wanted: FrameRef | null = null;

  constructor(api: SessionApi) {
    this.api = api;
  }

  get inFlight(): boolean {
    return this.inflightP !== null;
  }

  get queuedActionCount(): number {
    return this.pendingActions.length;
  }

  /** Frame currently safe to show; lags the server until textures load. */
  get displayedFrame(): FrameRef | null {
    return this.displayed;
  }

  /** Frame the server says we are on but whose texture is still missing. */
  get neededTexture(): FrameRef | null {
    if (!this.wanted) return null;
    return this.loadedTextures.has(frameKey(this.wanted)) ? null : { ...this.wanted };
  }

  async start(spawn?: string): Promise<void> {
    const r = await this.api.createSession(spawn);
    this.state = r.state;
    this.camera = r.camera;
    this.lastEvents = [];
    this.setWanted({ edgeId: r.state.edge_id, frame: r.state.current_frame });
  }

  /** Queue one controller output. Actions always enqueue; moves merge. */
  queueInput(input: StepInput): void {
    if (input.action) {
      this.pendingActions.push({ action: input.action, dt: input.dt ?? 1 / 60 });
      return;
    }
    const [mx, my] = input.move ?? [0, 0];
    this.pendingMove = [this.pendingMove[0] + mx, this.pendingMove[1] + my];
    this.pendingDt += input.dt ?? 0;
    this.hasPendingMove = true;
  }

  /** Per-render-frame hook: keeps a running fade ticking even with the
   * keyboard idle (queued actions wait on the fade, so they must not be
   * the only thing in the queue), then pushes whatever is queued. */
  tick(dt: number): void {
    if (this.state?.mode === "fading" && !this.hasPendingMove) {
      this.queueInput({ move: [0, 0], dt });
    }
    this.pump();
  }

  markTextureLoaded(edgeId: string, frame: number): void {
    this.loadedTextures.add(frameKey({ edgeId, frame }));
    this.refreshDisplayed();
  }

  /** Resolves once every queued request has settled. */
  async settle(): Promise<void> {
    while (this.inflightP) await this.inflightP;
  }

  pump(): void {
    if (this.inflightP || !this.state) return;
    const req = this.nextRequest();
    if (!req) return;
    const sid = this.state.session_id;
    this.inflightP = this.api
      .sendInput(sid, req)
      .then((resp) => this.apply(resp))
      .catch((err) => {
        this.lastError = err;
      })
      .finally(() => {
        this.inflightP = null;
        this.pump();
      });
  }

  private nextRequest(): StepInput | null {
    // a fade freezes server-side input: only heartbeat ticks go out, and
    // queued actions wait so the frozen window cannot eat them
    const fading = this.state?.mode === "fading";
    if (!fading && this.pendingActions.length > 0) {
      const a = this.pendingActions.shift()!;
      return { move: [0, 0], action: a.action, dt: a.dt };
    }
    if (this.hasPendingMove) {
      const move = this.pendingMove;
      const dt = this.pendingDt > 0 ? this.pendingDt : 1 / 60;
      this.pendingMove = [0, 0];
      this.pendingDt = 0;
      this.hasPendingMove = false;
      if (fading) return { move: [0, 0], dt };
      return { move, dt };
    }
    return null;
  }

  private apply(resp: StepResponse): void {
    this.state = resp.state;
    this.camera = resp.camera_pose;
    this.lastEvents = resp.events;
    this.preloadHints = resp.preload_hints;
    if (resp.assets) this.lastAssets = resp.assets;
    this.setWanted({ edgeId: resp.state.edge_id, frame: resp.state.current_frame });
  }

  private setWanted(ref: FrameRef): void {
    this.wanted = ref;
    this.refreshDisplayed();
  }

  private refreshDisplayed(): void {
    if (this.wanted && this.loadedTextures.has(frameKey(this.wanted))) {
      this.displayed = { ...this.wanted };
    }
  }
}
