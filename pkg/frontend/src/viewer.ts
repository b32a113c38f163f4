/** Browser wiring: three.js scene, DOM events, render loop.
 *
 * Everything with behavior worth testing lives in the pure modules this file
 * imports; here we only glue them to WebGL and the keyboard. Importing this
 * module must stay side-effect free so it can load under node; only start()
 * touches the document.
 */

import * as THREE from "three";

import { ApiClient } from "./api.js";
import { buildSpheroidMesh, solveK, type SpheroidMesh } from "./geometry.js";
import { InputController } from "./input.js";
import { buildDrawOps, layoutFor, MinimapController, type MapLayout } from "./minimap.js";
import { fadeAlpha } from "./render.js";
import { SessionClient } from "./session.js";
import type { PresencePayload } from "./types.js";
import { WorldIndex } from "./world.js";

/** On-screen field of view of the rendering camera. */
export const CAMERA_FOV_DEG = 60;
/** Panorama content that camera should span once the backdrop is stretched. */
export const TARGET_FOV_DEG = 110;

export const MESH_LAT_STEPS = 48;
export const MESH_LON_STEPS = 96;

const PRESENCE_POLL_MS = 2000;
const MAP_SIZE_PX = 280;

export interface ViewerOptions {
  server: string;
  spawn?: string;
}

/** Read `?server=...&spawn=...`; both optional, server defaults to the
 * page's own origin. */
export function parseViewerOptions(search: string): ViewerOptions {
  const q = new URLSearchParams(search);
  return {
    server: q.get("server") ?? "",
    spawn: q.get("spawn") ?? undefined,
  };
}

/** Adapt the mesh model to a three.js geometry, untouched. */
export function buildThreeGeometry(mesh: SpheroidMesh): THREE.BufferGeometry {
  const geo = new THREE.BufferGeometry();
  geo.setAttribute("position", new THREE.Float32BufferAttribute(mesh.positions, 3));
  geo.setAttribute("uv", new THREE.Float32BufferAttribute(mesh.uvs, 2));
  geo.setIndex(mesh.faces);
  return geo;
}

export class Viewer {
  private readonly api: ApiClient;
  private readonly session: SessionClient;
  private readonly input = new InputController();
  private readonly minimap = new MinimapController();
  private world: WorldIndex | null = null;

  private renderer: THREE.WebGLRenderer | null = null;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera | null = null;
  private dome: THREE.Mesh | null = null;
  private avatarMarker: THREE.Object3D | null = null;
  private fadeOverlay: HTMLDivElement | null = null;
  private mapCanvas: HTMLCanvasElement | null = null;
  private mapLayout: MapLayout | null = null;

  private readonly textures = new Map<string, THREE.Texture>();
  private readonly loadingTextures = new Set<string>();
  private presence: PresencePayload | null = null;
  private lastPresenceAt = 0;
  private lastTime = 0;
  private readonly spawn?: string;

  constructor(options: ViewerOptions) {
    this.api = new ApiClient(options.server);
    this.session = new SessionClient(this.api);
    this.spawn = options.spawn;
  }

  async start(container: HTMLElement): Promise<void> {
    const manifest = await this.api.manifest();
    this.world = new WorldIndex(manifest);
    await this.session.start(this.spawn);

    const w = container.clientWidth || 960;
    const h = container.clientHeight || 540;
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setSize(w, h);
    container.appendChild(this.renderer.domElement);

    this.camera = new THREE.PerspectiveCamera(CAMERA_FOV_DEG, w / h, 0.01, 100);
    const k = solveK(TARGET_FOV_DEG, CAMERA_FOV_DEG);
    const dome = new THREE.Mesh(
      buildThreeGeometry(buildSpheroidMesh(k, MESH_LAT_STEPS, MESH_LON_STEPS)),
      new THREE.MeshBasicMaterial({ side: THREE.FrontSide }),
    );
    dome.scale.setScalar(30);
    this.dome = dome;
    this.scene.add(dome);

    const marker = new THREE.Group();
    const body = new THREE.Mesh(
      new THREE.CapsuleGeometry(0.22, 1.0, 4, 12),
      new THREE.MeshBasicMaterial({ color: 0x4d7cfe }),
    );
    body.position.y = 0.72;
    marker.add(body);
    this.avatarMarker = marker;
    this.scene.add(marker);

    this.fadeOverlay = document.createElement("div");
    Object.assign(this.fadeOverlay.style, {
      position: "absolute",
      inset: "0",
      background: "#000",
      opacity: "0",
      pointerEvents: "none",
    });
    container.appendChild(this.fadeOverlay);

    this.mapCanvas = document.createElement("canvas");
    this.mapCanvas.width = MAP_SIZE_PX;
    this.mapCanvas.height = MAP_SIZE_PX;
    Object.assign(this.mapCanvas.style, {
      position: "absolute",
      right: "12px",
      top: "12px",
      background: "rgba(16, 16, 20, 0.85)",
      borderRadius: "6px",
      display: "none",
    });
    container.appendChild(this.mapCanvas);
    this.mapLayout = layoutFor(this.world, MAP_SIZE_PX, MAP_SIZE_PX);
    this.mapCanvas.addEventListener("click", (ev) => {
      if (!this.world || !this.mapLayout) return;
      const rect = this.mapCanvas!.getBoundingClientRect();
      const action = this.minimap.click(
        this.world,
        this.mapLayout,
        ev.clientX - rect.left,
        ev.clientY - rect.top,
      );
      if (action) this.session.queueInput({ move: [0, 0], action, dt: 1 / 60 });
    });

    window.addEventListener("keydown", (ev) => {
      if (!ev.repeat) this.input.keyDown(ev.code);
    });
    window.addEventListener("keyup", (ev) => this.input.keyUp(ev.code));

    this.lastTime = performance.now();
    requestAnimationFrame((t) => this.frame(t));
  }

  private frame(now: number): void {
    const dt = Math.max(1e-3, Math.min(0.1, (now - this.lastTime) / 1000));
    this.lastTime = now;
    this.update(dt, now);
    this.draw();
    requestAnimationFrame((t) => this.frame(t));
  }

  private update(dt: number, now: number): void {
    const state = this.session.state;
    if (!state || !this.world) return;

    if (this.input.consumeMapToggle()) {
      this.minimap.toggle();
      if (this.mapCanvas) this.mapCanvas.style.display = this.minimap.visible ? "block" : "none";
    }
    const userInput = this.input.tick(dt, {
      yaw: state.avatar.yaw,
      mode: state.mode,
      options: this.world.optionsAt(state),
    });
    if (userInput) this.session.queueInput(userInput);
    this.session.tick(dt);

    const needed = this.session.neededTexture;
    if (needed) this.ensureTexture(needed.edgeId, needed.frame);
    for (const hint of this.session.preloadHints.slice(0, 4)) {
      const e = this.world.edge(hint);
      this.ensureTexture(e.id, e.frame_start);
    }

    if (now - this.lastPresenceAt > PRESENCE_POLL_MS) {
      this.lastPresenceAt = now;
      void this.api.presence().then((p) => {
        this.presence = p;
      });
    }
  }

  private ensureTexture(edgeId: string, frame: number): void {
    const key = `${edgeId}/${frame}`;
    if (this.textures.has(key) || this.loadingTextures.has(key)) return;
    this.loadingTextures.add(key);
    new THREE.TextureLoader().load(this.api.frameUrl(edgeId, frame), (tex) => {
      tex.colorSpace = THREE.SRGBColorSpace;
      this.textures.set(key, tex);
      this.loadingTextures.delete(key);
      this.session.markTextureLoaded(edgeId, frame);
    });
  }

  private draw(): void {
    const state = this.session.state;
    const pose = this.session.camera;
    if (!state || !pose || !this.world || !this.renderer || !this.camera) return;

    const [px, ph, pz] = pose.position;
    const [lx, , lz] = pose.look_at;
    this.camera.position.set(px, ph, pz);
    // level gaze: turn toward the avatar but keep the horizon centered
    this.camera.lookAt(lx, ph, lz);

    const shown = this.session.displayedFrame;
    if (shown && this.dome) {
      const tex = this.textures.get(`${shown.edgeId}/${shown.frame}`);
      const mat = this.dome.material as THREE.MeshBasicMaterial;
      if (tex && mat.map !== tex) {
        mat.map = tex;
        mat.needsUpdate = true;
      }
      this.dome.position.set(px, ph, pz);
      this.dome.rotation.y = this.world.frameYaw(shown.edgeId, shown.frame);
    }

    if (this.avatarMarker) {
      this.avatarMarker.position.set(state.avatar.x, 0, state.avatar.y);
      this.avatarMarker.rotation.y = state.avatar.yaw;
    }

    if (this.fadeOverlay) {
      this.fadeOverlay.style.opacity = String(fadeAlpha(state, this.world.manifest.config));
    }

    if (this.minimap.visible && this.mapCanvas && this.mapLayout) {
      this.drawMap();
    }
    this.renderer.render(this.scene, this.camera);
  }

  private drawMap(): void {
    const ctx = this.mapCanvas!.getContext("2d");
    if (!ctx || !this.world || !this.mapLayout) return;
    ctx.clearRect(0, 0, this.mapCanvas!.width, this.mapCanvas!.height);
    for (const op of buildDrawOps(this.world, this.mapLayout, this.session.state, this.presence)) {
      switch (op.kind) {
        case "edge": {
          ctx.strokeStyle = "#6a7180";
          ctx.lineWidth = 2;
          ctx.beginPath();
          op.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
          ctx.stroke();
          break;
        }
        case "node": {
          ctx.fillStyle = "#d8dce5";
          ctx.beginPath();
          ctx.arc(op.at[0], op.at[1], 5, 0, 2 * Math.PI);
          ctx.fill();
          break;
        }
        case "peer": {
          ctx.fillStyle = "#e0a33f";
          ctx.beginPath();
          ctx.arc(op.at[0], op.at[1], 4, 0, 2 * Math.PI);
          ctx.fill();
          break;
        }
        case "self": {
          ctx.fillStyle = "#4d7cfe";
          ctx.beginPath();
          ctx.arc(op.at[0], op.at[1], 5, 0, 2 * Math.PI);
          ctx.fill();
          ctx.strokeStyle = "#4d7cfe";
          ctx.beginPath();
          ctx.moveTo(op.at[0], op.at[1]);
          ctx.lineTo(op.at[0] + 10 * Math.sin(op.yaw), op.at[1] - 10 * Math.cos(op.yaw));
          ctx.stroke();
          break;
        }
      }
    }
  }
}

/** Page entry point: mount into #app or the body. */
export async function main(): Promise<void> {
  const viewer = new Viewer(parseViewerOptions(window.location.search));
  const container = document.getElementById("app") ?? document.body;
  container.style.position = "relative";
  await viewer.start(container);
}
