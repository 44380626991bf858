/**
 * Wiring: canvas, toolbar, pointer handlers and the animation loop.
 * Hold Shift (or use a second pointer) to address the right arm. While
 * recording, pointer strokes stream demonstration samples; while the
 * policy runs, pressing on the canvas drags the nearest-addressed arm.
 */

import { DemoCapture, DragEmitter } from "./capture.js";
import { TeachClient } from "./client.js";
import type { ArmName } from "./protocol.js";
import { render } from "./render.js";
import { UiState } from "./state.js";
import { Viewport, clampToWorkspace, screenToWorld } from "./transform.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server") ??
  `ws://${window.location.hostname || "127.0.0.1"}:8732`;

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const view: Viewport = { widthPx: canvas.width, heightPx: canvas.height };

const state = new UiState();
const client = new TeachClient(`${server}/session`);
const capture = new DemoCapture(60);
const drags = new DragEmitter();
// pointerId -> arm, so a second touch/pen addresses the right arm
const pointerArms = new Map<number, ArmName>();
let recording: ArmName | null = null;

client.onFrame = (frame) => state.ingest(frame);
client.onOpen = () => setStatus(`connected to ${server}`);
client.onClose = () => setStatus("disconnected");

function setStatus(text: string): void {
  const el = document.getElementById("status");
  if (el) el.textContent = text;
}

function armFor(event: PointerEvent): ArmName {
  if (event.shiftKey) return "right";
  return pointerArms.size > 0 && !pointerArms.has(event.pointerId)
    ? "right" : "left";
}

function worldOf(event: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return clampToWorkspace(
    screenToWorld(view, event.clientX - rect.left, event.clientY - rect.top));
}

canvas.addEventListener("pointerdown", (event) => {
  canvas.setPointerCapture(event.pointerId);
  const arm = armFor(event);
  pointerArms.set(event.pointerId, arm);
  if (state.phase === "passive_teaching" && recording === arm) {
    const frame = capture.sample(arm, worldOf(event), performance.now());
    if (frame) client.send(frame);
  } else if (state.phase === "executing" || state.phase === "active_teaching") {
    client.send(drags.move(arm, worldOf(event)));
  }
});

canvas.addEventListener("pointermove", (event) => {
  const arm = pointerArms.get(event.pointerId);
  if (arm === undefined) return;
  if (state.phase === "passive_teaching" && recording === arm) {
    const frame = capture.sample(arm, worldOf(event), performance.now());
    if (frame) client.send(frame);
  } else if (drags.isActive(arm)) {
    // emitted inside the input event: within the one-frame latency budget
    client.send(drags.move(arm, worldOf(event)));
  }
});

function endPointer(event: PointerEvent): void {
  const arm = pointerArms.get(event.pointerId);
  pointerArms.delete(event.pointerId);
  if (arm === undefined) return;
  const release = drags.release(arm);
  if (release) client.send(release);
}

canvas.addEventListener("pointerup", endPointer);
canvas.addEventListener("pointercancel", endPointer);

function bind(id: string, handler: () => void): void {
  document.getElementById(id)?.addEventListener("click", handler);
}

bind("btn-demo", () => {
  if (recording === null) {
    recording = (document.getElementById("arm-right") as HTMLInputElement)
      ?.checked ? "right" : "left";
    capture.begin();
    state.clearTrail(recording);
    client.startDemo(recording);
    setButton("btn-demo", "End demo");
  } else {
    recording = null;
    client.endDemo();
    setButton("btn-demo", "Start demo");
  }
});
bind("btn-fit", () => client.fit());
bind("btn-exec", () => {
  state.clearTrail();
  client.startExec();
});
bind("btn-correct", () => client.startCorrect());
bind("btn-stop", () => {
  for (const frame of drags.releaseAll()) client.send(frame);
  client.stop();
});
bind("btn-reset-tb", () => client.resetTimeBelief());
document.getElementById("coupling")?.addEventListener("change", (event) => {
  const enabled = (event.target as HTMLInputElement).checked;
  state.couplingEnabled = enabled;
  client.setCoupling(enabled);
});

function setButton(id: string, label: string): void {
  const el = document.getElementById(id);
  if (el) el.textContent = label;
}

function frameLoop(): void {
  state.takeLatestTick();  // coalesce to the newest tick per animation frame
  render(ctx, state, view);
  requestAnimationFrame(frameLoop);
}

requestAnimationFrame(frameLoop);
