// Application bootstrap: connect the bridge, wire the scene view, the
// mouse stylus, the control panel, and the readouts.

import { BridgeClient } from "./bridgeClient.js";
import { ControlPanel } from "./controlPanel.js";
import { dragToOrientation, PointerSample, stylusInput, WorkspaceBox } from "./mouseStylus.js";
import { Camera, defaultCamera, viewportExtent } from "./projection.js";
import { distanceLabel, forceLabel, pairLabel, statusLine } from "./readouts.js";
import { drawScene } from "./renderer.js";
import { trajectoryFileContents, trajectoryFileName } from "./recording.js";
import { SceneModel } from "./sceneModel.js";
import type { ForceMsg, Quat } from "./types.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const panel = document.getElementById("panel")!;
const status = document.getElementById("status")!;
const proximityOut = document.getElementById("proximity")!;
const forceOut = document.getElementById("force")!;
const banner = document.getElementById("banner")!;

const wsUrl = new URLSearchParams(location.search).get("ws")
  ?? `ws://${location.hostname}:${location.port || 8765}`;

const client = new BridgeClient(wsUrl);
const scene = new SceneModel();
const camera: Camera = defaultCamera();
const controls = new ControlPanel(panel, client);

let box: WorkspaceBox = { extents: [0.16, 0.13, 0.13] };
let lastForce: ForceMsg | null = null;
let orientation: Quat = [1, 0, 0, 0];

const pointer: PointerSample = {
  canvasX: canvas.width / 2, canvasY: canvas.height / 2,
  width: canvas.width, height: canvas.height, wheelSteps: 0, button: false,
};

client.onStateChange = (connected) => {
  banner.style.display = connected ? "none" : "block";
  status.textContent = statusLine(connected, connected ? scene.lastSnapshotT : null);
};

client.subscribe((msg) => {
  switch (msg.type) {
    case "hello":
      scene.loadHello(msg);
      box = { extents: msg.device.workspace_extents };
      controls.applyModes(msg.modes);
      client.send({ type: "mode", viewport_extent: viewportExtent(camera) });
      break;
    case "snapshot":
      scene.applySnapshot(msg);
      status.textContent = statusLine(client.connected, msg.t);
      break;
    case "proximity":
      scene.applyProximity(msg);
      proximityOut.textContent = `${pairLabel(msg)}  ${distanceLabel(msg)}`;
      break;
    case "force":
      lastForce = msg;
      forceOut.textContent = forceLabel(msg);
      break;
    case "ack":
      controls.applyAck(msg);
      break;
    case "trajectory": {
      const blob = new Blob([trajectoryFileContents(msg)], { type: "application/jsonl" });
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = trajectoryFileName(msg);
      link.click();
      URL.revokeObjectURL(link.href);
      break;
    }
    case "error":
      status.textContent = `kernel error: ${msg.text}`;
      break;
  }
});

function sendStylus(): void {
  client.send(stylusInput(pointer, box, orientation));
}

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  pointer.canvasX = ev.clientX - rect.left;
  pointer.canvasY = ev.clientY - rect.top;
  if (ev.shiftKey && ev.buttons & 1) {
    orientation = dragToOrientation(ev.movementX, ev.movementY, rect.width, rect.height);
  }
  sendStylus();
});
canvas.addEventListener("pointerdown", (ev) => {
  if (ev.button === 0 && !ev.shiftKey) {
    pointer.button = true;   // the stylus button: clutch engage
    sendStylus();
  }
});
canvas.addEventListener("pointerup", (ev) => {
  if (ev.button === 0) {
    pointer.button = false;
    sendStylus();
  }
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  pointer.wheelSteps -= Math.sign(ev.deltaY);  // wheel up = toward the scene
  sendStylus();
}, { passive: false });

// right-drag orbits the camera
canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
canvas.addEventListener("pointermove", (ev) => {
  if (ev.buttons & 2) {
    camera.azimuth -= ev.movementX * 0.01;
    camera.elevation = Math.min(1.4, Math.max(-1.4, camera.elevation + ev.movementY * 0.01));
    client.send({ type: "mode", viewport_extent: viewportExtent(camera) });
  }
});

function frame(): void {
  drawScene(ctx, camera, scene, lastForce, canvas.width, canvas.height);
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
