// Mode and recording controls. UI state always mirrors the last kernel ack.

import { BridgeClient } from "./bridgeClient.js";
import { armCommand, captureCommand, disarmCommand, RecordMode } from "./recording.js";
import type { AckMsg, ModeState } from "./types.js";

export class ControlPanel {
  private root: HTMLElement;
  private client: BridgeClient;
  private selects = new Map<string, HTMLSelectElement>();
  private recordButton: HTMLButtonElement;
  private captureButton: HTMLButtonElement;
  private recording = false;

  constructor(root: HTMLElement, client: BridgeClient) {
    this.root = root;
    this.client = client;

    this.addSelect("scale", ["rough", "medium", "fine", "screen_adaptive"]);
    this.addSelect("frame", ["world", "screen"]);
    this.addSelect("pivot", ["self_origin", "geometric_center"]);
    this.addSelect("force_class",
      ["constant_contact", "penetration_proportional", "spring_damper"]);

    const recordRow = document.createElement("div");
    recordRow.className = "row";
    const modeSelect = document.createElement("select");
    for (const mode of ["manual", "auto_time", "auto_distance"]) {
      modeSelect.add(new Option(mode, mode));
    }
    const valueInput = document.createElement("input");
    valueInput.type = "number";
    valueInput.step = "0.01";
    valueInput.value = "0.1";
    this.recordButton = document.createElement("button");
    this.recordButton.textContent = "arm";
    this.recordButton.onclick = () => {
      if (this.recording) {
        this.client.send(disarmCommand());
      } else {
        this.client.send(armCommand(modeSelect.value as RecordMode,
                                    Number(valueInput.value)));
      }
    };
    this.captureButton = document.createElement("button");
    this.captureButton.textContent = "capture";
    this.captureButton.disabled = true;
    this.captureButton.onclick = () => this.client.send(captureCommand());
    recordRow.append("record: ", modeSelect, valueInput, this.recordButton, this.captureButton);
    this.root.appendChild(recordRow);
  }

  private addSelect(key: string, options: string[]): void {
    const row = document.createElement("div");
    row.className = "row";
    const select = document.createElement("select");
    for (const option of options) select.add(new Option(option, option));
    select.onchange = () => this.client.send({ type: "mode", [key]: select.value });
    row.append(`${key}: `, select);
    this.root.appendChild(row);
    this.selects.set(key, select);
  }

  /** Reflect a kernel ack; the panel never assumes a command applied. */
  applyAck(ack: AckMsg): void {
    if (ack.modes) this.applyModes(ack.modes);
    if (typeof ack.recording === "boolean") {
      this.recording = ack.recording;
      this.recordButton.textContent = this.recording ? "disarm" : "arm";
      this.captureButton.disabled = !this.recording;
    }
  }

  applyModes(modes: ModeState): void {
    for (const [key, select] of this.selects) {
      const value = (modes as unknown as Record<string, string | null>)[key];
      if (value) select.value = value;
    }
    this.recording = modes.recording;
    this.recordButton.textContent = this.recording ? "disarm" : "arm";
    this.captureButton.disabled = !this.recording;
  }
}
