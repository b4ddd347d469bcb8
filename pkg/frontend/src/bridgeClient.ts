// WebSocket client for the kernel bridge with typed dispatch and reconnect.

import type { BridgeMsg, ModeCommand, RecordCommand, StylusInput } from "./types.js";

export type Handler = (msg: BridgeMsg) => void;
export type Command = StylusInput | ModeCommand | RecordCommand | { type: "hello" };

export class BridgeClient {
  private ws: WebSocket | null = null;
  private handlers: Handler[] = [];
  private url: string;
  connected = false;
  onStateChange: (connected: boolean) => void = () => {};

  constructor(url: string) {
    this.url = url;
  }

  connect(): void {
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.connected = true;
      this.onStateChange(true);
      this.send({ type: "hello" });
    };
    this.ws.onmessage = (event: MessageEvent) => {
      try {
        const msg = JSON.parse(event.data as string) as BridgeMsg;
        for (const handler of this.handlers) handler(msg);
      } catch {
        // ignore malformed frames; the kernel is the source of truth
      }
    };
    this.ws.onclose = () => {
      this.connected = false;
      this.onStateChange(false);
      // frozen view + reconnect banner; retry quietly
      setTimeout(() => this.connect(), 1000);
    };
    this.ws.onerror = () => this.ws?.close();
  }

  subscribe(handler: Handler): void {
    this.handlers.push(handler);
  }

  send(cmd: Command): void {
    if (this.ws && this.connected) {
      this.ws.send(JSON.stringify(cmd));
    }
    // events while disconnected are dropped by design
  }
}
