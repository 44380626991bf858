/**
 * Thin WebSocket wrapper speaking the teaching-service frame schema.
 * Every outgoing frame gets a sequence id; parsed server frames go to a
 * single callback (the view state), invalid messages are dropped.
 */

import {
  ArmName,
  ClientFrame,
  PROTOCOL_VERSION,
  ServerFrame,
  encodeClientFrame,
  parseServerFrame,
} from "./protocol.js";

export class TeachClient {
  private ws: WebSocket;
  private seq = 0;
  onFrame: (frame: ServerFrame) => void = () => {};
  onOpen: () => void = () => {};
  onClose: () => void = () => {};

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      this.send({ type: "hello", version: PROTOCOL_VERSION });
      this.onOpen();
    };
    this.ws.onmessage = (event) => {
      const frame = parseServerFrame(String(event.data));
      if (frame) this.onFrame(frame);
    };
    this.ws.onclose = () => this.onClose();
  }

  get connected(): boolean {
    return this.ws.readyState === WebSocket.OPEN;
  }

  send(frame: ClientFrame): void {
    if (this.ws.readyState !== WebSocket.OPEN) return;
    this.seq += 1;
    this.ws.send(encodeClientFrame({ ...frame, id: frame.id ?? this.seq }));
  }

  startDemo(arm: ArmName): void {
    this.send({ type: "start_demo", arm });
  }

  endDemo(): void {
    this.send({ type: "end_demo" });
  }

  fit(): void {
    this.send({ type: "fit" });
  }

  startExec(): void {
    this.send({ type: "start_exec" });
  }

  startCorrect(): void {
    this.send({ type: "start_correct" });
  }

  stop(): void {
    this.send({ type: "stop" });
  }

  resetTimeBelief(arm?: ArmName): void {
    this.send(arm ? { type: "reset_tb", arm } : { type: "reset_tb" });
  }

  setCoupling(enabled: boolean, relOffset?: number[]): void {
    this.send(relOffset
      ? { type: "set_coupling", enabled, rel_offset: relOffset }
      : { type: "set_coupling", enabled });
  }

  close(): void {
    this.ws.close();
  }
}
