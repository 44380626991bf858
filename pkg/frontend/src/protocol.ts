/**
 * Wire protocol of the teaching service: one JSON frame per WebSocket
 * message. The client sends pointer positions and demonstration samples,
 * never forces; every displayed physical quantity originates from server
 * tick frames.
 *
 * Validation is hand-rolled so the compiled output runs in the browser as
 * bare ES modules with no runtime dependencies.
 */

export const PROTOCOL_VERSION = 1;

export type ArmName = "left" | "right";
export type FrameId = number | string;

export type ClientFrame =
  | { type: "hello"; version: number; id?: FrameId }
  | { type: "config"; id?: FrameId; [key: string]: unknown }
  | { type: "start_demo"; arm: ArmName; id?: FrameId }
  | { type: "demo_point"; arm: ArmName; x: number[]; t: number; id?: FrameId }
  | { type: "end_demo"; id?: FrameId }
  | { type: "fit"; id?: FrameId }
  | { type: "start_exec"; id?: FrameId }
  | { type: "start_correct"; id?: FrameId }
  | { type: "drag"; arm: ArmName; pointer_x: number[]; id?: FrameId }
  | { type: "drag_end"; arm: ArmName; id?: FrameId }
  | { type: "reset_tb"; arm?: ArmName; id?: FrameId }
  | { type: "set_coupling"; enabled: boolean; stiffness?: number;
      rel_offset?: number[]; cap?: number; id?: FrameId }
  | { type: "stop"; id?: FrameId };

export interface ArmTick {
  arm: string;
  x: number[];
  v: number[];
  attractor: number[];
  sigma: number;
  k_scale: number;
  t_b: number;
  f_ext: number[];
}

export interface TickFrame {
  type: "tick";
  t: number;
  phase: string;
  arms: ArmTick[];
}

export interface ModelInfoFrame {
  type: "model_info";
  arm: string;
  n_nodes: number;
  goal: number[];
}

export interface AckFrame {
  type: "ack";
  id: FrameId;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  msg: string;
  id?: FrameId;
}

export type ServerFrame = AckFrame | ErrorFrame | ModelInfoFrame | TickFrame;

const isFiniteNumber = (v: unknown): v is number =>
  typeof v === "number" && Number.isFinite(v);

const isNumberArray = (v: unknown): v is number[] =>
  Array.isArray(v) && v.length > 0 && v.every(isFiniteNumber);

function isArmTick(v: unknown): v is ArmTick {
  if (typeof v !== "object" || v === null) return false;
  const a = v as Record<string, unknown>;
  return typeof a.arm === "string" &&
    isNumberArray(a.x) && isNumberArray(a.v) && isNumberArray(a.attractor) &&
    isNumberArray(a.f_ext) && isFiniteNumber(a.sigma) &&
    isFiniteNumber(a.k_scale) && isFiniteNumber(a.t_b);
}

/**
 * Parse and validate one server message; returns null for anything that
 * does not match the schema (the UI ignores rather than crashes).
 */
export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as Record<string, unknown>;
  switch (frame.type) {
    case "ack":
      if (typeof frame.id === "number" || typeof frame.id === "string") {
        return { type: "ack", id: frame.id };
      }
      return null;
    case "error":
      if (typeof frame.code === "string" && typeof frame.msg === "string") {
        return { type: "error", code: frame.code, msg: frame.msg,
                 id: frame.id as FrameId | undefined };
      }
      return null;
    case "model_info":
      if (typeof frame.arm === "string" && isFiniteNumber(frame.n_nodes) &&
          isNumberArray(frame.goal)) {
        return { type: "model_info", arm: frame.arm,
                 n_nodes: frame.n_nodes, goal: frame.goal };
      }
      return null;
    case "tick":
      if (isFiniteNumber(frame.t) && typeof frame.phase === "string" &&
          Array.isArray(frame.arms) && frame.arms.every(isArmTick)) {
        return { type: "tick", t: frame.t, phase: frame.phase,
                 arms: frame.arms as ArmTick[] };
      }
      return null;
    default:
      return null;
  }
}

export function encodeClientFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}
