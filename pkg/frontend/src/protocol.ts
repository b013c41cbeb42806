/**
 * Wire schema, version 1: one UTF-8 JSON object per newline-terminated
 * line with a "v" version field and a "type" tag. Unknown fields are
 * ignored so peers can add fields without breaking older consoles.
 */

export const PROTOCOL_VERSION = 1;
export const MAX_FRAME_BYTES = 64 * 1024;

export type FirmnessMode = "standard" | "medium" | "soft";
export const FIRMNESS_MODES: readonly FirmnessMode[] = ["standard", "medium", "soft"];

export type Grid = number[][];

// Client -> server.
export type Hello = { type: "hello" };
export type GetStatus = { type: "get_status" };
export type Activate = { type: "activate"; mode: FirmnessMode };
export type Deactivate = { type: "deactivate" };
export type SetMode = { type: "set_mode"; mode: FirmnessMode };
export type LoadBody =
  | { type: "load_body"; profile_name: string }
  | { type: "load_body"; profile: Record<string, unknown> };
export type Subscribe = { type: "subscribe"; rate_hz: number };
export type Unsubscribe = { type: "unsubscribe" };
export type ClientMessage =
  | Hello | GetStatus | Activate | Deactivate | SetMode | LoadBody
  | Subscribe | Unsubscribe;

// Server -> client.
export type Status = {
  type: "status";
  weight_kgf: number;
  mode: FirmnessMode;
  active: boolean;
  converged: boolean;
  tick: number;
  excluded_count: number;
};
export type Snapshot = {
  type: "snapshot";
  tick: number;
  pressures: Grid;   // kgf, 4 decimals on the wire
  extensions: Grid;  // mm, 2 decimals on the wire
  support: Grid;     // 0/1 bits
};
export type Ack = { type: "ack"; request_type: string };
export type ErrorMessage = { type: "error"; code: string; message: string };
export type ServerMessage = Status | Snapshot | Ack | ErrorMessage;

export type Message = ClientMessage | ServerMessage;

export class ProtocolError extends Error {
  constructor(public readonly code: string, message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

/** Serialize one message to its single-line frame (trailing newline included). */
export function encode(msg: Message): string {
  const frame = JSON.stringify({ v: PROTOCOL_VERSION, ...msg });
  return frame + "\n";
}

function requireField<T>(
  obj: Record<string, unknown>,
  key: string,
  check: (v: unknown) => v is T,
): T {
  const value = obj[key];
  if (value === undefined) throw new ProtocolError("bad_frame", `missing field '${key}'`);
  if (!check(value)) throw new ProtocolError("bad_frame", `field '${key}' has wrong type`);
  return value;
}

const isString = (v: unknown): v is string => typeof v === "string";
const isBoolean = (v: unknown): v is boolean => typeof v === "boolean";
const isFiniteNumber = (v: unknown): v is number =>
  typeof v === "number" && Number.isFinite(v);
const isInteger = (v: unknown): v is number => Number.isInteger(v);
const isObject = (v: unknown): v is Record<string, unknown> =>
  typeof v === "object" && v !== null && !Array.isArray(v);

function isGrid(v: unknown): v is Grid {
  return Array.isArray(v) && v.every(
    (row) => Array.isArray(row) && row.every(isFiniteNumber),
  );
}

function parseMode(obj: Record<string, unknown>): FirmnessMode {
  const raw = requireField(obj, "mode", isString);
  if (!(FIRMNESS_MODES as readonly string[]).includes(raw)) {
    throw new ProtocolError("bad_request", `unknown firmness mode '${raw}'`);
  }
  return raw as FirmnessMode;
}

/** Parse one frame; throws ProtocolError with the matching wire code. */
export function decode(frame: string): Message {
  if (frame.length > MAX_FRAME_BYTES) {
    throw new ProtocolError("frame_too_large", `frame exceeds ${MAX_FRAME_BYTES} bytes`);
  }
  let obj: unknown;
  try {
    obj = JSON.parse(frame);
  } catch (exc) {
    throw new ProtocolError("bad_frame", `not a JSON frame: ${exc}`);
  }
  if (!isObject(obj)) throw new ProtocolError("bad_frame", "frame is not a JSON object");
  if (obj.v !== PROTOCOL_VERSION) {
    throw new ProtocolError("bad_version", `unsupported protocol version ${JSON.stringify(obj.v)}`);
  }
  const tag = obj.type;
  if (!isString(tag)) throw new ProtocolError("unknown_type", "missing message type");

  switch (tag) {
    case "hello":
    case "get_status":
    case "deactivate":
    case "unsubscribe":
      return { type: tag };
    case "activate":
    case "set_mode":
      return { type: tag, mode: parseMode(obj) };
    case "load_body":
      if (isString(obj.profile_name)) return { type: tag, profile_name: obj.profile_name };
      if (isObject(obj.profile)) return { type: tag, profile: obj.profile };
      throw new ProtocolError("bad_request", "load_body needs profile_name or profile");
    case "subscribe": {
      const rate = requireField(obj, "rate_hz", isFiniteNumber);
      if (!(rate > 0 && rate < 1000)) {
        throw new ProtocolError("bad_request", `bad subscription rate ${rate}`);
      }
      return { type: tag, rate_hz: rate };
    }
    case "status":
      return {
        type: tag,
        weight_kgf: requireField(obj, "weight_kgf", isFiniteNumber),
        mode: parseMode(obj),
        active: requireField(obj, "active", isBoolean),
        converged: requireField(obj, "converged", isBoolean),
        tick: requireField(obj, "tick", isInteger),
        excluded_count: requireField(obj, "excluded_count", isInteger),
      };
    case "snapshot":
      return {
        type: tag,
        tick: requireField(obj, "tick", isInteger),
        pressures: requireField(obj, "pressures", isGrid),
        extensions: requireField(obj, "extensions", isGrid),
        support: requireField(obj, "support", isGrid),
      };
    case "ack":
      return { type: tag, request_type: requireField(obj, "request_type", isString) };
    case "error":
      return {
        type: tag,
        code: requireField(obj, "code", isString),
        message: requireField(obj, "message", isString),
      };
    default:
      throw new ProtocolError("unknown_type", `unknown message type '${tag}'`);
  }
}

/** Split a streamed chunk into complete frames, returning any trailing partial. */
export function splitFrames(buffer: string): { frames: string[]; rest: string } {
  const parts = buffer.split("\n");
  const rest = parts.pop() ?? "";
  return { frames: parts.filter((p) => p.length > 0), rest };
}
