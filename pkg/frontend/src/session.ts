/**
 * Console session: one WebSocket, messages applied in arrival order.
 * On connect it sends hello and subscribes at the configured rate; on
 * drop it retries with exponential backoff. All state shown by the UI
 * (mode, target, convergence) is server-confirmed — nothing optimistic.
 */

import {
  ClientMessage,
  FirmnessMode,
  ServerMessage,
  Snapshot,
  Status,
  decode,
  encode,
  splitFrames,
} from "./protocol.js";

/** Minimal socket shape shared by the browser WebSocket and the `ws` package. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type ConnectionState = "connecting" | "open" | "retrying" | "closed";

export interface SessionOptions {
  makeSocket?: (url: string) => SocketLike;
  rateHz?: number;
  now?: () => number;
  backoffMs?: number;
  maxBackoffMs?: number;
}

export class ConsoleSession {
  readonly url: string;
  state: ConnectionState = "connecting";
  latestStatus: Status | null = null;
  latestSnapshot: Snapshot | null = null;
  lastSnapshotAt: number | null = null;
  /** Rolling max|D| history fed by the caller (the server owns the numbers). */
  readonly errors: { code: string; message: string }[] = [];

  onUpdate: (() => void) | null = null;
  onServerError: ((code: string, message: string) => void) | null = null;

  private socket: SocketLike | null = null;
  private buffer = "";
  private retryDelay: number;
  private closedByUser = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private readonly makeSocket: (url: string) => SocketLike;
  private readonly rateHz: number;
  private readonly now: () => number;
  private readonly maxBackoffMs: number;
  private readonly baseBackoffMs: number;

  constructor(url: string, options: SessionOptions = {}) {
    this.url = url;
    this.makeSocket = options.makeSocket
      ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.rateHz = options.rateHz ?? 5;
    this.now = options.now ?? Date.now;
    this.baseBackoffMs = options.backoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 8000;
    this.retryDelay = this.baseBackoffMs;
  }

  connect(): void {
    this.closedByUser = false;
    this.state = "connecting";
    this.buffer = "";
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.state = "open";
      this.retryDelay = this.baseBackoffMs;
      this.sendMessage({ type: "hello" });
      this.sendMessage({ type: "subscribe", rate_hz: this.rateHz });
      this.sendMessage({ type: "get_status" });
      this.onUpdate?.();
    };
    socket.onmessage = (ev) => this.onData(String(ev.data));
    socket.onerror = () => { /* onclose follows and drives the retry */ };
    socket.onclose = () => this.onDrop();
  }

  close(): void {
    this.closedByUser = true;
    this.state = "closed";
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.socket?.close();
    this.socket = null;
  }

  get connected(): boolean {
    return this.state === "open";
  }

  /** Milliseconds since the last snapshot, or null before the first one. */
  snapshotAgeMs(): number | null {
    return this.lastSnapshotAt === null ? null : this.now() - this.lastSnapshotAt;
  }

  sendMessage(msg: ClientMessage): void {
    if (this.state !== "open" || this.socket === null) return;
    this.socket.send(encode(msg));
  }

  activate(mode: FirmnessMode): void {
    this.sendMessage({ type: "activate", mode });
    this.sendMessage({ type: "get_status" });
  }

  deactivate(): void {
    this.sendMessage({ type: "deactivate" });
    this.sendMessage({ type: "get_status" });
  }

  setMode(mode: FirmnessMode): void {
    this.sendMessage({ type: "set_mode", mode });
    this.sendMessage({ type: "get_status" });
  }

  loadBody(profileName: string): void {
    this.sendMessage({ type: "load_body", profile_name: profileName });
    this.sendMessage({ type: "get_status" });
  }

  private onData(chunk: string): void {
    const { frames, rest } = splitFrames(this.buffer + chunk);
    this.buffer = rest;
    for (const frame of frames) {
      let msg: ServerMessage;
      try {
        msg = decode(frame) as ServerMessage;
      } catch {
        continue; // a bad server frame never kills the session
      }
      this.apply(msg);
    }
  }

  private apply(msg: ServerMessage): void {
    switch (msg.type) {
      case "status":
        this.latestStatus = msg;
        break;
      case "snapshot":
        this.latestSnapshot = msg;
        this.lastSnapshotAt = this.now();
        break;
      case "error":
        this.errors.push({ code: msg.code, message: msg.message });
        this.onServerError?.(msg.code, msg.message);
        break;
      case "ack":
        break;
    }
    this.onUpdate?.();
  }

  private onDrop(): void {
    this.socket = null;
    if (this.closedByUser) return;
    this.state = "retrying";
    this.onUpdate?.();
    this.retryTimer = setTimeout(() => this.connect(), this.retryDelay);
    this.retryDelay = Math.min(this.retryDelay * 2, this.maxBackoffMs);
  }
}
