/** WebSocket client: a thin queue between the socket and the model fold. All
 * state transitions happen through callbacks into a single owner, keeping the
 * message handling serialized. */

import { Command } from "./schemas";
import { encode } from "./commands";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
}

export interface BridgeClientOptions {
  url: string;
  /** Factory so tests can inject a fake socket. Defaults to WebSocket. */
  connect?: (url: string) => SocketLike;
  onMessage: (raw: unknown) => void;
  onStatus: (status: "disconnected" | "connecting" | "connected") => void;
}

export class BridgeClient {
  private socket: SocketLike | null = null;
  private readonly opts: BridgeClientOptions;

  constructor(opts: BridgeClientOptions) {
    this.opts = opts;
  }

  open(): void {
    const connect =
      this.opts.connect ??
      ((url: string) => new (globalThis as any).WebSocket(url) as SocketLike);
    this.opts.onStatus("connecting");
    const socket = connect(this.opts.url);
    socket.onopen = () => this.opts.onStatus("connected");
    socket.onclose = () => {
      this.socket = null;
      this.opts.onStatus("disconnected");
    };
    socket.onmessage = (ev) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(ev.data);
      } catch {
        parsed = { type: "error", reason: "unparseable message from bridge" };
      }
      this.opts.onMessage(parsed);
    };
    this.socket = socket;
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  /** Send a command; returns false when disconnected (control disabled). */
  send(command: Command): boolean {
    if (this.socket === null) {
      return false;
    }
    this.socket.send(encode(command));
    return true;
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }
}
