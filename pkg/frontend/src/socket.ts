/**
 * WebSocket transport with reconnect.
 *
 * Plain wrapper: parse incoming JSON, hand every message to one callback,
 * reconnect with exponential backoff (1 s doubling to 30 s) after a drop.
 * A WebSocket factory is injectable so tests can run without a network.
 */

import { ClientMessage, ServerMessage, parseServerMessage } from "./protocol.js";

export interface SocketLike {
  send(text: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamSocketOptions {
  onMessage: (message: ServerMessage) => void;
  onState: (state: "connecting" | "connected" | "reconnecting" | "closed") => void;
  factory?: SocketFactory;
  backoffBaseMs?: number;
  backoffMaxMs?: number;
}

export class StreamSocket {
  private socket: SocketLike | null = null;
  private closed = false;
  private attempt = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private url: string, private options: StreamSocketOptions) {}

  connect(): void {
    this.closed = false;
    this.open("connecting");
  }

  private open(phase: "connecting" | "reconnecting"): void {
    this.options.onState(phase);
    const factory = this.options.factory ?? ((url: string) => new WebSocket(url) as unknown as SocketLike);
    const socket = factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempt = 0;
      this.options.onState("connected");
    };
    socket.onmessage = (event) => {
      try {
        this.options.onMessage(parseServerMessage(event.data));
      } catch {
        // Unparseable frame: ignore; the server never sends non-JSON.
      }
    };
    socket.onerror = () => undefined;
    socket.onclose = () => {
      this.socket = null;
      if (this.closed) {
        this.options.onState("closed");
        return;
      }
      const base = this.options.backoffBaseMs ?? 1000;
      const max = this.options.backoffMaxMs ?? 30000;
      const delay = Math.min(base * 2 ** this.attempt, max);
      this.attempt += 1;
      this.options.onState("reconnecting");
      this.timer = setTimeout(() => this.open("reconnecting"), delay);
    };
  }

  send(message: ClientMessage): void {
    if (!this.socket) throw new Error("socket is not connected");
    this.socket.send(JSON.stringify(message));
  }

  get isOpen(): boolean {
    return this.socket !== null;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
  }

  /** Delay before reconnect attempt n (0-based); exported for tests. */
  backoffDelayMs(attempt: number): number {
    const base = this.options.backoffBaseMs ?? 1000;
    const max = this.options.backoffMaxMs ?? 30000;
    return Math.min(base * 2 ** attempt, max);
  }
}
