import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { SocketLike, StreamSocket } from "../src/socket.js";

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  sent: string[] = [];

  send(text: string): void {
    this.sent.push(text);
  }

  close(): void {
    this.onclose?.();
  }
}

describe("stream socket reconnect", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("backs off exponentially to the 30 s cap", () => {
    const socket = new StreamSocket("ws://x", {
      onMessage: () => undefined,
      onState: () => undefined,
      factory: () => new FakeSocket(),
    });
    const delays = [0, 1, 2, 3, 4, 5, 6, 7].map((n) => socket.backoffDelayMs(n));
    expect(delays).toEqual([1000, 2000, 4000, 8000, 16000, 30000, 30000, 30000]);
  });

  it("reconnects after a drop and resets the backoff on success", () => {
    const sockets: FakeSocket[] = [];
    const states: string[] = [];
    const socket = new StreamSocket("ws://x", {
      onMessage: () => undefined,
      onState: (s) => states.push(s),
      factory: () => {
        const fake = new FakeSocket();
        sockets.push(fake);
        return fake;
      },
      backoffBaseMs: 100,
    });
    socket.connect();
    expect(sockets).toHaveLength(1);
    sockets[0].onopen?.();
    expect(states).toEqual(["connecting", "connected"]);

    sockets[0].onclose?.();  // server drops us
    expect(states.at(-1)).toBe("reconnecting");
    vi.advanceTimersByTime(100);
    expect(sockets).toHaveLength(2);
    sockets[1].onopen?.();
    expect(states.at(-1)).toBe("connected");

    // Second drop: backoff restarts at the base delay (attempt reset).
    sockets[1].onclose?.();
    vi.advanceTimersByTime(100);
    expect(sockets).toHaveLength(3);
  });

  it("parses messages and stops cleanly on close()", () => {
    const sockets: FakeSocket[] = [];
    const received: string[] = [];
    const states: string[] = [];
    const socket = new StreamSocket("ws://x", {
      onMessage: (m) => received.push(m.type),
      onState: (s) => states.push(s),
      factory: () => {
        const fake = new FakeSocket();
        sockets.push(fake);
        return fake;
      },
      backoffBaseMs: 50,
    });
    socket.connect();
    sockets[0].onopen?.();
    sockets[0].onmessage?.({ data: JSON.stringify({ type: "status", protocol_version: 1 }) });
    sockets[0].onmessage?.({ data: "not json" });  // ignored, no throw
    expect(received).toEqual(["status"]);

    socket.close();
    expect(states.at(-1)).toBe("closed");
    vi.advanceTimersByTime(10_000);
    expect(sockets).toHaveLength(1);  // no reconnect after intentional close
  });
});
