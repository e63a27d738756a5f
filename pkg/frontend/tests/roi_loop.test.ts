/**
 * The ROI submit -> capture -> report loop against a scripted server.
 *
 * The script implements the documented message semantics with real payloads
 * generated by the acquisition stack (tests/fixtures/generate.py): the same
 * seeded capture analyzed with the bundled demo regions and with the right
 * metatarsal region moved onto empty mat. The oracle's prediction: after the
 * ROI move is acknowledged, the next capture's right-metatarsal row
 * collapses while the left stays put.
 */

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  ClientMessage,
  HelloMessage,
  RegionSetJson,
  ReportMessage,
  ServerMessage,
} from "../src/protocol.js";
import { draftFromRegionSet } from "../src/roi.js";
import {
  INITIAL_STATE,
  UiAction,
  ViewState,
  markRoiSent,
  outboundFor,
  reduce,
} from "../src/state.js";
import { SocketLike, StreamSocket } from "../src/socket.js";

const fixture = <T>(name: string): T =>
  JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8")) as T;

const hello = fixture<HelloMessage>("hello.json");
const reportNormal = fixture<ReportMessage>("report_normal.json");
const reportMoved = fixture<ReportMessage>("report_moved_roi.json");
const roiMoved = fixture<RegionSetJson>("roi_moved.json");

/** In-memory server following docs/stream-schema.md. */
class ScriptedServer implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  roiVersion = 0;
  captures = 0;

  start(): void {
    this.onopen?.();
    this.reply(hello);
  }

  private reply(message: ServerMessage): void {
    this.onmessage?.({ data: JSON.stringify(message) });
  }

  send(text: string): void {
    const message = JSON.parse(text) as ClientMessage;
    if (message.type === "set_roi") {
      this.roiVersion += 1;
      this.reply({
        type: "status", protocol_version: 1, level: "info",
        fps: 155, frames: 0, clients: 1, dropped_fields: 0,
        roi_version: this.roiVersion, note: "roi-accepted",
      });
    } else if (message.type === "capture") {
      this.captures += 1;
      const body = this.roiVersion > 0 ? reportMoved : reportNormal;
      this.reply({ ...body, capture_id: this.captures });
    }
  }

  close(): void {
    this.onclose?.();
  }
}

/** Minimal app loop: route actions through the reducer and the socket,
 * exactly as the browser glue does. */
function harness() {
  const server = new ScriptedServer();
  let state: ViewState = INITIAL_STATE;
  const socket = new StreamSocket("ws://scripted", {
    onMessage: (message) => {
      state = reduce(state, { kind: "message", message });
    },
    onState: (connection) => {
      state = reduce(state, { kind: "socket", state: connection });
    },
    factory: () => server,
  });
  const dispatch = (action: UiAction) => {
    const outbound = outboundFor(state, action);
    state = reduce(state, action);
    if (outbound?.kind === "set_roi") {
      state = markRoiSent(state, outbound.regions);
      socket.send({ type: "set_roi", protocol_version: 1, regions: outbound.regions });
    } else if (outbound?.kind === "capture") {
      socket.send({ type: "capture", protocol_version: 1, n_frames: outbound.nFrames });
    }
  };
  socket.connect();
  server.start();
  return { server, dispatch, getState: () => state };
}

describe("ROI submit -> capture -> report loop", () => {
  it("changes the metatarsal row exactly as the scripted oracle predicts", () => {
    const { dispatch, getState } = harness();
    expect(getState().hello?.channels).toBe(1024);

    // Baseline capture with the server's initial demo regions.
    dispatch({ kind: "request_capture" });
    let state = getState();
    expect(state.history).toHaveLength(1);
    const before = state.history[0].message.report!;
    expect(before.right.metatarsal.mean_kpa).toBeGreaterThan(50);

    // Draw the moved region set, submit, await the ack.
    dispatch({ kind: "edit_roi", draft: draftFromRegionSet(roiMoved) });
    dispatch({ kind: "submit_roi" });
    state = getState();
    expect(state.ackedRoi).toEqual(roiMoved);
    expect(state.roiServerError).toBeNull();

    // Recapture: the right metatarsal ROI now sits on empty mat.
    dispatch({ kind: "request_capture" });
    state = getState();
    expect(state.history).toHaveLength(2);
    const after = state.history[1].message.report!;
    expect(after.right.metatarsal.mean_kpa).toBeLessThan(10);
    expect(after.right.metatarsal.max_kpa).toBeLessThan(
      before.right.metatarsal.max_kpa / 4);
    // The untouched left rows barely move between the two captures.
    expect(Math.abs(after.left.metatarsal.mean_kpa - before.left.metatarsal.mean_kpa))
      .toBeLessThan(1.0);
    expect(Math.abs(after.left.mfp_kpa - before.left.mfp_kpa)).toBeLessThan(1.0);
  });

  it("does not send a capture while one is pending", () => {
    const { server, dispatch, getState } = harness();
    // Simulate pending state: request, then request again before the reply
    // would land (the scripted server replies synchronously, so pre-set it).
    let state = getState();
    state = reduce(state, { kind: "request_capture" });
    expect(outboundFor(state, { kind: "request_capture" })).toBeNull();
    expect(server.captures).toBe(0);
    void dispatch;
  });
});
