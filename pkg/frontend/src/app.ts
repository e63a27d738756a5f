/**
 * Browser glue: wires the socket, reducer, heatmap canvas, ROI editor and
 * comparison table to the DOM. All logic lives in the tested modules; this
 * file only routes events and paints.
 */

import { compareReports, formatCell, reportRows } from "./compare.js";
import { renderField } from "./heatmap.js";
import { FieldMessage, PROTOCOL_VERSION, captureCommand, setRoiCommand } from "./protocol.js";
import {
  LABEL_CHOICES,
  addRegion,
  addVertex,
  draftToRegionSet,
  rectangleRegion,
  validateDraft,
} from "./roi.js";
import {
  INITIAL_STATE,
  UiAction,
  ViewState,
  markRoiSent,
  outboundFor,
  reduce,
} from "./state.js";
import { StreamSocket } from "./socket.js";

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

let state: ViewState = INITIAL_STATE;
let socket: StreamSocket;

function dispatch(action: UiAction): void {
  const outbound = outboundFor(state, action);
  state = reduce(state, action);
  if (outbound?.kind === "set_roi") {
    state = markRoiSent(state, outbound.regions);
    socket.send(setRoiCommand(outbound.regions));
  } else if (outbound?.kind === "capture") {
    socket.send(captureCommand(outbound.nFrames));
  }
  paint();
}

function paintField(field: FieldMessage): void {
  const canvas = $<HTMLCanvasElement>("heatmap");
  const rendered = renderField(field, { vmax: state.colormapLocked ? state.colormapVmax : null });
  const ctx = canvas.getContext("2d")!;
  const image = new ImageData(rendered.pixels, rendered.width, rendered.height);
  const off = new OffscreenCanvas(rendered.width, rendered.height);
  off.getContext("2d")!.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  drawRoiOverlay(ctx, field, canvas);
  $("vmax").textContent = `${rendered.vmax.toFixed(0)} kPa${state.colormapLocked ? " (locked)" : ""}`;
}

function drawRoiOverlay(ctx: CanvasRenderingContext2D, field: FieldMessage, canvas: HTMLCanvasElement): void {
  const [rows, cols] = field.shape;
  const sx = canvas.width / (cols * field.pitch_cm);
  const sy = canvas.height / (rows * field.pitch_cm);
  ctx.strokeStyle = "#6ef";
  ctx.lineWidth = 1.5;
  for (const region of state.roiDraft.regions) {
    if (region.vertices.length < 2) continue;
    ctx.beginPath();
    region.vertices.forEach(([x, y], i) => {
      const px = x * sx;
      const py = canvas.height - y * sy;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.stroke();
  }
}

function paintStatus(): void {
  $("connection").textContent = state.connection;
  $("connection").className = `badge ${state.connection}`;
  const status = state.lastStatus;
  $("stats").textContent = status
    ? `${status.fps.toFixed(1)} fps | ${status.frames} frames | ${status.dropped_fields} dropped`
    : "-";
  $("roi-problems").textContent =
    state.roiServerError ?? state.roiProblems.join("; ");
  $<HTMLButtonElement>("capture").disabled = state.capturePending || state.connection !== "connected";
}

function paintHistory(): void {
  const list = $("history");
  list.innerHTML = "";
  for (const record of state.history) {
    const item = document.createElement("li");
    const label = `capture ${record.captureId} @ ${record.atSeconds.toFixed(2)} s (${record.nFrames} frames)`;
    const button = document.createElement("button");
    button.textContent = label;
    button.onclick = () => {
      const ids = state.comparison;
      const next: [number, number] = ids ? [ids[1], record.captureId] : [record.captureId, record.captureId];
      dispatch({ kind: "select_comparison", ids: next });
    };
    item.appendChild(button);
    list.appendChild(item);
  }
}

function paintComparison(): void {
  const table = $("report");
  table.innerHTML = "";
  const ids = state.comparison;
  const latest = state.history[state.history.length - 1];
  if (!latest?.message.report) return;
  const headerRow = document.createElement("tr");
  const addCell = (row: HTMLTableRowElement, text: string, tag = "td") => {
    const cell = document.createElement(tag);
    cell.textContent = text;
    row.appendChild(cell);
  };
  if (ids && ids[0] !== ids[1]) {
    const a = state.history.find((r) => r.captureId === ids[0])?.message.report;
    const b = state.history.find((r) => r.captureId === ids[1])?.message.report;
    if (!a || !b) return;
    ["Parameters", `#${ids[0]} L`, `#${ids[0]} R`, `#${ids[1]} L`, `#${ids[1]} R`, "max |d|"]
      .forEach((h) => addCell(headerRow, h, "th"));
    table.appendChild(headerRow);
    for (const row of compareReports(a, b)) {
      const tr = document.createElement("tr");
      if (row.highlighted) tr.className = "hot";
      addCell(tr, row.name);
      addCell(tr, formatCell(row, row.left));
      addCell(tr, formatCell(row, row.right));
      addCell(tr, formatCell(row, row.otherLeft));
      addCell(tr, formatCell(row, row.otherRight));
      addCell(tr, row.delta.toFixed(2));
      table.appendChild(tr);
    }
    return;
  }
  const report = latest.message.report;
  ["Parameters", ...report.columns].forEach((h) => addCell(headerRow, h, "th"));
  table.appendChild(headerRow);
  for (const row of reportRows(report)) {
    const tr = document.createElement("tr");
    addCell(tr, row.name);
    addCell(tr, formatCell(row, row.left));
    addCell(tr, formatCell(row, row.right));
    table.appendChild(tr);
  }
}

function paint(): void {
  paintStatus();
  paintHistory();
  paintComparison();
  if (state.latestField) paintField(state.latestField);
}

function setupRoiEditor(): void {
  const picker = $<HTMLSelectElement>("label-picker");
  for (const label of LABEL_CHOICES) {
    const option = document.createElement("option");
    option.value = label;
    option.textContent = label;
    picker.appendChild(option);
  }
  $("add-region").onclick = () =>
    dispatch({ kind: "edit_roi", draft: addRegion(state.roiDraft, picker.value) });
  $("seed-rects").onclick = () => {
    // Starter rectangles matching the bundled demo scenes.
    const draft = {
      regions: [
        rectangleRegion("foot-L", 4.0, 0.2, 15.4, 15.3),
        rectangleRegion("foot-R", 16.6, 0.2, 28.0, 15.3),
        rectangleRegion("heel-L", 4.5, 0.6, 15.0, 7.2),
        rectangleRegion("heel-R", 17.0, 0.6, 27.5, 7.2),
        rectangleRegion("metatarsal-L", 4.5, 9.6, 15.0, 14.8),
        rectangleRegion("metatarsal-R", 17.0, 9.6, 27.5, 14.8),
      ],
    };
    dispatch({ kind: "edit_roi", draft });
  };
  $("undo-roi").onclick = () => dispatch({ kind: "undo_roi" });
  $("submit-roi").onclick = () => dispatch({ kind: "submit_roi" });
  $<HTMLCanvasElement>("heatmap").onclick = (event) => {
    const field = state.latestField;
    const draft = state.roiDraft;
    if (!field || draft.regions.length === 0) return;
    const canvas = $<HTMLCanvasElement>("heatmap");
    const rect = canvas.getBoundingClientRect();
    const [rows, cols] = field.shape;
    const x = ((event.clientX - rect.left) / rect.width) * cols * field.pitch_cm;
    const y = (1 - (event.clientY - rect.top) / rect.height) * rows * field.pitch_cm;
    dispatch({
      kind: "edit_roi",
      draft: addVertex(draft, draft.regions.length - 1, [x, y]),
    });
  };
}

export function start(): void {
  const url = `ws://${location.host}/ws`;
  socket = new StreamSocket(url, {
    onMessage: (message) => {
      state = reduce(state, { kind: "message", message });
      paint();
    },
    onState: (connection) => {
      state = reduce(state, { kind: "socket", state: connection });
      paint();
    },
  });
  $("capture").onclick = () => dispatch({ kind: "request_capture" });
  $("lock-colormap").onclick = () => {
    const vmax = state.colormapLocked ? null : (state.latestField ? renderField(state.latestField).vmax : null);
    dispatch({ kind: "lock_colormap", vmax });
  };
  setupRoiEditor();
  socket.connect();
  console.log(`pressmat console, stream protocol v${PROTOCOL_VERSION}`);
}

start();
