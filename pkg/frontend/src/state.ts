/**
 * Event-sourced view state.
 *
 * The whole UI state is a fold over one event stream (server messages plus
 * local UI actions), so replaying a recorded log reproduces the exact same
 * state: no wall-clock reads, no hidden mutation. Capture timestamps derive
 * from frame sequence numbers and the source rate in `hello`.
 */

import {
  FieldMessage,
  HelloMessage,
  RegionSetJson,
  ReportMessage,
  ServerMessage,
  StatusMessage,
} from "./protocol.js";
import {
  EMPTY_DRAFT,
  RoiDraft,
  draftFromRegionSet,
  draftToRegionSet,
  validateDraft,
} from "./roi.js";

export type ConnectionState = "connecting" | "connected" | "reconnecting" | "closed";

export interface CaptureRecord {
  captureId: number;
  nFrames: number;
  firstSeq: number;
  /** Seconds of mat time at capture start (firstSeq / source rate). */
  atSeconds: number;
  message: ReportMessage;
}

export interface ViewState {
  connection: ConnectionState;
  hello: HelloMessage | null;
  latestField: FieldMessage | null;
  displaySeq: number; // monotone non-decreasing
  staleFieldsDropped: number;
  lastStatus: StatusMessage | null;
  statusLog: string[];
  colormapLocked: boolean;
  colormapVmax: number | null;
  /** Last server-acknowledged region set; never touched by draft edits. */
  ackedRoi: RegionSetJson | null;
  roiPending: RegionSetJson | null; // sent, not yet acked
  roiDraft: RoiDraft;
  roiUndoStack: RoiDraft[];
  roiProblems: string[];
  roiServerError: string | null;
  capturePending: boolean;
  history: CaptureRecord[];
  /** capture_ids selected for side-by-side comparison. */
  comparison: [number, number] | null;
  ended: boolean;
}

export const INITIAL_STATE: ViewState = {
  connection: "connecting",
  hello: null,
  latestField: null,
  displaySeq: -1,
  staleFieldsDropped: 0,
  lastStatus: null,
  statusLog: [],
  colormapLocked: false,
  colormapVmax: null,
  ackedRoi: null,
  roiPending: null,
  roiDraft: EMPTY_DRAFT,
  roiUndoStack: [],
  roiProblems: [],
  roiServerError: null,
  capturePending: false,
  history: [],
  comparison: null,
  ended: false,
};

export type UiAction =
  | { kind: "socket"; state: ConnectionState }
  | { kind: "edit_roi"; draft: RoiDraft }
  | { kind: "undo_roi" }
  | { kind: "submit_roi" }
  | { kind: "request_capture" }
  | { kind: "lock_colormap"; vmax: number | null }
  | { kind: "select_comparison"; ids: [number, number] | null };

export type ViewEvent = { kind: "message"; message: ServerMessage } | UiAction;

/** Pure fold step: (state, event) -> state. */
export function reduce(state: ViewState, event: ViewEvent): ViewState {
  switch (event.kind) {
    case "message":
      return reduceMessage(state, event.message);
    case "socket":
      return { ...state, connection: event.state };
    case "edit_roi":
      return {
        ...state,
        roiUndoStack: [...state.roiUndoStack, state.roiDraft],
        roiDraft: event.draft,
        roiProblems: [],
        roiServerError: null,
      };
    case "undo_roi": {
      if (state.roiUndoStack.length === 0) return state;
      const stack = [...state.roiUndoStack];
      const draft = stack.pop()!;
      return { ...state, roiDraft: draft, roiUndoStack: stack };
    }
    case "submit_roi": {
      const problems = validateDraft(state.roiDraft);
      if (problems.length > 0) {
        // Local validation blocks the send; the draft stays as-is.
        return { ...state, roiProblems: problems };
      }
      return { ...state, roiProblems: [], roiServerError: null };
    }
    case "request_capture":
      return state.capturePending ? state : { ...state, capturePending: true };
    case "lock_colormap":
      return { ...state, colormapLocked: event.vmax !== null, colormapVmax: event.vmax };
    case "select_comparison":
      return { ...state, comparison: event.ids };
  }
}

function reduceMessage(state: ViewState, message: ServerMessage): ViewState {
  switch (message.type) {
    case "hello": {
      const next: ViewState = { ...state, hello: message, connection: "connected" };
      if (message.roi_set && state.ackedRoi === null) {
        // Server already holds a region set from a previous session/config.
        return next;
      }
      return next;
    }
    case "field": {
      if (message.seq <= state.displaySeq) {
        // Reordered/stale display frame: displayed seq must never go back.
        return { ...state, staleFieldsDropped: state.staleFieldsDropped + 1 };
      }
      return { ...state, latestField: message, displaySeq: message.seq };
    }
    case "report": {
      const rate = state.hello?.source_rate_hz ?? 155;
      const record: CaptureRecord = {
        captureId: message.capture_id,
        nFrames: message.n_frames,
        firstSeq: message.first_seq,
        atSeconds: message.first_seq / rate,
        message,
      };
      return {
        ...state,
        capturePending: false,
        history: [...state.history, record],
      };
    }
    case "status": {
      let next: ViewState = { ...state, lastStatus: message };
      if (message.note) {
        next = { ...next, statusLog: [...state.statusLog, `${message.level}: ${message.note}`] };
        if (message.note === "roi-accepted" && state.roiPending) {
          next = { ...next, ackedRoi: state.roiPending, roiPending: null, roiServerError: null };
        } else if (message.level === "error" && message.note.startsWith("roi rejected")) {
          // Rejection is non-destructive: the draft survives verbatim.
          next = { ...next, roiPending: null, roiServerError: message.note };
        }
      }
      if (message.end) {
        next = { ...next, ended: true };
      }
      return next;
    }
  }
}

/** The outbound side effect (if any) a UI action implies; kept separate so
 * the reducer stays pure and no action can produce an undocumented message. */
export function outboundFor(state: ViewState, action: UiAction):
  | { kind: "set_roi"; regions: RegionSetJson }
  | { kind: "capture"; nFrames: number }
  | null {
  if (action.kind === "submit_roi" && validateDraft(state.roiDraft).length === 0) {
    return { kind: "set_roi", regions: draftToRegionSet(state.roiDraft) };
  }
  if (action.kind === "request_capture" && !state.capturePending) {
    return { kind: "capture", nFrames: 50 };
  }
  return null;
}

/** Mark a region set as sent; flips when the ack status arrives. */
export function markRoiSent(state: ViewState, regions: RegionSetJson): ViewState {
  return { ...state, roiPending: regions };
}

/** Seed the draft from the acked set (e.g. "edit current regions"). */
export function draftFromAcked(state: ViewState): RoiDraft {
  return state.ackedRoi ? draftFromRegionSet(state.ackedRoi) : EMPTY_DRAFT;
}

export function replay(events: ViewEvent[], initial: ViewState = INITIAL_STATE): ViewState {
  return events.reduce(reduce, initial);
}
