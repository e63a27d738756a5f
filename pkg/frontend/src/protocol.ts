/**
 * Stream message schema, protocol_version 1 (mirrors docs/stream-schema.md).
 *
 * Every message carries `type` and `protocol_version`. Field payloads are
 * base64 row-major little-endian float32.
 */

export const PROTOCOL_VERSION = 1;

export interface LayoutJson {
  panel_count: number;
  lattices_per_panel: number;
  lattice_dims: [number, number];
  lattice_pitch_cm: number;
  lattice_offset_cm: [number, number];
  panel_origins_cm: [number, number][];
}

export interface HelloMessage {
  type: "hello";
  protocol_version: number;
  layout: LayoutJson;
  channels: number;
  field_shape: [number, number];
  calibration_id: string;
  source_rate_hz: number;
  display_rate_hz: number;
  roi_set: boolean;
}

export interface FieldMessage {
  type: "field";
  protocol_version: number;
  seq: number;
  timestamp_us: number;
  shape: [number, number];
  pitch_cm: number;
  origin_cm: [number, number];
  units: "kPa" | "counts";
  dtype: string;
  values_b64: string;
}

export interface RegionalStatsJson {
  mean_kpa: number;
  max_kpa: number;
  load_pct_of_foot: number;
  contact_cells: number;
}

export interface FootReportJson {
  mfp_kpa: number;
  load_pct: number;
  cop_cm: [number, number] | null;
  heel: RegionalStatsJson;
  metatarsal: RegionalStatsJson;
  contact_cells: number;
  no_contact: boolean;
}

export interface ReportJson {
  columns: [string, string];
  left: FootReportJson;
  right: FootReportJson;
  resultant_cop_cm: [number, number] | null;
  contact_threshold_kpa: number;
}

export interface FieldDocJson {
  dims: [number, number];
  pitch_cm: number;
  origin_cm: [number, number];
  units: string;
  provenance: string[];
  frames_averaged: number;
  clamped_cells: number;
  dtype: string;
  values_b64: string;
}

export interface ReportMessage {
  type: "report";
  protocol_version: number;
  capture_id: number;
  n_frames: number;
  first_seq: number;
  report: ReportJson | null;
  field: FieldDocJson;
  note?: string;
}

export interface StatusMessage {
  type: "status";
  protocol_version: number;
  level: "info" | "warning" | "error";
  fps: number;
  frames: number;
  clients: number;
  dropped_fields: number;
  roi_version: number;
  note?: string;
  end?: boolean;
}

export type ServerMessage = HelloMessage | FieldMessage | ReportMessage | StatusMessage;

// Client -> server

export interface RegionFeature {
  type: "Feature";
  properties: { label: string };
  geometry: { type: "Polygon"; coordinates: [number, number][][] };
}

export interface RegionSetJson {
  type: "FeatureCollection";
  features: RegionFeature[];
}

export interface SetRoiMessage {
  type: "set_roi";
  protocol_version: number;
  regions: RegionSetJson;
}

export interface CaptureMessage {
  type: "capture";
  protocol_version: number;
  n_frames: number;
}

export interface SetDisplayRateMessage {
  type: "set_display_rate";
  protocol_version: number;
  hz: number;
}

export interface SubscribeMessage {
  type: "subscribe";
  protocol_version: number;
  mode: "raw" | "processed";
}

export type ClientMessage =
  | SetRoiMessage
  | CaptureMessage
  | SetDisplayRateMessage
  | SubscribeMessage;

export function parseServerMessage(text: string): ServerMessage {
  const message = JSON.parse(text) as ServerMessage;
  if (typeof message.type !== "string") {
    throw new Error("message has no type");
  }
  return message;
}

export function captureCommand(nFrames = 50): CaptureMessage {
  return { type: "capture", protocol_version: PROTOCOL_VERSION, n_frames: nFrames };
}

export function setRoiCommand(regions: RegionSetJson): SetRoiMessage {
  return { type: "set_roi", protocol_version: PROTOCOL_VERSION, regions };
}

/** Decode a field payload into a Float32Array of length rows*cols. */
export function decodeFieldValues(b64: string): Float32Array {
  let bytes: Uint8Array;
  if (typeof atob === "function") {
    const bin = atob(b64);
    bytes = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) {
      bytes[i] = bin.charCodeAt(i);
    }
  } else {
    bytes = new Uint8Array(Buffer.from(b64, "base64"));
  }
  return new Float32Array(bytes.buffer, bytes.byteOffset, bytes.byteLength / 4);
}
