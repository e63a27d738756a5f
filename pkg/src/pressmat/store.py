"""Session persistence and report export.

A session file is:

    "PMAT" | u16 version | u32 header length | header JSON (utf-8)
    | consecutive wire-encoded frames
    | optional trailer: "ANNO" | annotation JSON | u32 annotation length

Frames are stored wire-encoded so the file shares the protocol module's
parser (and its fuzz surface).  The annotation trailer lives at the end of
the file because annotations are created after recording; it is located by
reading the length from the file tail, which keeps recording single-pass
and append-only.  See docs/formats.md for a hex-annotated example.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

from .frames import RawFrame
from .protocol import FRAME_SIZE, DecodeDiagnostics, StreamDecoder, encode_frame

MAGIC = b"PMAT"
ANNO_MAGIC = b"ANNO"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sH")  # magic, version


class SessionFormatError(ValueError):
    pass


class SessionWriter:
    """Streaming writer: header first, frames appended one by one, optional
    annotations last.  Flushes after every write so a truncated file loses
    only trailing frames, never the header."""

    def __init__(self, path, header: dict):
        self._path = Path(path)
        self._fh = open(self._path, "wb")
        blob = json.dumps(header, sort_keys=True).encode("utf-8")
        self._fh.write(_PREFIX.pack(MAGIC, FORMAT_VERSION))
        self._fh.write(struct.pack("<I", len(blob)))
        self._fh.write(blob)
        self._fh.flush()
        self.frames_written = 0
        self._annotated = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def write_frame(self, frame: RawFrame) -> None:
        self.write_encoded(encode_frame(frame))

    def write_encoded(self, wire: bytes) -> None:
        if self._annotated:
            raise SessionFormatError("cannot append frames after the annotation trailer")
        self._fh.write(wire)
        self._fh.flush()
        self.frames_written += 1

    def write_annotations(self, annotations: dict) -> None:
        """Append the trailing annotation block (once, after all frames)."""
        if self._annotated:
            raise SessionFormatError("annotations already written")
        blob = json.dumps(annotations, sort_keys=True).encode("utf-8")
        self._fh.write(ANNO_MAGIC + blob + struct.pack("<I", len(blob)))
        self._fh.flush()
        self._annotated = True

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()


@dataclass
class SessionData:
    header: dict
    frames: list[RawFrame]
    annotations: dict | None
    diagnostics: DecodeDiagnostics
    truncated_frames: int = 0


def write_session(path, header: dict, frames, annotations: dict | None = None) -> int:
    """Convenience one-shot writer; returns the number of frames written."""
    with SessionWriter(path, header) as writer:
        for frame in frames:
            writer.write_frame(frame)
        if annotations is not None:
            writer.write_annotations(annotations)
        return writer.frames_written


def read_session(path) -> SessionData:
    """Tolerant reader: the frame body goes through the protocol resync
    decoder, so a corrupted or truncated body yields every intact frame
    plus diagnostics instead of an error."""
    raw = Path(path).read_bytes()
    if len(raw) < _PREFIX.size + 4 or raw[:4] != MAGIC:
        raise SessionFormatError(f"{path}: not a session file (bad magic)")
    _, version = _PREFIX.unpack_from(raw)
    if version != FORMAT_VERSION:
        raise SessionFormatError(f"{path}: unsupported format version {version}")
    (header_len,) = struct.unpack_from("<I", raw, _PREFIX.size)
    header_start = _PREFIX.size + 4
    header_end = header_start + header_len
    if header_end > len(raw):
        raise SessionFormatError(f"{path}: truncated inside the header")
    header = json.loads(raw[header_start:header_end].decode("utf-8"))

    body_end = len(raw)
    annotations = None
    if body_end >= header_end + len(ANNO_MAGIC) + 4:
        (anno_len,) = struct.unpack_from("<I", raw, body_end - 4)
        anno_start = body_end - 4 - anno_len - len(ANNO_MAGIC)
        if anno_start >= header_end and raw[anno_start:anno_start + 4] == ANNO_MAGIC:
            try:
                annotations = json.loads(raw[anno_start + 4:body_end - 4].decode("utf-8"))
                body_end = anno_start
            except (UnicodeDecodeError, json.JSONDecodeError):
                annotations = None

    decoder = StreamDecoder()
    frames = decoder.feed(raw[header_end:body_end])
    truncated = 1 if decoder.has_partial_frame() else 0
    return SessionData(header=header, frames=frames, annotations=annotations,
                       diagnostics=decoder.diagnostics, truncated_frames=truncated)


def expected_body_size(n_frames: int) -> int:
    return n_frames * FRAME_SIZE


# -- report export -------------------------------------------------------------

CSV_COLUMNS = (
    "contact_threshold_kpa",
    "mfp_left", "mfp_right",
    "load_pct_left", "load_pct_right",
    "cop_x_left", "cop_y_left", "cop_x_right", "cop_y_right",
    "resultant_cop_x", "resultant_cop_y",
    "heel_mean_left", "heel_mean_right",
    "heel_max_left", "heel_max_right",
    "heel_load_pct_left", "heel_load_pct_right",
    "met_mean_left", "met_mean_right",
    "met_max_left", "met_max_right",
    "met_load_pct_left", "met_load_pct_right",
)


def export_report(report, fmt: str = "table") -> bytes:
    """Serialize a MetricsReport to json, csv or an aligned text table."""
    if fmt == "json":
        return (json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n").encode("utf-8")
    if fmt == "csv":
        return _report_csv(report).encode("utf-8")
    if fmt == "table":
        return (render_table(report) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r} (expected json, csv or table)")


def _report_csv(report) -> str:
    l, r = report.left, report.right
    cop = lambda c, i: f"{c[i]:.4f}" if c else ""
    values = [
        f"{report.contact_threshold_kpa:g}",
        f"{l.mfp_kpa:.2f}", f"{r.mfp_kpa:.2f}",
        f"{l.load_pct:.2f}", f"{r.load_pct:.2f}",
        cop(l.cop_cm, 0), cop(l.cop_cm, 1), cop(r.cop_cm, 0), cop(r.cop_cm, 1),
        cop(report.resultant_cop_cm, 0), cop(report.resultant_cop_cm, 1),
        f"{l.heel.mean_kpa:.2f}", f"{r.heel.mean_kpa:.2f}",
        f"{l.heel.max_kpa:.2f}", f"{r.heel.max_kpa:.2f}",
        f"{l.heel.load_pct_of_foot:.2f}", f"{r.heel.load_pct_of_foot:.2f}",
        f"{l.metatarsal.mean_kpa:.2f}", f"{r.metatarsal.mean_kpa:.2f}",
        f"{l.metatarsal.max_kpa:.2f}", f"{r.metatarsal.max_kpa:.2f}",
        f"{l.metatarsal.load_pct_of_foot:.2f}", f"{r.metatarsal.load_pct_of_foot:.2f}",
    ]
    return ",".join(CSV_COLUMNS) + "\n" + ",".join(values) + "\n"


def render_table(report) -> str:
    """Aligned text table mirroring the clinical report layout: MFP and the
    load percentages print unitless to 2 decimals, pressures carry kPa."""
    rows = [("Parameters",) + tuple(report.column_labels)]
    for name, left, right in report.rows():
        unit = "kPa" if "Pressure" in name else ""
        rows.append((name, f"{left:.2f}{unit}", f"{right:.2f}{unit}"))
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("-" * (sum(widths) + 4))
    return "\n".join(lines)
