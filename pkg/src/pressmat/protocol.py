"""Binary wire format for frames and a resynchronizing stream decoder.

Frame layout (little-endian, 2066 bytes total):

    offset  size  field
    0       2     sync 0xAA 0x55
    2       1     version (1)
    3       1     flags
    4       4     seq, u32
    8       8     timestamp, u64 microseconds
    16      2048  1024 x u16 counts (upper 4 bits zero)
    2064    2     CRC-16/CCITT-FALSE over bytes 2..2063

At the 155 Hz scan rate this is 2066 * 155 * 8 = 2.56 Mbit/s, comfortably
inside a USB full-speed link's 12 Mbit/s.

The decoder trusts the CRC, not sync uniqueness: sync bytes appearing inside
a frame body are harmless because a misaligned candidate fails its CRC and
the scan resumes one byte further on.
"""

from __future__ import annotations

import binascii
import struct
from dataclasses import dataclass

import numpy as np

from .frames import ADC_MAX, RawFrame

SYNC = b"\xaa\x55"
VERSION = 1
CHANNELS = 1024
HEADER = struct.Struct("<2sBBIQ")  # sync, version, flags, seq, timestamp_us
FRAME_SIZE = HEADER.size + 2 * CHANNELS + 2  # 2066
CRC_START = 2  # CRC covers version..payload


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection."""
    return binascii.crc_hqx(data, 0xFFFF)


def encode_frame(frame: RawFrame, flags: int = 0) -> bytes:
    """Encode one frame to its exact 2066-byte wire form."""
    counts = frame.counts
    if counts.shape != (CHANNELS,):
        raise ValueError(f"expected {CHANNELS} counts, got {counts.shape}")
    bad = np.flatnonzero(counts > ADC_MAX)
    if bad.size:
        raise ValueError(f"channel {bad[0]}: count {counts[bad[0]]} exceeds 12-bit range")
    head = HEADER.pack(SYNC, VERSION, flags, frame.seq, frame.timestamp_us)
    body = head + counts.astype("<u2").tobytes()
    return body + struct.pack("<H", crc16(body[CRC_START:]))


@dataclass
class DecodeDiagnostics:
    """Monotone counters describing a decode stream's health."""

    frames_ok: int = 0
    crc_failures: int = 0
    resyncs: int = 0
    bytes_skipped: int = 0
    seq_gaps: int = 0

    def as_dict(self) -> dict:
        return {
            "frames_ok": self.frames_ok,
            "crc_failures": self.crc_failures,
            "resyncs": self.resyncs,
            "bytes_skipped": self.bytes_skipped,
            "seq_gaps": self.seq_gaps,
        }


class StreamDecoder:
    """Incremental decoder; feed() arbitrary chunks, collect verified frames.

    Output is invariant to how the byte stream is chunked.  Corruption never
    raises: bad stretches are skipped to the next sync pair and accounted in
    the diagnostics.  ``seq_gaps`` accumulates the number of missing frames
    between consecutively emitted ones.
    """

    def __init__(self):
        self._buf = bytearray()
        self._last_seq: int | None = None
        self._lost_lock = False
        self.diagnostics = DecodeDiagnostics()

    def feed(self, chunk: bytes) -> list[RawFrame]:
        self._buf.extend(chunk)
        frames = []
        while True:
            frame = self._next_frame()
            if frame is None:
                break
            frames.append(frame)
        return frames

    @property
    def pending_bytes(self) -> int:
        """Bytes held back waiting for more input (e.g. a truncated tail)."""
        return len(self._buf)

    def has_partial_frame(self) -> bool:
        return 0 < len(self._buf) < FRAME_SIZE and self._buf.startswith(SYNC)

    def _next_frame(self) -> RawFrame | None:
        buf = self._buf
        while True:
            idx = buf.find(SYNC)
            if idx < 0:
                # Keep a trailing 0xAA: it may be the first half of a sync.
                keep = 1 if buf[-1:] == SYNC[:1] else 0
                self._skip(len(buf) - keep)
                return None
            if idx > 0:
                self._skip(idx)
            if len(buf) < FRAME_SIZE:
                return None
            candidate = bytes(buf[:FRAME_SIZE])
            (stored,) = struct.unpack_from("<H", candidate, FRAME_SIZE - 2)
            if crc16(candidate[CRC_START:FRAME_SIZE - 2]) == stored:
                frame = self._parse(candidate)
                if frame is not None:
                    del buf[:FRAME_SIZE]
                    self._lost_lock = False
                    return frame
            self.diagnostics.crc_failures += 1
            # False or corrupted sync: resume the scan one byte further.
            self._skip(1)

    def _skip(self, n: int) -> None:
        """Drop n leading bytes.  One lock-loss run counts as one resync no
        matter how the input was chunked."""
        if n > 0:
            del self._buf[:n]
            self.diagnostics.bytes_skipped += n
            if not self._lost_lock:
                self._lost_lock = True
                self.diagnostics.resyncs += 1

    def _parse(self, raw: bytes) -> RawFrame | None:
        _, version, flags, seq, timestamp_us = HEADER.unpack_from(raw)
        if version != VERSION:
            return None
        counts = np.frombuffer(raw, dtype="<u2", count=CHANNELS, offset=HEADER.size)
        if counts.max(initial=0) > ADC_MAX:
            return None
        if self._last_seq is not None and seq > self._last_seq + 1:
            self.diagnostics.seq_gaps += seq - self._last_seq - 1
        self._last_seq = seq
        self.diagnostics.frames_ok += 1
        return RawFrame(seq=seq, timestamp_us=timestamp_us, counts=counts.astype(np.uint16))


def decode_stream(chunks) -> tuple[list[RawFrame], DecodeDiagnostics]:
    """One-shot decode of an iterable of byte chunks (or a single bytes)."""
    if isinstance(chunks, (bytes, bytearray, memoryview)):
        chunks = [chunks]
    decoder = StreamDecoder()
    frames = []
    for chunk in chunks:
        frames.extend(decoder.feed(chunk))
    return frames, decoder.diagnostics
