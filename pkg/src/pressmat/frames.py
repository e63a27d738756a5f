"""The unit that crosses the wire: one full mat scan."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ADC_MAX = 4095  # 12-bit full scale


@dataclass(frozen=True)
class RawFrame:
    """One scan of all 1024 channels.

    ``counts`` are 12-bit ADC values, ``timestamp_us`` is microseconds since
    session start, ``seq`` increases by one per scan.
    """

    seq: int
    timestamp_us: int
    counts: np.ndarray  # uint16, shape (channel_count,)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.uint16)
        object.__setattr__(self, "counts", counts)
        if self.seq < 0 or self.timestamp_us < 0:
            raise ValueError("seq and timestamp_us must be non-negative")
        if counts.ndim != 1:
            raise ValueError("counts must be a 1-D array")
        bad = np.flatnonzero(counts > ADC_MAX)
        if bad.size:
            raise ValueError(f"channel {bad[0]}: count {counts[bad[0]]} exceeds 12-bit range")

    def __eq__(self, other):
        if not isinstance(other, RawFrame):
            return NotImplemented
        return (self.seq == other.seq
                and self.timestamp_us == other.timestamp_us
                and np.array_equal(self.counts, other.counts))
