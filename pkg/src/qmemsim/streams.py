"""Time-tag streams: the record format shared by simulator and analyzer.

A stream is a pair of parallel arrays (channel id, timestamp in integer ns)
sorted by time. On disk it is a CSV file with header ``channel,t_ns``.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, SortRequiredError, StreamParseError

TRIGGER = 1
SIGNAL = 2
HBT_A = 2
HBT_B = 3

CSV_HEADER = ("channel", "t_ns")


def derive_seeds(seed: int, n: int) -> list[int]:
    """Independent child seeds, reproducible from ``seed``."""
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1))
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(n)]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & ((1 << 64) - 1)))


@dataclass(frozen=True)
class TimeTagStream:
    """Time-ordered detector clicks.

    ``duration_ns`` is the acquisition span when known (simulated streams),
    used for rate normalization and for placing uniform noise.
    """

    channels: np.ndarray
    times: np.ndarray
    channel_set: tuple[int, ...] = ()
    duration_ns: int | None = None
    _sorted_checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        ch = np.ascontiguousarray(self.channels, dtype=np.int16)
        t = np.ascontiguousarray(self.times, dtype=np.int64)
        if ch.shape != t.shape or ch.ndim != 1:
            raise InvalidArgument("channels and times must be 1-D arrays of equal length")
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "times", t)
        declared = tuple(sorted(set(self.channel_set) | set(np.unique(ch).tolist())))
        object.__setattr__(self, "channel_set", declared)
        if not self._sorted_checked and t.size > 1 and np.any(np.diff(t) < 0):
            raise SortRequiredError("time tags must be sorted by t_ns")

    @classmethod
    def empty(cls, channel_set=(), duration_ns=None) -> "TimeTagStream":
        return cls(np.zeros(0, np.int16), np.zeros(0, np.int64), tuple(channel_set), duration_ns)

    @classmethod
    def from_unsorted(cls, channels, times, channel_set=(), duration_ns=None) -> "TimeTagStream":
        """Sort by (time, channel) and build a stream."""
        channels = np.asarray(channels, dtype=np.int16)
        times = np.asarray(times, dtype=np.int64)
        order = np.lexsort((channels, times))
        return cls(channels[order], times[order], tuple(channel_set), duration_ns,
                   _sorted_checked=True)

    def __len__(self):
        return int(self.times.size)

    def channel_times(self, channel: int) -> np.ndarray:
        """Sorted timestamps of one channel; unknown channel is an error."""
        if channel not in self.channel_set:
            raise InvalidArgument(f"unknown channel {channel}; stream declares {self.channel_set}")
        return np.ascontiguousarray(self.times[self.channels == channel])

    def count(self, channel: int) -> int:
        return int(np.count_nonzero(self.channels == channel))

    def span_ns(self) -> int:
        """Acquisition span: declared duration, else first-to-last tag plus one bin."""
        if self.duration_ns is not None:
            return int(self.duration_ns)
        if len(self) == 0:
            return 0
        return int(self.times[-1] - self.times[0] + 1)

    def shifted(self, dt_ns: int) -> "TimeTagStream":
        return TimeTagStream(self.channels, self.times + int(dt_ns), self.channel_set,
                             self.duration_ns, _sorted_checked=True)

    def merged(self, other: "TimeTagStream") -> "TimeTagStream":
        return TimeTagStream.from_unsorted(
            np.concatenate([self.channels, other.channels]),
            np.concatenate([self.times, other.times]),
            tuple(set(self.channel_set) | set(other.channel_set)),
            self.duration_ns if self.duration_ns is not None else other.duration_ns,
        )

    def equals(self, other: "TimeTagStream") -> bool:
        return (np.array_equal(self.channels, other.channels)
                and np.array_equal(self.times, other.times))


def write_csv(stream: TimeTagStream, path) -> None:
    buf = io.StringIO()
    buf.write("channel,t_ns\n")
    if len(stream):
        np.savetxt(buf, np.column_stack([stream.channels.astype(np.int64), stream.times]),
                   fmt="%d", delimiter=",")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path, duration_ns: int | None = None) -> TimeTagStream:
    """Parse a ``channel,t_ns`` file. Unsorted input is rejected, never re-sorted."""
    channels = []
    times = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return TimeTagStream.empty(duration_ns=duration_ns)
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise StreamParseError(f"expected header 'channel,t_ns', got {','.join(header)!r}", row=1)
        last = None
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise StreamParseError(f"expected 2 fields, got {len(row)}", row=lineno)
            try:
                ch = int(row[0])
                t = int(row[1])
            except ValueError:
                raise StreamParseError(f"non-integer field in {','.join(row)!r}", row=lineno) from None
            if last is not None and t < last:
                raise SortRequiredError(f"row {lineno}: t_ns={t} precedes previous {last}; "
                                        "input must be sorted by t_ns")
            last = t
            channels.append(ch)
            times.append(t)
    return TimeTagStream(np.array(channels, dtype=np.int16), np.array(times, dtype=np.int64),
                         duration_ns=duration_ns, _sorted_checked=True)


def stream_digest(stream: TimeTagStream) -> str:
    h = hashlib.sha256()
    h.update(stream.channels.tobytes())
    h.update(stream.times.tobytes())
    return h.hexdigest()


__all__ = [
    "TimeTagStream", "read_csv", "write_csv", "derive_seeds", "make_rng", "stream_digest",
    "TRIGGER", "SIGNAL", "HBT_A", "HBT_B",
]
