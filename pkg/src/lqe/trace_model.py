"""Link traces, the raw per-link trace parser and the canonical CSV format.

A raw trace file holds one received packet per line as ``<seq> <rssi>``;
lines starting with ``#`` are comments.  Files live under
``<root>/dbm<level>/src<id>_dst<id>.txt``.  Sequence numbers that never show
up in a file are packets that were not received.
"""
from __future__ import annotations

import csv
import io
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

PACKETS_PER_TRACE = 300
NOISE_LEVELS_DBM = (0, -5, -10, -15, -20)
RSSI_MAX = 127
RSSI_INVALID = 128

CANONICAL_HEADER = ("noise_dbm", "src", "dst", "seq", "rssi")

_DIR_RE = re.compile(r"^dbm(-?\d+)$")
_FILE_RE = re.compile(r"^src(\d+)_dst(\d+)\.txt$")


class TraceError(Exception):
    """Base class for every trace ingestion error."""

    path: str | None = None

    def with_path(self, path) -> "TraceError":
        self.path = str(path)
        self.args = (f"{path}: {self.args[0]}",) + self.args[1:]
        return self


class MalformedLine(TraceError):
    pass


class SeqOutOfRange(TraceError):
    pass


class RssiOutOfRange(TraceError):
    pass


class DuplicateSeq(TraceError):
    pass


class LayoutError(TraceError):
    pass


class SchemaError(TraceError):
    pass


@dataclass(frozen=True)
class PacketSlot:
    seq: int
    rssi: int | None = None

    def __post_init__(self):
        if self.rssi is not None and not 0 <= self.rssi <= RSSI_MAX:
            raise RssiOutOfRange(f"rssi {self.rssi} outside [0, {RSSI_MAX}] for seq {self.seq}")

    @property
    def received(self) -> bool:
        return self.rssi is not None


@dataclass(frozen=True)
class LinkTrace:
    """One directed link observed at one artificial noise level."""

    src: int
    dst: int
    noise_dbm: int
    slots: tuple[PacketSlot, ...]

    def __post_init__(self):
        if self.noise_dbm not in NOISE_LEVELS_DBM:
            raise ValueError(f"noise level {self.noise_dbm} dBm not in {NOISE_LEVELS_DBM}")
        for i, slot in enumerate(self.slots, start=1):
            if slot.seq != i:
                raise ValueError(f"slot {i} carries seq {slot.seq}; slots must be 1..n without gaps")

    @classmethod
    def from_readings(cls, src: int, dst: int, noise_dbm: int, rssi: Sequence[int | None]) -> "LinkTrace":
        slots = tuple(PacketSlot(i, None if r is None else int(r)) for i, r in enumerate(rssi, start=1))
        return cls(src, dst, noise_dbm, slots)

    @property
    def packets(self) -> int:
        return len(self.slots)

    @property
    def rssi(self) -> list[int | None]:
        return [s.rssi for s in self.slots]

    @property
    def n_received(self) -> int:
        return sum(s.rssi is not None for s in self.slots)

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.noise_dbm, self.src, self.dst)


@dataclass(frozen=True)
class TraceSet:
    traces: tuple[LinkTrace, ...]
    packets_per_trace: int = PACKETS_PER_TRACE

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        for t in self.traces:
            if t.packets != self.packets_per_trace:
                raise ValueError(
                    f"trace {t.key} has {t.packets} slots, expected {self.packets_per_trace}"
                )

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __getitem__(self, i):
        return self.traces[i]

    def __add__(self, other: "TraceSet") -> "TraceSet":
        if other.packets_per_trace != self.packets_per_trace:
            raise ValueError("cannot concatenate trace sets with different trace lengths")
        return TraceSet(self.traces + other.traces, self.packets_per_trace)


@dataclass(frozen=True)
class TraceStats:
    n_traces: int
    n_empty_traces: int
    packets_sent: int
    packets_received: int

    @property
    def received_fraction(self) -> float:
        return self.packets_received / self.packets_sent if self.packets_sent else 0.0

    def __add__(self, other: "TraceStats") -> "TraceStats":
        return TraceStats(
            self.n_traces + other.n_traces,
            self.n_empty_traces + other.n_empty_traces,
            self.packets_sent + other.packets_sent,
            self.packets_received + other.packets_received,
        )

    def as_dict(self) -> dict:
        return {
            "n_traces": self.n_traces,
            "n_empty_traces": self.n_empty_traces,
            "packets_sent": self.packets_sent,
            "packets_received": self.packets_received,
            "received_fraction": self.received_fraction,
        }


def _int_token(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedLine(f"line {lineno}: non-integer token {token!r}") from None


def parse_rutgers_trace(
    text: str,
    src: int,
    dst: int,
    noise_dbm: int,
    packets_per_trace: int = PACKETS_PER_TRACE,
) -> LinkTrace:
    """Parse one raw trace file into a fixed-length :class:`LinkTrace`.

    A reading of 128 is the radio's error flag and is recorded as a missing
    packet.  Repeating a sequence number with the same reading is tolerated.
    """
    readings: dict[int, int | None] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise MalformedLine(f"line {lineno}: expected '<seq> <rssi>', got {raw!r}")
        seq = _int_token(tokens[0], lineno)
        rssi = _int_token(tokens[1], lineno)
        if not 1 <= seq <= packets_per_trace:
            raise SeqOutOfRange(f"line {lineno}: seq {seq} outside [1, {packets_per_trace}]")
        if not 0 <= rssi <= RSSI_INVALID:
            raise RssiOutOfRange(f"line {lineno}: rssi {rssi} outside [0, {RSSI_INVALID}]")
        value = None if rssi == RSSI_INVALID else rssi
        if seq in readings and readings[seq] != value:
            raise DuplicateSeq(f"line {lineno}: seq {seq} repeated with a different rssi")
        readings[seq] = value
    rssi_series = [readings.get(i) for i in range(1, packets_per_trace + 1)]
    return LinkTrace.from_readings(src, dst, noise_dbm, rssi_series)


def _sorted(traces: Iterable[LinkTrace]) -> list[LinkTrace]:
    return sorted(traces, key=lambda t: t.key)


def load_trace_set(root, packets_per_trace: int = PACKETS_PER_TRACE) -> TraceSet:
    """Load every trace under ``root``, ordered by (noise level, src, dst)."""
    root = Path(root)
    if not root.is_dir():
        raise LayoutError(f"{root}: not a directory")
    traces = []
    for level_dir in sorted(root.iterdir()):
        if level_dir.name.startswith("."):
            continue
        m = _DIR_RE.match(level_dir.name)
        if not m or not level_dir.is_dir():
            raise LayoutError(f"{level_dir}: expected a 'dbm<level>' directory")
        noise = int(m.group(1))
        if noise not in NOISE_LEVELS_DBM:
            raise LayoutError(f"{level_dir}: noise level {noise} not in {NOISE_LEVELS_DBM}")
        for path in sorted(level_dir.iterdir()):
            fm = _FILE_RE.match(path.name)
            if not fm or not path.is_file():
                raise LayoutError(f"{path}: expected a 'src<id>_dst<id>.txt' file")
            text = path.read_text(encoding="utf-8")
            try:
                trace = parse_rutgers_trace(
                    text, int(fm.group(1)), int(fm.group(2)), noise, packets_per_trace
                )
            except TraceError as exc:
                raise exc.with_path(path)
            traces.append(trace)
    if not traces:
        raise LayoutError(f"{root}: no trace files found")
    return TraceSet(tuple(_sorted(traces)), packets_per_trace)


def trace_stats(ts: TraceSet) -> TraceStats:
    received = [t.n_received for t in ts]
    return TraceStats(
        n_traces=len(ts),
        n_empty_traces=sum(r == 0 for r in received),
        packets_sent=len(ts) * ts.packets_per_trace,
        packets_received=sum(received),
    )


def write_canonical_csv(ts: TraceSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_HEADER)
        for t in ts:
            for s in t.slots:
                writer.writerow((t.noise_dbm, t.src, t.dst, s.seq, "" if s.rssi is None else s.rssi))


def read_canonical_csv(path) -> TraceSet:
    """Read a canonical CSV; rows of one trace must be contiguous and in seq order."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CANONICAL_HEADER:
        raise SchemaError(f"{path}: header {header!r} != {','.join(CANONICAL_HEADER)}")

    groups: dict[tuple[int, int, int], list[int | None]] = {}
    order: list[tuple[int, int, int]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CANONICAL_HEADER):
            raise SchemaError(f"{path}: line {lineno}: expected {len(CANONICAL_HEADER)} fields")
        try:
            noise, src, dst, seq = (int(v) for v in row[:4])
            rssi = int(row[4]) if row[4] != "" else None
        except ValueError:
            raise MalformedLine(f"{path}: line {lineno}: non-integer field") from None
        if rssi is not None and not 0 <= rssi <= RSSI_MAX:
            raise RssiOutOfRange(f"{path}: line {lineno}: rssi {rssi} outside [0, {RSSI_MAX}]")
        key = (noise, src, dst)
        if key not in groups:
            groups[key] = []
            order.append(key)
        series = groups[key]
        if seq != len(series) + 1:
            raise SeqOutOfRange(f"{path}: line {lineno}: seq {seq} out of order for trace {key}")
        series.append(rssi)
    if not order:
        raise SchemaError(f"{path}: no data rows")
    lengths = {len(v) for v in groups.values()}
    if len(lengths) != 1:
        raise SchemaError(f"{path}: traces have differing lengths {sorted(lengths)}")
    traces = tuple(LinkTrace.from_readings(s, d, n, groups[(n, s, d)]) for n, s, d in order)
    return TraceSet(traces, lengths.pop())


def load_any(path, packets_per_trace: int = PACKETS_PER_TRACE) -> TraceSet:
    """Directory -> raw layout, file -> canonical CSV."""
    path = Path(path)
    if path.is_dir():
        return load_trace_set(path, packets_per_trace)
    if path.is_file():
        return read_canonical_csv(path)
    raise LayoutError(f"{path}: no such file or directory")
