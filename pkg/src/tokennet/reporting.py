"""Turn recorded states into labeled rows and write them as CSV or JSON.

Columns are ``place.token`` in place registration order, then token order
within the place. The infinite place is left out. Numbers are written in
shortest round-trip form, so ``float(text)`` recovers them exactly.
"""

from __future__ import annotations

import io
import json
from typing import IO, Iterable, Iterator, NamedTuple

from .errors import EmptyHistory
from .rules import fmt_number


class SimulationRecord(NamedTuple):
    clock: float
    labels: list[str]
    values: list[float]


def record_from_snapshot(clock: float, snapshot) -> SimulationRecord:
    labels, values = [], []
    for name, view in snapshot.items():
        if view.infinite:
            continue
        for token, count in view.attributes.items():
            labels.append(f"{name}.{token}")
            values.append(count)
    return SimulationRecord(clock, labels, values)


def iter_records(history: Iterable) -> Iterator[SimulationRecord]:
    for clock, snapshot in history:
        yield record_from_snapshot(clock, snapshot)


def report_tokens(history: Iterable) -> list[SimulationRecord]:
    """One record per ``(clock, snapshot)`` pair of ``history``."""
    return list(iter_records(history))


def _writer(sink: IO):
    if isinstance(sink, io.TextIOBase):
        return sink.write
    return lambda s: sink.write(s.encode("utf-8"))


def _first(records: Iterable[SimulationRecord]):
    it = iter(records)
    try:
        first = next(it)
    except StopIteration:
        raise EmptyHistory("no records to write") from None
    return first, it


def _check_labels(rec: SimulationRecord, labels: list[str]) -> None:
    if rec.labels != labels:
        raise ValueError(f"record at clock {rec.clock} has columns {rec.labels}, expected {labels}")


def write_csv(records: Iterable[SimulationRecord], sink: IO) -> int:
    """Write a ``timestep,place.token,...`` header and one line per record.

    ``sink`` may be a text or binary stream. Records are consumed lazily.
    Returns the number of data rows written.
    """
    first, rest = _first(records)
    write = _writer(sink)
    labels = first.labels
    write(",".join(["timestep", *labels]) + "\n")
    n = 0
    for rec in _chain(first, rest):
        _check_labels(rec, labels)
        write(",".join([fmt_number(rec.clock), *map(fmt_number, rec.values)]) + "\n")
        n += 1
    return n


def write_json(records: Iterable[SimulationRecord], sink: IO) -> int:
    """Write ``[{"timestep": t, "tokens": {"place.token": n, ...}}, ...]``."""
    first, rest = _first(records)
    write = _writer(sink)
    labels = first.labels
    keys = [json.dumps(label) for label in labels]
    write("[")
    n = 0
    for rec in _chain(first, rest):
        _check_labels(rec, labels)
        tokens = ",".join(f"{k}:{fmt_number(v)}" for k, v in zip(keys, rec.values))
        write(("," if n else "") + f'{{"timestep":{fmt_number(rec.clock)},"tokens":{{{tokens}}}}}')
        n += 1
    write("]\n")
    return n


def _chain(first, rest):
    yield first
    yield from rest


def read_csv(source: IO) -> list[SimulationRecord]:
    """Parse text produced by ``write_csv`` back into records."""
    lines = source.read().splitlines()
    if not lines:
        raise EmptyHistory("empty CSV input")
    header = lines[0].split(",")
    if header[0] != "timestep":
        raise ValueError(f"first column must be 'timestep', got {header[0]!r}")
    labels = header[1:]
    out = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != len(header):
            raise ValueError(f"row {line!r} has {len(fields)} fields, expected {len(header)}")
        out.append(SimulationRecord(float(fields[0]), list(labels), [float(f) for f in fields[1:]]))
    return out
