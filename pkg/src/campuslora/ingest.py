"""Parsing, validation and serialization of the two dataset CSVs.

The writer and the parser share one schema constant per file, so traces
emitted by `simnet` re-parse with zero rejections and serialize back
bit-exactly. Parsing is total: bad rows are quarantined in the ParseReport
with a reason, never silently dropped and never fatal.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

import numpy as np

from .errors import MissingHeader, SeriesTooShort
from .model import (
    MEASUREMENT_FIELDS,
    DeviceId,
    LoraPacketMeta,
    SensorReading,
    Timestamp,
    format_timestamp,
    parse_timestamp,
)

LORA_HEADER = "time,channel,deveui,lsnr,port,rfch,rssi,fcnt"
SENSOR_HEADER = "time,deveui," + ",".join(MEASUREMENT_FIELDS)

Source = Union[str, Path, bytes, IO[bytes], IO[str]]


@dataclass
class ParseReport:
    """Bookkeeping for one parse call.

    Line numbers count from 1 and include the header line, i.e. the first
    data row is line 2. rows_ok + rows_rejected equals the number of data rows.
    """

    rows_ok: int = 0
    rows_rejected: int = 0
    rejections: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_number: int, reason: str) -> None:
        self.rows_rejected += 1
        self.rejections.append((line_number, reason))


@dataclass(frozen=True)
class OutlierReport:
    removed_indices: tuple[int, ...]
    lower_fence: float
    upper_fence: float


def _iter_lines(source: Source) -> Iterator[str]:
    """Yield decoded lines without trailing newlines from any byte source."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    text = data.decode("utf-8", errors="replace")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for line in lines:
        yield line.rstrip("\r")


def _parse_time_cell(cell: str) -> Timestamp:
    parts = cell.split(" ")
    if len(parts) != 2:
        raise ValueError(f"time cell {cell!r} is not 'date time'")
    return parse_timestamp(parts[0], parts[1])


def _parse_int(cell: str, name: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise ValueError(f"{name}: {cell!r} is not an integer") from None


def _parse_float(cell: str, name: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(f"{name}: {cell!r} is not a number") from None
    if not math.isfinite(value):
        raise ValueError(f"{name}: {cell!r} is not finite")
    return value


def parse_lora_csv(source: Source) -> tuple[list[LoraPacketMeta], ParseReport]:
    """Parse the LoRa-parameters CSV, range-checking every row.

    Rows violating the metadata ranges are rejected (quarantined in the
    report) rather than clamped; clamping would bias link-quality statistics.
    """
    lines = _iter_lines(source)
    try:
        header = next(lines)
    except StopIteration:
        raise MissingHeader("empty input, expected header " + LORA_HEADER) from None
    if header != LORA_HEADER:
        raise MissingHeader(f"expected header {LORA_HEADER!r}, got {header!r}")

    packets: list[LoraPacketMeta] = []
    report = ParseReport()
    for line_no, line in enumerate(lines, start=2):
        cells = line.split(",")
        if len(cells) != 8:
            report.reject(line_no, f"expected 8 columns, got {len(cells)}")
            continue
        try:
            packet = LoraPacketMeta(
                ts=_parse_time_cell(cells[0]),
                device=DeviceId(cells[2]),
                channel=_parse_int(cells[1], "channel"),
                lsnr=_parse_float(cells[3], "lsnr"),
                port=_parse_int(cells[4], "port"),
                rfch=_parse_int(cells[5], "rfch"),
                rssi=_parse_float(cells[6], "rssi"),
                fcnt=_parse_int(cells[7], "fcnt"),
            )
        except Exception as exc:
            report.reject(line_no, str(exc))
            continue
        packets.append(packet)
        report.rows_ok += 1
    return packets, report


def parse_sensor_csv(source: Source) -> tuple[list[SensorReading], ParseReport]:
    """Parse the sensors-readings CSV; literal `nan` marks absent quantities."""
    lines = _iter_lines(source)
    try:
        header = next(lines)
    except StopIteration:
        raise MissingHeader("empty input, expected header " + SENSOR_HEADER) from None
    if header != SENSOR_HEADER:
        raise MissingHeader(f"expected header {SENSOR_HEADER!r}, got {header!r}")

    expected_cols = 2 + len(MEASUREMENT_FIELDS)
    readings: list[SensorReading] = []
    report = ParseReport()
    for line_no, line in enumerate(lines, start=2):
        cells = line.split(",")
        if len(cells) != expected_cols:
            report.reject(line_no, f"expected {expected_cols} columns, got {len(cells)}")
            continue
        try:
            ts = _parse_time_cell(cells[0])
            device = DeviceId(cells[1])
            values: dict[str, float] = {}
            for name, cell in zip(MEASUREMENT_FIELDS, cells[2:]):
                if cell == "nan":
                    continue
                values[name] = _parse_float(cell, name)
            if not values:
                raise ValueError("all measurement fields are nan")
            reading = SensorReading(ts=ts, device=device, **values)
        except Exception as exc:
            report.reject(line_no, str(exc))
            continue
        readings.append(reading)
        report.rows_ok += 1
    return readings, report


def format_number(value: float) -> str:
    """Canonical numeric cell: integral floats print as integers, the rest
    as the shortest repr that round-trips."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _time_cell(ts: Timestamp) -> str:
    date_str, time_str = format_timestamp(ts)
    return f"{date_str} {time_str}"


def lora_csv_row(packet: LoraPacketMeta) -> str:
    return ",".join(
        (
            _time_cell(packet.ts),
            str(packet.channel),
            packet.device.dev_eui,
            format_number(packet.lsnr),
            str(packet.port),
            str(packet.rfch),
            format_number(packet.rssi),
            str(packet.fcnt),
        )
    )


def sensor_csv_row(reading: SensorReading) -> str:
    cells = [_time_cell(reading.ts), reading.device.dev_eui]
    for name in MEASUREMENT_FIELDS:
        value = getattr(reading, name)
        cells.append("nan" if value is None else format_number(value))
    return ",".join(cells)


def render_lora_csv(packets: Iterable[LoraPacketMeta]) -> str:
    out = io.StringIO()
    out.write(LORA_HEADER + "\n")
    for p in packets:
        out.write(lora_csv_row(p) + "\n")
    return out.getvalue()


def render_sensor_csv(readings: Iterable[SensorReading]) -> str:
    out = io.StringIO()
    out.write(SENSOR_HEADER + "\n")
    for r in readings:
        out.write(sensor_csv_row(r) + "\n")
    return out.getvalue()


def remove_outliers(
    values, iqr_factor: float = 1.5
) -> tuple[np.ndarray, OutlierReport]:
    """Drop values strictly outside the box-plot fences.

    Quartiles use linear interpolation of order statistics; fences are
    Q1 - iqr_factor*IQR and Q3 + iqr_factor*IQR. Fences come from the input
    series as given; survivors keep their original order. Removed positions
    are reported so callers can convert the cells to missing instead of
    shifting rows.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D series")
    if arr.size < 4:
        raise SeriesTooShort(f"need at least 4 values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite values")
    if iqr_factor <= 0:
        raise ValueError("iqr_factor must be positive")
    q1, q3 = np.quantile(arr, [0.25, 0.75])
    iqr = q3 - q1
    lower = q1 - iqr_factor * iqr
    upper = q3 + iqr_factor * iqr
    outside = (arr < lower) | (arr > upper)
    removed = tuple(int(i) for i in np.flatnonzero(outside))
    return arr[~outside], OutlierReport(removed, float(lower), float(upper))
