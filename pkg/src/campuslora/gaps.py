"""Failure identification: grid alignment, cadence gaps, frame-counter gaps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    MixedDevices,
    NonMonotonicTime,
    CounterAnomalyWarning,
    DuplicateCounterWarning,
    SlotCollisionWarning,
)
from .model import FCNT_MODULUS, DeviceId, LoraPacketMeta, SensorReading, Timestamp, format_timestamp

# Counter jumps implying at least this many consecutive losses are treated as
# wraparound/reset artifacts, not real gaps (4096 slots is about 42 days of
# silence at the 15-minute cadence).
PLAUSIBILITY_CAP = 4096

DEFAULT_CADENCE_MS = 15 * 60 * 1000


class GapSource(Enum):
    CADENCE = "cadence"
    FCNT = "fcnt"


@dataclass(frozen=True)
class Gap:
    """A maximal run of missing transmissions for one device.

    slot_end - slot_start == missing_count * slot spacing, with the spacing
    inferred from the enclosing evidence (grid cadence, or the even division
    of the interval between the two packets that bracket an FCNT jump).
    """

    device: DeviceId
    slot_start: Timestamp
    slot_end: Timestamp
    missing_count: int
    source: GapSource

    def slot_times(self) -> list[Timestamp]:
        """The inferred timestamps of the missing transmissions."""
        spacing = (self.slot_end.epoch_millis - self.slot_start.epoch_millis) // self.missing_count
        return [
            Timestamp(self.slot_start.epoch_millis + k * spacing)
            for k in range(self.missing_count)
        ]


@dataclass(eq=False)
class GriddedSeries:
    """One device/field series resampled onto a uniform cadence grid.

    values[i] belongs to t0 + i*cadence_ms; mask[i] says whether the cell is
    present. Absent cells hold NaN but the mask is authoritative. slot_index
    is set only by the Drop strategy: values[i] then belongs to
    t0 + slot_index[i]*cadence_ms.
    """

    device: DeviceId
    field: str
    t0: Timestamp
    cadence_ms: int
    values: np.ndarray
    mask: np.ndarray
    slot_index: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.cadence_ms <= 0:
            raise ValueError("cadence must be positive")
        if self.values.shape != self.mask.shape or self.values.ndim != 1:
            raise ValueError("values and mask must be equal-length 1-D arrays")
        if self.slot_index is not None:
            self.slot_index = np.asarray(self.slot_index, dtype=np.int64)

    def __len__(self) -> int:
        return int(self.values.size)

    def slot_time(self, i: int) -> Timestamp:
        offset = int(self.slot_index[i]) if self.slot_index is not None else i
        return Timestamp(self.t0.epoch_millis + offset * self.cadence_ms)

    @property
    def present_count(self) -> int:
        return int(self.mask.sum())

    @property
    def is_complete(self) -> bool:
        return bool(self.mask.all())

    def replace_values(self, values: np.ndarray, mask: np.ndarray,
                       slot_index: Optional[np.ndarray] = None) -> "GriddedSeries":
        return GriddedSeries(self.device, self.field, self.t0, self.cadence_ms,
                             values, mask, slot_index)


def _check_single_device(items: Sequence) -> DeviceId:
    devices = {item.device for item in items}
    if len(devices) > 1:
        raise MixedDevices(f"rows from {len(devices)} devices: {sorted(d.dev_eui for d in devices)}")
    return next(iter(devices))


def align_to_grid(
    readings: Sequence[SensorReading], field_name: str, cadence_ms: int = DEFAULT_CADENCE_MS
) -> GriddedSeries:
    """Snap time-sorted readings of one device onto a uniform grid.

    The grid is anchored at the first reading; each reading lands on the
    nearest slot (tolerance is half a cadence by construction). When two
    readings snap to the same slot the later one wins, on the assumption
    that it is a retransmission.
    """
    if not readings:
        raise EmptyInput("no readings to align")
    if cadence_ms <= 0:
        raise ValueError("cadence must be positive")
    device = _check_single_device(readings)
    t_prev = None
    t0 = readings[0].ts.epoch_millis
    slot_reading: dict[int, SensorReading] = {}
    for reading in readings:
        t = reading.ts.epoch_millis
        if t_prev is not None and t < t_prev:
            raise NonMonotonicTime("readings must be sorted by time")
        t_prev = t
        idx = (2 * (t - t0) + cadence_ms) // (2 * cadence_ms)
        if idx in slot_reading:
            warnings.warn(
                f"slot {idx} of {device.dev_eui}/{field_name} claimed twice; keeping the later reading",
                SlotCollisionWarning,
                stacklevel=2,
            )
        slot_reading[int(idx)] = reading
    n = max(slot_reading) + 1
    values = np.full(n, np.nan)
    mask = np.zeros(n, dtype=bool)
    for idx, reading in slot_reading.items():
        value = getattr(reading, field_name)
        if value is not None:
            values[idx] = value
            mask[idx] = True
    return GriddedSeries(device, field_name, Timestamp(t0), cadence_ms, values, mask)


def detect_gaps_cadence(series: GriddedSeries) -> list[Gap]:
    """One Gap per maximal run of consecutive missing grid cells."""
    gaps: list[Gap] = []
    n = len(series)
    i = 0
    while i < n:
        if series.mask[i]:
            i += 1
            continue
        j = i
        while j < n and not series.mask[j]:
            j += 1
        start = series.t0.epoch_millis + i * series.cadence_ms
        gaps.append(
            Gap(
                device=series.device,
                slot_start=Timestamp(start),
                slot_end=Timestamp(start + (j - i) * series.cadence_ms),
                missing_count=j - i,
                source=GapSource.CADENCE,
            )
        )
        i = j
    return gaps


def detect_gaps_fcnt(
    packets: Sequence[LoraPacketMeta], plausibility_cap: int = PLAUSIBILITY_CAP
) -> list[Gap]:
    """Infer gaps from skipped frame-counter values.

    Counters are compared modulo 65536, so a wrap (65535 -> 0) is consecutive.
    The missing transmissions are placed evenly between the bracketing packet
    timestamps. A duplicate counter or a jump at or beyond the plausibility
    cap raises a warning instead of emitting a gap.
    """
    if not packets:
        return []
    _check_single_device(packets)
    gaps: list[Gap] = []
    for prev, cur in zip(packets, packets[1:]):
        if cur.ts.epoch_millis < prev.ts.epoch_millis:
            raise NonMonotonicTime("packets must be sorted by time")
        missing = (cur.fcnt - prev.fcnt - 1) % FCNT_MODULUS
        if missing == 0:
            continue
        if cur.fcnt == prev.fcnt:
            warnings.warn(
                f"duplicate counter {cur.fcnt} on {cur.device.dev_eui}",
                DuplicateCounterWarning,
                stacklevel=2,
            )
            continue
        if missing >= plausibility_cap:
            warnings.warn(
                f"counter jump {prev.fcnt}->{cur.fcnt} on {cur.device.dev_eui} implies "
                f"{missing} losses (cap {plausibility_cap}); treating as a reset",
                CounterAnomalyWarning,
                stacklevel=2,
            )
            continue
        span = cur.ts.epoch_millis - prev.ts.epoch_millis
        spacing = round(span / (missing + 1))
        start = prev.ts.epoch_millis + spacing
        gaps.append(
            Gap(
                device=cur.device,
                slot_start=Timestamp(start),
                slot_end=Timestamp(start + missing * spacing),
                missing_count=missing,
                source=GapSource.FCNT,
            )
        )
    return gaps


GAPS_CSV_HEADER = "deveui,slot_start,slot_end,missing_count,source"


def render_gaps_csv(gaps: Iterable[Gap]) -> str:
    lines = [GAPS_CSV_HEADER]
    for g in gaps:
        d0, t0 = format_timestamp(g.slot_start)
        d1, t1 = format_timestamp(g.slot_end)
        lines.append(
            f"{g.device.dev_eui},{d0} {t0},{d1} {t1},{g.missing_count},{g.source.value}"
        )
    return "\n".join(lines) + "\n"
