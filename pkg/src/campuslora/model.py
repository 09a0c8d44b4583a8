"""Core domain types: timestamps, device identity and taxonomy, dataset rows.

All types are immutable values after construction and safe to share across
threads. Serialization to/from the CSV schemas lives in `ingest`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Iterable, Optional

from .errors import AmbiguousKind, InvalidCalendar, MalformedTimestamp

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_ONE_MS = timedelta(milliseconds=1)
MIN_EPOCH_MILLIS = (datetime(1, 1, 1, tzinfo=timezone.utc) - _EPOCH) // _ONE_MS
MAX_EPOCH_MILLIS = (
    datetime(9999, 12, 31, 23, 59, 59, 999000, tzinfo=timezone.utc) - _EPOCH
) // _ONE_MS

_DATE_RE = re.compile(r"^\d{4}\.\d{2}\.\d{2}$")
_TIME_RE = re.compile(r"^\d{2}\.\d{2}\.\d{2}\.\d{3}$")
_DEVEUI_RE = re.compile(r"^[0-9a-f]{16}$")
_ISO_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})\.(\d{3})Z$")


@dataclass(frozen=True, order=True)
class Timestamp:
    """A UTC instant with millisecond resolution.

    The dataset's textual format carries no timezone, so instants are
    canonically interpreted as UTC. Values are restricted to years 0001-9999
    so that every Timestamp round-trips through the textual format.
    """

    epoch_millis: int

    def __post_init__(self) -> None:
        if not MIN_EPOCH_MILLIS <= self.epoch_millis <= MAX_EPOCH_MILLIS:
            raise InvalidCalendar(
                f"epoch_millis {self.epoch_millis} outside representable years 0001-9999"
            )

    def to_datetime(self) -> datetime:
        return _EPOCH + timedelta(milliseconds=self.epoch_millis)

    @classmethod
    def from_datetime(cls, dt: datetime) -> "Timestamp":
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return cls((dt - _EPOCH) // _ONE_MS)

    def iso(self) -> str:
        """ISO-8601 with explicit milliseconds and a Z suffix."""
        dt = self.to_datetime()
        return (
            f"{dt.year:04d}-{dt.month:02d}-{dt.day:02d}T"
            f"{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d}"
            f".{dt.microsecond // 1000:03d}Z"
        )

    @classmethod
    def from_iso(cls, text: str) -> "Timestamp":
        m = _ISO_RE.match(text)
        if m is None:
            raise MalformedTimestamp(f"not an ISO-8601 millisecond timestamp: {text!r}")
        y, mo, d, h, mi, s, ms = (int(g) for g in m.groups())
        try:
            dt = datetime(y, mo, d, h, mi, s, ms * 1000, tzinfo=timezone.utc)
        except ValueError as exc:
            raise InvalidCalendar(str(exc)) from None
        return cls.from_datetime(dt)


def parse_timestamp(date_str: str, time_str: str) -> Timestamp:
    """Parse the dataset's `yyyy.mm.dd` / `hh.mm.ss.msmsms` pair into a Timestamp."""
    if not _DATE_RE.match(date_str):
        raise MalformedTimestamp(f"date {date_str!r} does not match yyyy.mm.dd")
    if not _TIME_RE.match(time_str):
        raise MalformedTimestamp(f"time {time_str!r} does not match hh.mm.ss.msmsms")
    year, month, day = (int(p) for p in date_str.split("."))
    hour, minute, second, millis = (int(p) for p in time_str.split("."))
    try:
        dt = datetime(year, month, day, hour, minute, second, millis * 1000, tzinfo=timezone.utc)
    except ValueError as exc:
        raise InvalidCalendar(str(exc)) from None
    return Timestamp.from_datetime(dt)


def format_timestamp(ts: Timestamp) -> tuple[str, str]:
    """Inverse of parse_timestamp; round-trips exactly on valid inputs."""
    dt = ts.to_datetime()
    date_str = f"{dt.year:04d}.{dt.month:02d}.{dt.day:02d}"
    time_str = f"{dt.hour:02d}.{dt.minute:02d}.{dt.second:02d}.{dt.microsecond // 1000:03d}"
    return date_str, time_str


@dataclass(frozen=True, order=True)
class DeviceId:
    """64-bit extended unique identifier, normalized to 16 lowercase hex chars."""

    dev_eui: str

    def __post_init__(self) -> None:
        normalized = self.dev_eui.lower()
        if not _DEVEUI_RE.match(normalized):
            raise ValueError(f"dev_eui {self.dev_eui!r} is not 16 hex characters")
        object.__setattr__(self, "dev_eui", normalized)


class DeviceKind(Enum):
    CO2 = "co2"
    SOUND = "sound"
    MOISTURE = "moisture"


# Measurement fields in sensors-CSV column order.
MEASUREMENT_FIELDS: tuple[str, ...] = (
    "co2",
    "temperature",
    "humidity",
    "light",
    "motion",
    "sound_avg",
    "sound_peak",
    "pressure",
    "moisture",
    "battery",
)

# temperature/humidity/battery are reported by every kind and carry no
# taxonomy information.
SHARED_FIELDS = frozenset({"temperature", "humidity", "battery"})

KIND_SIGNATURES: dict[DeviceKind, frozenset[str]] = {
    DeviceKind.CO2: frozenset({"co2", "motion", "light"}),
    DeviceKind.SOUND: frozenset({"sound_avg", "sound_peak", "motion", "light"}),
    DeviceKind.MOISTURE: frozenset({"pressure", "moisture"}),
}


def kind_fields(kind: DeviceKind) -> frozenset[str]:
    """All measurement fields a device of this kind reports."""
    return KIND_SIGNATURES[kind] | SHARED_FIELDS


def kind_of(present: Iterable[str]) -> DeviceKind:
    """Classify a set of present field names into the unique matching kind.

    Shared fields are ignored; the remaining fields must be a nonempty subset
    of exactly one kind's signature.
    """
    distinctive = frozenset(present) - SHARED_FIELDS
    matches = [k for k, sig in KIND_SIGNATURES.items() if distinctive and distinctive <= sig]
    if len(matches) != 1:
        raise AmbiguousKind(
            f"fields {sorted(distinctive) or sorted(present)} match {len(matches)} kinds"
        )
    return matches[0]


@dataclass(frozen=True)
class DeviceInfo:
    """Device metadata; coordinates and height are carried but never computed on."""

    id: DeviceId
    kind: DeviceKind
    coord: Optional[tuple[float, float]] = None
    height: Optional[float] = None


@dataclass(frozen=True)
class GatewayInfo:
    coord: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class SensorReading:
    """One row of the sensors-readings dataset.

    Fields a device does not monitor are None in memory and literal `nan`
    at the CSV boundary. At least one measurement must be present.
    """

    ts: Timestamp
    device: DeviceId
    co2: Optional[float] = None
    temperature: Optional[float] = None
    humidity: Optional[float] = None
    light: Optional[float] = None
    motion: Optional[float] = None
    sound_avg: Optional[float] = None
    sound_peak: Optional[float] = None
    pressure: Optional[float] = None
    moisture: Optional[float] = None
    battery: Optional[float] = None

    def __post_init__(self) -> None:
        if all(getattr(self, f) is None for f in MEASUREMENT_FIELDS):
            raise ValueError("sensor reading with every measurement absent")

    def present_fields(self) -> frozenset[str]:
        return frozenset(f for f in MEASUREMENT_FIELDS if getattr(self, f) is not None)


# Table-style inclusive ranges for the LoRa metadata columns.
LORA_RANGES: dict[str, tuple[float, float]] = {
    "channel": (0, 6),
    "lsnr": (-22.5, 10.0),
    "port": (1, 12),
    "rfch": (0, 1),
    "rssi": (-120.0, -53.0),
    "fcnt": (0, 65535),
}

FCNT_MODULUS = 65536


def _fmt_bound(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


def range_violation(field: str, value: float) -> Optional[str]:
    """Return a human-readable reason when value is outside the field's range."""
    lo, hi = LORA_RANGES[field]
    if not (lo <= value <= hi):
        return f"{field} out of range [{_fmt_bound(lo)},{_fmt_bound(hi)}]"
    return None


@dataclass(frozen=True)
class LoraPacketMeta:
    """One row of the LoRa-parameters dataset; range-checked on construction."""

    ts: Timestamp
    device: DeviceId
    channel: int
    lsnr: float
    port: int
    rfch: int
    rssi: float
    fcnt: int

    def __post_init__(self) -> None:
        for field in LORA_RANGES:
            reason = range_violation(field, getattr(self, field))
            if reason is not None:
                raise ValueError(reason)

    @classmethod
    def unchecked(
        cls,
        ts: Timestamp,
        device: DeviceId,
        channel: int,
        lsnr: float,
        port: int,
        rfch: int,
        rssi: float,
        fcnt: int,
    ) -> "LoraPacketMeta":
        """Bypass range validation. Exists only so the validator's own tests
        can manufacture out-of-range rows; production code must not call it."""
        obj = object.__new__(cls)
        values = dict(
            ts=ts, device=device, channel=channel, lsnr=lsnr,
            port=port, rfch=rfch, rssi=rssi, fcnt=fcnt,
        )
        for f in fields(cls):
            object.__setattr__(obj, f.name, values[f.name])
        return obj
