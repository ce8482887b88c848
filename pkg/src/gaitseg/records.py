"""Core domain records: IMU walk trials, gait events, and the JSONL dataset format.

All record types are immutable after construction (arrays are stored
read-only), so they can be shared freely between threads and processes.
Invariant checking is deliberately separate from construction: building an
invalid record is allowed, `validate_record` reports what is wrong with it.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

SIDES = ("L", "R")


class EventKind(str, Enum):
    """Gait event labels: heel strikes carry a foot side, toe-offs do not."""

    LHS = "LHS"
    RHS = "RHS"
    TO = "TO"

    @property
    def is_heel_strike(self) -> bool:
        return self in (EventKind.LHS, EventKind.RHS)


# Accepted spellings on ingestion; left/right toe-offs collapse to plain TO.
_KIND_ALIASES = {
    "LHS": EventKind.LHS,
    "RHS": EventKind.RHS,
    "TO": EventKind.TO,
    "LEFTHEELSTRIKE": EventKind.LHS,
    "RIGHTHEELSTRIKE": EventKind.RHS,
    "TOEOFF": EventKind.TO,
    "LTO": EventKind.TO,
    "RTO": EventKind.TO,
}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ImuSequence:
    """A T x C block of sensor samples at a fixed sampling rate."""

    samples: np.ndarray
    rate_hz: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "samples", _readonly(np.atleast_2d(self.samples)))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True, order=True)
class GaitEvent:
    index: int
    kind: EventKind = field(compare=False)


@dataclass(frozen=True)
class WalkRecord:
    """One short straight-walk trial with its event annotations."""

    subject_id: str
    side: str  # ear the sensor is worn on, "L" or "R"
    modality: str
    imu: ImuSequence
    events: tuple[GaitEvent, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def heel_strikes(self) -> list[GaitEvent]:
        return [e for e in self.events if e.kind.is_heel_strike]


@dataclass(frozen=True)
class GccCurve:
    """Per-timestamp curve in [-1, 1]: +1 at left heel strikes, -1 at right,
    0 at toe-offs, linear in between."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.ravel(self.values)))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PhaseSequence:
    """Binary per-timestamp gait phase: 0 from a left heel strike to the next
    right one, 1 from a right heel strike to the next left one."""

    labels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.labels, dtype=np.int8)
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "labels", a)

    def __len__(self) -> int:
        return len(self.labels)


def validate_record(record: WalkRecord, require_training_targets: bool = False) -> list[str]:
    """Check every record invariant; returns one message per violation.

    An empty list means the record is valid. With `require_training_targets`
    the record must also contain at least one heel strike per foot, which is
    what encoding a regression target requires.
    """
    violations = []
    samples = record.imu.samples
    T = samples.shape[0]

    if T < 2:
        violations.append(f"sequence too short: {T} samples (need at least 2)")
    if samples.shape[1] < 1:
        violations.append("sequence has no channels")
    if not np.all(np.isfinite(samples)):
        violations.append("non-finite sample values")
    if not record.imu.rate_hz > 0:
        violations.append(f"rate_hz must be positive, got {record.imu.rate_hz}")
    if record.side not in SIDES:
        violations.append(f"side must be one of {SIDES}, got {record.side!r}")

    indices = [e.index for e in record.events]
    if any(i < 0 or i >= T for i in indices):
        violations.append("event out of bounds")
    if any(b <= a for a, b in zip(indices, indices[1:])):
        violations.append("events not strictly increasing by index")

    strikes = [e.kind for e in record.events if e.kind.is_heel_strike]
    if any(b == a for a, b in zip(strikes, strikes[1:])):
        violations.append("heel strikes do not alternate")
    if require_training_targets:
        if EventKind.LHS not in strikes or EventKind.RHS not in strikes:
            violations.append("missing heel strikes for at least one side")

    return violations


def _record_to_obj(record: WalkRecord) -> dict:
    return {
        "subject": record.subject_id,
        "side": record.side,
        "modality": record.modality,
        "rate_hz": record.imu.rate_hz,
        "imu": record.imu.samples.tolist(),
        "events": [{"i": e.index, "k": e.kind.value} for e in record.events],
    }


def _record_from_obj(obj: dict, where: str) -> WalkRecord:
    try:
        samples = np.array(obj["imu"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{where}: non-numeric imu samples ({exc})") from None
    if samples.ndim != 2:
        raise ValueError(f"{where}: imu must be a list of equal-length channel rows")

    events = []
    for k, ev in enumerate(obj.get("events", [])):
        kind_raw = str(ev["k"])
        kind = _KIND_ALIASES.get(kind_raw.upper())
        if kind is None:
            raise ValueError(f"{where}: unknown event kind {kind_raw!r} in event {k}")
        events.append(GaitEvent(index=int(ev["i"]), kind=kind))

    return WalkRecord(
        subject_id=str(obj["subject"]),
        side=str(obj["side"]),
        modality=str(obj.get("modality", "normal")),
        imu=ImuSequence(samples=samples, rate_hz=float(obj["rate_hz"])),
        events=tuple(events),
    )


def write_records(records: list[WalkRecord], path) -> None:
    """Write records to a JSONL file, one JSON object per line."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(_record_to_obj(record), sort_keys=True))
            fh.write("\n")


def read_records(path) -> list[WalkRecord]:
    """Read a JSONL dataset file; raises ValueError naming the offending line."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{where}: malformed JSON ({exc.msg})") from None
            try:
                records.append(_record_from_obj(obj, where))
            except KeyError as exc:
                raise ValueError(f"{where}: missing field {exc.args[0]!r}") from None
    return records
