"""Encoding gait events as a characteristic curve and restoring them from one.

The curve places +1 at left heel strikes, -1 at right heel strikes, 0 at
toe-offs, and is linear between those anchors. Restoring a (predicted) curve
means detecting its extremal peaks and reading them back as heel strikes.
"""

from dataclasses import dataclass

import numpy as np

from .records import EventKind, GaitEvent, PhaseSequence, GccCurve

ANCHOR_VALUES = {EventKind.LHS: 1.0, EventKind.RHS: -1.0, EventKind.TO: 0.0}


@dataclass(frozen=True)
class PeakConfig:
    """Parameters of the extremum detector used for cycle restoration.

    A candidate peak must reach `threshold` in absolute value and have a
    topographic prominence of at least `prominence`, measured only against
    sides on which some strictly higher sample exists before the sequence
    edge. Candidates closer than `min_separation` samples are resolved in
    favour of the larger value (earlier index on ties). Sequence endpoints
    count as peaks when `allow_boundary_peaks` and they exceed their single
    neighbour.
    """

    threshold: float = 0.5
    min_separation: int = 10  # samples; 10 at 30 Hz is about 0.33 s
    prominence: float = 0.5
    allow_boundary_peaks: bool = True

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.min_separation < 1:
            raise ValueError("min_separation must be >= 1")
        if self.prominence < 0:
            raise ValueError("prominence must be >= 0")


def piecewise_linear(xs, ys, length: int, clamp: tuple[float, float] | None = None) -> np.ndarray:
    """Evaluate the piecewise-linear curve through (xs, ys) on [0, length).

    Outside the anchor span the nearest segment is extended linearly; with a
    single anchor the value is constant. `clamp` bounds the result.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    t = np.arange(length, dtype=float)
    if len(xs) == 1:
        out = np.full(length, ys[0])
    else:
        out = np.interp(t, xs, ys)
        left = t < xs[0]
        if left.any():
            slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            out[left] = ys[0] + slope * (t[left] - xs[0])
        right = t > xs[-1]
        if right.any():
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out[right] = ys[-1] + slope * (t[right] - xs[-1])
    if clamp is not None:
        np.clip(out, clamp[0], clamp[1], out=out)
    return out


def _check_event_train(events, length: int) -> None:
    if not events:
        raise ValueError("event list is empty")
    indices = [e.index for e in events]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError("events must be strictly increasing by index")
    if indices[0] < 0 or indices[-1] >= length:
        raise ValueError(f"event index out of bounds for length {length}")


def encode_gcc(events, length: int) -> GccCurve:
    """Encode an event train as the characteristic curve of given length."""
    _check_event_train(events, length)
    xs = [e.index for e in events]
    ys = [ANCHOR_VALUES[e.kind] for e in events]
    return GccCurve(piecewise_linear(xs, ys, length, clamp=(-1.0, 1.0)))


def label_phases(events, length: int) -> PhaseSequence:
    """Binary gait phase per timestamp: 0 after a left heel strike, 1 after a
    right one. Timestamps before the first strike take the phase that would
    precede it; the final phase runs to the end."""
    strikes = [e for e in events if e.kind.is_heel_strike]
    if not strikes:
        raise ValueError("no heel-strike events to label phases from")
    kinds = [e.kind for e in strikes]
    if any(b == a for a, b in zip(kinds, kinds[1:])):
        raise ValueError("heel strikes must alternate sides")

    labels = np.empty(length, dtype=np.int8)
    first = strikes[0]
    labels[: first.index] = 1 if first.kind is EventKind.LHS else 0
    for k, strike in enumerate(strikes):
        end = strikes[k + 1].index if k + 1 < len(strikes) else length
        labels[strike.index : end] = 0 if strike.kind is EventKind.LHS else 1
    return PhaseSequence(labels)


def _plateau_runs(values: np.ndarray):
    """Yield (start, end) of maximal runs of equal values, ends inclusive."""
    n = len(values)
    start = 0
    for i in range(1, n + 1):
        if i == n or values[i] != values[start]:
            yield start, i - 1
            start = i


def _one_sided_base(values: np.ndarray, start: int, step: int, peak_value: float) -> float | None:
    """Lowest value between the peak and the first strictly higher sample in
    one direction, or None when the scan reaches the sequence edge without
    finding one (the peak dominates that whole side)."""
    i = start
    base = None
    n = len(values)
    while 0 <= i < n:
        if values[i] > peak_value:
            return base
        if base is None or values[i] < base:
            base = values[i]
        i += step
    return None


def _find_maxima(values: np.ndarray, cfg: PeakConfig) -> list[int]:
    n = len(values)
    candidates = []
    for start, end in _plateau_runs(values):
        v = values[start]
        left_open = start == 0
        right_open = end == n - 1
        if left_open and right_open:
            continue  # constant sequence
        if not left_open and values[start - 1] >= v:
            continue
        if not right_open and values[end + 1] >= v:
            continue
        if (left_open or right_open) and not cfg.allow_boundary_peaks:
            continue
        if v < cfg.threshold:
            continue
        # Prominence is measured against the higher of the two bases, but a
        # side the peak dominates all the way to the sequence edge does not
        # constrain it; without that rule the first and last extremum of a
        # short sequence would be discarded for lack of uphill terrain.
        left_base = None if left_open else _one_sided_base(values, start - 1, -1, v)
        right_base = None if right_open else _one_sided_base(values, end + 1, +1, v)
        bases = [b for b in (left_base, right_base) if b is not None]
        if bases and v - max(bases) < cfg.prominence:
            continue
        # Plateaus report their interior-facing edge: a plateau running into
        # the left boundary is a saturation artifact whose real extremum sits
        # where the descent begins, so it reports its rightmost index;
        # everything else reports the leftmost.
        candidates.append((end if left_open else start, v))

    # Enforce minimum separation: larger value wins, earlier index on ties.
    accepted = []
    for idx, _v in sorted(candidates, key=lambda c: (-c[1], c[0])):
        if all(abs(idx - a) >= cfg.min_separation for a in accepted):
            accepted.append(idx)
    return sorted(accepted)


def detect_peaks(curve: GccCurve, cfg: PeakConfig | None = None) -> tuple[list[int], list[int]]:
    """Detect curve extrema; returns (maxima indices, minima indices)."""
    cfg = cfg or PeakConfig()
    values = np.asarray(curve.values, dtype=float)
    if len(values) < 2:
        raise ValueError("curve must have at least 2 samples")
    maxima = _find_maxima(values, cfg)
    minima = _find_maxima(-values, cfg)
    return maxima, minima


def restore_cycle(curve: GccCurve, cfg: PeakConfig | None = None) -> list[GaitEvent]:
    """Read heel strikes back from a curve: maxima become left heel strikes,
    minima right ones. Consecutive same-side strikes are collapsed to the one
    with the more extreme curve value (earlier index on ties)."""
    cfg = cfg or PeakConfig()
    maxima, minima = detect_peaks(curve, cfg)
    merged = sorted(
        [(i, EventKind.LHS) for i in maxima] + [(i, EventKind.RHS) for i in minima]
    )

    events = []
    values = curve.values
    for idx, kind in merged:
        if events and events[-1].kind is kind:
            prev = events[-1]
            better = values[idx] > values[prev.index] if kind is EventKind.LHS else values[idx] < values[prev.index]
            if better:
                events[-1] = GaitEvent(index=idx, kind=kind)
        else:
            events.append(GaitEvent(index=idx, kind=kind))
    return events


def events_to_phase_via_restoration(curve: GccCurve, cfg: PeakConfig | None, length: int) -> PhaseSequence:
    """Restore heel strikes from a curve, then label phases from them."""
    events = restore_cycle(curve, cfg)
    if not events:
        raise ValueError("no heel strikes restored")
    return label_phases(events, length)
