import numpy as np
import pytest

from gaitseg.records import EventKind, GaitEvent, ImuSequence, WalkRecord

KIND = {"LHS": EventKind.LHS, "RHS": EventKind.RHS, "TO": EventKind.TO}


def make_events(*pairs):
    """Events from ("LHS", 3)-style pairs."""
    return tuple(GaitEvent(index=i, kind=KIND[k]) for k, i in pairs)


def make_record(events=(), T=20, side="L", subject="s00", channels=6, rate_hz=30.0, seed=0):
    rng = np.random.default_rng(seed)
    return WalkRecord(
        subject_id=subject,
        side=side,
        modality="normal",
        imu=ImuSequence(samples=rng.normal(size=(T, channels)), rate_hz=rate_hz),
        events=tuple(events),
    )


def random_event_train(rng, min_gap=11):
    """A gait-shaped random event train: 1 to 3 cycles of alternating heel
    strikes with toe-offs between them, bounded by the leading and trailing
    swing toe-offs, with tight margins at the sequence edges (mirroring how
    short walk trials are annotated). Returns (events, length)."""
    n_strikes = 2 * int(rng.integers(1, 4))
    gaps = rng.integers(min_gap, 26, size=n_strikes - 1)
    d0 = int(rng.integers(5, 10))
    lead = int(rng.integers(0, 1 + max(1, int(0.3 * d0))))
    strikes = lead + d0 + np.concatenate([[0], np.cumsum(gaps)])
    start = EventKind.LHS if rng.integers(0, 2) else EventKind.RHS
    other = EventKind.RHS if start is EventKind.LHS else EventKind.LHS

    events = [GaitEvent(int(lead), EventKind.TO)]
    for k, idx in enumerate(strikes):
        events.append(GaitEvent(int(idx), start if k % 2 == 0 else other))
    for a, b in zip(strikes, strikes[1:]):
        events.append(GaitEvent(int(a + round(0.6 * (b - a))), EventKind.TO))
    d1 = int(rng.integers(6, 12))
    trailing = int(strikes[-1] + d1)
    events.append(GaitEvent(trailing, EventKind.TO))
    length = trailing + int(rng.integers(1, 1 + max(1, int(0.3 * d1))))
    events.sort(key=lambda e: e.index)
    return tuple(events), length + 1


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
