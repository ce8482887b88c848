"""Synthetic walk-record generator used as a verification oracle.

Signals are sums of sinusoids locked to the gait phase (one component per
step, one per full cycle) plus a shock transient at every heel strike and
white noise. The transient's envelope on the accelerometer channels marks
event timing; on the gyroscope channels it rings with a sign that differs
between feet, which is what carries the left/right distinction. Sinusoid
phases follow a canonical per-channel pattern so unseen subjects stay
decodable; amplitudes, phase jitter and timing offsets are
subject-specific. Not a biomechanical model, just a controllable stand-in
with exact ground truth.
"""

from dataclasses import dataclass

import numpy as np

from .curve import piecewise_linear
from .records import EventKind, GaitEvent, ImuSequence, WalkRecord

CHANNELS = 6
SIGNAL_SCALE = 0.35  # overall signal amplitude; the ear-worn signal is weak
IMPULSE_TAU = 2.5  # samples
IMPULSE_SPAN = 15  # samples; exp(-15/2.5) is negligible
RING_FREQ_RANGE = (0.22, 0.38)  # cycles/sample; the strike shock rings, and
# how fast it rings is a per-subject trait
MOUNT_ANGLE = 0.35  # radians; max per-axis sensor mounting rotation
SIDE_SIGNED_CHANNELS = slice(3, 6)  # impulse sign encodes the striking foot here

# Canonical per-channel phase offsets. Ear motion is phase-locked to the gait
# events in the same way for everyone; subjects only jitter around these, so
# a model trained on some subjects transfers to unseen ones (imperfectly: the
# jitter is deliberately wide enough that every held-out subject looks
# somewhat off-distribution, as real subjects do).
_STRIDE_PHASE = 2.0 * np.pi * np.arange(CHANNELS) / CHANNELS
_STEP_PHASE = 2.0 * np.pi * np.array([3, 0, 4, 1, 5, 2]) / CHANNELS + np.pi / 4
_PHASE_JITTER = 0.8  # radians, per subject


@dataclass(frozen=True)
class SynthConfig:
    num_subjects: int = 12
    records_per_subject: int = 40
    cycles_min: int = 1
    cycles_max: int = 3
    cadence_min: float = 0.7  # strides per second
    cadence_max: float = 1.2
    noise_sigma: float = 0.05
    rate_hz: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if self.num_subjects < 1 or self.records_per_subject < 1:
            raise ValueError("need at least one subject and one record")
        if not 1 <= self.cycles_min <= self.cycles_max:
            raise ValueError("invalid cycle range")
        if not 0 < self.cadence_min <= self.cadence_max:
            raise ValueError("invalid cadence range")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def subject_side(subject_index: int) -> str:
    """Wear side alternates across subjects: even indices left, odd right."""
    return "L" if subject_index % 2 == 0 else "R"


def _small_rotation(rng, max_angle: float) -> np.ndarray:
    """Composition of per-axis rotations with angles up to max_angle."""
    ax, ay, az = rng.uniform(-max_angle, max_angle, 3)
    cx, sx = np.cos(ax), np.sin(ax)
    cy, sy = np.cos(ay), np.sin(ay)
    cz, sz = np.cos(az), np.sin(az)
    rot_x = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    rot_y = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rot_z = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rot_z @ rot_y @ rot_x


def _subject_traits(cfg: SynthConfig, subject_index: int) -> dict:
    # The step-frequency component repeats every half cycle, so it carries no
    # left/right information; the cycle-frequency component is kept weak on
    # purpose. Which foot is on the ground is therefore mostly decided by the
    # signed strike impulses, as with a real head-mounted sensor.
    rng = np.random.default_rng([cfg.seed, subject_index])
    return {
        "stride_amp": rng.uniform(0.10, 0.35, CHANNELS),
        "stride_phase": _STRIDE_PHASE + rng.uniform(-_PHASE_JITTER, _PHASE_JITTER, CHANNELS),
        "step_amp": rng.uniform(0.4, 1.0, CHANNELS),
        "step_phase": _STEP_PHASE + rng.uniform(-_PHASE_JITTER, _PHASE_JITTER, CHANNELS),
        "impulse_gain": rng.uniform(0.5, 1.8, CHANNELS),
        "ring_freq": rng.uniform(*RING_FREQ_RANGE),
        "base_offset": rng.uniform(0.0, 1.0),
        # Sensor placement differs per wearer: each triplet of channels is
        # mixed by a small random rotation of the sensor axes.
        "accel_rotation": _small_rotation(rng, MOUNT_ANGLE),
        "gyro_rotation": _small_rotation(rng, MOUNT_ANGLE),
    }


def generate_record(cfg: SynthConfig, subject_index: int, record_index: int) -> WalkRecord:
    """One deterministic trial for (subject, record); passes validate_record."""
    traits = _subject_traits(cfg, subject_index)
    rng = np.random.default_rng([cfg.seed, subject_index, record_index, 1])

    n_cycles = int(rng.integers(cfg.cycles_min, cfg.cycles_max + 1))
    cadence = rng.uniform(cfg.cadence_min, cfg.cadence_max)
    half_cycle = cfg.rate_hz / (2.0 * cadence)  # samples between heel strikes
    start_left = bool(rng.integers(0, 2))

    # The trial is bounded by the toe-offs of the swings into the first and
    # out of the last heel strike (at the usual 60% of those half cycles),
    # with only a few samples beyond them. The margins are capped so that the
    # encoded target's edge extrapolation stays well below the peak
    # threshold, otherwise restoration would see spurious boundary extrema.
    d0 = int(np.floor(0.4 * half_cycle + 0.5))
    lead = int(np.floor(traits["base_offset"] + rng.uniform(0.0, 1.5)))
    lead = min(lead, max(1, int(0.3 * (d0 - 1))))

    n_strikes = 2 * n_cycles
    jitter = rng.integers(-1, 2, size=n_strikes)
    strike_idx = np.floor(lead + d0 + np.arange(n_strikes) * half_cycle + 0.5).astype(int)
    strike_idx += jitter
    strike_kinds = [
        EventKind.LHS if (k % 2 == 0) == start_left else EventKind.RHS
        for k in range(n_strikes)
    ]

    trailing_to = int(np.floor(strike_idx[-1] + 0.6 * half_cycle + 0.5))
    tail = int(rng.integers(1, 3))
    T = trailing_to + tail + 1

    events = [GaitEvent(lead, EventKind.TO), GaitEvent(trailing_to, EventKind.TO)]
    events += [GaitEvent(int(i), k) for i, k in zip(strike_idx, strike_kinds)]
    for a, b in zip(strike_idx, strike_idx[1:]):
        to_idx = int(np.floor(a + 0.6 * (b - a) + 0.5))
        events.append(GaitEvent(to_idx, EventKind.TO))
    events.sort(key=lambda e: e.index)

    # Gait phase in strike units: advances by 1 per half cycle, linear
    # between (jittered) strikes and extrapolated at the edges, so the
    # sinusoids stay locked to the annotated events.
    u = piecewise_linear(strike_idx, np.arange(n_strikes, dtype=float), T)

    signal = traits["stride_amp"] * np.sin(np.pi * u[:, None] + traits["stride_phase"])
    signal += traits["step_amp"] * np.sin(2.0 * np.pi * u[:, None] + traits["step_phase"])

    # Strike impulses: the accelerometer channels always mark the timing,
    # while the foot-dependent sign lives on the gyroscope channels with a
    # strength that varies per strike. Weak-sided strikes make the phase
    # genuinely ambiguous locally and must be resolved from neighbours.
    # Strike impulses: the accelerometer channels carry a monotone decay that
    # marks the timing, while the foot-dependent sign lives on the gyroscope
    # channels as a ringing transient whose strength varies per strike. The
    # oscillating, sometimes weak side cue has to be integrated over the
    # shock and reconciled with neighbouring strikes.
    steps = np.arange(IMPULSE_SPAN)
    decay = np.exp(-steps / IMPULSE_TAU)
    ring = decay * np.cos(2.0 * np.pi * traits["ring_freq"] * steps)
    for idx, kind in zip(strike_idx, strike_kinds):
        span = min(IMPULSE_SPAN, T - idx)
        gains = traits["impulse_gain"]
        sign = 1.0 if kind is EventKind.LHS else -1.0
        side_strength = rng.uniform(0.3, 1.0)
        signal[idx : idx + span, :3] += decay[:span, None] * gains[:3]
        signal[idx : idx + span, SIDE_SIGNED_CHANNELS] += (
            sign * side_strength * ring[:span, None] * gains[SIDE_SIGNED_CHANNELS]
        )

    signal[:, :3] = signal[:, :3] @ traits["accel_rotation"].T
    signal[:, 3:] = signal[:, 3:] @ traits["gyro_rotation"].T
    signal *= SIGNAL_SCALE

    if cfg.noise_sigma > 0:
        signal += rng.normal(0.0, cfg.noise_sigma, size=signal.shape)

    return WalkRecord(
        subject_id=f"s{subject_index:02d}",
        side=subject_side(subject_index),
        modality="normal",
        imu=ImuSequence(samples=signal, rate_hz=cfg.rate_hz),
        events=tuple(events),
    )


def generate_dataset(cfg: SynthConfig) -> list[WalkRecord]:
    """All records, subject-major; deterministic and order-independent
    (each record is generated from its own derived rng)."""
    return [
        generate_record(cfg, s, r)
        for s in range(cfg.num_subjects)
        for r in range(cfg.records_per_subject)
    ]
