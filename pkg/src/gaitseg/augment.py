"""Random time-stretch augmentation for walk records.

Stretching models a slower cadence at the same sampling rate: the signal is
resampled onto a longer grid and event indices are mapped along with it, so
a regression target re-encoded from the stretched events stays exact at its
anchors instead of accumulating interpolation error.
"""

from dataclasses import dataclass

import numpy as np

from .records import GaitEvent, ImuSequence, WalkRecord


@dataclass(frozen=True)
class AugmentConfig:
    factor_min: float = 1.0
    factor_max: float = 4.0
    copies_per_record: int = 4  # dataset grows to (1 + copies) x its size
    integer_factors: bool = False  # draw whole-number factors only
    seed: int = 0

    def __post_init__(self):
        if not 1.0 <= self.factor_min <= self.factor_max:
            raise ValueError("need 1 <= factor_min <= factor_max")
        if self.copies_per_record < 0:
            raise ValueError("copies_per_record must be >= 0")


def _round_half_up(x: float) -> int:
    """Deterministic rounding with .5 always going up (unlike built-in round)."""
    return int(np.floor(x + 0.5))


def stretch_record(record: WalkRecord, factor: float) -> WalkRecord:
    """Slow a record down by `factor` >= 1.

    The new length is round(T * factor); channels are linearly resampled and
    event indices follow the same index mapping (round-half-up). Metadata and
    the sampling rate are preserved.
    """
    if factor < 1.0:
        raise ValueError(f"stretch factor must be >= 1, got {factor}")
    samples = record.imu.samples
    T = samples.shape[0]
    new_T = _round_half_up(T * factor)

    old_grid = np.arange(T, dtype=float)
    positions = np.arange(new_T, dtype=float) * (T - 1) / (new_T - 1)
    stretched = np.empty((new_T, samples.shape[1]))
    for c in range(samples.shape[1]):
        stretched[:, c] = np.interp(positions, old_grid, samples[:, c])

    scale = (new_T - 1) / (T - 1)
    mapped = []
    seen = set()
    for event in record.events:
        idx = _round_half_up(event.index * scale)
        if idx in seen:  # cannot happen for factor >= 1; earlier event wins
            continue
        seen.add(idx)
        mapped.append(GaitEvent(index=idx, kind=event.kind))

    return WalkRecord(
        subject_id=record.subject_id,
        side=record.side,
        modality=record.modality,
        imu=ImuSequence(samples=stretched, rate_hz=record.imu.rate_hz),
        events=tuple(mapped),
    )


def augment_dataset(records: list[WalkRecord], cfg: AugmentConfig) -> list[WalkRecord]:
    """Originals plus `copies_per_record` stretched copies of each record.

    Stretch factors are drawn per (record, copy) from an rng derived from the
    seed and those indices, so the output is independent of iteration order.
    """
    out = list(records)
    for r, record in enumerate(records):
        for k in range(cfg.copies_per_record):
            rng = np.random.default_rng([cfg.seed, r, k])
            if cfg.integer_factors:
                factor = float(rng.integers(int(cfg.factor_min), int(cfg.factor_max) + 1))
            else:
                factor = float(rng.uniform(cfg.factor_min, cfg.factor_max))
            out.append(stretch_record(record, factor))
    return out
