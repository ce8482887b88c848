"""Dataset partitioning: leave-one-subject-out folds and train/validation splits."""

import math

import numpy as np

from .records import WalkRecord


def loso_splits(records: list[WalkRecord]) -> list[tuple[str, list[WalkRecord], list[WalkRecord]]]:
    """One (held-out subject, test records, remaining records) triple per
    distinct subject, ordered by subject id."""
    subjects = sorted({r.subject_id for r in records})
    if len(subjects) < 2:
        raise ValueError(f"leave-one-subject-out needs >= 2 subjects, got {len(subjects)}")
    splits = []
    for subject in subjects:
        test = [r for r in records if r.subject_id == subject]
        rest = [r for r in records if r.subject_id != subject]
        splits.append((subject, test, rest))
    return splits


def train_val_split(
    records: list[WalkRecord], ratio: float = 0.9, seed: int = 0
) -> tuple[list[WalkRecord], list[WalkRecord]]:
    """Seeded shuffle, then the first ceil(ratio * N) records train and the
    rest (always at least one) validate."""
    if len(records) < 2:
        raise ValueError("need >= 2 records to split")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    order = np.random.default_rng(seed).permutation(len(records))
    n_train = min(math.ceil(ratio * len(records)), len(records) - 1)
    train = [records[i] for i in order[:n_train]]
    val = [records[i] for i in order[n_train:]]
    return train, val


def filter_by_side(records: list[WalkRecord], side: str) -> list[WalkRecord]:
    """Records whose sensor wear side matches, original order preserved."""
    return [r for r in records if r.side == side]
