"""Evaluation metrics: phase accuracy, false peak rate and timestamp error.

Accuracy is timestamp-weighted across the whole dataset (total correct
labels over total labels), the false peak rate is the fraction of sequences
whose restored heel-strike counts are wrong for either foot, and the
timestamp error averages |t_pred - t_truth| over matched heel strikes.
"""

from dataclasses import dataclass, field

import numpy as np

from .curve import PeakConfig, label_phases, restore_cycle
from .records import EventKind, GaitEvent, GccCurve, PhaseSequence, WalkRecord


@dataclass(frozen=True)
class MatchConfig:
    """A predicted heel strike counts as successfully detected when a
    same-side ground-truth strike lies within `window_s` seconds."""

    window_s: float = 0.25

    def __post_init__(self):
        if self.window_s <= 0:
            raise ValueError("window_s must be positive")


@dataclass(frozen=True)
class SequenceEval:
    """Per-record evaluation detail."""

    subject_id: str
    length: int
    n_correct: int
    truth_counts: tuple[int, int]  # (LHS, RHS)
    pred_counts: tuple[int, int]
    n_matched: int
    abs_error_s_sum: float

    @property
    def counts_match(self) -> bool:
        return self.truth_counts == self.pred_counts

    def to_dict(self) -> dict:
        return {
            "subject": self.subject_id,
            "length": self.length,
            "correct": self.n_correct,
            "truth_lhs": self.truth_counts[0],
            "truth_rhs": self.truth_counts[1],
            "pred_lhs": self.pred_counts[0],
            "pred_rhs": self.pred_counts[1],
            "matched": self.n_matched,
            "abs_error_s_sum": self.abs_error_s_sum,
        }


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    false_peak_rate: float | None
    timestamp_error_s: float | None  # None when nothing matched / not measured
    per_sequence: list[SequenceEval] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "false_peak_rate": self.false_peak_rate,
            "timestamp_error_s": self.timestamp_error_s,
            "per_sequence": [s.to_dict() for s in self.per_sequence],
        }


def phase_accuracy(pred: PhaseSequence, truth: PhaseSequence) -> float:
    """Fraction of timestamps with equal phase labels."""
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} vs {len(truth)}")
    return float(np.mean(pred.labels == truth.labels))


def match_events(
    pred_events: list[GaitEvent],
    truth_events: list[GaitEvent],
    rate_hz: float,
    cfg: MatchConfig | None = None,
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of same-side heel strikes within the window.

    Candidate pairs are taken closest first (ties broken by earlier truth
    index, then earlier predicted index); each event matches at most once.
    Returns (truth index, predicted index) pairs ordered by truth index.
    """
    cfg = cfg or MatchConfig()
    candidates = []
    for t, truth in enumerate(truth_events):
        if not truth.kind.is_heel_strike:
            continue
        for p, pred in enumerate(pred_events):
            if pred.kind is not truth.kind:
                continue
            dt = abs(pred.index - truth.index) / rate_hz
            if dt <= cfg.window_s:
                candidates.append((dt, truth.index, pred.index, t, p))

    matched_truth: set[int] = set()
    matched_pred: set[int] = set()
    pairs = []
    for dt, truth_idx, pred_idx, t, p in sorted(candidates):
        if t in matched_truth or p in matched_pred:
            continue
        matched_truth.add(t)
        matched_pred.add(p)
        pairs.append((truth_idx, pred_idx))
    return sorted(pairs)


def false_peak_rate(counts: list[tuple[tuple[int, int], tuple[int, int]]]) -> float:
    """Fraction of sequences whose (LHS, RHS) heel-strike counts differ
    between prediction and truth; input is (pred_counts, truth_counts) pairs."""
    if not counts:
        raise ValueError("no sequences to evaluate")
    wrong = sum(1 for pred, truth in counts if pred != truth)
    return wrong / len(counts)


def timestamp_error(matches: list[tuple[int, int]], rate_hz: float) -> float | None:
    """Mean |t_pred - t_truth| in seconds over matched pairs; None without matches."""
    if not matches:
        return None
    return float(np.mean([abs(p - t) / rate_hz for t, p in matches]))


def _strike_counts(events) -> tuple[int, int]:
    kinds = [e.kind for e in events]
    return kinds.count(EventKind.LHS), kinds.count(EventKind.RHS)


def evaluate(
    records: list[WalkRecord],
    curves: list[GccCurve],
    peak_cfg: PeakConfig | None = None,
    match_cfg: MatchConfig | None = None,
) -> EvalReport:
    """Score predicted curves against the records' event annotations.

    Heel strikes are restored from each curve and turned back into phase
    labels; a record whose restoration yields no heel strike contributes zero
    correct timestamps (it makes no phase claim) and a count mismatch.
    """
    if len(records) != len(curves):
        raise ValueError(f"{len(records)} records but {len(curves)} curves")
    peak_cfg = peak_cfg or PeakConfig()
    match_cfg = match_cfg or MatchConfig()

    details = []
    total_correct = 0
    total_timestamps = 0
    total_matched = 0
    total_error_s = 0.0
    for record, curve in zip(records, curves):
        T = len(record.imu)
        if len(curve) != T:
            raise ValueError(
                f"curve length {len(curve)} does not match record length {T}"
            )
        truth_phase = label_phases(record.events, T)
        restored = restore_cycle(curve, peak_cfg)
        if any(e.kind.is_heel_strike for e in restored):
            pred_phase = label_phases(restored, T)
            n_correct = int(np.sum(pred_phase.labels == truth_phase.labels))
        else:
            n_correct = 0

        truth_strikes = [e for e in record.events if e.kind.is_heel_strike]
        pairs = match_events(restored, truth_strikes, record.imu.rate_hz, match_cfg)
        error_sum = float(sum(abs(p - t) for t, p in pairs)) / record.imu.rate_hz

        detail = SequenceEval(
            subject_id=record.subject_id,
            length=T,
            n_correct=n_correct,
            truth_counts=_strike_counts(truth_strikes),
            pred_counts=_strike_counts(restored),
            n_matched=len(pairs),
            abs_error_s_sum=error_sum,
        )
        details.append(detail)
        total_correct += n_correct
        total_timestamps += T
        total_matched += len(pairs)
        total_error_s += error_sum

    fpr = false_peak_rate([(d.pred_counts, d.truth_counts) for d in details])
    te = total_error_s / total_matched if total_matched else None
    return EvalReport(
        accuracy=total_correct / total_timestamps,
        false_peak_rate=fpr,
        timestamp_error_s=te,
        per_sequence=details,
    )
