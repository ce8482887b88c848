"""Gait cycle segmentation for short ear-worn IMU sequences.

The package implements a two-stage method: a bidirectional recurrent network
regresses a per-timestamp gait characteristic curve from the raw IMU signal,
and heel-strike events are restored from that curve by peak detection. It
ships the full training protocol (per-wear-side models, leave-one-subject-out
evaluation, time-stretch augmentation), the evaluation metrics, a synthetic
data generator with exact ground truth, and a command line interface.
"""

from .augment import AugmentConfig, augment_dataset, stretch_record
from .curve import (
    PeakConfig,
    detect_peaks,
    encode_gcc,
    events_to_phase_via_restoration,
    label_phases,
    restore_cycle,
)
from .estimator import CurveRegressor, GaitCycleSegmenter
from .metrics import (
    EvalReport,
    MatchConfig,
    SequenceEval,
    evaluate,
    false_peak_rate,
    match_events,
    phase_accuracy,
    timestamp_error,
)
from .network import (
    ModelConfig,
    TrainConfig,
    backward,
    bce_loss,
    forward,
    init_params,
    loss,
    mse_loss,
)
from .pipeline import report_to_json, run_ablation, run_loso
from .records import (
    EventKind,
    GaitEvent,
    GccCurve,
    ImuSequence,
    PhaseSequence,
    WalkRecord,
    read_records,
    validate_record,
    write_records,
)
from .splits import filter_by_side, loso_splits, train_val_split
from .synthetic import SynthConfig, generate_dataset, generate_record
from .training import (
    EpochStats,
    GradCheckReport,
    gradcheck,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = [
    "AugmentConfig",
    "CurveRegressor",
    "EpochStats",
    "EvalReport",
    "EventKind",
    "GaitCycleSegmenter",
    "GaitEvent",
    "GccCurve",
    "GradCheckReport",
    "ImuSequence",
    "MatchConfig",
    "ModelConfig",
    "PeakConfig",
    "PhaseSequence",
    "SequenceEval",
    "SynthConfig",
    "TrainConfig",
    "WalkRecord",
    "augment_dataset",
    "backward",
    "bce_loss",
    "detect_peaks",
    "encode_gcc",
    "evaluate",
    "events_to_phase_via_restoration",
    "false_peak_rate",
    "filter_by_side",
    "forward",
    "generate_dataset",
    "generate_record",
    "gradcheck",
    "init_params",
    "label_phases",
    "load_checkpoint",
    "loso_splits",
    "loss",
    "match_events",
    "mse_loss",
    "phase_accuracy",
    "read_records",
    "report_to_json",
    "restore_cycle",
    "run_ablation",
    "run_loso",
    "save_checkpoint",
    "stretch_record",
    "timestamp_error",
    "train",
    "train_val_split",
    "validate_record",
    "write_records",
]

__version__ = "0.1.0"
