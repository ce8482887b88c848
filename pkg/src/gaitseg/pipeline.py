"""End-to-end orchestration: per-side training, leave-one-subject-out
evaluation, and the curve-regression vs direct-phase ablation.

Reports are plain dicts with sorted-key JSON in mind: two runs with the same
configuration and seeds serialize byte-identically. Every derived seed
depends only on (base seed, side, fold), never on the model head, so the two
ablation arms see identical folds and identical augmented training sets.
"""

import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .augment import AugmentConfig, augment_dataset
from .curve import PeakConfig, encode_gcc, label_phases
from .metrics import MatchConfig, evaluate
from .network import ModelConfig, TrainConfig, forward, init_params
from .records import GccCurve, PhaseSequence, WalkRecord
from .splits import filter_by_side, loso_splits, train_val_split
from .training import save_checkpoint, train

SIDES = ("L", "R")
VALIDATION_RATIO = 0.9  # train share of the per-fold 9:1 split


def _fold_seeds(base_seed: int, side: str, fold_index: int) -> dict[str, int]:
    ss = np.random.SeedSequence([base_seed, SIDES.index(side), fold_index])
    children = ss.spawn(4)
    names = ("split", "augment", "shuffle", "init")
    return {n: int(c.generate_state(1)[0]) for n, c in zip(names, children)}


def _signature(records: list[WalkRecord]) -> int:
    """Cheap order-sensitive fingerprint of a record list (subjects and
    lengths); used to assert both ablation arms train on the same data."""
    text = ";".join(f"{r.subject_id}:{len(r.imu)}" for r in records)
    return zlib.crc32(text.encode())


def _config_dict(model_cfg, train_cfg, augment_cfg, peak_cfg, match_cfg, oracle) -> dict:
    return {
        "model": {
            "hidden_dim": model_cfg.hidden_dim,
            "num_layers": model_cfg.num_layers,
            "fc_hidden": model_cfg.fc_hidden,
            "head": model_cfg.head,
        },
        "train": {
            "learning_rate": train_cfg.learning_rate,
            "epochs": train_cfg.epochs,
            "patience": train_cfg.patience,
            "optimizer": train_cfg.optimizer,
            "clip_norm": train_cfg.clip_norm,
            "seed": train_cfg.seed,
        },
        "augment": {
            "factor_min": augment_cfg.factor_min,
            "factor_max": augment_cfg.factor_max,
            "copies_per_record": augment_cfg.copies_per_record,
            "integer_factors": augment_cfg.integer_factors,
        },
        "peaks": {
            "threshold": peak_cfg.threshold,
            "min_separation": peak_cfg.min_separation,
            "prominence": peak_cfg.prominence,
            "allow_boundary_peaks": peak_cfg.allow_boundary_peaks,
        },
        "match": {"window_s": match_cfg.window_s},
        "oracle": oracle,
    }


def _run_fold(task) -> dict:
    (side, fold_index, held_out, test, rest, model_cfg, train_cfg, augment_cfg,
     peak_cfg, match_cfg, oracle, checkpoint_dir) = task

    seeds = _fold_seeds(train_cfg.seed, side, fold_index)
    train_recs, val_recs = train_val_split(rest, VALIDATION_RATIO, seeds["split"])
    aug_train = augment_dataset(train_recs, replace(augment_cfg, seed=seeds["augment"]))

    # Test-set leakage audit: no training or validation record, augmented or
    # not, may come from the held-out subject.
    fold_subjects = {r.subject_id for r in aug_train} | {r.subject_id for r in val_recs}
    if held_out in fold_subjects:
        raise AssertionError(f"held-out subject {held_out} leaked into fold training data")

    input_dim = test[0].imu.channels
    model_cfg = replace(model_cfg, input_dim=input_dim, seed=seeds["init"])
    fold_train_cfg = replace(train_cfg, seed=seeds["shuffle"])
    regression = model_cfg.head == "regression"

    def to_xy(recs):
        out = []
        for r in recs:
            if regression:
                target = encode_gcc(r.events, len(r.imu)).values
            else:
                target = label_phases(r.events, len(r.imu)).labels.astype(float)
            out.append((r.imu.samples, target))
        return out

    fold = {
        "side": side,
        "held_out": held_out,
        "n_test": len(test),
        "n_train": len(train_recs),
        "n_train_augmented": len(aug_train),
        "n_val": len(val_recs),
        "train_signature": _signature(aug_train),
    }

    if oracle:
        params = None
        fold["epochs_run"] = 0
    else:
        params, log = train(model_cfg, init_params(model_cfg), to_xy(aug_train), to_xy(val_recs), fold_train_cfg)
        fold["epochs_run"] = len(log)
        fold["best_val_loss"] = min(s.val_loss for s in log)
        if checkpoint_dir is not None:
            path = Path(checkpoint_dir) / f"{side}_{held_out}.ckpt.json"
            save_checkpoint(path, model_cfg, params, meta={"side": side, "held_out": held_out})

    if regression:
        if oracle:
            curves = [encode_gcc(r.events, len(r.imu)) for r in test]
        else:
            curves = [GccCurve(forward(model_cfg, params, r.imu.samples)[0]) for r in test]
        report = evaluate(test, curves, peak_cfg, match_cfg)
        fold["metrics"] = {
            "accuracy": report.accuracy,
            "false_peak_rate": report.false_peak_rate,
            "timestamp_error_s": report.timestamp_error_s,
            "total_timestamps": sum(d.length for d in report.per_sequence),
            "total_correct": sum(d.n_correct for d in report.per_sequence),
            "n_sequences": len(report.per_sequence),
            "n_count_mismatches": sum(1 for d in report.per_sequence if not d.counts_match),
            "n_matched": sum(d.n_matched for d in report.per_sequence),
            "abs_error_s_sum": sum(d.abs_error_s_sum for d in report.per_sequence),
        }
    else:
        # Direct-phase baseline: threshold the per-timestamp probability at
        # 0.5; there is no restoration step, so only accuracy is reported.
        total = correct = 0
        for r in test:
            if oracle:
                pred = label_phases(r.events, len(r.imu))
            else:
                probs = forward(model_cfg, params, r.imu.samples)[0]
                pred = PhaseSequence((probs >= 0.5).astype(int))
            truth = label_phases(r.events, len(r.imu))
            correct += int(np.sum(pred.labels == truth.labels))
            total += len(truth)
        fold["metrics"] = {
            "accuracy": correct / total,
            "false_peak_rate": None,
            "timestamp_error_s": None,
            "total_timestamps": total,
            "total_correct": correct,
            "n_sequences": len(test),
        }
    return fold


def _aggregate(folds: list[dict]) -> dict:
    """Side-level aggregation: timestamp-weighted accuracy, sequence-weighted
    false peak rate, event-weighted timestamp error."""
    total_t = sum(f["metrics"]["total_timestamps"] for f in folds)
    correct = sum(f["metrics"]["total_correct"] for f in folds)
    agg = {
        "accuracy": correct / total_t,
        "false_peak_rate": None,
        "timestamp_error_s": None,
        "n_folds": len(folds),
        "n_sequences": sum(f["metrics"]["n_sequences"] for f in folds),
    }
    if folds and folds[0]["metrics"]["false_peak_rate"] is not None:
        mismatches = sum(f["metrics"]["n_count_mismatches"] for f in folds)
        agg["false_peak_rate"] = mismatches / agg["n_sequences"]
        matched = sum(f["metrics"]["n_matched"] for f in folds)
        if matched:
            agg["timestamp_error_s"] = (
                sum(f["metrics"]["abs_error_s_sum"] for f in folds) / matched
            )
    return agg


def run_loso(
    records: list[WalkRecord],
    model_cfg: ModelConfig | None = None,
    train_cfg: TrainConfig | None = None,
    augment_cfg: AugmentConfig | None = None,
    peak_cfg: PeakConfig | None = None,
    match_cfg: MatchConfig | None = None,
    *,
    jobs: int = 1,
    oracle: bool = False,
    checkpoint_dir=None,
) -> dict:
    """Leave-one-subject-out evaluation with one model per wear side.

    For every side with at least two subjects, each subject is held out in
    turn; the remainder is split 9:1 into training and validation, only the
    training part is augmented, and the held-out subject is scored. With
    `oracle=True` predictions are replaced by the encoded ground truth
    (pipeline self-check; no training happens). Folds run in `jobs` parallel
    processes; results and seeds do not depend on `jobs`.
    """
    model_cfg = model_cfg or ModelConfig()
    train_cfg = train_cfg or TrainConfig()
    augment_cfg = augment_cfg or AugmentConfig()
    peak_cfg = peak_cfg or PeakConfig()
    match_cfg = match_cfg or MatchConfig()

    if checkpoint_dir is not None:
        Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)

    warnings = []
    tasks = []
    side_subjects = {}
    for side in SIDES:
        group = filter_by_side(records, side)
        subjects = sorted({r.subject_id for r in group})
        side_subjects[side] = subjects
        if len(subjects) < 2:
            warnings.append(
                f"side {side}: {len(subjects)} subject(s), need >= 2 for LOSO; skipped"
            )
            continue
        for fold_index, (held_out, test, rest) in enumerate(loso_splits(group)):
            tasks.append(
                (side, fold_index, held_out, test, rest, model_cfg, train_cfg,
                 augment_cfg, peak_cfg, match_cfg, oracle, checkpoint_dir)
            )

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            folds = list(pool.map(_run_fold, tasks))
    else:
        folds = [_run_fold(t) for t in tasks]

    sides = {}
    for side in SIDES:
        side_folds = [f for f in folds if f["side"] == side]
        if not side_folds:
            continue
        sides[side] = {
            "subjects": side_subjects[side],
            "folds": side_folds,
            "aggregate": _aggregate(side_folds),
        }

    return {
        "dataset": {
            "n_records": len(records),
            "per_side": {s: len(filter_by_side(records, s)) for s in SIDES},
        },
        "config": _config_dict(model_cfg, train_cfg, augment_cfg, peak_cfg, match_cfg, oracle),
        "sides": sides,
        "warnings": warnings,
    }


def run_ablation(
    records: list[WalkRecord],
    model_cfg: ModelConfig | None = None,
    train_cfg: TrainConfig | None = None,
    augment_cfg: AugmentConfig | None = None,
    peak_cfg: PeakConfig | None = None,
    match_cfg: MatchConfig | None = None,
    *,
    jobs: int = 1,
) -> dict:
    """Paired runs with identical folds and seeds: curve regression plus
    restoration versus a direct-phase classification baseline."""
    model_cfg = model_cfg or ModelConfig()
    full = run_loso(
        records, replace(model_cfg, head="regression"), train_cfg, augment_cfg,
        peak_cfg, match_cfg, jobs=jobs,
    )
    baseline = run_loso(
        records, replace(model_cfg, head="classification"), train_cfg, augment_cfg,
        peak_cfg, match_cfg, jobs=jobs,
    )
    delta = {}
    for side in full["sides"]:
        if side in baseline["sides"]:
            delta[side] = (
                full["sides"][side]["aggregate"]["accuracy"]
                - baseline["sides"][side]["aggregate"]["accuracy"]
            )
    return {"gccrr": full, "baseline": baseline, "accuracy_delta": delta}


def report_to_json(report: dict) -> str:
    """Canonical serialization; byte-identical for identical runs."""
    return json.dumps(report, sort_keys=True, indent=2)
