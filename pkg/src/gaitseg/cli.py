"""Command line interface.

Subcommands: synth, train, eval, segment, gradcheck, encode-gcc. Flags can
also come from a JSON config file (--config) organized in sections
(model/train/augment/peaks/match/synth); explicit flags win over the file,
the file wins over built-in defaults. Exit codes: 0 success, 1 usage or
configuration error, 2 runtime or data error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .augment import AugmentConfig, augment_dataset
from .curve import PeakConfig, encode_gcc, label_phases, restore_cycle
from .metrics import MatchConfig, evaluate
from .network import ModelConfig, TrainConfig, forward, init_params
from .pipeline import report_to_json, run_ablation, run_loso
from .records import GccCurve, read_records, write_records
from .splits import filter_by_side, train_val_split
from .synthetic import SynthConfig, generate_dataset
from .training import gradcheck, load_checkpoint, save_checkpoint, train


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must contain a JSON object")
    return cfg


class _Settings:
    """Merge precedence: explicit CLI flag > config-file section > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = _load_config(getattr(args, "config", None))

    def get(self, section: str, key: str, default, cast=None):
        value = getattr(self.args, key, None)
        if value is None:
            value = self.file.get(section, {}).get(key, default)
        return cast(value) if cast is not None and value is not None else value

    def build(self, cls, section: str, **overrides):
        fields = {name: overrides[name] for name in overrides}
        for name, default in _DEFAULTS[section].items():
            if name not in fields:
                fields[name] = self.get(section, name, default)
        try:
            return cls(**fields)
        except ValueError as exc:
            raise UsageError(f"invalid {section} configuration: {exc}") from None


_DEFAULTS = {
    "model": {
        "hidden_dim": 32,
        "num_layers": 2,
        "fc_hidden": 64,
        "head": "regression",
    },
    "train": {
        "learning_rate": 0.0008,
        "epochs": 60,
        "patience": 10,
        "optimizer": "adam",
        "clip_norm": 5.0,
    },
    "augment": {
        "factor_min": 1.0,
        "factor_max": 4.0,
        "copies_per_record": 4,
        "integer_factors": False,
    },
    "peaks": {
        "threshold": 0.5,
        "min_separation": 10,
        "prominence": 0.5,
        "allow_boundary_peaks": True,
    },
    "match": {"window_s": 0.25},
    "synth": {
        "num_subjects": 12,
        "records_per_subject": 40,
        "cycles_min": 1,
        "cycles_max": 3,
        "cadence_min": 0.7,
        "cadence_max": 1.2,
        "noise_sigma": 0.05,
        "rate_hz": 30.0,
    },
}


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file with section defaults")
    p.add_argument("--seed", type=int, default=None, help="base random seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="parallel fold workers")
    p.add_argument("-o", "--out", help="output file path")


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int, help="per-direction state size (default 32)")
    p.add_argument("--num-layers", dest="num_layers", type=int, help="stacked recurrent layers (default 2)")
    p.add_argument("--fc-hidden", dest="fc_hidden", type=int, help="head hidden width (default 64)")
    p.add_argument("--head", choices=["regression", "classification"],
                   help="curve regression or direct phase baseline (default regression)")


def _train_flags(p: argparse.ArgumentParser):
    p.add_argument("--lr", dest="learning_rate", type=float, help="learning rate (default 0.0008)")
    p.add_argument("--epochs", type=int, help="max training epochs (default 60)")
    p.add_argument("--patience", type=int, help="early-stop patience in epochs (default 10)")
    p.add_argument("--optimizer", choices=["adam", "sgd"], help="optimizer (default adam)")
    p.add_argument("--clip-norm", dest="clip_norm", type=float,
                   help="global gradient norm limit, 0 disables (default 5.0)")


def _augment_flags(p: argparse.ArgumentParser):
    p.add_argument("--factor-min", dest="factor_min", type=float, help="min stretch factor (default 1.0)")
    p.add_argument("--factor-max", dest="factor_max", type=float, help="max stretch factor (default 4.0)")
    p.add_argument("--copies", dest="copies_per_record", type=int,
                   help="stretched copies per record (default 4)")
    p.add_argument("--integer-factors", dest="integer_factors", action="store_const", const=True,
                   help="draw whole-number stretch factors (default off)")


def _peak_flags(p: argparse.ArgumentParser):
    p.add_argument("--peak-threshold", dest="threshold", type=float,
                   help="min |value| for a peak (default 0.5)")
    p.add_argument("--min-separation", dest="min_separation", type=int,
                   help="min samples between peaks (default 10)")
    p.add_argument("--prominence", type=float, help="min peak prominence (default 0.5)")
    p.add_argument("--no-boundary-peaks", dest="allow_boundary_peaks", action="store_const", const=False,
                   help="ignore sequence-endpoint peaks (default: allowed)")
    p.add_argument("--match-window", dest="window_s", type=float,
                   help="heel-strike match window in seconds (default 0.25)")


def build_parser() -> _Parser:
    parser = _Parser(prog="gaitseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic JSONL dataset")
    _common_flags(p)
    p.add_argument("--subjects", dest="num_subjects", type=int)
    p.add_argument("--records", dest="records_per_subject", type=int)
    p.add_argument("--cycles-min", dest="cycles_min", type=int)
    p.add_argument("--cycles-max", dest="cycles_max", type=int)
    p.add_argument("--cadence-min", dest="cadence_min", type=float)
    p.add_argument("--cadence-max", dest="cadence_max", type=float)
    p.add_argument("--noise", dest="noise_sigma", type=float)
    p.add_argument("--rate", dest="rate_hz", type=float)

    p = sub.add_parser("train", help="train one model for one wear side")
    _common_flags(p)
    p.add_argument("--data", required=True, help="JSONL dataset")
    p.add_argument("--side", required=True, choices=["L", "R"])
    p.add_argument("--val-ratio", type=float, default=0.9)
    p.add_argument("--no-augment", action="store_true")
    _model_flags(p)
    _train_flags(p)
    _augment_flags(p)

    p = sub.add_parser("eval", help="evaluate a model, a LOSO run, or the oracle")
    _common_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", help="checkpoint file (single-model evaluation)")
    p.add_argument("--side", choices=["L", "R"])
    p.add_argument("--loso", action="store_true", help="full leave-one-subject-out run")
    p.add_argument("--ablation", action="store_true", help="paired run against the direct-phase baseline")
    p.add_argument("--oracle", action="store_true", help="score encoded ground-truth curves")
    p.add_argument("--checkpoint-dir", help="write per-fold checkpoints here")
    _model_flags(p)
    _train_flags(p)
    _augment_flags(p)
    _peak_flags(p)

    p = sub.add_parser("segment", help="segment one record with a trained model")
    _common_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--index", type=int, default=0, help="record index in the dataset")
    p.add_argument("--emit-gcc", action="store_true", help="include predicted curve values")
    _peak_flags(p)

    p = sub.add_parser("gradcheck", help="finite-difference check of the analytic gradients")
    _common_flags(p)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int, default=8)
    p.add_argument("--num-layers", dest="num_layers", type=int, default=2)
    p.add_argument("--input-dim", dest="input_dim", type=int, default=6)
    p.add_argument("--fc-hidden", dest="fc_hidden", type=int, default=16)
    p.add_argument("--t", dest="t_steps", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--head", choices=["regression", "classification"], default="regression")

    p = sub.add_parser("encode-gcc", help="encode curves for an annotated dataset")
    _common_flags(p)
    p.add_argument("--data", required=True)

    return parser


def _seed(args) -> int:
    return args.seed if args.seed is not None else 0


def _write_or_print(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _metric_row(label: str, metrics: dict) -> str:
    acc = f"{100.0 * metrics['accuracy']:.2f}"
    fpr = metrics.get("false_peak_rate")
    te = metrics.get("timestamp_error_s")
    fpr_s = "-" if fpr is None else f"{100.0 * fpr:.2f}"
    te_s = "-" if te is None else f"{te:.4f}"
    return f"{label:<14} {acc:>12} {fpr_s:>20} {te_s:>20}"


_METRIC_HEADER = f"{'':<14} {'Accuracy (%)':>12} {'False Peak Rate (%)':>20} {'Timestamp Error (s)':>20}"


def cmd_synth(args, settings: _Settings) -> int:
    if args.out is None:
        raise UsageError("synth requires -o/--out")
    cfg = settings.build(SynthConfig, "synth", seed=_seed(args))
    records = generate_dataset(cfg)
    write_records(records, args.out)
    print(f"wrote {len(records)} records ({cfg.num_subjects} subjects x "
          f"{cfg.records_per_subject}) to {args.out}")
    return 0


def _prepare_xy(records, head):
    xs = [r.imu.samples for r in records]
    if head == "regression":
        ys = [encode_gcc(r.events, len(r.imu)).values for r in records]
    else:
        ys = [label_phases(r.events, len(r.imu)).labels.astype(float) for r in records]
    return list(zip(xs, ys))


def cmd_train(args, settings: _Settings) -> int:
    if args.out is None:
        raise UsageError("train requires -o/--out for the checkpoint")
    records = filter_by_side(read_records(args.data), args.side)
    if not records:
        raise ValueError(f"no records with side {args.side} in {args.data}")
    seed = _seed(args)
    train_cfg = settings.build(TrainConfig, "train", seed=seed)
    model_cfg = settings.build(
        ModelConfig, "model", input_dim=records[0].imu.channels, seed=seed
    )
    train_recs, val_recs = train_val_split(records, args.val_ratio, seed)
    if not args.no_augment:
        train_recs = augment_dataset(train_recs, settings.build(AugmentConfig, "augment", seed=seed))

    params, log = train(
        model_cfg, init_params(model_cfg),
        _prepare_xy(train_recs, model_cfg.head), _prepare_xy(val_recs, model_cfg.head),
        train_cfg,
    )
    best = min(s.val_loss for s in log)
    save_checkpoint(args.out, model_cfg, params, meta={"side": args.side})
    print(f"trained on {len(train_recs)} sequences ({len(val_recs)} validation), "
          f"{len(log)} epochs, best validation loss {best:.6f}")
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_eval(args, settings: _Settings) -> int:
    records = read_records(args.data)
    seed = _seed(args)
    peak_cfg = settings.build(PeakConfig, "peaks")
    match_cfg = settings.build(MatchConfig, "match")

    if args.loso or args.ablation:
        model_cfg = settings.build(ModelConfig, "model", seed=seed)
        train_cfg = settings.build(TrainConfig, "train", seed=seed)
        augment_cfg = settings.build(AugmentConfig, "augment", seed=seed)
        if args.ablation:
            result = run_ablation(
                records, model_cfg, train_cfg, augment_cfg, peak_cfg, match_cfg,
                jobs=args.jobs,
            )
            print(_METRIC_HEADER)
            for side in sorted(result["gccrr"]["sides"]):
                print(_metric_row(f"{side} full", result["gccrr"]["sides"][side]["aggregate"]))
                if side in result["baseline"]["sides"]:
                    print(_metric_row(f"{side} baseline", result["baseline"]["sides"][side]["aggregate"]))
                    print(f"{side} accuracy delta: {100.0 * result['accuracy_delta'][side]:+.2f}%")
        else:
            result = run_loso(
                records, model_cfg, train_cfg, augment_cfg, peak_cfg, match_cfg,
                jobs=args.jobs, oracle=args.oracle, checkpoint_dir=args.checkpoint_dir,
            )
            print(_METRIC_HEADER)
            for side in sorted(result["sides"]):
                for fold in result["sides"][side]["folds"]:
                    print(_metric_row(f"{side}/{fold['held_out']}", fold["metrics"]))
                print(_metric_row(f"{side} aggregate", result["sides"][side]["aggregate"]))
            for w in result["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
        if args.out:
            Path(args.out).write_text(report_to_json(result) + "\n", encoding="utf-8")
            print(f"report written to {args.out}")
        return 0

    if args.oracle:
        curves = [encode_gcc(r.events, len(r.imu)) for r in records]
        report = evaluate(records, curves, peak_cfg, match_cfg)
    elif args.model:
        model_cfg, params, meta = load_checkpoint(args.model)
        side = args.side or meta.get("side")
        if side:
            records = filter_by_side(records, side)
        if not records:
            raise ValueError("no records to evaluate after side filtering")
        curves = [GccCurve(forward(model_cfg, params, r.imu.samples)[0]) for r in records]
        report = evaluate(records, curves, peak_cfg, match_cfg)
    else:
        raise UsageError("eval needs one of --model, --loso, --ablation or --oracle")

    print(_METRIC_HEADER)
    print(_metric_row("dataset", report.to_dict()))
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(f"report written to {args.out}")
    return 0


def cmd_segment(args, settings: _Settings) -> int:
    records = read_records(args.data)
    if not 0 <= args.index < len(records):
        raise UsageError(f"--index {args.index} out of range for {len(records)} records")
    record = records[args.index]
    model_cfg, params, _meta = load_checkpoint(args.model)
    peak_cfg = settings.build(PeakConfig, "peaks")

    curve = forward(model_cfg, params, record.imu.samples)[0]
    events = restore_cycle(GccCurve(curve), peak_cfg)
    if not events:
        print("error: no heel strikes restored", file=sys.stderr)
        return 2
    phases = label_phases(events, len(record.imu))
    payload = {
        "subject": record.subject_id,
        "side": record.side,
        "events": [{"i": e.index, "k": e.kind.value} for e in events],
        "phases": phases.labels.tolist(),
    }
    if args.emit_gcc:
        payload["gcc"] = [float(v) for v in curve]
    _write_or_print(json.dumps(payload, sort_keys=True), args.out)
    return 0


def cmd_gradcheck(args, settings: _Settings) -> int:
    cfg = ModelConfig(
        input_dim=args.input_dim,
        hidden_dim=args.hidden_dim,
        num_layers=args.num_layers,
        fc_hidden=args.fc_hidden,
        head=args.head,
        seed=_seed(args),
    )
    report = gradcheck(cfg, T=args.t_steps, tolerance=args.tol)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict} max_rel_err={report.max_rel_err:.3e} tol={args.tol:.1e} "
          f"worst={report.worst_param}")
    return 0 if report.passed else 2


def cmd_encode_gcc(args, settings: _Settings) -> int:
    records = read_records(args.data)
    lines = []
    for record in records:
        curve = encode_gcc(record.events, len(record.imu))
        lines.append(json.dumps(
            {"subject": record.subject_id, "gcc": [float(v) for v in curve.values]},
            sort_keys=True,
        ))
    _write_or_print("\n".join(lines), args.out)
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "segment": cmd_segment,
    "gradcheck": cmd_gradcheck,
    "encode-gcc": cmd_encode_gcc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _Settings(args)
        return _COMMANDS[args.command](args, settings)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
