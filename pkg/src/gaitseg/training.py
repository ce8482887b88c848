"""Training loop (one sequence per optimizer step), optimizers, the finite
difference gradient check and checkpoint serialization."""

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import (
    ModelConfig,
    TrainConfig,
    backward,
    flatten_params,
    forward,
    init_params,
    loss,
    param_keys,
    param_shape,
    unflatten_params,
)

CHECKPOINT_FORMAT = "gaitseg-checkpoint-v1"


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float


class Adam:
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    def __init__(self, params: dict, lr: float):
        self.lr = lr
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


class Sgd:
    def __init__(self, params: dict, lr: float):
        self.lr = lr

    def step(self, params: dict, grads: dict) -> None:
        for k, g in grads.items():
            params[k] -= self.lr * g


def clip_gradients(grads: dict, max_norm: float) -> float:
    """Scale gradients in place so their global norm is at most max_norm;
    returns the pre-clip norm."""
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def train(
    cfg: ModelConfig,
    params: dict,
    train_xy: list[tuple[np.ndarray, np.ndarray]],
    val_xy: list[tuple[np.ndarray, np.ndarray]],
    tcfg: TrainConfig,
) -> tuple[dict, list[EpochStats]]:
    """Fit `params` on (input, target) pairs, one sequence per step.

    Sequences are visited in a freshly shuffled (seeded) order each epoch.
    The parameters of the epoch with the lowest mean validation loss are
    returned; training stops early once `patience` epochs pass without
    improvement. The log carries per-epoch train and validation losses.
    """
    if not train_xy:
        raise ValueError("training set is empty")
    if not val_xy:
        raise ValueError("validation set is empty")

    rng = np.random.default_rng(tcfg.seed)
    opt = (Adam if tcfg.optimizer == "adam" else Sgd)(params, tcfg.learning_rate)

    best = copy.deepcopy(params)
    best_val = np.inf
    since_best = 0
    log = []
    for epoch in range(1, tcfg.epochs + 1):
        total = 0.0
        for i in rng.permutation(len(train_xy)):
            x, y = train_xy[i]
            out, cache = forward(cfg, params, x)
            step_loss = loss(out, y, cfg.head)
            if not np.isfinite(step_loss):
                raise ArithmeticError(f"non-finite training loss at epoch {epoch}")
            total += step_loss
            grads = backward(cfg, params, cache, y)
            clip_gradients(grads, tcfg.clip_norm)
            opt.step(params, grads)

        val_total = 0.0
        for x, y in val_xy:
            out, _ = forward(cfg, params, x)
            val_total += loss(out, y, cfg.head)
        val_loss = val_total / len(val_xy)
        if not np.isfinite(val_loss):
            raise ArithmeticError(f"non-finite validation loss at epoch {epoch}")
        log.append(EpochStats(epoch, total / len(train_xy), val_loss))

        if val_loss < best_val:
            best_val = val_loss
            best = copy.deepcopy(params)
            since_best = 0
        else:
            since_best += 1
            if since_best > tcfg.patience:
                break
    return best, log


@dataclass(frozen=True)
class GradCheckReport:
    max_rel_err: float
    passed: bool
    worst_param: str


def gradcheck(
    cfg: ModelConfig,
    T: int = 12,
    tolerance: float = 1e-4,
    step: float = 1e-5,
    grad_fn=backward,
) -> GradCheckReport:
    """Compare analytic gradients against central finite differences on a
    random input/target pair. `grad_fn` exists so tests can inject a broken
    gradient and confirm the check catches it."""
    rng = np.random.default_rng(cfg.seed)
    x = rng.normal(0.0, 1.0, size=(T, cfg.input_dim))
    if cfg.head == "regression":
        target = rng.uniform(-0.9, 0.9, size=T)
    else:
        target = rng.integers(0, 2, size=T).astype(float)

    params = init_params(cfg)
    out, cache = forward(cfg, params, x)
    analytic = flatten_params(cfg, grad_fn(cfg, params, cache, target))

    flat = flatten_params(cfg, params)
    numeric = np.empty_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi, _ = forward(cfg, unflatten_params(cfg, flat), x)
        flat[i] = orig - step
        lo, _ = forward(cfg, unflatten_params(cfg, flat), x)
        flat[i] = orig
        numeric[i] = (loss(hi, target, cfg.head) - loss(lo, target, cfg.head)) / (2 * step)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    rel = np.abs(analytic - numeric) / denom
    worst = int(np.argmax(rel))
    pos = 0
    worst_key = param_keys(cfg)[-1]
    for key in param_keys(cfg):
        size = params[key].size
        if pos <= worst < pos + size:
            worst_key = key
            break
        pos += size
    return GradCheckReport(float(rel[worst]), bool(rel[worst] <= tolerance), worst_key)


def save_checkpoint(path, cfg: ModelConfig, params: dict, meta: dict | None = None) -> None:
    """Write config plus flat parameter arrays as deterministic JSON."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "model": {
            "input_dim": cfg.input_dim,
            "hidden_dim": cfg.hidden_dim,
            "num_layers": cfg.num_layers,
            "fc_hidden": cfg.fc_hidden,
            "head": cfg.head,
            "seed": cfg.seed,
        },
        "params": {k: params[k].ravel().tolist() for k in param_keys(cfg)},
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_checkpoint(path) -> tuple[ModelConfig, dict, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format: {payload.get('format')!r}")
    cfg = ModelConfig(**payload["model"])
    params = {
        key: np.asarray(payload["params"][key], dtype=float).reshape(param_shape(cfg, key))
        for key in param_keys(cfg)
    }
    return cfg, params, payload.get("meta", {})
