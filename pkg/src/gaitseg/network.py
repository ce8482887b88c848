"""Stacked bidirectional LSTM regressor with a two-layer FC head, in numpy.

Forward, analytic backward (backpropagation through time) and parameter
initialisation live here; the training loop and optimizers are in
`training.py`. Everything is float64 and deterministic given the seeds.

Parameter layout
----------------
Per layer `l` and direction `d` ("f" forward in time, "b" backward):
    l{l}_{d}_W : (4H, D_in)  input weights
    l{l}_{d}_U : (4H, H)     recurrent weights
    l{l}_{d}_b : (4H,)       bias
plus the head:
    fc1_W : (F, 2H), fc1_b : (F,), fc2_W : (1, F), fc2_b : (1,)
The 4H gate axis is ordered [input, forget, output, candidate]. Layer l > 1
consumes the concatenated forward/backward hidden states of layer l - 1
(D_in = 2H); layer 1 consumes the raw input (D_in = C).

Internally the two directions of a layer are stepped together as one LSTM
cell of width 2H: direction b walks the reversed sequence, so step s handles
time s forward and time T-1-s backward. The recurrent matrices merge into a
block matrix so each step costs a single matvec, and the fused gate axis is
grouped by gate type so every elementwise update touches one contiguous
slice. `_fuse_*`/`_split_*` translate between the stored per-direction
parameters and this packed form.
"""

from dataclasses import dataclass

import numpy as np

HEADS = ("regression", "classification")
PROB_CLIP = 1e-7  # probability clamp inside the cross-entropy


@dataclass(frozen=True)
class ModelConfig:
    input_dim: int = 6
    hidden_dim: int = 32  # per direction; 500 reproduces the full-scale setup
    num_layers: int = 2  # 5 reproduces the full-scale setup
    fc_hidden: int = 64
    head: str = "regression"
    seed: int = 0

    def __post_init__(self):
        if min(self.input_dim, self.hidden_dim, self.num_layers, self.fc_hidden) < 1:
            raise ValueError("all model dimensions must be >= 1")
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}, got {self.head!r}")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.0008
    epochs: int = 60
    patience: int = 10  # epochs without validation improvement before stopping
    optimizer: str = "adam"  # adam(0.9, 0.999, 1e-8) or plain sgd
    clip_norm: float = 5.0  # global gradient norm; 0 disables clipping
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


def _layer_input_dim(cfg: ModelConfig, layer: int) -> int:
    return cfg.input_dim if layer == 0 else 2 * cfg.hidden_dim


def param_keys(cfg: ModelConfig) -> list[str]:
    """Canonical parameter order; init, checkpoints and gradcheck rely on it."""
    keys = []
    for layer in range(cfg.num_layers):
        for d in ("f", "b"):
            keys += [f"l{layer}_{d}_W", f"l{layer}_{d}_U", f"l{layer}_{d}_b"]
    keys += ["fc1_W", "fc1_b", "fc2_W", "fc2_b"]
    return keys


def param_shape(cfg: ModelConfig, key: str) -> tuple[int, ...]:
    H, F = cfg.hidden_dim, cfg.fc_hidden
    if key.startswith("l"):
        layer = int(key.split("_")[0][1:])
        kind = key[-1]
        if kind == "W":
            return (4 * H, _layer_input_dim(cfg, layer))
        if kind == "U":
            return (4 * H, H)
        return (4 * H,)
    return {"fc1_W": (F, 2 * H), "fc1_b": (F,), "fc2_W": (1, F), "fc2_b": (1,)}[key]


def init_params(cfg: ModelConfig) -> dict[str, np.ndarray]:
    """Uniform(-k, k) weights with k = 1/sqrt(hidden_dim); zero biases except
    the forget gate, which starts at 1. Deterministic for a given seed."""
    rng = np.random.default_rng(cfg.seed)
    k = 1.0 / np.sqrt(cfg.hidden_dim)
    H = cfg.hidden_dim
    params = {}
    for key in param_keys(cfg):
        shape = param_shape(cfg, key)
        if key.endswith("_b"):
            params[key] = np.zeros(shape)
            if key.startswith("l"):
                params[key][H : 2 * H] = 1.0
        else:
            params[key] = rng.uniform(-k, k, size=shape)
    return params


def _fuse_recurrent(Uf: np.ndarray, Ub: np.ndarray) -> np.ndarray:
    """Pack both directions' recurrent weights into one (2H, 8H) block matrix
    mapping the stacked hidden state [h_f, h_b] to the fused gate axis, which
    is ordered [i_f, i_b, f_f, f_b, o_f, o_b, g_f, g_b]."""
    H = Uf.shape[1]
    D = 2 * H
    blk = np.zeros((D, 4 * D))
    for q in range(4):
        blk[:H, q * D : q * D + H] = Uf[q * H : (q + 1) * H, :].T
        blk[H:, q * D + H : q * D + D] = Ub[q * H : (q + 1) * H, :].T
    return blk


def _fuse_gates(zf_time: np.ndarray, zb_step: np.ndarray) -> np.ndarray:
    """Interleave per-direction (T, 4H) gate blocks into the fused (T, 8H)
    axis; `zb_step` must already be in step (reversed-time) order."""
    T, four_h = zf_time.shape
    H = four_h // 4
    D = 2 * H
    out = np.empty((T, 4 * D))
    for q in range(4):
        out[:, q * D : q * D + H] = zf_time[:, q * H : (q + 1) * H]
        out[:, q * D + H : q * D + D] = zb_step[:, q * H : (q + 1) * H]
    return out


def _split_gates(fused: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of `_fuse_gates`: (T, 8H) -> forward (T, 4H) in time order and
    backward (T, 4H) in step order."""
    T, eight_h = fused.shape
    D = eight_h // 4
    H = D // 2
    f = np.empty((T, 4 * H))
    b = np.empty((T, 4 * H))
    for q in range(4):
        f[:, q * H : (q + 1) * H] = fused[:, q * D : q * D + H]
        b[:, q * H : (q + 1) * H] = fused[:, q * D + H : q * D + D]
    return f, b


def forward(cfg: ModelConfig, params: dict, x: np.ndarray):
    """Run the network on one (T, C) sequence.

    Returns (output, cache): output is the per-timestamp prediction of length
    T (tanh-bounded curve for the regression head, probability of phase 1 for
    the classification head); cache feeds `backward`.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != cfg.input_dim:
        raise ValueError(f"expected input of shape (T, {cfg.input_dim}), got {x.shape}")
    T = x.shape[0]
    H = cfg.hidden_dim
    D = 2 * H

    inp = x
    layers = []
    tmp = np.empty(D)
    for layer in range(cfg.num_layers):
        Wf, Uf, bf = (params[f"l{layer}_f_{k}"] for k in ("W", "U", "b"))
        Wb, Ub, bb = (params[f"l{layer}_b_{k}"] for k in ("W", "U", "b"))
        # Input contributions for the whole sequence in two matmuls; matmul
        # operands stay contiguous (reversed views would leave the fast path).
        Zs = _fuse_gates(inp @ Wf.T + bf, (inp @ Wb.T + bb)[::-1])
        blk = _fuse_recurrent(Uf, Ub)

        Hs = np.zeros((T + 1, D))
        Cs = np.zeros((T + 1, D))
        G = np.empty((T, 4 * D))
        TC = np.empty((T, D))
        for s in range(T):
            g = G[s]
            np.matmul(Hs[s], blk, out=g)
            g += Zs[s]
            sg = g[: 3 * D]
            sg *= 0.5
            np.tanh(sg, out=sg)
            sg += 1.0
            sg *= 0.5
            gg = g[3 * D :]
            np.tanh(gg, out=gg)
            np.multiply(g[D : 2 * D], Cs[s], out=Cs[s + 1])
            np.multiply(g[:D], gg, out=tmp)
            Cs[s + 1] += tmp
            np.tanh(Cs[s + 1], out=TC[s])
            np.multiply(g[2 * D : 3 * D], TC[s], out=Hs[s + 1])

        # Per-time layer output: forward state at t next to backward state at t.
        Y = np.concatenate([Hs[1:, :H], Hs[1:, H:][::-1]], axis=1)
        layers.append({"inp": inp, "G": G, "Cs": Cs, "TC": TC, "Hs": Hs, "blk": blk})
        inp = Y

    A1 = inp @ params["fc1_W"].T + params["fc1_b"]
    U1 = np.tanh(A1)
    v = (U1 @ params["fc2_W"].T + params["fc2_b"])[:, 0]
    out = np.tanh(v) if cfg.head == "regression" else _sigmoid(v)
    cache = {"layers": layers, "Y": inp, "U1": U1, "out": out, "T": T}
    return out, cache


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def bce_loss(probs: np.ndarray, target: np.ndarray) -> float:
    probs = np.asarray(probs, dtype=float)
    target = np.asarray(target, dtype=float)
    if probs.shape != target.shape:
        raise ValueError(f"length mismatch: {probs.shape} vs {target.shape}")
    p = np.clip(probs, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(np.mean(-(target * np.log(p) + (1.0 - target) * np.log1p(-p))))


def loss(pred: np.ndarray, target: np.ndarray, head: str = "regression") -> float:
    return mse_loss(pred, target) if head == "regression" else bce_loss(pred, target)


def backward(cfg: ModelConfig, params: dict, cache: dict, target: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of the head loss w.r.t. every parameter."""
    T = cache["T"]
    H = cfg.hidden_dim
    D = 2 * H
    target = np.asarray(target, dtype=float)
    out = cache["out"]

    if cfg.head == "regression":
        dv = 2.0 * (out - target) * (1.0 - out**2) / T
    else:
        # Derivative of the clamped cross-entropy: zero where p is clipped.
        inside = (out > PROB_CLIP) & (out < 1.0 - PROB_CLIP)
        dv = (out - target) * inside / T

    U1, Y = cache["U1"], cache["Y"]
    grads = {
        "fc2_W": (dv @ U1)[None, :],
        "fc2_b": np.array([dv.sum()]),
    }
    dA1 = np.outer(dv, params["fc2_W"][0]) * (1.0 - U1**2)
    grads["fc1_W"] = dA1.T @ Y
    grads["fc1_b"] = dA1.sum(axis=0)
    dY = dA1 @ params["fc1_W"]

    for layer in range(cfg.num_layers - 1, -1, -1):
        st = cache["layers"][layer]
        G, Cs, TC, Hs, blk, inp = st["G"], st["Cs"], st["TC"], st["Hs"], st["blk"], st["inp"]
        gi = G[:, :D]
        gf = G[:, D : 2 * D]
        go = G[:, 2 * D : 3 * D]
        gg = G[:, 3 * D :]

        # Upstream dL/dh in step coordinates (backward direction is reversed).
        dHa = np.empty((T, D))
        dHa[:, :H] = dY[:, :H]
        dHa[:, H:] = dY[::-1, H:]

        # Step-independent factors, precomputed over the whole sequence.
        to_c = go * (1.0 - TC**2)
        zi = gg * gi * (1.0 - gi)
        zf = Cs[:T] * gf * (1.0 - gf)
        zo = TC * go * (1.0 - go)
        zg = gi * (1.0 - gg**2)

        dZ = np.empty((T, 4 * D))
        blkT = np.ascontiguousarray(blk.T)
        dh = np.empty(D)
        dc = np.empty(D)
        dh_rec = np.zeros(D)
        dc_rec = np.zeros(D)
        for s in range(T - 1, -1, -1):
            np.add(dHa[s], dh_rec, out=dh)
            np.multiply(dh, to_c[s], out=dc)
            dc += dc_rec
            d = dZ[s]
            np.multiply(dc, zi[s], out=d[:D])
            np.multiply(dc, zf[s], out=d[D : 2 * D])
            np.multiply(dh, zo[s], out=d[2 * D : 3 * D])
            np.multiply(dc, zg[s], out=d[3 * D :])
            np.matmul(d, blkT, out=dh_rec)
            np.multiply(dc, gf[s], out=dc_rec)

        dZf, dZb_step = _split_gates(dZ)
        dZb = np.ascontiguousarray(dZb_step[::-1])  # back to time order
        Wf, Wb = params[f"l{layer}_f_W"], params[f"l{layer}_b_W"]
        grads[f"l{layer}_f_W"] = dZf.T @ inp
        grads[f"l{layer}_b_W"] = dZb.T @ inp
        grads[f"l{layer}_f_U"] = dZf.T @ Hs[:T, :H]
        grads[f"l{layer}_b_U"] = dZb_step.T @ Hs[:T, H:]
        grads[f"l{layer}_f_b"] = dZf.sum(axis=0)
        grads[f"l{layer}_b_b"] = dZb.sum(axis=0)
        if layer > 0:
            dY = dZf @ Wf + dZb @ Wb

    return grads


def flatten_params(cfg: ModelConfig, params: dict) -> np.ndarray:
    return np.concatenate([np.ravel(params[k]) for k in param_keys(cfg)])


def unflatten_params(cfg: ModelConfig, flat: np.ndarray) -> dict[str, np.ndarray]:
    params = {}
    pos = 0
    for key in param_keys(cfg):
        shape = param_shape(cfg, key)
        size = int(np.prod(shape))
        params[key] = flat[pos : pos + size].reshape(shape).copy()
        pos += size
    if pos != flat.size:
        raise ValueError(f"flat vector has {flat.size} entries, expected {pos}")
    return params
