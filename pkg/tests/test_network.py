import math

import numpy as np
import pytest

from gaitseg.network import (
    ModelConfig,
    backward,
    bce_loss,
    flatten_params,
    forward,
    init_params,
    loss,
    mse_loss,
    param_keys,
    param_shape,
    unflatten_params,
)


def small_cfg(**kw):
    base = dict(input_dim=3, hidden_dim=5, num_layers=2, fc_hidden=7, seed=11)
    base.update(kw)
    return ModelConfig(**base)


# --- configuration and initialisation ---------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(hidden_dim=0)
    with pytest.raises(ValueError):
        ModelConfig(head="nope")


def test_init_deterministic():
    cfg = small_cfg()
    a, b = init_params(cfg), init_params(cfg)
    assert all(np.array_equal(a[k], b[k]) for k in a)


def test_init_seed_changes_weights():
    a = init_params(small_cfg(seed=1))
    b = init_params(small_cfg(seed=2))
    assert any(not np.array_equal(a[k], b[k]) for k in a if k.endswith("_W"))


def test_recurrent_weight_shape_is_4h_by_h():
    cfg = ModelConfig(input_dim=6, hidden_dim=8, num_layers=2)
    params = init_params(cfg)
    for layer in range(2):
        for d in ("f", "b"):
            assert params[f"l{layer}_{d}_U"].shape == (32, 8)
    assert params["l0_f_W"].shape == (32, 6)
    assert params["l1_f_W"].shape == (32, 16)  # consumes both directions below


def test_init_bounds_and_biases():
    cfg = small_cfg(hidden_dim=16)
    params = init_params(cfg)
    k = 1.0 / math.sqrt(16)
    for key, value in params.items():
        if key.endswith("_b"):
            if key.startswith("l"):
                assert np.all(value[16:32] == 1.0)  # forget gate block
                assert np.all(value[:16] == 0.0) and np.all(value[32:] == 0.0)
            else:
                assert np.all(value == 0.0)
        else:
            assert np.all(np.abs(value) <= k)


def test_flatten_unflatten_roundtrip():
    cfg = small_cfg()
    params = init_params(cfg)
    flat = flatten_params(cfg, params)
    assert flat.size == sum(int(np.prod(param_shape(cfg, k))) for k in param_keys(cfg))
    back = unflatten_params(cfg, flat)
    assert all(np.array_equal(params[k], back[k]) for k in params)


# --- forward -----------------------------------------------------------------

def test_zero_params_give_neutral_outputs():
    for head, expected in (("regression", 0.0), ("classification", 0.5)):
        cfg = small_cfg(head=head)
        params = {k: np.zeros_like(v) for k, v in init_params(cfg).items()}
        out, _ = forward(cfg, params, np.random.default_rng(0).normal(size=(9, 3)))
        assert np.allclose(out, expected)


def test_output_length_matches_input():
    cfg = small_cfg()
    params = init_params(cfg)
    rng = np.random.default_rng(3)
    for T in rng.integers(5, 100, size=8):
        out, _ = forward(cfg, params, rng.normal(size=(int(T), 3)))
        assert out.shape == (T,)


def test_output_ranges():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(40, 3)) * 3.0
    reg_out, _ = forward(small_cfg(), init_params(small_cfg()), x)
    assert np.all(np.abs(reg_out) <= 1.0)
    cfg = small_cfg(head="classification")
    cls_out, _ = forward(cfg, init_params(cfg), x)
    assert np.all((cls_out > 0.0) & (cls_out < 1.0))


def test_input_dim_mismatch_raises():
    cfg = small_cfg()
    with pytest.raises(ValueError, match="shape"):
        forward(cfg, init_params(cfg), np.zeros((10, 4)))


def test_mirrored_weights_give_time_reversed_outputs():
    """With identical forward/backward direction weights and an FC layer that
    treats both direction blocks identically, reversing the input reverses
    the output."""
    cfg = ModelConfig(input_dim=3, hidden_dim=6, num_layers=1, fc_hidden=5, seed=4)
    params = init_params(cfg)
    for k in ("W", "U", "b"):
        params[f"l0_b_{k}"] = params[f"l0_f_{k}"].copy()
    half = params["fc1_W"][:, :6].copy()
    params["fc1_W"] = np.concatenate([half, half], axis=1)

    x = np.random.default_rng(9).normal(size=(17, 3))
    out_fwd, _ = forward(cfg, params, x)
    out_rev, _ = forward(cfg, params, x[::-1].copy())
    assert np.allclose(out_rev, out_fwd[::-1], atol=1e-12)


# --- losses -------------------------------------------------------------------

def test_mse_examples():
    assert mse_loss(np.array([0.3, -0.7]), np.array([0.3, -0.7])) == 0.0
    assert mse_loss(np.zeros(2), np.array([1.0, -1.0])) == pytest.approx(1.0)


def test_bce_examples():
    target = np.array([0.0, 1.0, 1.0, 0.0])
    assert bce_loss(np.full(4, 0.5), target) == pytest.approx(math.log(2))
    assert bce_loss(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == pytest.approx(0.0, abs=1e-6)


def test_loss_length_mismatch():
    with pytest.raises(ValueError):
        mse_loss(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        bce_loss(np.zeros(3), np.zeros(4))


def test_loss_dispatch():
    pred = np.array([0.5, 0.5])
    target = np.array([1.0, 0.0])
    assert loss(pred, target, "regression") == mse_loss(pred, target)
    assert loss(pred, target, "classification") == bce_loss(pred, target)


# --- backward -----------------------------------------------------------------

def test_gradients_zero_at_zero_loss():
    cfg = small_cfg()
    params = init_params(cfg)
    x = np.random.default_rng(2).normal(size=(12, 3))
    out, cache = forward(cfg, params, x)
    grads = backward(cfg, params, cache, out.copy())
    assert all(np.all(g == 0.0) for g in grads.values())


def test_unused_input_channel_gets_exact_zero_gradient():
    cfg = small_cfg()
    params = init_params(cfg)
    x = np.random.default_rng(2).normal(size=(12, 3))
    x[:, 1] = 0.0
    out, cache = forward(cfg, params, x)
    grads = backward(cfg, params, cache, np.random.default_rng(3).uniform(-1, 1, 12))
    assert np.all(grads["l0_f_W"][:, 1] == 0.0)
    assert np.all(grads["l0_b_W"][:, 1] == 0.0)
    assert np.any(grads["l0_f_W"][:, 0] != 0.0)


def test_gradient_shapes_match_params():
    cfg = small_cfg(num_layers=3)
    params = init_params(cfg)
    x = np.random.default_rng(0).normal(size=(8, 3))
    out, cache = forward(cfg, params, x)
    grads = backward(cfg, params, cache, np.zeros(8))
    assert set(grads) == set(params)
    assert all(grads[k].shape == params[k].shape for k in params)
