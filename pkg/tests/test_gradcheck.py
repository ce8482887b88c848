import numpy as np
import pytest

from gaitseg.network import ModelConfig, backward
from gaitseg.training import gradcheck


@pytest.mark.parametrize("head", ["regression", "classification"])
@pytest.mark.parametrize("layers", [1, 2])
def test_gradcheck_passes_small_models(head, layers):
    cfg = ModelConfig(input_dim=3, hidden_dim=5, num_layers=layers, fc_hidden=6, head=head, seed=7)
    report = gradcheck(cfg, T=9, tolerance=1e-4)
    assert report.passed, report


def test_gradcheck_detects_corrupted_gradient():
    def broken(cfg, params, cache, target):
        grads = backward(cfg, params, cache, target)
        grads["fc1_W"] = grads["fc1_W"] + 0.05
        return grads

    cfg = ModelConfig(input_dim=3, hidden_dim=5, num_layers=1, fc_hidden=6, seed=7)
    report = gradcheck(cfg, T=9, tolerance=1e-4, grad_fn=broken)
    assert not report.passed
    assert report.worst_param == "fc1_W"


def test_gradcheck_noise_floor_fails_absurd_tolerance():
    cfg = ModelConfig(input_dim=3, hidden_dim=5, num_layers=1, fc_hidden=6, seed=7)
    report = gradcheck(cfg, T=9, tolerance=1e-12)
    assert not report.passed
    assert report.max_rel_err > 1e-12


def test_gradcheck_deterministic():
    cfg = ModelConfig(input_dim=2, hidden_dim=4, num_layers=1, fc_hidden=4, seed=3)
    a = gradcheck(cfg, T=7, tolerance=1e-4)
    b = gradcheck(cfg, T=7, tolerance=1e-4)
    assert a == b
