"""Scikit-learn style estimators wrapping the sequence regressor.

`CurveRegressor` is the generic sequence-to-sequence model: lists of (T, C)
arrays in, per-timestamp predictions out. `GaitCycleSegmenter` is the
domain-facing composition that trains on annotated walk records and returns
restored heel strikes / phase labels. Both follow the sklearn estimator
contract (get_params/set_params/clone-compatible constructors, fitted state
on trailing-underscore attributes).
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .curve import PeakConfig, encode_gcc, label_phases, restore_cycle
from .network import ModelConfig, TrainConfig, forward, init_params
from .records import GaitEvent, GccCurve, ImuSequence, WalkRecord
from .training import train


def _as_sequence_array(x) -> np.ndarray:
    if isinstance(x, WalkRecord):
        x = x.imu
    if isinstance(x, ImuSequence):
        x = x.samples
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a (T, C) sequence, got shape {x.shape}")
    return x


class CurveRegressor(BaseEstimator):
    """Bidirectional recurrent per-timestamp regressor.

    Parameters mirror the model and training configuration; `fit` consumes a
    list of (T, C) float arrays and equally long 1-D targets (curve values
    for the regression head, {0,1} phase labels for the classification
    head). A `validation_fraction` share of the training sequences (at least
    one, when there are at least two) is held out for early stopping.
    """

    def __init__(
        self,
        hidden_dim: int = 32,
        num_layers: int = 2,
        fc_hidden: int = 64,
        head: str = "regression",
        learning_rate: float = 0.0008,
        epochs: int = 60,
        patience: int = 10,
        optimizer: str = "adam",
        clip_norm: float = 5.0,
        validation_fraction: float = 0.1,
        seed: int = 0,
    ):
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.fc_hidden = fc_hidden
        self.head = head
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.patience = patience
        self.optimizer = optimizer
        self.clip_norm = clip_norm
        self.validation_fraction = validation_fraction
        self.seed = seed

    def _configs(self, input_dim: int) -> tuple[ModelConfig, TrainConfig]:
        model = ModelConfig(
            input_dim=input_dim,
            hidden_dim=self.hidden_dim,
            num_layers=self.num_layers,
            fc_hidden=self.fc_hidden,
            head=self.head,
            seed=self.seed,
        )
        training = TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            patience=self.patience,
            optimizer=self.optimizer,
            clip_norm=self.clip_norm,
            seed=self.seed,
        )
        return model, training

    def fit(self, X, y):
        xs = [_as_sequence_array(x) for x in X]
        if not xs:
            raise ValueError("X is empty")
        ys = [np.ravel(np.asarray(t, dtype=float)) for t in y]
        if len(xs) != len(ys):
            raise ValueError(f"{len(xs)} sequences but {len(ys)} targets")
        for x, t in zip(xs, ys):
            if len(x) != len(t):
                raise ValueError("sequence and target lengths differ")

        model_cfg, train_cfg = self._configs(xs[0].shape[1])
        pairs = list(zip(xs, ys))
        if len(pairs) >= 2:
            order = np.random.default_rng(self.seed).permutation(len(pairs))
            n_val = max(1, int(np.floor(self.validation_fraction * len(pairs))))
            val = [pairs[i] for i in order[:n_val]]
            fit_pairs = [pairs[i] for i in order[n_val:]]
        else:
            val = pairs
            fit_pairs = pairs

        params, log = train(model_cfg, init_params(model_cfg), fit_pairs, val, train_cfg)
        self.n_features_in_ = xs[0].shape[1]
        self.model_config_ = model_cfg
        self.params_ = params
        self.history_ = log
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("this CurveRegressor has not been fitted yet")

    def predict(self, X):
        """Predictions for a list of sequences (or one (T, C) array)."""
        self._check_fitted()
        single = isinstance(X, (WalkRecord, ImuSequence)) or (
            isinstance(X, np.ndarray) and X.ndim == 2
        )
        seqs = [X] if single else list(X)
        outputs = [forward(self.model_config_, self.params_, _as_sequence_array(x))[0] for x in seqs]
        return outputs[0] if single else outputs


class GaitCycleSegmenter(BaseEstimator):
    """Two-stage gait cycle segmentation: regress the characteristic curve,
    then restore heel strikes from its peaks."""

    def __init__(
        self,
        hidden_dim: int = 32,
        num_layers: int = 2,
        fc_hidden: int = 64,
        learning_rate: float = 0.0008,
        epochs: int = 60,
        patience: int = 10,
        optimizer: str = "adam",
        clip_norm: float = 5.0,
        validation_fraction: float = 0.1,
        seed: int = 0,
        peak_threshold: float = 0.5,
        peak_min_separation: int = 10,
        peak_prominence: float = 0.5,
        allow_boundary_peaks: bool = True,
    ):
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.fc_hidden = fc_hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.patience = patience
        self.optimizer = optimizer
        self.clip_norm = clip_norm
        self.validation_fraction = validation_fraction
        self.seed = seed
        self.peak_threshold = peak_threshold
        self.peak_min_separation = peak_min_separation
        self.peak_prominence = peak_prominence
        self.allow_boundary_peaks = allow_boundary_peaks

    def peak_config(self) -> PeakConfig:
        return PeakConfig(
            threshold=self.peak_threshold,
            min_separation=self.peak_min_separation,
            prominence=self.peak_prominence,
            allow_boundary_peaks=self.allow_boundary_peaks,
        )

    def fit(self, records: list[WalkRecord], y=None):
        """Train on annotated walk records; targets are encoded internally."""
        X = [r.imu.samples for r in records]
        targets = [encode_gcc(r.events, len(r.imu)).values for r in records]
        self.regressor_ = CurveRegressor(
            hidden_dim=self.hidden_dim,
            num_layers=self.num_layers,
            fc_hidden=self.fc_hidden,
            head="regression",
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            patience=self.patience,
            optimizer=self.optimizer,
            clip_norm=self.clip_norm,
            validation_fraction=self.validation_fraction,
            seed=self.seed,
        ).fit(X, targets)
        self.n_features_in_ = self.regressor_.n_features_in_
        return self

    @classmethod
    def from_fitted(cls, regressor: CurveRegressor, **peak_params) -> "GaitCycleSegmenter":
        """Wrap an already fitted regressor (e.g. loaded from a checkpoint)."""
        regressor._check_fitted()
        seg = cls(**peak_params)
        seg.regressor_ = regressor
        seg.n_features_in_ = regressor.n_features_in_
        return seg

    def _check_fitted(self):
        if not hasattr(self, "regressor_"):
            raise NotFittedError("this GaitCycleSegmenter has not been fitted yet")

    def predict_curve(self, x) -> GccCurve:
        self._check_fitted()
        return GccCurve(self.regressor_.predict(_as_sequence_array(x)))

    def predict_events(self, x) -> list[GaitEvent]:
        """Restored heel strikes for one sequence."""
        return restore_cycle(self.predict_curve(x), self.peak_config())

    def predict_phases(self, x) -> np.ndarray:
        """Binary phase labels for one sequence; raises ValueError when no
        heel strike can be restored."""
        x = _as_sequence_array(x)
        events = self.predict_events(x)
        if not events:
            raise ValueError("no heel strikes restored")
        return label_phases(events, len(x)).labels

    def predict(self, X) -> list[list[GaitEvent]]:
        """Restored heel-strike events per input sequence."""
        self._check_fitted()
        return [self.predict_events(x) for x in X]
