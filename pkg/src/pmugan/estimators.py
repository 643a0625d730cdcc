"""Scikit-learn style estimator wrappers around the functional cores.

This is the only module that imports sklearn. The wrappers keep plain
constructor parameters (clone/get_params safe), validate inputs with the
usual sklearn helpers, and defer every numeric decision to the underlying
functions so estimator results always agree with the functional API.

Row convention throughout: one sample per row, channels concatenated along
the feature axis, so a two-channel record of T steps is a row of width 2T
with magnitude in the first T columns and phase in the rest.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .datasets import matrix_to_records, records_to_matrix
from .errors import ConfigurationError
from .gan import TrainConfig, sample_matrix, train
from .identify import DEFAULT_THRESHOLD, validate_dataset
from .signals import FilterSpec, lowpass
from .swing import PmuRecord, SmibCircuit


def _as_row_matrix(X, dt: float):
    """Accept a record list or a 2-d float array; return (matrix, dt)."""
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], PmuRecord):
        return records_to_matrix(list(X)), X[0].dt
    return check_array(X, dtype=np.float64, ensure_min_samples=1), dt


class PmuGan(BaseEstimator):
    """Weight-clipped Wasserstein GAN for fixed-length phasor time series.

    ``fit`` trains the generator/critic pair; ``sample`` draws synthetic rows
    in data units and ``sample_records`` wraps them as records when the model
    has the standard two channels.

    Parameters mirror the training configuration: ``critic_steps`` inner
    critic updates per generator update, each followed by clipping every
    critic weight to ``[-clip, clip]``, RMSProp with ``learning_rate`` for
    both models.
    """

    def __init__(
        self,
        batch_size: int = 64,
        critic_steps: int = 5,
        clip: float = 0.01,
        learning_rate: float = 1e-4,
        iterations: int = 20000,
        noise_dim: int = 32,
        n_channels: int = 2,
        generator_hidden=(64, 128),
        critic_hidden=(128, 64),
        critic_output: str = "linear",
        dt: float = 1.0 / 60.0,
        random_state: int = 0,
    ):
        self.batch_size = batch_size
        self.critic_steps = critic_steps
        self.clip = clip
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.noise_dim = noise_dim
        self.n_channels = n_channels
        self.generator_hidden = generator_hidden
        self.critic_hidden = critic_hidden
        self.critic_output = critic_output
        self.dt = dt
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            critic_steps=self.critic_steps,
            clip=self.clip,
            learning_rate=self.learning_rate,
            iterations=self.iterations,
            noise_dim=self.noise_dim,
            seed=self.random_state,
            n_channels=self.n_channels,
            generator_hidden=tuple(self.generator_hidden),
            critic_hidden=tuple(self.critic_hidden),
            critic_output=self.critic_output,
        )

    def fit(self, X, y=None):
        """Train on rows of concatenated channels (or a list of records)."""
        matrix, dt = _as_row_matrix(X, self.dt)
        self.checkpoint_, self.history_ = train(matrix, self._config(), dt=dt)
        self.n_features_in_ = matrix.shape[1]
        return self

    def sample(self, n_samples: int, random_state: int | None = None) -> np.ndarray:
        """Draw n_samples generated rows in data units (no clamping).

        random_state defaults to the estimator's own seed so repeated calls
        are reproducible; pass a different value for fresh draws.
        """
        check_is_fitted(self, "checkpoint_")
        seed = self.random_state if random_state is None else random_state
        rng = np.random.default_rng(seed)
        return sample_matrix(self.checkpoint_, n_samples, rng)

    def sample_records(self, n_samples: int, random_state: int | None = None) -> list:
        """Like sample() but wrapped as records; needs the 2-channel layout."""
        if self.n_channels != 2:
            raise ConfigurationError(
                f"records need exactly 2 channels, model has {self.n_channels}"
            )
        matrix = self.sample(n_samples, random_state)
        return matrix_to_records(matrix, dt=self.checkpoint_.dt, source_tag="synthetic")


class ZeroPhaseLowPass(TransformerMixin, BaseEstimator):
    """Zero-phase Butterworth low-pass over each channel block of a row.

    Stateless apart from input-shape bookkeeping: fit only validates the
    filter design against the sample rate and records the expected width.
    """

    def __init__(
        self,
        cutoff_hz: float = 5.0,
        sample_rate_hz: float = 60.0,
        order: int = 2,
        n_channels: int = 1,
    ):
        self.cutoff_hz = cutoff_hz
        self.sample_rate_hz = sample_rate_hz
        self.order = order
        self.n_channels = n_channels

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if self.n_channels < 1:
            raise ConfigurationError(f"n_channels must be >= 1, got {self.n_channels}")
        if X.shape[1] % self.n_channels != 0:
            raise ConfigurationError(
                f"row width {X.shape[1]} not divisible by {self.n_channels} channels"
            )
        self.spec_ = FilterSpec(
            cutoff_hz=self.cutoff_hz,
            sample_rate_hz=self.sample_rate_hz,
            order=self.order,
        )
        if X.shape[1] // self.n_channels < self.spec_.min_length():
            raise ConfigurationError(
                f"channel length {X.shape[1] // self.n_channels} below filter minimum "
                f"{self.spec_.min_length()}"
            )
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ConfigurationError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        seq_len = X.shape[1] // self.n_channels
        blocks = [
            lowpass(X[:, c * seq_len : (c + 1) * seq_len], self.spec_)
            for c in range(self.n_channels)
        ]
        return np.hstack(blocks)


class SwingIdentifier(BaseEstimator):
    """Per-sample second-order swing model fit with a realism verdict.

    fit() recovers the rotor angle from each row's phasor channels, solves
    the linear least-squares problem for the damping / sine / constant
    coefficients, re-simulates, and scores the mean relative error against
    ``threshold``. predict() applies the same chain to new rows and returns
    the boolean realism mask; score() is the realistic fraction.
    """

    def __init__(
        self,
        dt: float = 1.0 / 60.0,
        threshold: float = DEFAULT_THRESHOLD,
        e_internal: float = 1.05,
        v_inf: float = 1.0,
        x_line: float = 0.5,
    ):
        self.dt = dt
        self.threshold = threshold
        self.e_internal = e_internal
        self.v_inf = v_inf
        self.x_line = x_line

    def _circuit(self) -> SmibCircuit:
        return SmibCircuit(
            e_internal=self.e_internal, v_inf=self.v_inf, x_line=self.x_line
        )

    def _to_records(self, X) -> list:
        if isinstance(X, (list, tuple)) and X and isinstance(X[0], PmuRecord):
            return list(X)
        X = check_array(X, dtype=np.float64, ensure_min_samples=1)
        # Raw generator output may dip below zero; record validation floors it.
        return matrix_to_records(X, dt=self.dt, clamp_mag=True)

    def fit(self, X, y=None):
        records = self._to_records(X)
        report = validate_dataset(records, self._circuit(), self.threshold)
        self.report_ = report
        self.errors_ = np.asarray(report.errors)
        self.realistic_ = np.asarray(report.realistic)
        self.coefficients_ = list(report.fitted)
        self.realistic_fraction_ = report.realistic_fraction
        self.n_failed_ = report.n_failed
        self.n_features_in_ = 2 * records[0].n_steps
        return self

    def predict(self, X) -> np.ndarray:
        """Boolean realism verdict per row of X."""
        check_is_fitted(self, "report_")
        report = validate_dataset(self._to_records(X), self._circuit(), self.threshold)
        return np.asarray(report.realistic)

    def score(self, X, y=None) -> float:
        """Fraction of rows whose identified model reproduces them."""
        return float(np.mean(self.predict(X)))
