"""Physics-based realism scoring.

A record is inverted back to a rotor-angle profile, an equivalent
single-machine model is fitted by least squares, the fitted model is
re-simulated from the same initial state, and the range-normalized mean
deviation between the two profiles becomes the realism score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateTrajectoryError,
    FlatProfileError,
    IntegrationDivergedError,
)
from .signals import finite_difference
from .swing import InitialState, PmuRecord, SmibCircuit, SwingCoefficients, simulate_smib

DEFAULT_THRESHOLD = 0.09
HISTOGRAM_BINS = 20


@dataclass(frozen=True)
class IdentificationResult:
    fitted: SwingCoefficients
    delta_observed: np.ndarray
    delta_estimated: np.ndarray
    error: float
    realistic: bool
    threshold: float

    def __post_init__(self):
        if self.error < 0:
            raise ConfigurationError(f"error must be non-negative, got {self.error}")
        if self.realistic != (self.error <= self.threshold):
            raise ConfigurationError("realistic flag inconsistent with error and threshold")


@dataclass(frozen=True)
class ValidationReport:
    """Per-sample scores plus the aggregate realistic fraction and histogram.

    Failed samples (degenerate fits, diverged re-simulation) carry a NaN
    error, count as unrealistic, and are excluded from the histogram, so the
    histogram counts sum to n_samples - n_failed.
    """

    threshold: float
    errors: tuple
    realistic: tuple
    failures: tuple
    fitted: tuple
    bin_edges: np.ndarray
    bin_counts: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.errors)

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    @property
    def realistic_fraction(self) -> float:
        return sum(self.realistic) / len(self.realistic)


def recover_rotor_angle(record: PmuRecord, circuit: SmibCircuit = SmibCircuit()) -> np.ndarray:
    """Invert the phasor map: delta = unwrapped arg(V + jX*I)."""
    current = record.i_mag * np.exp(1j * record.i_phase)
    internal = circuit.v_inf + 1j * circuit.x_line * current
    return np.unwrap(np.angle(internal))


def recovery_residual(record: PmuRecord, circuit: SmibCircuit = SmibCircuit()) -> np.ndarray:
    """Diagnostic | |V + jX*I| - E |: zero iff the record is exactly circuit-consistent."""
    current = record.i_mag * np.exp(1j * record.i_phase)
    internal = circuit.v_inf + 1j * circuit.x_line * current
    return np.abs(np.abs(internal) - circuit.e_internal)


def fit_swing_params(delta: np.ndarray, dt: float) -> SwingCoefficients:
    """Least-squares fit of delta'' + alpha*delta' + beta*sin(delta) + gamma = 0.

    Regression rows are [delta'(t), sin(delta(t)), 1] against -delta''(t),
    derivatives from central differences; the endpoint rows use one-sided
    stencils and are dropped.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 1 or delta.size < 10:
        raise ConfigurationError(f"need a 1-d profile of >= 10 samples, got shape {delta.shape}")
    if delta.max() - delta.min() < 1e-9:
        raise DegenerateTrajectoryError(
            f"profile range {delta.max() - delta.min():.2e} is too small to identify from"
        )
    d1 = finite_difference(delta, dt, "first")[1:-1]
    d2 = finite_difference(delta, dt, "second")[1:-1]
    rows = np.column_stack([d1, np.sin(delta[1:-1]), np.ones(delta.size - 2)])
    solution, _, rank, _ = np.linalg.lstsq(rows, -d2, rcond=None)
    if rank < 3:
        raise DegenerateTrajectoryError(f"regression matrix rank {rank} < 3")
    return SwingCoefficients(alpha=solution[0], beta=solution[1], gamma=solution[2])


def resimulate(fitted: SwingCoefficients, delta: np.ndarray, dt: float) -> np.ndarray:
    """Integrate the fitted model from (delta[0], one-sided delta'[0])."""
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 1 or delta.size < 5:
        raise ConfigurationError(f"need a 1-d profile of >= 5 samples, got shape {delta.shape}")
    omega0 = finite_difference(delta, dt, "first")[0]
    init = InitialState(delta0=float(delta[0]), omega0=float(omega0))
    traj = simulate_smib(fitted, init, dt, steps=delta.size)
    return traj.delta


def mean_relative_error(delta: np.ndarray, delta_est: np.ndarray) -> float:
    """Mean |estimate - observed| normalized by the observed profile's range."""
    delta = np.asarray(delta, dtype=float)
    delta_est = np.asarray(delta_est, dtype=float)
    if delta.shape != delta_est.shape:
        raise ConfigurationError(f"shape mismatch: {delta.shape} vs {delta_est.shape}")
    span = delta.max() - delta.min()
    if span <= 0:
        raise FlatProfileError("observed profile has zero range")
    return float(np.mean(np.abs(delta_est - delta)) / span)


def identify_record(
    record: PmuRecord,
    circuit: SmibCircuit = SmibCircuit(),
    threshold: float = DEFAULT_THRESHOLD,
) -> IdentificationResult:
    """Full chain on one record: recover angle, fit, re-simulate, score."""
    delta = recover_rotor_angle(record, circuit)
    fitted = fit_swing_params(delta, record.dt)
    delta_est = resimulate(fitted, delta, record.dt)
    error = mean_relative_error(delta, delta_est)
    return IdentificationResult(
        fitted=fitted,
        delta_observed=delta,
        delta_estimated=delta_est,
        error=error,
        realistic=error <= threshold,
        threshold=threshold,
    )


def validate_dataset(
    records: list[PmuRecord],
    circuit: SmibCircuit = SmibCircuit(),
    threshold: float = DEFAULT_THRESHOLD,
) -> ValidationReport:
    """Score every record; fit or integration failures count as unrealistic."""
    if not records:
        raise ConfigurationError("no records to validate")
    errors, realistic, failures, fitted = [], [], [], []
    for i, record in enumerate(records):
        try:
            result = identify_record(record, circuit, threshold)
        except (DegenerateTrajectoryError, IntegrationDivergedError, FlatProfileError) as exc:
            errors.append(float("nan"))
            realistic.append(False)
            failures.append((i, f"{type(exc).__name__}: {exc}"))
            fitted.append(None)
            continue
        errors.append(result.error)
        realistic.append(result.realistic)
        fitted.append(result.fitted)

    finite = np.asarray([e for e in errors if np.isfinite(e)])
    hi = float(finite.max()) if finite.size else 1.0
    counts, edges = np.histogram(finite, bins=HISTOGRAM_BINS, range=(0.0, max(hi, 1e-12)))
    return ValidationReport(
        threshold=threshold,
        errors=tuple(errors),
        realistic=tuple(realistic),
        failures=tuple(failures),
        fitted=tuple(fitted),
        bin_edges=edges,
        bin_counts=counts,
    )
