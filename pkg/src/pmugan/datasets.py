"""Training-corpus assembly: sampled initial conditions, per-sample RNG streams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, PmuGanError
from .swing import (
    InitialState,
    PmuRecord,
    SmibCircuit,
    SwingCoefficients,
    rotor_to_pmu,
    simulate_smib,
)

SYSTEMS = ("smib", "ninebus")


@dataclass(frozen=True)
class InitialConditionRanges:
    """Uniform sampling boxes for the rotor initial state."""

    delta0_min: float = 0.2
    delta0_max: float = 1.0
    omega0_min: float = -1.0
    omega0_max: float = 1.0

    def __post_init__(self):
        for lo_name, hi_name in (("delta0_min", "delta0_max"), ("omega0_min", "omega0_max")):
            lo, hi = getattr(self, lo_name), getattr(self, hi_name)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ConfigurationError(f"range [{lo}, {hi}] must be finite")
            if lo > hi:
                raise ConfigurationError(f"{lo_name}={lo} exceeds {hi_name}={hi}")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything build_dataset needs besides the system selector and count."""

    dt: float = 1.0 / 60.0
    steps: int = 200
    coefficients: SwingCoefficients = SwingCoefficients()
    circuit: SmibCircuit = SmibCircuit()
    ranges: InitialConditionRanges = InitialConditionRanges()
    fault_duration_min: float = 0.05
    fault_duration_max: float = 0.3
    case_path: str | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.steps < 2:
            raise ConfigurationError(f"steps must be >= 2, got {self.steps}")
        if not 0 < self.fault_duration_min <= self.fault_duration_max:
            raise ConfigurationError(
                f"fault duration range [{self.fault_duration_min}, "
                f"{self.fault_duration_max}] is invalid"
            )


def sample_initial_conditions(
    ranges: InitialConditionRanges, rng: np.random.Generator
) -> InitialState:
    """One uniform draw per field; degenerate ranges return the endpoint exactly."""
    return InitialState(
        delta0=float(rng.uniform(ranges.delta0_min, ranges.delta0_max)),
        omega0=float(rng.uniform(ranges.omega0_min, ranges.omega0_max)),
    )


def _simulate_one_smib(config: SimulationConfig, rng: np.random.Generator) -> PmuRecord:
    init = sample_initial_conditions(config.ranges, rng)
    traj = simulate_smib(config.coefficients, init, config.dt, config.steps)
    return rotor_to_pmu(traj, config.circuit)


def _simulate_one_ninebus(config: SimulationConfig, rng: np.random.Generator) -> PmuRecord:
    from .ninebus import load_case, sample_fault, simulate_ninebus

    case = load_case(config.case_path)
    fault = sample_fault(
        case, rng, duration_min=config.fault_duration_min, duration_max=config.fault_duration_max
    )
    record = simulate_ninebus(case, fault, config.dt, horizon=config.steps * config.dt)
    if record.n_steps < config.steps:
        raise ConfigurationError(
            f"horizon too short: got {record.n_steps} steps, need {config.steps}"
        )
    return PmuRecord(
        dt=record.dt,
        i_mag=record.i_mag[: config.steps],
        i_phase=record.i_phase[: config.steps],
        source_tag="simulated",
    )


def build_dataset(
    system: str,
    n_samples: int,
    config: SimulationConfig,
    rng: np.random.Generator,
) -> list[PmuRecord]:
    """n_samples records, each from its own spawned RNG stream.

    Spawned streams make the output independent of evaluation order, so the
    same (seed, config) pair always yields the same dataset.
    """
    if system not in SYSTEMS:
        raise ConfigurationError(f"system must be one of {SYSTEMS}, got {system!r}")
    if n_samples < 1:
        raise ConfigurationError(f"n_samples must be >= 1, got {n_samples}")

    streams = rng.spawn(n_samples)
    simulate_one = _simulate_one_smib if system == "smib" else _simulate_one_ninebus
    records = []
    for i, stream in enumerate(streams):
        try:
            records.append(simulate_one(config, stream))
        except PmuGanError as exc:
            exc.args = (f"sample {i}: {exc}",)
            exc.sample_index = i
            raise
    return records


def records_to_matrix(records: list[PmuRecord]) -> np.ndarray:
    """Stack records into rows of concatenated (magnitude, phase) channels."""
    if not records:
        raise ConfigurationError("no records to stack")
    n_steps = records[0].n_steps
    for i, rec in enumerate(records):
        if rec.n_steps != n_steps:
            raise ConfigurationError(
                f"record {i} has {rec.n_steps} steps, expected {n_steps}"
            )
    return np.stack([np.concatenate([r.i_mag, r.i_phase]) for r in records])


def matrix_to_records(
    matrix: np.ndarray, dt: float, source_tag: str = "synthetic", clamp_mag: bool = True
) -> list[PmuRecord]:
    """Invert records_to_matrix; rows split evenly into (magnitude, phase).

    Magnitudes may dip below zero after filtering or de-normalization, which
    the record type forbids; clamp_mag floors them at zero.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] % 2 != 0:
        raise ConfigurationError(f"matrix shape {matrix.shape} is not (n, 2*steps)")
    steps = matrix.shape[1] // 2
    records = []
    for row in matrix:
        mag = row[:steps]
        if clamp_mag:
            mag = np.maximum(mag, 0.0)
        records.append(
            PmuRecord(dt=dt, i_mag=mag, i_phase=row[steps:], source_tag=source_tag)
        )
    return records
