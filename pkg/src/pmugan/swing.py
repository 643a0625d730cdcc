"""Single-machine swing dynamics and the rotor-to-phasor measurement map.

The model is the damped pendulum form delta'' + alpha*delta' + beta*sin(delta)
+ gamma = 0, integrated as a first-order system with classical fixed-step RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IntegrationDivergedError

SOURCE_TAGS = ("simulated", "synthetic")


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be a 1-d sequence, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SwingCoefficients:
    """Damping, synchronizing, and constant-forcing terms of the rotor equation."""

    alpha: float = 0.5
    beta: float = 5.0
    gamma: float = -1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigurationError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class SmibCircuit:
    """Fictitious machine-to-bus circuit: internal EMF, bus voltage, series reactance."""

    e_internal: float = 1.05
    v_inf: float = 1.0
    x_line: float = 0.5

    def __post_init__(self):
        for name in ("e_internal", "v_inf", "x_line"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class InitialState:
    delta0: float
    omega0: float

    def __post_init__(self):
        if not (math.isfinite(self.delta0) and math.isfinite(self.omega0)):
            raise ConfigurationError(
                f"initial state must be finite, got ({self.delta0}, {self.omega0})"
            )


@dataclass(frozen=True)
class RotorTrajectory:
    """Sampled rotor angle and speed deviation on a uniform grid."""

    dt: float
    delta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "delta", _frozen_array(self.delta, "delta"))
        object.__setattr__(self, "omega", _frozen_array(self.omega, "omega"))
        if len(self.delta) != len(self.omega):
            raise ConfigurationError(
                f"channel lengths differ: {len(self.delta)} vs {len(self.omega)}"
            )
        if len(self.delta) < 2:
            raise ConfigurationError("a trajectory needs at least 2 samples")

    @property
    def n_steps(self) -> int:
        return len(self.delta)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt


@dataclass(frozen=True)
class PmuRecord:
    """Current magnitude and unwrapped phase on a uniform grid."""

    dt: float
    i_mag: np.ndarray
    i_phase: np.ndarray
    source_tag: str = "simulated"

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.source_tag not in SOURCE_TAGS:
            raise ConfigurationError(
                f"source_tag must be one of {SOURCE_TAGS}, got {self.source_tag!r}"
            )
        object.__setattr__(self, "i_mag", _frozen_array(self.i_mag, "i_mag"))
        object.__setattr__(self, "i_phase", _frozen_array(self.i_phase, "i_phase"))
        if len(self.i_mag) != len(self.i_phase):
            raise ConfigurationError(
                f"channel lengths differ: {len(self.i_mag)} vs {len(self.i_phase)}"
            )
        if len(self.i_mag) and self.i_mag.min() < 0:
            raise ConfigurationError(f"i_mag must be non-negative, min is {self.i_mag.min()}")

    @property
    def n_steps(self) -> int:
        return len(self.i_mag)


def _rk4_step(delta: float, omega: float, h: float, alpha: float, beta: float, gamma: float):
    def f(d, w):
        return w, -alpha * w - beta * math.sin(d) - gamma

    k1d, k1w = f(delta, omega)
    k2d, k2w = f(delta + 0.5 * h * k1d, omega + 0.5 * h * k1w)
    k3d, k3w = f(delta + 0.5 * h * k2d, omega + 0.5 * h * k2w)
    k4d, k4w = f(delta + h * k3d, omega + h * k3w)
    return (
        delta + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
        omega + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
    )


def simulate_smib(
    coeffs: SwingCoefficients,
    init: InitialState,
    dt: float = 1.0 / 60.0,
    steps: int = 200,
    substeps: int = 4,
) -> RotorTrajectory:
    """Integrate the rotor equation, recording `steps` samples spaced dt apart.

    The first sample is exactly the initial state. Each recording interval is
    covered by `substeps` internal RK4 steps.
    """
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if steps < 2:
        raise ConfigurationError(f"steps must be >= 2, got {steps}")
    if substeps < 1:
        raise ConfigurationError(f"substeps must be >= 1, got {substeps}")

    h = dt / substeps
    delta = np.empty(steps)
    omega = np.empty(steps)
    d, w = init.delta0, init.omega0
    delta[0], omega[0] = d, w
    for k in range(1, steps):
        try:
            for _ in range(substeps):
                d, w = _rk4_step(d, w, h, coeffs.alpha, coeffs.beta, coeffs.gamma)
        except (OverflowError, ValueError):
            # math.sin rejects inf/nan, which only happens once the state blew up
            raise IntegrationDivergedError(k) from None
        if not (math.isfinite(d) and math.isfinite(w)):
            raise IntegrationDivergedError(k)
        delta[k], omega[k] = d, w
    return RotorTrajectory(dt=dt, delta=delta, omega=omega)


def rotor_to_pmu(rotor: RotorTrajectory, circuit: SmibCircuit = SmibCircuit()) -> PmuRecord:
    """Map rotor angle to the line-current phasor I = (E*exp(j*delta) - V) / (jX)."""
    current = (circuit.e_internal * np.exp(1j * rotor.delta) - circuit.v_inf) / (
        1j * circuit.x_line
    )
    return PmuRecord(
        dt=rotor.dt,
        i_mag=np.abs(current),
        i_phase=np.unwrap(np.angle(current)),
        source_tag="simulated",
    )


def swing_equilibrium(coeffs: SwingCoefficients) -> float:
    """Stable rest angle: beta*sin(delta) + gamma = 0 with positive stiffness."""
    if coeffs.beta <= 0 or abs(coeffs.gamma) > coeffs.beta:
        raise ConfigurationError(
            f"no equilibrium for beta={coeffs.beta}, gamma={coeffs.gamma}"
        )
    return math.asin(-coeffs.gamma / coeffs.beta)
