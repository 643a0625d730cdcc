"""Classical multi-machine dynamics on a Kron-reduced network.

Generators are constant EMFs behind transient reactance; loads are constant
admittances folded into the network; a fault is a large shunt at one bus,
present for its duration and then removed with no topology change. Recording
starts at fault clearing and observes one branch's current phasor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError, IntegrationDivergedError
from .swing import PmuRecord

BUNDLED_CASE = "ieee9_classical.json"


def _cmat(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    out = arr[..., 0] + 1j * arr[..., 1]
    out.flags.writeable = False
    return out


def _frozen(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MultiMachineCase:
    """Reduced classical model plus the pieces needed to re-reduce under faults.

    Buses are 1-based, matching power-system convention. Y_nn is the network
    admittance over the physical buses with loads and generator branches
    folded in; Y_ng couples those buses to the internal nodes; Y_reduced is
    the pre-fault Kron reduction onto the internal nodes.
    """

    n_gen: int
    M: np.ndarray
    D: np.ndarray
    Pm: np.ndarray
    E: np.ndarray
    delta0: np.ndarray
    Y_reduced: np.ndarray
    Y_nn: np.ndarray
    Y_ng: np.ndarray
    y_gen: np.ndarray
    monitored_line: dict
    fault_buses: tuple
    fault_shunt: float
    f_hz: float = 60.0

    def __post_init__(self):
        if self.Y_reduced.shape != (self.n_gen, self.n_gen):
            raise ConfigurationError(
                f"Y_reduced shape {self.Y_reduced.shape} != ({self.n_gen}, {self.n_gen})"
            )
        for name in ("M", "D", "Pm", "E", "delta0"):
            if getattr(self, name).shape != (self.n_gen,):
                raise ConfigurationError(f"{name} must have one entry per generator")
        if self.M.min() <= 0:
            raise ConfigurationError(f"inertia must be positive, got {self.M.min()}")
        n_bus = self.Y_nn.shape[0]
        if self.Y_nn.shape != (n_bus, n_bus) or self.Y_ng.shape != (n_bus, self.n_gen):
            raise ConfigurationError("network block shapes are inconsistent")

    @property
    def n_bus(self) -> int:
        return self.Y_nn.shape[0]


@dataclass(frozen=True)
class FaultSpec:
    """Bus fault: 1-based location and how long it stays on."""

    fault_bus: int
    duration: float

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ConfigurationError(f"duration must be >= 0, got {self.duration}")


def load_case(path: str | None = None) -> MultiMachineCase:
    """Read a case file; with no path, the bundled 9-bus case."""
    if path is None:
        text = resources.files("pmugan").joinpath(f"data/{BUNDLED_CASE}").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    return MultiMachineCase(
        n_gen=int(raw["n_gen"]),
        M=_frozen(raw["M"]),
        D=_frozen(raw["D"]),
        Pm=_frozen(raw["Pm"]),
        E=_frozen(raw["E"]),
        delta0=_frozen(raw["delta0"]),
        Y_reduced=_cmat(raw["Y_reduced"]),
        Y_nn=_cmat(raw["Y_nn"]),
        Y_ng=_cmat(raw["Y_ng"]),
        y_gen=_cmat(raw["y_gen"]),
        monitored_line=dict(raw["monitored_line"]),
        fault_buses=tuple(int(b) for b in raw["fault_buses"]),
        fault_shunt=float(raw["fault_shunt"]),
        f_hz=float(raw.get("f_hz", 60.0)),
    )


def sample_fault(
    case: MultiMachineCase,
    rng: np.random.Generator,
    duration_min: float = 0.05,
    duration_max: float = 0.3,
) -> FaultSpec:
    """Uniform fault bus (over the case's allowed buses) and duration."""
    if not 0 < duration_min <= duration_max:
        raise ConfigurationError(
            f"duration range [{duration_min}, {duration_max}] is invalid"
        )
    bus = case.fault_buses[int(rng.integers(0, len(case.fault_buses)))]
    return FaultSpec(fault_bus=bus, duration=float(rng.uniform(duration_min, duration_max)))


def _reduce(case: MultiMachineCase, y_nn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kron reduction onto internal nodes plus the bus-voltage recovery map."""
    solve = np.linalg.solve(y_nn, case.Y_ng)
    y_red = np.diag(case.y_gen) - case.Y_ng.T @ solve
    return y_red, -solve


def _rk4(delta, omega, h, case, y_red):
    def f(d, w):
        e = case.E * np.exp(1j * d)
        pe = (e * np.conj(y_red @ e)).real
        return w, (case.Pm - pe - case.D * w) / case.M

    k1d, k1w = f(delta, omega)
    k2d, k2w = f(delta + 0.5 * h * k1d, omega + 0.5 * h * k1w)
    k3d, k3w = f(delta + 0.5 * h * k2d, omega + 0.5 * h * k2w)
    k4d, k4w = f(delta + h * k3d, omega + h * k3w)
    return (
        delta + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d),
        omega + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w),
    )


def simulate_ninebus(
    case: MultiMachineCase,
    fault: FaultSpec,
    dt: float = 1.0 / 60.0,
    horizon: float = 4.0,
    rng: np.random.Generator | None = None,
    substeps: int = 4,
) -> PmuRecord:
    """Fault-on then post-fault integration; record starts at fault clearing.

    The run is fully determined by (case, fault, dt, horizon); rng is part of
    the uniform simulate interface and is not consumed.
    """
    del rng
    if dt <= 0 or horizon <= 0:
        raise ConfigurationError(f"dt and horizon must be positive, got {dt}, {horizon}")
    if fault.fault_bus not in case.fault_buses:
        raise ConfigurationError(
            f"fault bus {fault.fault_bus} not in case buses {case.fault_buses}"
        )

    delta = case.delta0.copy()
    omega = np.zeros(case.n_gen)

    if fault.duration > 0:
        y_nn_fault = case.Y_nn.copy()
        k = fault.fault_bus - 1
        y_nn_fault[k, k] += case.fault_shunt
        y_red_fault, _ = _reduce(case, y_nn_fault)
        h_target = dt / substeps
        n_fault = max(1, math.ceil(fault.duration / h_target))
        h_fault = fault.duration / n_fault
        for _ in range(n_fault):
            delta, omega = _rk4(delta, omega, h_fault, case, y_red_fault)
    if not (np.isfinite(delta).all() and np.isfinite(omega).all()):
        raise IntegrationDivergedError(0, "diverged during the fault-on interval")

    y_red_post, recovery = _reduce(case, case.Y_nn)
    line = case.monitored_line
    f_idx, t_idx = line["from_bus"] - 1, line["to_bus"] - 1
    y_series = complex(line["y_series"][0], line["y_series"][1])
    y_shunt = 1j * line["b_half"]

    n_rec = round(horizon / dt)
    if n_rec < 2:
        raise ConfigurationError(f"horizon {horizon} spans fewer than 2 samples at dt={dt}")
    current = np.empty(n_rec, dtype=complex)
    h = dt / substeps
    for k in range(n_rec):
        if not (np.isfinite(delta).all() and np.isfinite(omega).all()):
            raise IntegrationDivergedError(k)
        e = case.E * np.exp(1j * delta)
        v = recovery @ e
        current[k] = (v[f_idx] - v[t_idx]) * y_series + v[f_idx] * y_shunt
        if k + 1 < n_rec:
            for _ in range(substeps):
                delta, omega = _rk4(delta, omega, h, case, y_red_post)

    return PmuRecord(
        dt=dt,
        i_mag=np.abs(current),
        i_phase=np.unwrap(np.angle(current)),
        source_tag="simulated",
    )
