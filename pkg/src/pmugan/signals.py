"""Zero-phase low-pass filtering and finite-difference derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, filtfilt

from .errors import ConfigurationError
from .swing import PmuRecord


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth low-pass applied forward and backward (zero net phase)."""

    cutoff_hz: float = 5.0
    sample_rate_hz: float = 60.0
    order: int = 2

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ConfigurationError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if not 0 < self.cutoff_hz < self.sample_rate_hz / 2:
            raise ConfigurationError(
                f"cutoff {self.cutoff_hz} Hz must sit inside (0, {self.sample_rate_hz / 2}) Hz"
            )
        if self.order < 1:
            raise ConfigurationError(f"filter order must be >= 1, got {self.order}")

    def coefficients(self):
        return butter(self.order, self.cutoff_hz, fs=self.sample_rate_hz, btype="low")

    def min_length(self) -> int:
        # filtfilt needs padding room on both ends
        return 6 * self.order + 1

    def to_dict(self) -> dict:
        return {
            "cutoff_hz": self.cutoff_hz,
            "sample_rate_hz": self.sample_rate_hz,
            "order": self.order,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterSpec":
        return cls(**d)


def lowpass(x: np.ndarray, spec: FilterSpec = FilterSpec()) -> np.ndarray:
    """Filter each row (or the single 1-d series) with zero phase shift."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    rows = np.atleast_2d(x)
    if rows.shape[1] <= 6 * spec.order:
        raise ValueError(
            f"series of length {rows.shape[1]} is too short for order {spec.order} "
            f"(needs more than {6 * spec.order} samples)"
        )
    if not np.isfinite(rows).all():
        raise ValueError("non-finite values in input")
    b, a = spec.coefficients()
    out = filtfilt(b, a, rows, axis=1)
    return out[0] if squeeze else out


def filter_record(record: PmuRecord, spec: FilterSpec | None = None) -> PmuRecord:
    """Low-pass both channels of a record; magnitudes are floored at zero.

    The default spec takes its sample rate from the record's dt.
    """
    if spec is None:
        spec = FilterSpec(sample_rate_hz=1.0 / record.dt)
    return PmuRecord(
        dt=record.dt,
        i_mag=np.maximum(lowpass(record.i_mag, spec), 0.0),
        i_phase=lowpass(record.i_phase, spec),
        source_tag=record.source_tag,
    )


def filter_records(records, spec: FilterSpec | None = None) -> list:
    return [filter_record(r, spec) for r in records]


def finite_difference(x: np.ndarray, dt: float, order: str = "first") -> np.ndarray:
    """Derivative of a uniformly sampled series, same length as the input.

    Central differences at interior points; second-order one-sided stencils
    at the two endpoints.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {x.shape}")
    if x.size < 5:
        raise ValueError(f"need at least 5 samples, got {x.size}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    d = np.empty_like(x)
    if order == "first":
        d[1:-1] = (x[2:] - x[:-2]) / (2.0 * dt)
        d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt)
        d[-1] = (3.0 * x[-1] - 4.0 * x[-2] + x[-3]) / (2.0 * dt)
    elif order == "second":
        d[1:-1] = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / dt**2
        d[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) / dt**2
        d[-1] = (2.0 * x[-1] - 5.0 * x[-2] + 4.0 * x[-3] - x[-4]) / dt**2
    else:
        raise ValueError(f"order must be 'first' or 'second', got {order!r}")
    return d
