"""Synthesis and physics-based validation of PMU current-phasor time series.

Layout:

- ``swing``      single-machine swing dynamics and the phasor map
- ``ninebus``    multi-machine classical-model transients from bundled case data
- ``datasets``   sampling plans that turn either system into record corpora
- ``signals``    zero-phase low-pass filtering and finite differences
- ``network``    dense networks, RMSProp, clipping, gradient checking
- ``gan``        weight-clipped Wasserstein training loop and sampling
- ``identify``   least-squares swing identification and realism scoring
- ``estimators`` sklearn-style wrappers around the three stages
- ``io``         CSV/JSON persistence with byte-stable formatting
- ``cli``        the ``pmugan`` command-line entry point
"""

from .datasets import (
    SYSTEMS,
    InitialConditionRanges,
    SimulationConfig,
    build_dataset,
    matrix_to_records,
    records_to_matrix,
    sample_initial_conditions,
)
from .errors import (
    ConfigurationError,
    DegenerateTrajectoryError,
    FlatProfileError,
    IntegrationDivergedError,
    PmuGanError,
    TrainingDivergedError,
)
from .estimators import PmuGan, SwingIdentifier, ZeroPhaseLowPass
from .gan import (
    ChannelScaler,
    Checkpoint,
    CriticModel,
    GeneratorModel,
    LossHistory,
    TrainConfig,
    generate,
    sample_matrix,
    train,
    wasserstein_1d,
)
from .identify import (
    DEFAULT_THRESHOLD,
    IdentificationResult,
    ValidationReport,
    fit_swing_params,
    identify_record,
    mean_relative_error,
    recover_rotor_angle,
    validate_dataset,
)
from .network import (
    NetworkParameters,
    NetworkSpec,
    gradient_check,
    gradient_check_layers,
    init_network,
)
from .ninebus import FaultSpec, MultiMachineCase, load_case, simulate_ninebus
from .signals import FilterSpec, filter_record, filter_records, finite_difference, lowpass
from .swing import (
    InitialState,
    PmuRecord,
    RotorTrajectory,
    SmibCircuit,
    SwingCoefficients,
    rotor_to_pmu,
    simulate_smib,
    swing_equilibrium,
)

__version__ = "0.1.0"

__all__ = [
    "SYSTEMS",
    "InitialConditionRanges",
    "SimulationConfig",
    "build_dataset",
    "matrix_to_records",
    "records_to_matrix",
    "sample_initial_conditions",
    "ConfigurationError",
    "DegenerateTrajectoryError",
    "FlatProfileError",
    "IntegrationDivergedError",
    "PmuGanError",
    "TrainingDivergedError",
    "PmuGan",
    "SwingIdentifier",
    "ZeroPhaseLowPass",
    "ChannelScaler",
    "Checkpoint",
    "CriticModel",
    "GeneratorModel",
    "LossHistory",
    "TrainConfig",
    "generate",
    "sample_matrix",
    "train",
    "wasserstein_1d",
    "DEFAULT_THRESHOLD",
    "IdentificationResult",
    "ValidationReport",
    "fit_swing_params",
    "identify_record",
    "mean_relative_error",
    "recover_rotor_angle",
    "validate_dataset",
    "NetworkParameters",
    "NetworkSpec",
    "gradient_check",
    "gradient_check_layers",
    "init_network",
    "FaultSpec",
    "MultiMachineCase",
    "load_case",
    "simulate_ninebus",
    "FilterSpec",
    "filter_record",
    "filter_records",
    "finite_difference",
    "lowpass",
    "InitialState",
    "PmuRecord",
    "RotorTrajectory",
    "SmibCircuit",
    "SwingCoefficients",
    "rotor_to_pmu",
    "simulate_smib",
    "swing_equilibrium",
    "__version__",
]
