"""Emitter-plasmon quantum interface: pulse synthesis, simulation, networking."""

from .core import (
    AMPLITUDE,
    FIELD,
    RATE,
    ComplexSignal,
    PhysicalParams,
    QubitAmplitudes,
    TimeGrid,
    derive_rates,
    l2_photon_norm,
    overlap,
)
from .dynamics import (
    InitialState,
    Trajectory,
    conservation_residual,
    simulate,
    simulate_mode_resolved,
)
from .errors import (
    ConfigurationError,
    ConsistencyError,
    DegenerateInput,
    GridError,
    InconsistentAmplitudes,
    InvalidParams,
    ModeGridError,
    NumericsError,
    PhaseSingular,
    PhysicsError,
    StiffnessError,
    ToolkitError,
    TruncationError,
    UnitError,
    UnrealizableWavepacket,
)
from .network import (
    TransferRun,
    TransferSpec,
    TwoNodeResult,
    entangle,
    photon_source,
    run_entangle,
    run_transfer,
    swap,
    transfer,
)
from .sensitivity import (
    ErrorSpec,
    SensitivityTable,
    build_table,
    default_error_specs,
    perturbed_transfer,
)
from .synthesis import (
    SynthesisResult,
    beta_e_from_fields,
    control_from_amplitudes,
    full_transfer_fraction,
    integrate_phase,
    integrate_population,
    max_emission_fraction,
    synth_receive,
    synth_send,
)
from .wavepacket import (
    GaussianSpec,
    delay,
    gaussian_packet,
    load_packet,
    scale_to_photon_number,
    standard_grid,
    validate_packet,
)

__version__ = "0.1.0"
