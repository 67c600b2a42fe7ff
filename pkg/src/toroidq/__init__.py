"""Single-atom microtoroid cavity QED: spectra, photon statistics,
bistability and entangled-path coherent-state fidelities."""

from .model import (
    FockConfig,
    SystemParams,
    DimensionError,
    build_hamiltonian,
    build_liouvillian,
    coupling_amplitude,
    normal_mode_couplings,
)
from .linear import (
    LinearSteadyState,
    TransferCoefficients,
    limit_no_atom,
    limit_strong_atom,
    linear_steady_state,
    spectrum,
    transfer_coefficients,
)
from .master import (
    DensityOperator,
    SteadyStateObservables,
    observables,
    solve_observables,
    solve_steady_state,
    spectrum_strong_drive,
    sweep_coupling,
    sweep_drive,
)
from .semiclassical import (
    BistabilityPoint,
    bistability_curve,
    pulse_budget,
    saturation_flux,
    saturation_power,
    turning_points,
)
from .pulse import (
    ChannelAmplitudes,
    GaussianPulseSpec,
    channel_amplitudes,
    fidelity_approx,
    fidelity_exact,
    output_pulse_time_domain,
    overlap_factor_xi,
    reflection_fidelity,
)

__version__ = "0.1.0"
