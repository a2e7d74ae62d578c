"""staforge: shortcut drive synthesis for lossy linear mode networks.

The package splits into three layers.  Model building and exact
propagation live in :mod:`staforge.network`, :mod:`staforge.hybrid`,
:mod:`staforge.langevin` and :mod:`staforge.pulses`.  Drive synthesis
lives in :mod:`staforge.cd` (derivative-corrected single-mode ramps)
and :mod:`staforge.multimode` (piecewise-constant multi-mode transfer
steering with minimum-norm and minimax-power solvers).  Verification
lives in :mod:`staforge.iochain` (feedline emulation),
:mod:`staforge.qsl` (path-efficiency diagnostics) and
:mod:`staforge.fock` (truncated number-basis master-equation oracle).

Everything uses angular frequencies in rad/ns and times in ns.
"""

from .errors import (
    CalibrationInfeasible,
    ConfigError,
    DefectiveMatrix,
    DegenerateDenominator,
    DegenerateDetuning,
    DimensionMismatch,
    NonHermitianCoupling,
    NonPassive,
    QuadratureFailure,
    RankDeficient,
    SingularOmega,
    StaforgeError,
    TruncationBreach,
    ZeroEffectiveKappa,
    ZeroPath,
)
from .network import (
    ModeNetwork,
    load_network,
    network_from_config,
    network_to_config,
    qubit_block,
    reference_calibration,
    reference_device,
    single_mode,
)
from .pulses import (
    AnalyticPulse,
    PiecewiseConstantPulse,
    Pulse,
    SampledPulse,
    hold,
    quench,
    sin2_ramp,
)
from .hybrid import (
    HybridSpectrum,
    adiabatic_timescale,
    equilibrium_amplitude,
    equilibrium_state,
    hybridize,
)
from .langevin import Trace, diabatic_residual, propagate, settling_time
from .cd import cd_correction, cd_pulse, reference_pulse
from .multimode import (
    MinNormSolution,
    MultiportSolution,
    assemble_pulse,
    boundary_targets,
    filtered_transfer_matrix,
    optimize_peak_power,
    peak_power,
    peak_power_lower_bound,
    pulse_energy,
    section_edges,
    solve_min_norm,
    solve_multiport,
    solve_transfer,
    transfer_matrix,
)
from .iochain import (
    IoChainParams,
    effective_params,
    low_pass,
    output_field,
    reference_chain,
    s21_spectrum,
)
from .qsl import max_efficiency, path_length, quantum_efficiency
from .fock import (
    FockConfig,
    coherent_state,
    displaced_frame_check,
    fidelity_coherent,
    lindblad_evolve,
    liouvillian_spectrum,
    mean_field,
    mean_photon,
    predicted_spectrum,
    purity,
    top_population,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "StaforgeError",
    "DimensionMismatch",
    "NonHermitianCoupling",
    "NonPassive",
    "ConfigError",
    "CalibrationInfeasible",
    "DefectiveMatrix",
    "SingularOmega",
    "DegenerateDenominator",
    "DegenerateDetuning",
    "RankDeficient",
    "QuadratureFailure",
    "ZeroEffectiveKappa",
    "ZeroPath",
    "TruncationBreach",
    # network
    "ModeNetwork",
    "single_mode",
    "qubit_block",
    "network_from_config",
    "network_to_config",
    "load_network",
    "reference_device",
    "reference_calibration",
    # pulses
    "Pulse",
    "PiecewiseConstantPulse",
    "SampledPulse",
    "AnalyticPulse",
    "sin2_ramp",
    "quench",
    "hold",
    # hybrid
    "HybridSpectrum",
    "hybridize",
    "equilibrium_state",
    "equilibrium_amplitude",
    "adiabatic_timescale",
    # langevin
    "Trace",
    "propagate",
    "diabatic_residual",
    "settling_time",
    # cd
    "cd_pulse",
    "cd_correction",
    "reference_pulse",
    # multimode
    "section_edges",
    "transfer_matrix",
    "boundary_targets",
    "MinNormSolution",
    "solve_min_norm",
    "solve_transfer",
    "pulse_energy",
    "peak_power",
    "peak_power_lower_bound",
    "optimize_peak_power",
    "assemble_pulse",
    "MultiportSolution",
    "solve_multiport",
    "filtered_transfer_matrix",
    # iochain
    "IoChainParams",
    "effective_params",
    "output_field",
    "s21_spectrum",
    "low_pass",
    "reference_chain",
    # qsl
    "path_length",
    "quantum_efficiency",
    "max_efficiency",
    # fock
    "FockConfig",
    "coherent_state",
    "lindblad_evolve",
    "liouvillian_spectrum",
    "predicted_spectrum",
    "displaced_frame_check",
    "fidelity_coherent",
    "mean_field",
    "mean_photon",
    "purity",
    "top_population",
]
