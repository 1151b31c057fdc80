"""Exact Fock-space simulation and error-rate optimization for
teleportation-based linear-optical quantum logic.

The package splits along the physics: `fock` holds the sparse state
algebra, `ancilla` the entangled resource states and coefficient
profiles, `protocol` the branch-by-branch gate executions, `fidelity` the
closed-form error rates, `optimize` the profile search, `checks` the
built-in simulator-versus-formula consistency suite, and `cli` the batch
runner.
"""

__version__ = "0.1.0"

from .ancilla import (
    CoefficientProfile,
    custom_profile,
    load_profile,
    profile_linear,
    profile_sine,
    profile_uniform,
    save_profile,
)
from .fidelity import (
    ErrorReport,
    InputEnsemble,
    average_error_exact,
    average_error_second_order,
    build_error_report,
    continuum_error,
    cz_average_error_exact,
    klm_failure_probability,
    outcome_distribution,
    success_probability_exact,
    success_probability_second_order,
)
from .fock import (
    BasisSizeError,
    DensityMatrix,
    FockState,
    MeasurementOutcome,
    ModeUnitary,
    apply_mode_unitary,
    basis_state,
    cyclic_shift,
    dft_unitary,
    inner_product,
    measure_photon_numbers,
    permute_modes,
    phase_shift,
    reduced_density_matrix,
    tensor,
    vacuum,
)
from .optimize import (
    OptimizationResult,
    optimize_cz_independent_registers,
    optimize_exact,
    optimize_second_order,
    second_order_matrix,
)
from .protocol import (
    CnotBranch,
    GateOutcome,
    KlmSummary,
    QubitAmplitudes,
    ResidualFactorizationError,
    TeleportOutcome,
    cnot_direct,
    cz_gate,
    cz_sign_corrections,
    ideal_cz_output,
    klm_summary,
    output_fidelity_sq,
    phase_correction,
    teleport_enumerate,
    teleport_sample,
    two_qubit_fidelity_sq,
)

__all__ = [
    "BasisSizeError",
    "CnotBranch",
    "CoefficientProfile",
    "DensityMatrix",
    "ErrorReport",
    "FockState",
    "GateOutcome",
    "InputEnsemble",
    "KlmSummary",
    "MeasurementOutcome",
    "ModeUnitary",
    "OptimizationResult",
    "QubitAmplitudes",
    "ResidualFactorizationError",
    "TeleportOutcome",
    "apply_mode_unitary",
    "average_error_exact",
    "average_error_second_order",
    "basis_state",
    "build_error_report",
    "cnot_direct",
    "continuum_error",
    "custom_profile",
    "cyclic_shift",
    "cz_average_error_exact",
    "cz_gate",
    "cz_sign_corrections",
    "dft_unitary",
    "ideal_cz_output",
    "inner_product",
    "klm_failure_probability",
    "klm_summary",
    "load_profile",
    "measure_photon_numbers",
    "optimize_cz_independent_registers",
    "optimize_exact",
    "optimize_second_order",
    "outcome_distribution",
    "output_fidelity_sq",
    "permute_modes",
    "phase_correction",
    "phase_shift",
    "profile_linear",
    "profile_sine",
    "profile_uniform",
    "reduced_density_matrix",
    "save_profile",
    "second_order_matrix",
    "success_probability_exact",
    "success_probability_second_order",
    "teleport_enumerate",
    "teleport_sample",
    "tensor",
    "two_qubit_fidelity_sq",
    "vacuum",
    "__version__",
]
