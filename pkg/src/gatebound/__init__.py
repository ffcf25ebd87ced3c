"""Performance limits and robust pulse optimization for quantum gates
under bounded Hamiltonian uncertainty."""

from .bounds import (
    BoundResult,
    T_OMEGA_SATURATION,
    UncertaintyBounds,
    bound_curve,
    effective_error_bound,
    fidelity_lower_bound,
    invert_bound,
    measure_uncertainty,
)
from .fidelity import (
    FidelityReport,
    average_lower_bound,
    fidelity_report,
    nominal_fidelity,
    nuclear_fidelity,
    state_fidelity,
    worst_case_exact,
    worst_case_lower_bound,
)
from .model import (
    HamiltonianModel,
    PwcControls,
    TargetGate,
    hadamard_gate,
    load_model,
    save_model,
)
from .optimize import (
    OptimizationOutcome,
    OptimizerConfig,
    nullspace_check,
    objective_nominal,
    objective_robust,
    optimize_single_stage,
    optimize_two_stage,
)
from .propagation import (
    InteractionOps,
    PropagationResult,
    interaction_ops,
    propagate_bath,
    propagate_nominal,
    propagate_total,
    time_average,
)
from .bath import (
    BathEnsembleSpec,
    EvaluationRecord,
    effective_uncertainty,
    evaluate_ensemble,
    sample_bath,
    summarize_ensemble,
)

__version__ = "0.1.0"
