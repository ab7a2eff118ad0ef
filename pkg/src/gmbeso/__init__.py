"""Model-based extended state observers and delayed unknown input observers
for discrete-time SISO LTI plants."""

__version__ = "0.1.0"

from .system_model import (
    AssumptionError, AugmentedModel, ModelError, StateSpaceModel, StructuralReport,
    augment, build_model, char_coeffs, has_no_invariant_zeros, is_observable,
    markov_parameters, observability_matrix, relative_degree, rosenbrock_rank_test,
    structural_report,
)
from .eso import (
    EsoDesign, EsoState, TransformChain, build_transform_chain,
    continuous_bandwidth_to_eigenvalue, design_eso, design_eso_gain, eso_step, run_eso,
)
from .uio import StackedMaps, UioDesign, UioEstimate, build_stacked_maps, design_uio, run_uio
from .error_kernel import (
    error_bound, kernel_sensitivity, kernel_value, kernel_values, predict_error,
)
from .zero_dynamics import (
    CanonicalWithFb, NormalForm, build_canonical_fb, build_normal_form, design_zd_eso,
    total_disturbance_fa, total_disturbance_fb,
)
from .simulation import (
    RunResult, Scenario, SignalSpec, generate_signal, run_scenario, sea_preset, simulate_plant,
)
