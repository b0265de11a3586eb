"""Fixed-time indirect model reference adaptive control.

Filtered-regressor parameter identification with fixed-time convergence
under interval excitation, homogeneity-based tracking control with LMI
synthesis, and a deterministic simulation harness.
"""

from .config import DesignReport, audit, build_design, load_config, validate_config
from .controller import (ControllerState, c4_margin, control_input, kd_derivative,
                         kx_from_estimate, lyapunov_value)
from .design import (C1Solution, HomogeneousDesign, LMIReport, LMISolution, c1_from_preset,
                     c1_residual, delta_bounds, estimate_beta, final_time, gain_from_lmi,
                     lyapunov_check, lyapunov_solve, search_lmi, solve_c1, verify_lmi)
from .estimator import (EstimatorState, SettlingBound, baseline_exponential_update,
                        fxt_update, settling_bound, signed_power)
from .exceptions import (BisectionError, C1DegenerateError, DesignError, FxtMracError,
                         InvalidAuxiliaryConstants, InvalidInputError, PhaseError,
                         SimulationBlowUp, SynthesisFailed)
from .excitation import (ExcitationReport, detect_excitation, gain_for_mu, mu_floor,
                         update_gram, with_m_diagnostics)
from .filters import (DisturbanceBounds, FilterBank, disturbance_envelope, filter_derivatives,
                      g_reconstruct)
from .homogeneity import (CanonicalNorm, Dilation, ExplicitNorm, dilation_apply,
                          homogeneity_degree_check, monotonicity_constants, phi_canonical,
                          phi_explicit, phi_gradient)
from .model import (PlantModel, ReferenceModel, SignalSpec, SineTerm, plant_derivative,
                    reference_derivative, regressor, unvectorize_params, vectorize_params)
from .presets import get_preset, preset_names
from .sim import EstimatorConfig, Scenario, Trajectory, run, scenario_from_config, \
    sweep_initial_conditions

__version__ = "0.1.0"
