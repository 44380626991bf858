"""Graph-encoded movement primitives with a safe impedance simulator.

Trajectories taught by demonstration are encoded as a chain of
(position ⊕ timestamp) nodes; queries snap to the most correlated node
and return its successor, giving an inversion-free policy with a built-in
uncertainty measure.  Execution runs through a simulated Cartesian
impedance controller with critical damping, displacement/stiffness
saturation, uncertainty-driven stiffness regulation, and optional
mechanical coupling of two arms; a WebSocket service exposes live
teaching and correction.
"""

from .config import Defaults, load_defaults
from .coupling import (
    CouplingConfig,
    DualArmState,
    coupling_forces,
    critical_coupling,
    dual_step,
    saturate_coupling,
)
from .engine import (
    ArmTick,
    FieldGrid,
    Phase,
    RolloutStats,
    TickRecord,
    execute_dual_tick,
    execute_tick,
    rollout_ensemble,
    run_active_teaching,
    run_execution,
    run_passive_teaching,
    vector_field,
)
from .gp import GpBaselineModel, fit_gp_baseline, fit_gp_from_demonstration, gp_query_baseline
from .impedance import (
    ArmState,
    ControlCommand,
    Gains,
    SafetyLimits,
    SimConfig,
    displacement_bound,
    make_gains,
    regulate_stiffness,
    regulation_scale,
    saturate_displacement,
    saturate_stiffness,
    step_dynamics,
    stiffness_upper_bound,
)
from .kernels import KernelMode, KernelParams, exp_kernel, nearest_node
from .model import (
    Demonstration,
    GraphModel,
    QueryResult,
    append_session,
    fit_from_demonstration,
    ggp_query,
    joint_correlation,
)
from .trajio import (
    TrajectoryFormatError,
    generate_letter_b,
    letter_b_intersection,
    load_model,
    read_trajectory,
    save_model,
    write_trajectory,
)

__version__ = "0.1.0"
