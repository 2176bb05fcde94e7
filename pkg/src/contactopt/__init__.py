"""Contact-geometric optimization toolkit.

Dissipative optimization dynamics written as contact Hamiltonian systems:
exact-flow splitting integrators for the relativistic kinetic + potential +
dissipation Hamiltonian, the discrete optimizer family they induce (RGD and
its time-rescaled variant CRGD, next to GD/heavy-ball/Nesterov baselines),
numerical certification that every discrete map preserves the contact
structure, and a reproducible benchmark harness.
"""

from .contact import (
    ContactHamiltonian,
    ContactState,
    PointMap,
    Tangent,
    Trajectory,
    conformal_factor,
    contact_field_std1,
    contact_field_std2,
    dissipation_residual,
    eta_std1,
    eta_std2,
    map_F,
    reference_integrate,
)
from .harness import (
    ExperimentSpec,
    InitSpec,
    ObjectiveSpec,
    OptimizerEntry,
    QuantileBand,
    SearchRanges,
    estimate_rate,
    monte_carlo,
    random_search,
    run_bench,
)
from .integrators import (
    RelativisticParams,
    SplitFlowPlan,
    compose_step,
    crgd_hamiltonian,
    flow_phi1,
    flow_phi2,
    flow_phi3,
    integrate_split,
    split_plan,
    strang_step,
    time_shift,
    triple_jump_coefficients,
)
from .objectives import (
    Objective,
    camelback,
    check_gradient,
    get_objective,
    make_random_quadratic,
    quartic,
    rosenbrock,
)
from .optimizers import (
    OptimizerConfig,
    OptState,
    RunRecord,
    run,
)
from .presets import experiment_preset

__version__ = "0.1.0"

__all__ = [
    "ContactHamiltonian",
    "ContactState",
    "PointMap",
    "Tangent",
    "Trajectory",
    "conformal_factor",
    "contact_field_std1",
    "contact_field_std2",
    "dissipation_residual",
    "eta_std1",
    "eta_std2",
    "map_F",
    "reference_integrate",
    "ExperimentSpec",
    "InitSpec",
    "ObjectiveSpec",
    "OptimizerEntry",
    "QuantileBand",
    "SearchRanges",
    "estimate_rate",
    "monte_carlo",
    "random_search",
    "run_bench",
    "RelativisticParams",
    "SplitFlowPlan",
    "compose_step",
    "crgd_hamiltonian",
    "flow_phi1",
    "flow_phi2",
    "flow_phi3",
    "integrate_split",
    "split_plan",
    "strang_step",
    "time_shift",
    "triple_jump_coefficients",
    "Objective",
    "camelback",
    "check_gradient",
    "get_objective",
    "make_random_quadratic",
    "quartic",
    "rosenbrock",
    "OptimizerConfig",
    "OptState",
    "RunRecord",
    "run",
    "experiment_preset",
    "__version__",
]
