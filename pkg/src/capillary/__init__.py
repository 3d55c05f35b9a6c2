"""Volume-preserving droplet dynamics on rough inclined substrates.

Moving-boundary finite-difference schemes (first order unconditionally
stable, second order predictor-corrector) for motion by mean curvature of
the capillary surface coupled with contact-line dynamics, plus
desingularized quasi-static DAE solvers (sessile and Kelvin-pendant) and
closed-form references used as accuracy oracles.
"""

from . import errors
from .core import (
    AngleReadout,
    DropletState,
    PhysicalParams,
    TimeSeries,
    contact_angles,
    energy_of,
    grid_slopes,
    interior_derivatives,
    one_sided_slope,
    volume_of,
)
from .exact import (
    BreathingSpec,
    breathing_params,
    breathing_state,
    breathing_volume,
    cap_volume_2d,
    cap_volume_3d,
)
from .harness import (
    OrderTable,
    build_scenario,
    convergence_study,
    run_scenario,
    scenario_names,
)
from .linsolve import BorderedTridiag, newton_elliptic, solve_bordered_tridiag
from .quasistatic import (
    PendantDae,
    PendantState,
    QuasiStaticState,
    SessileDae,
    cm_bound,
    compatible_pendant_data,
    compatible_sessile_data,
    desingularized_b,
    desingularized_volume,
    equilibrium_sessile,
    reconstruct_profile,
    solve_algebraic,
)
from .schemes import (
    SchemeConfig,
    boundary_update_first,
    boundary_update_second,
    rescale_first,
    rescale_second,
    run_simulation,
    step_first,
    step_second,
)
from .substrate import (
    BezierSubstrate,
    CubicBezierSegment,
    FlatSubstrate,
    GrooveSubstrate,
    SubstrateProfile,
    bezier_eval,
    bezier_inverse,
    groove_eval,
    substrate_from_config,
    teapot_profile,
)

__version__ = "0.1.0"
