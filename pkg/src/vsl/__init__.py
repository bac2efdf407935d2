"""Vorticity stability lab.

Rearrangement machinery, explicit stability-bound evaluators, and a
pseudo-spectral 2D Euler solver for empirically verifying the stability of
radial monotone vorticities under perturbation.
"""

__version__ = "0.1.0"

from .field import (  # noqa: F401
    GridSpec,
    RadialProfile,
    ScalarField,
    angular_impulse,
    boundary_mass_fraction,
    higher_moment,
    jp_norm,
    lp_norm,
    patch_conserved_quantity,
    quadrature,
    read_vsf,
    sample_profile,
    write_vsf,
)
from .rearrange import (  # noqa: F401
    AnnulusStack,
    DistributionFunction,
    cutoff,
    distribution,
    flatten_annulus,
    levelset_simple_function,
    nonexpansivity_check,
    rearrangement_deficit_check,
    symmetric_rearrangement,
)
from .bounds import (  # noqa: F401
    PerturbationSize,
    ProfileParams,
    bound_j,
    bound_jp_total,
    bound_l1,
    bound_lp,
    tail_radius_for,
)
from .euler import (  # noqa: F401
    FlowState,
    SolverConfig,
    conservation_report,
    evolve,
    step,
    velocity_from_vorticity,
)
from .profiles import PerturbationSpec, make_profile, perturb  # noqa: F401
from .harness import ExperimentConfig, load_report, run_experiment  # noqa: F401
