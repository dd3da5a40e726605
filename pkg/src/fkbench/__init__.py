"""Interacting-particle approximation of discrete weighted distribution flows.

The package has three layers: exact linear-algebra oracles for the flow and
all of its limiting constants (flow, bounds), a seeded particle engine with
per-step martingale bookkeeping (engine), and statistical experiments that
compare the two (lab).  zoo ships canonical models and cli ties everything
into reproducible file-based runs.
"""

__version__ = "0.1.0"

from .bounds import a3_constant, burkholder_d, mckean_gamma, mixing_bounds
from .engine import (
    ParticleCloud,
    RunConfig,
    RunTrace,
    doob_terms,
    increasing_increments,
    increasing_process_increment,
    init_particles,
    martingale_increment,
    martingale_increments,
    simulate,
    simulate_replicates,
    step_particles,
)
from .flow import (
    FlowAnalytics,
    analyze,
    boltzmann_gibbs,
    compatibility_residual,
    concentration_b,
    dobrushin_beta,
    exact_flow,
    limiting_increasing_process,
    limiting_variance,
    mckean_kernel,
    semigroups,
    step_phi,
)
from .lab import (
    EcdfSample,
    clt_rate_experiment,
    concentration_experiment,
    iid_moment_check,
    kolmogorov_distance,
    lp_moment_experiment,
    smoothing_bound,
    stein_check,
)
from .model import (
    FeynmanKacModel,
    McKeanSpec,
    TestFunction,
    indicator_function,
    load_function,
    load_model,
    make_function,
    make_model,
    save_function,
    save_model,
    validate_model,
    validate_spec,
)

__all__ = [name for name in dir() if not name.startswith("_")]
