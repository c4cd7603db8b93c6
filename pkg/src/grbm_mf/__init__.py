"""Naive mean-field inference for Gaussian restricted Boltzmann machines."""

from grbm_mf.exact import (
    CapacityError,
    ExactMoments,
    GibbsEstimate,
    exact_free_energy,
    exact_moments,
    gibbs_estimate,
)
from grbm_mf.meanfield import (
    MfSolution,
    SolverOptions,
    free_energy_type1,
    free_energy_type2,
    hidden_unit_stats,
    kld_gap,
    solve_type1,
    solve_type2,
)
from grbm_mf.model import (
    GrbmParams,
    MarginalBm,
    SampleSpace,
    energy,
    hidden_field_given_visible,
    marginalize,
    sample_params,
    visible_mean_given_hidden,
)

__all__ = [
    "CapacityError",
    "ExactMoments",
    "GibbsEstimate",
    "GrbmParams",
    "MarginalBm",
    "MfSolution",
    "SampleSpace",
    "SolverOptions",
    "energy",
    "exact_free_energy",
    "exact_moments",
    "free_energy_type1",
    "free_energy_type2",
    "gibbs_estimate",
    "hidden_field_given_visible",
    "hidden_unit_stats",
    "kld_gap",
    "marginalize",
    "sample_params",
    "solve_type1",
    "solve_type2",
    "visible_mean_given_hidden",
]
