"""Asymptotic matched/mismatched MSE for codeword estimation over Gaussian
stationary (Toeplitz) channels: critical rates, phase classification,
estimator filters, and an exact finite-n Monte-Carlo validator."""

__version__ = "0.1.0"

from .spectrum import (DEFAULT_GRID_SIZE, FrequencyResponse, ProblemInstance,
                       cross_re, diff_magnitude_sq, magnitude_sq,
                       make_builtin_filter, omega_grid, quadrature_mean,
                       resample)
from .solvers import RootConfig, SystemSolution, solve_scalar_root, solve_system
from .rates import (CriticalRates, Phase, PhaseLabel, classify_phase,
                    compute_Pa, compute_Rd, compute_Re, compute_Rg,
                    compute_eps_star, compute_rates, eps_tilde, matched_Rc,
                    solve_gamma0)
from .mse import (EgChain, EpChain, FilterKind, GlassySolution, LinearFilter,
                  MseReport, build_eg_chain, build_ep_chain, filter_mse,
                  free_energy, gamma_of_eps, matched_mmse, mismatched_mse,
                  solve_alphas_given_eps, solve_glassy_system,
                  solve_glassy_system_raw, wiener_filter, xi1_closed_form,
                  xi2_closed_form)
from .simulator import (SimConfig, SimResult, apply_channel,
                        exact_posterior_mean, run_simulation, sample_codebook)

__all__ = [
    "DEFAULT_GRID_SIZE", "FrequencyResponse", "ProblemInstance",
    "cross_re", "diff_magnitude_sq", "magnitude_sq", "make_builtin_filter",
    "omega_grid", "quadrature_mean", "resample",
    "RootConfig", "SystemSolution", "solve_scalar_root", "solve_system",
    "CriticalRates", "Phase", "PhaseLabel", "classify_phase", "compute_Pa",
    "compute_Rd", "compute_Re", "compute_Rg", "compute_eps_star",
    "compute_rates", "eps_tilde", "matched_Rc", "solve_gamma0",
    "EgChain", "EpChain", "FilterKind", "GlassySolution", "LinearFilter",
    "MseReport", "build_eg_chain", "build_ep_chain", "filter_mse",
    "free_energy", "gamma_of_eps", "matched_mmse", "mismatched_mse",
    "solve_alphas_given_eps", "solve_glassy_system",
    "solve_glassy_system_raw", "wiener_filter", "xi1_closed_form",
    "xi2_closed_form",
    "SimConfig", "SimResult", "apply_channel", "exact_posterior_mean",
    "run_simulation", "sample_codebook",
]
