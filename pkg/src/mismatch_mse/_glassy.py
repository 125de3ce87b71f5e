"""Low-level per-frequency saddle machinery for the wrong-codeword exponent.

Everything here works on raw sampled arrays so that the public rate and MSE
modules can share one implementation, and so the oracle tests can drive it
with synthetic staircase data that is not tied to a ProblemInstance.

Notation (arrays over the omega grid):
    sp  = |H'(w)|^2   assumed-channel power response
    s   = |H(w)|^2    true-channel power response
    py  = s*P_x + 1/beta   typical per-frequency output power
    c   = py/2             fixed half output power (independent of the
                           tilt used to extract estimator coefficients)

Given the outer energy eps and multipliers (a1, a2), the per-frequency
optimum of the constrained codeword-population problem is water-filling-like
under the effective parameters be = a2/(2*eps), ge = a1:

    P*(w)  = (sp*be*(1 + be*py) + ge) / (sp*be + ge)^2
    W(w)   = sp*be*py / (ge + sp*be)          correlation numerator
    mu*(w) = (c + sp*P*/2 - W) / eps          per-frequency energy share

a1 normalizes mean(P*) to P_x, a2 normalizes mean(mu*) to 1.  The optimized
population exponent is

    Gamma(eps) = (1/2) mean ln( 2*eps / (P_x*sp*a2 + 2*P_x*a1*eps) ).

The paramagnetic case is the special point (a1, a2) = (gamma0, 2*beta*eps):
there mu* is unconstrained and P* is the paramagnetic power allocation.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DegenerateGamma, MaxIters, NonFinite, SingularJacobian
from .solvers import RootConfig, SystemSolution, solve_system

RESIDUAL_TOL = 1e-9


def alloc_spectrum(eps, a1, a2, sp, py):
    """P*(w): stationary power profile of wrong codewords at energy eps."""
    d = sp * a2 + 2.0 * a1 * eps
    return (4.0 * a1 * eps**2 + sp * a2 * (py * a2 + 2.0 * eps)) / d**2


def energy_share(eps, a1, a2, sp, py, beta, px, s):
    """mu*(w): stationary per-frequency share of the total energy."""
    d = sp * a2 + 2.0 * a1 * eps
    t = (4.0 * a1**2 * eps**2 * (1.0 + px * beta * s)
         + 4.0 * beta * sp * a1 * eps**2
         + 2.0 * sp**2 * a2 * beta * eps)
    return t / (2.0 * beta * eps * d**2)


def alpha_residuals(x, eps, sp, s, py, beta, px):
    """(mean power - P_x, mean energy share - 1); +inf outside the domain."""
    a1, a2 = x
    d = sp * a2 + 2.0 * a1 * eps
    if np.min(d) <= 0.0:
        return np.array([np.inf, np.inf])
    return np.array([
        np.mean(alloc_spectrum(eps, a1, a2, sp, py)) - px,
        np.mean(energy_share(eps, a1, a2, sp, py, beta, px, s)) - 1.0,
    ])


def gamma_exponent(eps, a1, a2, sp, px):
    """Gamma(eps) at a solved multiplier pair."""
    arg = 2.0 * eps / (px * sp * a2 + 2.0 * px * a1 * eps)
    if np.min(arg) <= 0.0 or not np.all(np.isfinite(arg)):
        raise DegenerateGamma(
            f"population exponent undefined at eps={eps}: "
            f"min log-argument {np.min(arg)}")
    return 0.5 * float(np.mean(np.log(arg)))


def typical_energy(sp, py, px):
    """Energy level populated by almost all wrong codewords (Gamma = 0)."""
    return float(np.mean(py) / 2.0 + px * np.mean(sp) / 2.0)


def solve_alphas(eps, sp, s, py, beta, px, x0=None, extra_seeds=(),
                 cfg: RootConfig = RootConfig()) -> SystemSolution:
    """Solve the two multiplier constraints at fixed eps.

    Seed order: caller warm start, any extra seeds, the matched-diagonal
    guess (1/P_x, 1), and the typical-energy exact point (1/P_x, 0).  If all
    direct Newton attempts fail, fall back to a homotopy in eps starting
    from the typical energy, where (1/P_x, 0) is exact.
    """
    if not (eps > 0 and np.isfinite(eps)):
        raise DegenerateGamma(f"energy must be positive, got {eps}")
    seeds = []
    if x0 is not None:
        seeds.append(tuple(x0))
    seeds.extend(tuple(sd) for sd in extra_seeds)
    seeds.extend([(1.0 / px, 1.0), (1.0 / px, 0.0)])

    def residuals(x):
        return alpha_residuals(x, eps, sp, s, py, beta, px)

    last_exc = None
    for seed in seeds:
        try:
            sol = solve_system(residuals, np.asarray(seed, float), cfg)
        except (NonFinite, SingularJacobian, MaxIters) as exc:
            last_exc = exc
            continue
        if sol.converged and sol.residual_norm <= RESIDUAL_TOL:
            return sol
    # homotopy: march eps from the typical energy (exact seed) to the target
    e_path = typical_energy(sp, py, px)
    x = np.array([1.0 / px, 0.0])
    n_steps = 24
    for k in range(1, n_steps + 1):
        e_k = e_path * (eps / e_path) ** (k / n_steps)
        try:
            sol = solve_system(
                lambda z: alpha_residuals(z, e_k, sp, s, py, beta, px), x, cfg)
        except (NonFinite, SingularJacobian, MaxIters) as exc:
            last_exc = exc
            break
        if not (sol.converged and sol.residual_norm <= RESIDUAL_TOL):
            last_exc = MaxIters(
                f"homotopy stalled at eps={e_k} (residual {sol.residual_norm})")
            break
        x = sol.point
    else:
        return sol
    raise MaxIters(
        f"multiplier solve failed at eps={eps}: {last_exc}") from last_exc


def check_multiroot(eps, sp, s, py, beta, px, reference,
                    cfg: RootConfig = RootConfig()):
    """Re-solve cold and warn if a different root is found (reported, not
    resolved: uniqueness of the multiplier pair is not established)."""
    try:
        cold = solve_alphas(eps, sp, s, py, beta, px, cfg=cfg)
    except MaxIters:
        return
    if np.max(np.abs(cold.point - np.asarray(reference))) > 1e-6:
        warnings.warn(
            f"multiple multiplier roots suspected at eps={eps}: "
            f"{tuple(cold.point)} vs {tuple(reference)}",
            RuntimeWarning, stacklevel=2)
