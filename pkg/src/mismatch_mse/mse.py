"""Glassy-system solve, estimator filters, per-phase free energies, and MSE.

Branch structure.  The per-symbol error of the conditional-mean estimator
built on the assumed channel H' takes one of three forms:

  * ferromagnetic   (low rate)     the correct codeword dominates; error 0;
  * glassy          (r_g < R <= r_e, only when r_d < 0)  a thin shell of
    wrong codewords at the pinned energy eps_s dominates; the estimator is
    the linear filter Xi_2 and the error is E_g;
  * paramagnetic    (high rate)    exponentially many wrong codewords
    dominate; the estimator is Xi_1 and the error is E_p.

The glassy saddle energy eps_s solves Gamma(eps) + R = 0, where Gamma is the
wrong-codeword population exponent; it is bracketed by the paramagnetic
saddle energy mean(eps*) on the left and the typical energy (where Gamma = 0)
on the right, which provably straddle the root for 0 < R <= r_e.

Filter identities.  Differentiating the dominating branch of the partition
exponent under a tilt of the per-frequency output power yields remarkably
compact filters:

    Xi_1(w) = beta * H'(w)* / (gamma0 + beta |H'(w)|^2)
    Xi_2(w) = alpha2 * H'(w)* / (|H'(w)|^2 alpha2 + 2 alpha1 eps_s)

i.e. the receiver's own Wiener filter with its internal power normalization
(paramagnetic), and the same object under the glassy effective temperature
alpha2/(2 eps_s).  Both are reproduced here by the full derivative chains
(build_ep_chain / build_eg_chain) whose intermediates are retained for
inspection; the chains are certified against finite-difference tilt
derivatives in the test suite, and the two must agree to rounding error.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _glassy
from .errors import DegenerateChain, GlassyRootNotBracketed, NoSignChange
from .rates import (CriticalRates, Phase, PhaseLabel, _spectra, classify_phase,
                    compute_Pa, compute_eps_star, compute_rates, eps_tilde,
                    solve_gamma0)
from .solvers import RootConfig, solve_scalar_root, solve_system
from .spectrum import ProblemInstance, magnitude_sq, quadrature_mean


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GlassySolution:
    eps_s0: float
    alpha1: float
    alpha2: float
    residuals: np.ndarray   # (rate eq, power eq, energy-share eq)
    rate: float


class FilterKind(enum.Enum):
    WIENER = "wiener"
    XI1 = "xi1"
    XI2 = "xi2"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class LinearFilter:
    xi: np.ndarray
    kind: FilterKind = FilterKind.CUSTOM

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        if not np.all(np.isfinite(xi)):
            raise DegenerateChain("non-finite filter samples")
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True, eq=False)
class EpChain:
    """Paramagnetic estimator chain; every intermediate kept for inspection.

    b is the sensitivity of the power profile to the normalizer gamma0,
    c is (-2 beta times) the sensitivity of the saddle energy to gamma0,
    theta the induced normalizer-shift weight in the filter.
    """
    p_a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    theta: float
    xi1: np.ndarray


@dataclass(frozen=True, eq=False)
class EgChain:
    """Glassy estimator chain in dependency order (arrays over omega)."""
    k_w: np.ndarray
    t_w: np.ndarray
    d_w: np.ndarray
    r_w: np.ndarray
    q_w: np.ndarray
    v: float
    f: float
    gamma1: float
    gamma2: float
    gamma3: float
    eta1: float
    eta2: float
    eta3: float
    upsilon: np.ndarray
    lambda_w: np.ndarray
    r1: float
    r2: float
    j1: np.ndarray
    j2: np.ndarray
    j_w: np.ndarray
    xi2: np.ndarray


@dataclass(frozen=True, eq=False)
class MseReport:
    phase: PhaseLabel
    mse_per_symbol: float
    rates: CriticalRates
    filter: LinearFilter | None = None
    glassy: GlassySolution | None = None


# ---------------------------------------------------------------------------
# glassy system
# ---------------------------------------------------------------------------

def solve_alphas_given_eps(inst: ProblemInstance, eps: float, x0=None,
                           cfg: RootConfig = RootConfig()):
    """Multiplier pair (alpha1, alpha2) normalizing power and energy share."""
    s, sp, py = _spectra(inst)
    sol = _glassy.solve_alphas(eps, sp, s, py, inst.beta, inst.p_x,
                               x0=x0, cfg=cfg)
    return float(sol.point[0]), float(sol.point[1])


def gamma_of_eps(inst: ProblemInstance, eps: float, x0=None,
                 cfg: RootConfig = RootConfig()) -> float:
    """Wrong-codeword population exponent at energy eps."""
    _, sp, _ = _spectra(inst)
    a1, a2 = solve_alphas_given_eps(inst, eps, x0=x0, cfg=cfg)
    return _glassy.gamma_exponent(eps, a1, a2, sp, inst.p_x)


def _system_residuals(inst: ProblemInstance, rate: float):
    s, sp, py = _spectra(inst)
    b, px = inst.beta, inst.p_x

    def residuals(x):
        eps, a1, a2 = x
        if eps <= 0:
            return np.array([np.inf, np.inf, np.inf])
        pm = _glassy.alpha_residuals((a1, a2), eps, sp, s, py, b, px)
        if not np.all(np.isfinite(pm)):
            return np.array([np.inf, np.inf, np.inf])
        g = _glassy.gamma_exponent(eps, a1, a2, sp, px)
        return np.array([rate + g, pm[0], pm[1]])

    return residuals


def solve_glassy_system(inst: ProblemInstance, rate: float,
                        cfg: RootConfig = RootConfig(),
                        check_multiroot: bool = False) -> GlassySolution:
    """Saddle energy and multipliers at rate R (glassy branch).

    Solved as a scalar root of Gamma(eps) + R over a nested two-equation
    multiplier solve: that is exactly the structure of the defining system,
    and the outer root is bracketed by [mean(eps*), typical energy], on
    which Gamma + R provably changes sign for 0 < R <= r_e.
    """
    s, sp, py = _spectra(inst)
    b, px = inst.beta, inst.p_x
    gamma0 = solve_gamma0(inst, cfg)
    e_star = compute_eps_star(inst, gamma0)
    e_typ = _glassy.typical_energy(sp, py, px)

    warm = {"x": (gamma0, 2.0 * b * e_star)}
    memo = {}

    def gamma_plus_r(eps):
        if eps not in memo:
            sol = _glassy.solve_alphas(eps, sp, s, py, b, px, x0=warm["x"],
                                       extra_seeds=[(gamma0, 2.0 * b * eps)],
                                       cfg=cfg)
            warm["x"] = tuple(sol.point)
            memo[eps] = rate + _glassy.gamma_exponent(eps, *sol.point, sp, px)
        return memo[eps]

    f_lo, f_hi = gamma_plus_r(e_star), gamma_plus_r(e_typ)
    if f_lo > cfg.abs_tol or f_hi < -cfg.abs_tol:
        raise GlassyRootNotBracketed(
            f"Gamma+R = ({f_lo:.3e}, {f_hi:.3e}) at bracket "
            f"({e_star:.6g}, {e_typ:.6g}); rate {rate} outside (0, r_e]")
    if abs(f_lo) <= cfg.abs_tol:
        eps_s = e_star          # rate sits on the para boundary
    elif abs(f_hi) <= cfg.abs_tol:
        eps_s = e_typ
    else:
        try:
            eps_s = solve_scalar_root(gamma_plus_r, (e_star, e_typ), cfg)
        except NoSignChange as exc:  # pragma: no cover - excluded above
            raise GlassyRootNotBracketed(str(exc)) from exc

    sol = _glassy.solve_alphas(eps_s, sp, s, py, b, px, x0=warm["x"], cfg=cfg)
    a1, a2 = float(sol.point[0]), float(sol.point[1])
    if check_multiroot:
        _glassy.check_multiroot(eps_s, sp, s, py, b, px, (a1, a2), cfg)
    res = _system_residuals(inst, rate)((eps_s, a1, a2))
    return GlassySolution(eps_s0=eps_s, alpha1=a1, alpha2=a2,
                          residuals=res, rate=rate)


def solve_glassy_system_raw(inst: ProblemInstance, rate: float, x0,
                            cfg: RootConfig = RootConfig()) -> GlassySolution:
    """Cross-check path: one damped Newton on the raw three-equation system."""
    sol = solve_system(_system_residuals(inst, rate), np.asarray(x0, float),
                       cfg)
    eps_s, a1, a2 = sol.point
    return GlassySolution(eps_s0=float(eps_s), alpha1=float(a1),
                          alpha2=float(a2),
                          residuals=_system_residuals(inst, rate)(sol.point),
                          rate=rate)


# ---------------------------------------------------------------------------
# estimator chains
# ---------------------------------------------------------------------------

def build_ep_chain(inst: ProblemInstance, gamma0: float) -> EpChain:
    """Paramagnetic filter via the normalizer-shift derivative chain."""
    s, sp, py = _spectra(inst)
    b = inst.beta
    den = sp * b + gamma0
    p_a = compute_Pa(inst, gamma0)
    # d(P_a)/d(gamma0); strictly negative
    b_w = -(sp * b * (3.0 + 2.0 * b * s * inst.p_x) + gamma0) / den**3
    # -2 beta d(eps*)/d(gamma0)
    c_w = -b * (sp * b_w + 2.0 * b * sp * py / den**2)
    mean_b = quadrature_mean(b_w)
    if mean_b == 0.0:
        raise DegenerateChain("mean power-sensitivity vanished")
    theta = (quadrature_mean(1.0 / (gamma0 + sp * b)) - quadrature_mean(c_w)) \
        / mean_b
    hc = np.conj(inst.h_assumed.samples)
    lam_p = sp * b**2 / den**2
    xi1 = b * hc * theta / den**2 - hc * lam_p + 2.0 * b * hc / den
    return EpChain(p_a=p_a, b=b_w, c=c_w, theta=theta, xi1=xi1)


def build_eg_chain(inst: ProblemInstance, glassy: GlassySolution) -> EgChain:
    """Glassy filter via the full tilt-derivative chain, intermediates kept."""
    s, sp, py = _spectra(inst)
    b, px = inst.beta, inst.p_x
    eps, a1, a2 = glassy.eps_s0, glassy.alpha1, glassy.alpha2

    d_w = sp * a2 + 2.0 * a1 * eps
    if np.min(np.abs(d_w)) <= 0.0:
        raise DegenerateChain("d_w vanished")
    k_w = 2.0 * b * eps * d_w**2
    t_w = (4.0 * a1**2 * eps**2 * (1.0 + px * b * s)
           + 4.0 * b * sp * a1 * eps**2 + 2.0 * sp**2 * a2 * b * eps)
    r_w = 4.0 * a1 * eps**2 + sp * a2 * ((s * px + 1.0 / b) * a2 + 2.0 * eps)
    q_w = eps * (px * sp * a2 + 2.0 * px * a1 * eps)
    v = quadrature_mean(px * sp * a2 / q_w)

    eta1 = quadrature_mean((4.0 * d_w * eps**2 - 4.0 * r_w * eps) / d_w**3)
    eta2 = quadrature_mean(
        (d_w * sp * ((s * px + 1.0 / b) * a2 + 2.0 * eps)
         + sp * a2 * (s * px + 1.0 / b) * d_w - 2.0 * r_w * sp) / d_w**3)
    eta3 = quadrature_mean(
        (8.0 * d_w * a1 * eps + 2.0 * d_w * sp * a2 - 4.0 * r_w * a1) / d_w**3)

    gamma1 = quadrature_mean(
        (8.0 * a1 * eps**2 * (1.0 + px * b * s) + 4.0 * b * sp * eps**2) / k_w
        - 8.0 * t_w * b * eps**2 * d_w / k_w**2)
    gamma2 = quadrature_mean(
        (2.0 * k_w * b * eps * sp**2 - 4.0 * t_w * b * eps * d_w * sp) / k_w**2)
    gamma3 = quadrature_mean(
        (8.0 * a1**2 * eps * (1.0 + px * b * s) + 8.0 * b * eps * sp * a1
         + 2.0 * b * a2 * sp**2) / k_w
        - t_w * (2.0 * b * d_w**2 + 8.0 * b * eps * a1 * d_w) / k_w**2)

    upsilon = (-4.0 * b * a1 * eps * a2 - b * a2**2 * sp) / k_w
    lambda_w = a2**2 / d_w**2

    den12 = gamma2 * eta1 - eta2 * gamma1
    den21 = gamma1 * eta2 - eta1 * gamma2
    if den12 == 0.0 or den21 == 0.0:
        raise DegenerateChain("multiplier-shift determinant vanished")
    r1 = (eta2 * gamma3 - gamma2 * eta3) / den12
    r2 = (eta1 * gamma3 - gamma1 * eta3) / den21
    j1 = (eta2 * upsilon - gamma2 * lambda_w) / den12
    j2 = (eta1 * upsilon - gamma1 * lambda_w) / den21

    f = quadrature_mean((px * sp * r2 + 2.0 * px * eps * r1)
                        / (px * sp * a2 + 2.0 * px * a1 * eps)) / v
    vf = v * (1.0 - f)
    if vf == 0.0:
        raise DegenerateChain("v (1 - f) vanished")
    j_w = (j1 * quadrature_mean(2.0 * eps**2 * px / q_w)
           + j2 * quadrature_mean(eps * px * sp / q_w)) / vf
    xi2 = -2.0 * j_w * np.conj(inst.h_assumed.samples)
    return EgChain(k_w=k_w, t_w=t_w, d_w=d_w, r_w=r_w, q_w=q_w, v=v, f=f,
                   gamma1=gamma1, gamma2=gamma2, gamma3=gamma3,
                   eta1=eta1, eta2=eta2, eta3=eta3,
                   upsilon=upsilon, lambda_w=lambda_w, r1=r1, r2=r2,
                   j1=j1, j2=j2, j_w=j_w, xi2=xi2)


def xi1_closed_form(inst: ProblemInstance, gamma0: float) -> np.ndarray:
    """Xi_1 = beta H'* / (gamma0 + beta |H'|^2)."""
    sp = magnitude_sq(inst.h_assumed)
    return inst.beta * np.conj(inst.h_assumed.samples) \
        / (gamma0 + inst.beta * sp)


def xi2_closed_form(inst: ProblemInstance, glassy: GlassySolution) -> np.ndarray:
    """Xi_2 = alpha2 H'* / (|H'|^2 alpha2 + 2 alpha1 eps_s)."""
    sp = magnitude_sq(inst.h_assumed)
    d_w = sp * glassy.alpha2 + 2.0 * glassy.alpha1 * glassy.eps_s0
    return glassy.alpha2 * np.conj(inst.h_assumed.samples) / d_w


# ---------------------------------------------------------------------------
# filters and error values
# ---------------------------------------------------------------------------

def wiener_filter(inst: ProblemInstance) -> LinearFilter:
    """Matched linear-MMSE filter beta H* P_x / (1 + |H|^2 P_x beta)."""
    s = magnitude_sq(inst.h_true)
    xi = (inst.beta * np.conj(inst.h_true.samples) * inst.p_x
          / (1.0 + s * inst.p_x * inst.beta))
    return LinearFilter(xi=xi, kind=FilterKind.WIENER)


def filter_mse(filt: LinearFilter, inst: ProblemInstance) -> float:
    """Per-symbol error of estimating through the true channel with filter xi.

    P_x - 2 P_x mean(Re(xi H)) + mean(|xi|^2 (|H|^2 P_x + 1/beta)).
    """
    if filt.xi.shape[0] != inst.grid_size:
        raise DegenerateChain(
            f"filter grid {filt.xi.shape[0]} != instance grid {inst.grid_size}")
    s, _, py = _spectra(inst)
    cross = quadrature_mean(np.real(filt.xi * inst.h_true.samples))
    power = quadrature_mean(np.abs(filt.xi) ** 2 * py)
    return inst.p_x - 2.0 * inst.p_x * cross + power


def matched_mmse(inst: ProblemInstance, rate: float, s_x=None) -> float:
    """Matched-case asymptotic error; optional input spectral density s_x."""
    s = magnitude_sq(inst.h_true)
    sx = np.full(inst.grid_size, inst.p_x) if s_x is None else np.asarray(s_x)
    r_c = 0.5 * quadrature_mean(np.log1p(s * sx * inst.beta))
    if rate <= r_c:
        return 0.0
    return quadrature_mean(sx / (1.0 + s * sx * inst.beta))


def free_energy(inst: ProblemInstance, rate: float, branch: str,
                cfg: RootConfig = RootConfig()) -> float:
    """Per-symbol partition exponent of one branch: ferro, glassy, or para."""
    if branch == "ferro":
        return -rate - inst.beta * eps_tilde(inst)
    if branch == "para":
        gamma0 = solve_gamma0(inst, cfg)
        return (-0.5 * quadrature_mean(
            np.log(inst.p_x * gamma0
                   + inst.p_x * inst.beta * magnitude_sq(inst.h_assumed)))
            - inst.beta * compute_eps_star(inst, gamma0))
    if branch == "glassy":
        sol = solve_glassy_system(inst, rate, cfg)
        return -rate - inst.beta * sol.eps_s0
    raise ValueError(f"unknown branch {branch!r}")


def mismatched_mse(inst: ProblemInstance, rate: float,
                   cfg: RootConfig = RootConfig(),
                   rates: CriticalRates | None = None) -> MseReport:
    """Asymptotic per-symbol error of the mismatched conditional-mean
    estimator at rate R, with the producing filter attached."""
    if rates is None:
        rates = compute_rates(inst, cfg)
    label = classify_phase(inst, rate, rates)
    if label.phase is Phase.FERROMAGNETIC:
        return MseReport(phase=label, mse_per_symbol=0.0, rates=rates)
    if label.phase is Phase.GLASSY:
        sol = solve_glassy_system(inst, rate, cfg)
        filt = LinearFilter(xi=build_eg_chain(inst, sol).xi2,
                            kind=FilterKind.XI2)
        return MseReport(phase=label, mse_per_symbol=filter_mse(filt, inst),
                         rates=rates, filter=filt, glassy=sol)
    filt = LinearFilter(xi=build_ep_chain(inst, rates.gamma0).xi1,
                        kind=FilterKind.XI1)
    return MseReport(phase=label, mse_per_symbol=filter_mse(filt, inst),
                     rates=rates, filter=filt)
