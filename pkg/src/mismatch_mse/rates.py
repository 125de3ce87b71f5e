"""Critical rates and phase classification.

Four thresholds govern the estimator error as the code rate R varies:

    r_e  where the error partition switches between the saddle-pinned and
         free (exponentially populated) wrong-codeword regimes;
    r_d  the margin of the correct codeword against the free regime,
         positive for a pessimistic receiver, negative for an optimistic one;
    r_c = r_e + r_d   ferro/para boundary when r_d >= 0;
    r_g  ferro/glassy boundary, meaningful only when r_d < 0.

r_d is evaluated twice, by the direct multi-integral expression and by the
identity r_d = beta*mean(eps*) - 1/2 - (beta/2)*P_x*mean(|H - H'|^2), and the
two are required to agree; the identity form is authoritative on conflict.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _glassy
from .errors import (CrossCheckMismatch, Gamma0NotBracketed, LogOfNonPositive,
                     NoSignChange)
from .solvers import RootConfig, solve_scalar_root
from .spectrum import (ProblemInstance, cross_re, diff_magnitude_sq,
                       magnitude_sq, quadrature_mean)

RD_CROSSCHECK_TOL = 1e-6


def _spectra(inst: ProblemInstance):
    """(s, sp, py): true power, assumed power, typical output power."""
    s = magnitude_sq(inst.h_true)
    sp = magnitude_sq(inst.h_assumed)
    py = s * inst.p_x + 1.0 / inst.beta
    return s, sp, py


def compute_Pa(inst: ProblemInstance, gamma0: float) -> np.ndarray:
    """Paramagnetic power profile of the wrong-codeword population."""
    s, sp, py = _spectra(inst)
    b = inst.beta
    return (sp * b * (1.0 + b * py) + gamma0) / (sp * b + gamma0) ** 2


def solve_gamma0(inst: ProblemInstance,
                 cfg: RootConfig = RootConfig()) -> float:
    """Normalizer gamma0 > 0 with mean(P_a) = P_x.

    mean(P_a) is strictly decreasing in gamma0, so the root is unique.
    """
    s, sp, py = _spectra(inst)
    b, px = inst.beta, inst.p_x

    def f(g):
        return float(np.mean((sp * b * (1.0 + b * py) + g)
                             / (sp * b + g) ** 2)) - px

    lo, hi = 1e-8 / px, 1e4 / px
    if f(lo) < 0 or f(hi) > 0:
        raise Gamma0NotBracketed(
            f"mean power crosses P_x outside ({lo}, {hi}): "
            f"f(lo)={f(lo):.3e}, f(hi)={f(hi):.3e}")
    try:
        # bracket is definitive; no expansion wanted
        return solve_scalar_root(f, (lo, hi), cfg)
    except NoSignChange as exc:  # pragma: no cover - excluded above
        raise Gamma0NotBracketed(str(exc)) from exc


def compute_Re(inst: ProblemInstance, gamma0: float) -> float:
    """Rate below which the wrong-codeword energy is pinned at the saddle."""
    _, sp, _ = _spectra(inst)
    arg = inst.p_x * gamma0 + inst.p_x * inst.beta * sp
    if np.min(arg) <= 0.0:
        raise LogOfNonPositive(f"min argument {np.min(arg)} in r_e")
    return 0.5 * quadrature_mean(np.log(arg))


def eps_star_pointwise(inst: ProblemInstance, gamma0: float) -> np.ndarray:
    """Per-frequency saddle energy of the free wrong-codeword regime."""
    s, sp, py = _spectra(inst)
    b = inst.beta
    pa = compute_Pa(inst, gamma0)
    corr = sp * b * py / (gamma0 + sp * b)
    return py / 2.0 + sp * pa / 2.0 - corr


def compute_eps_star(inst: ProblemInstance, gamma0: float) -> float:
    """Frequency-averaged saddle energy; always >= 1/(2 beta)."""
    return quadrature_mean(eps_star_pointwise(inst, gamma0))


def compute_Rd(inst: ProblemInstance, gamma0: float) -> float:
    """Correct-codeword margin, by the direct expression, certified against
    the saddle-energy identity."""
    s, sp, py = _spectra(inst)
    b, px = inst.beta, inst.p_x
    pa = compute_Pa(inst, gamma0)
    # sqrt(1 + 4 b^2 sp py pa) in exact rational form
    root = (sp * b * (3.0 + 2.0 * b * s * px) + gamma0) / (sp * b + gamma0)
    direct = (0.5
              + b * px * quadrature_mean(cross_re(inst.h_assumed, inst.h_true))
              + 0.5 * quadrature_mean(sp * b * (pa - px))
              - 0.5 * quadrature_mean(root))
    identity = (b * compute_eps_star(inst, gamma0)
                - 0.5
                - 0.5 * b * px * quadrature_mean(
                    diff_magnitude_sq(inst.h_true, inst.h_assumed)))
    if abs(direct - identity) > RD_CROSSCHECK_TOL:
        raise CrossCheckMismatch(
            f"r_d direct={direct!r} vs identity={identity!r}")
    return direct


def eps_tilde(inst: ProblemInstance) -> float:
    """Energy of the correct codeword under the assumed channel."""
    return (1.0 / (2.0 * inst.beta)
            + 0.5 * inst.p_x * quadrature_mean(
                diff_magnitude_sq(inst.h_assumed, inst.h_true)))


def compute_Rg(inst: ProblemInstance, gamma0: float | None = None,
               cfg: RootConfig = RootConfig()):
    """(r_g, eps_tilde, alpha1, alpha2) from the two-constraint solve at the
    correct-codeword energy.  Meaningful as a phase boundary only when
    r_d < 0, but computable for any instance."""
    s, sp, py = _spectra(inst)
    b, px = inst.beta, inst.p_x
    if gamma0 is None:
        gamma0 = solve_gamma0(inst, cfg)
    e_t = eps_tilde(inst)
    e_star = compute_eps_star(inst, gamma0)
    sol = _glassy.solve_alphas(
        e_t, sp, s, py, b, px,
        extra_seeds=[(gamma0, 2.0 * b * e_star)], cfg=cfg)
    a1, a2 = sol.point
    r_g = -_glassy.gamma_exponent(e_t, a1, a2, sp, px)
    return r_g, e_t, float(a1), float(a2)


def matched_Rc(inst: ProblemInstance) -> float:
    """Matched-case critical rate; uses the true channel only."""
    s = magnitude_sq(inst.h_true)
    return 0.5 * quadrature_mean(np.log1p(s * inst.p_x * inst.beta))


# ---------------------------------------------------------------------------
# assembled rates and phase labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalRates:
    gamma0: float
    r_e: float
    r_d: float
    r_c: float
    eps_tilde: float
    r_g: float | None = None           # present iff r_d < 0
    alpha_tilde: tuple | None = None   # (alpha1, alpha2) at eps_tilde

    def __post_init__(self):
        assert abs(self.r_c - (self.r_e + self.r_d)) <= 1e-14
        if self.r_g is not None:
            assert self.r_g <= self.r_e + 1e-9


class Phase(enum.Enum):
    FERROMAGNETIC = "F"
    GLASSY = "G"
    PARAMAGNETIC = "P"


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    boundary_flag: bool = False


def compute_rates(inst: ProblemInstance,
                  cfg: RootConfig = RootConfig()) -> CriticalRates:
    """Solve gamma0 and assemble every threshold for the instance."""
    gamma0 = solve_gamma0(inst, cfg)
    r_e = compute_Re(inst, gamma0)
    r_d = compute_Rd(inst, gamma0)
    e_t = eps_tilde(inst)
    if r_d < 0:
        r_g, e_t, a1, a2 = compute_Rg(inst, gamma0, cfg)
        return CriticalRates(gamma0=gamma0, r_e=r_e, r_d=r_d, r_c=r_e + r_d,
                             eps_tilde=e_t, r_g=r_g, alpha_tilde=(a1, a2))
    return CriticalRates(gamma0=gamma0, r_e=r_e, r_d=r_d, r_c=r_e + r_d,
                         eps_tilde=e_t)


def classify_phase(inst: ProblemInstance, rate: float, rates: CriticalRates,
                   tie_tol: float = 1e-9) -> PhaseLabel:
    """Label the phase at rate R; ties resolve to the lower-rate phase."""
    if rates.r_d >= 0:
        thresholds = [rates.r_c]
        phase = (Phase.FERROMAGNETIC if rate <= rates.r_c
                 else Phase.PARAMAGNETIC)
    else:
        thresholds = [rates.r_g, rates.r_e]
        if rate <= rates.r_g:
            phase = Phase.FERROMAGNETIC
        elif rate <= rates.r_e:
            phase = Phase.GLASSY
        else:
            phase = Phase.PARAMAGNETIC
    boundary = any(abs(rate - t) <= tie_tol for t in thresholds)
    return PhaseLabel(phase=phase, boundary_flag=boundary)
