"""Scalar and small-system nonlinear solvers.

Deterministic by construction: no randomized restarts, so identical inputs
give bit-identical outputs.  The system solver is a damped Newton iteration
with a forward-difference Jacobian; k is always 2 or 3 here, so the cost of
numerical differentiation is irrelevant and it avoids hand-transcribing long
analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaxIters, NonFinite, NoSignChange, SingularJacobian


@dataclass(frozen=True)
class RootConfig:
    abs_tol: float = 1e-11
    max_iters: int = 200
    bracket_expansion: float = 2.0

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise ValueError("abs_tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class SystemSolution:
    point: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def _eval_finite(f, x):
    fx = f(x)
    if not np.isfinite(fx):
        raise NonFinite(f"f({x}) = {fx}")
    return fx


def solve_scalar_root(f, initial_bracket, cfg: RootConfig = RootConfig()) -> float:
    """Root of a continuous scalar function, |f(x)| <= abs_tol on return.

    Bisection steps guarantee progress; a secant step replaces the midpoint
    whenever it lands strictly inside the current bracket.  If the initial
    bracket does not straddle a sign change it is expanded geometrically
    (up to 60 doublings) before giving up.
    """
    lo, hi = float(initial_bracket[0]), float(initial_bracket[1])
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = _eval_finite(f, lo), _eval_finite(f, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi

    expansions = 0
    width = hi - lo
    while flo * fhi > 0:
        if expansions >= 60:
            raise NoSignChange(
                f"no sign change in [{lo}, {hi}]: f = ({flo}, {fhi})")
        width *= cfg.bracket_expansion
        lo = lo - width
        hi = hi + width
        flo, fhi = _eval_finite(f, lo), _eval_finite(f, hi)
        expansions += 1

    x, fx = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    for _ in range(cfg.max_iters):
        if abs(fx) <= cfg.abs_tol:
            return x
        mid = 0.5 * (lo + hi)
        x_new = mid
        # secant through the bracket endpoints, accepted only if interior
        if fhi != flo:
            secant = hi - fhi * (hi - lo) / (fhi - flo)
            if lo < secant < hi:
                x_new = secant
        f_new = _eval_finite(f, x_new)
        if f_new == 0.0:
            return x_new
        if flo * f_new < 0:
            hi, fhi = x_new, f_new
        else:
            lo, flo = x_new, f_new
        # enforce at least bisection-rate shrinkage, else take the midpoint
        if (hi - lo) > 0.5 * width:
            mid = 0.5 * (lo + hi)
            f_mid = _eval_finite(f, mid)
            if flo * f_mid < 0:
                hi, fhi = mid, f_mid
            else:
                lo, flo = mid, f_mid
        width = hi - lo
        x, fx = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    if abs(fx) <= cfg.abs_tol:
        return x
    raise MaxIters(f"|f(x)| = {abs(fx)} > {cfg.abs_tol} after {cfg.max_iters} iters")


def _fd_jacobian(F, x, Fx):
    k = x.size
    J = np.empty((k, k))
    for j in range(k):
        h = max(1e-7, 1e-7 * abs(x[j]))
        xp = x.copy()
        xp[j] += h
        Fp = np.asarray(F(xp), dtype=float)
        J[:, j] = (Fp - Fx) / h
    return J


def solve_system(F, x0, cfg: RootConfig = RootConfig()) -> SystemSolution:
    """Damped Newton for F(x) = 0 with x in R^2 or R^3.

    The step is halved (up to 30 times) until the residual norm decreases;
    converged means ||F||_inf <= abs_tol, re-checkable by the caller.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.size not in (2, 3):
        raise ValueError(f"solve_system handles k in {{2, 3}}, got k={x.size}")
    Fx = np.asarray(F(x), dtype=float)
    if not np.all(np.isfinite(Fx)):
        raise NonFinite(f"F(x0) = {Fx}")
    norm = float(np.linalg.norm(Fx, ord=np.inf))

    for it in range(1, cfg.max_iters + 1):
        if norm <= cfg.abs_tol:
            return SystemSolution(point=x, residual_norm=norm,
                                  iterations=it - 1, converged=True)
        J = _fd_jacobian(F, x, Fx)
        if not np.all(np.isfinite(J)):
            raise NonFinite("non-finite Jacobian entries")
        try:
            step = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("Newton step is non-finite")

        accepted = False
        t = 1.0
        for _ in range(30):
            x_new = x + t * step
            F_new = np.asarray(F(x_new), dtype=float)
            if np.all(np.isfinite(F_new)):
                norm_new = float(np.linalg.norm(F_new, ord=np.inf))
                if norm_new < norm:
                    x, Fx, norm = x_new, F_new, norm_new
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            # stagnation: report the best point found, unconverged
            return SystemSolution(point=x, residual_norm=norm,
                                  iterations=it, converged=norm <= cfg.abs_tol)
    if norm <= cfg.abs_tol:
        return SystemSolution(point=x, residual_norm=norm,
                              iterations=cfg.max_iters, converged=True)
    raise MaxIters(
        f"||F||_inf = {norm} > {cfg.abs_tol} after {cfg.max_iters} iterations")
