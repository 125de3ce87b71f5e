"""Channel frequency responses on a uniform grid, and the quadrature primitives.

All asymptotic formulas in this library are frequency integrals of the form
(1/2pi) * int_0^{2pi} f(w) dw.  They are realized as plain means over the
uniform grid w_j = 2*pi*j/N, j = 0..N-1 (rectangle rule).  The example
filters are piecewise constant with jump discontinuities, so higher-order
quadrature would gain nothing; the rectangle rule is exact between jumps and
its boundary error shrinks like 1/N.

Grid boundary convention: a grid point exactly at a band edge belongs to the
passband (closed passband), so sweeps are reproducible bit-for-bit.

No Toeplitz matrix is ever materialized here: the n -> infinity theory only
needs the transfer function itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MismatchMseError

DEFAULT_GRID_SIZE = 4096

_CONJ_SYM_TOL = 1e-12


def omega_grid(grid_size: int) -> np.ndarray:
    """The uniform angular-frequency grid w_j = 2*pi*j/N over [0, 2pi)."""
    return 2.0 * np.pi * np.arange(grid_size) / grid_size


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    """Complex transfer function sampled on the uniform grid over [0, 2pi).

    real_impulse asserts conjugate symmetry H(2pi - w) = H(w)*, i.e. the
    underlying impulse response is real.
    """

    samples: np.ndarray
    grid_size: int
    real_impulse: bool = False

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if self.grid_size < 16 or self.grid_size % 2 != 0:
            raise MismatchMseError(
                f"grid_size must be even and >= 16, got {self.grid_size}")
        if samples.shape != (self.grid_size,):
            raise MismatchMseError(
                f"samples shape {samples.shape} != ({self.grid_size},)")
        if not np.all(np.isfinite(samples)):
            raise MismatchMseError("non-finite samples in FrequencyResponse")
        if self.real_impulse:
            mirrored = np.conj(np.roll(samples[::-1], 1))
            err = np.max(np.abs(samples - mirrored))
            if err > _CONJ_SYM_TOL:
                raise MismatchMseError(
                    f"real_impulse set but conjugate-symmetry error {err:.3e} "
                    f"> {_CONJ_SYM_TOL}")
        samples.setflags(write=False)

    @property
    def omega(self) -> np.ndarray:
        return omega_grid(self.grid_size)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """True channel H, assumed channel H', inverse noise variance, input power.

    1/beta is the noise variance per component; p_x the per-symbol power.
    """

    h_true: FrequencyResponse
    h_assumed: FrequencyResponse
    beta: float
    p_x: float

    def __post_init__(self):
        if self.h_true.grid_size != self.h_assumed.grid_size:
            raise MismatchMseError(
                f"grid mismatch: {self.h_true.grid_size} != "
                f"{self.h_assumed.grid_size}")
        if not (self.beta > 0):
            raise MismatchMseError(f"beta must be > 0, got {self.beta}")
        if not (self.p_x > 0):
            raise MismatchMseError(f"p_x must be > 0, got {self.p_x}")

    @property
    def grid_size(self) -> int:
        return self.h_true.grid_size


# ---------------------------------------------------------------------------
# quadrature and pointwise spectral functionals
# ---------------------------------------------------------------------------

def quadrature_mean(values: np.ndarray) -> float:
    """Grid mean (1/N) sum_j values[j] ~ (1/2pi) int_0^{2pi} f(w) dw."""
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise MismatchMseError("non-finite entries in quadrature_mean")
    return float(np.mean(values.real if np.iscomplexobj(values) else values))


def _check_grids(f: FrequencyResponse, g: FrequencyResponse):
    if f.grid_size != g.grid_size:
        raise MismatchMseError(
            f"grid mismatch: {f.grid_size} != {g.grid_size}")


def magnitude_sq(f: FrequencyResponse) -> np.ndarray:
    """|H(w)|^2 pointwise."""
    return np.abs(f.samples) ** 2


def cross_re(f: FrequencyResponse, g: FrequencyResponse) -> np.ndarray:
    """Re(f(w)* g(w)) pointwise."""
    _check_grids(f, g)
    return np.real(np.conj(f.samples) * g.samples)


def diff_magnitude_sq(f: FrequencyResponse, g: FrequencyResponse) -> np.ndarray:
    """|f(w) - g(w)|^2 pointwise."""
    _check_grids(f, g)
    return np.abs(f.samples - g.samples) ** 2


# ---------------------------------------------------------------------------
# builtin filter constructors
# ---------------------------------------------------------------------------

def _folded_omega(grid_size: int) -> np.ndarray:
    """|w| for the +-pi convention: min(w, 2pi - w) on the [0, 2pi) grid.

    Folded by integer index so mirror points get bit-identical values and
    band-edge membership is exactly symmetric.
    """
    j = np.arange(grid_size)
    return 2.0 * np.pi * np.minimum(j, grid_size - j) / grid_size


def _ideal_lpf(params: dict, grid_size: int) -> np.ndarray:
    cutoff = float(params["cutoff"])
    gain = float(params.get("gain", 1.0))
    if not (0.0 <= cutoff <= np.pi):
        raise MismatchMseError(f"cutoff must lie in [0, pi], got {cutoff}")
    return np.where(_folded_omega(grid_size) <= cutoff, gain, 0.0).astype(complex)


def _bandpass(params: dict, grid_size: int) -> np.ndarray:
    lo = float(params["omega_left"])
    hi = float(params["omega_right"])
    gain = float(params.get("gain", 1.0))
    if not (0.0 <= lo <= hi <= np.pi):
        raise MismatchMseError(
            f"bandpass requires 0 <= omega_left <= omega_right <= pi, "
            f"got ({lo}, {hi})")
    aw = _folded_omega(grid_size)
    return np.where((aw >= lo) & (aw <= hi), gain, 0.0).astype(complex)


def _multiband(params: dict, grid_size: int) -> np.ndarray:
    bands = params["bands"]
    gain = float(params.get("gain", 1.0))
    aw = _folded_omega(grid_size)
    out = np.zeros(grid_size)
    for band in bands:
        lo, hi = float(band[0]), float(band[1])
        if not (0.0 <= lo <= hi <= np.pi):
            raise MismatchMseError(f"band {band} outside [0, pi]")
        out = np.where((aw >= lo) & (aw <= hi), gain, out)
    return out.astype(complex)


def _fir_from_zeros(params: dict, grid_size: int) -> np.ndarray:
    zeros = np.asarray([complex(z[0], z[1]) if isinstance(z, (list, tuple))
                        else complex(z) for z in params["zeros"]])
    gain = complex(params.get("gain", 1.0))
    lead = int(params.get("lead", 0))
    normalize = bool(params.get("normalize", False))
    # real impulse response requires the zero set to be closed under conjugation
    remaining = list(zeros)
    while remaining:
        z = remaining.pop()
        if abs(z.imag) <= 1e-12:
            continue
        match = None
        for i, other in enumerate(remaining):
            if abs(other - np.conj(z)) <= 1e-9:
                match = i
                break
        if match is None:
            raise MismatchMseError(
                f"zeros must be closed under conjugation; {z} has no partner")
        remaining.pop(match)
    if gain.imag != 0.0:
        raise MismatchMseError("fir gain must be real for a real impulse response")
    w = omega_grid(grid_size)
    zinv = np.exp(-1j * w)
    h = np.full(grid_size, gain, dtype=complex)
    for z in zeros:
        h *= 1.0 - z * zinv
    if lead:
        h *= np.exp(1j * w * lead)
    if normalize:
        # unit-energy impulse response: mean |H|^2 = 1 (exact on any grid
        # resolving the polynomial degree, so grid refinement is consistent)
        h /= np.sqrt(np.mean(np.abs(h) ** 2))
    return h


def _delayed_copy_of(params: dict, grid_size: int) -> np.ndarray:
    base = params["base"]
    if not isinstance(base, FrequencyResponse):
        raise MismatchMseError("delayed_copy_of needs a FrequencyResponse base")
    delay = params["delay"]
    if delay != int(delay):
        raise MismatchMseError(f"delay must be an integer, got {delay}")
    if base.grid_size != grid_size:
        raise MismatchMseError(
            f"base grid {base.grid_size} != requested grid {grid_size}")
    w = omega_grid(grid_size)
    return base.samples * np.exp(-1j * w * int(delay))


def _tabulated(params: dict, grid_size: int) -> np.ndarray:
    raw = params["samples"]
    vals = np.asarray([complex(v[0], v[1]) if isinstance(v, (list, tuple))
                       else complex(v) for v in raw])
    if vals.shape != (grid_size,):
        raise MismatchMseError(
            f"tabulated samples length {vals.shape} != grid {grid_size}")
    return vals


_BUILTIN_KINDS = {
    "ideal_lpf": _ideal_lpf,
    "bandpass": _bandpass,
    "multiband": _multiband,
    "fir_from_zeros": _fir_from_zeros,
    "delayed_copy_of": _delayed_copy_of,
    "tabulated": _tabulated,
}


def make_builtin_filter(kind: str, params: dict, grid_size: int) -> FrequencyResponse:
    """Construct one of the builtin responses; all builtins have real impulse.

    kinds: ideal_lpf {cutoff, gain}, bandpass {omega_left, omega_right, gain},
    multiband {bands: [[lo, hi], ...], gain}, fir_from_zeros {zeros, gain, lead},
    delayed_copy_of {base, delay}, tabulated {samples}.
    """
    if kind not in _BUILTIN_KINDS:
        raise MismatchMseError(
            f"unknown filter kind {kind!r}; expected one of "
            f"{sorted(_BUILTIN_KINDS)}")
    samples = _BUILTIN_KINDS[kind](params, grid_size)
    return FrequencyResponse(samples=samples, grid_size=grid_size,
                             real_impulse=True)


def resample(f: FrequencyResponse, grid_size: int) -> FrequencyResponse:
    """Restrict a response to a coarser grid whose points are shared.

    Exact decimation: requires the source grid to be a multiple of the target.
    """
    if f.grid_size == grid_size:
        return f
    if f.grid_size % grid_size != 0:
        raise MismatchMseError(
            f"cannot resample grid {f.grid_size} to {grid_size}: "
            f"target must divide source")
    step = f.grid_size // grid_size
    return FrequencyResponse(samples=f.samples[::step], grid_size=grid_size,
                             real_impulse=f.real_impulse)
