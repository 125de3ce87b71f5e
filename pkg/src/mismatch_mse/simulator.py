"""Finite-n Monte-Carlo laboratory for validating the asymptotic theory.

The channel is realized as a circulant matrix whose DFT eigenvalues are the
sampled transfer function, so the frequency-domain model is exact at every
block length (the asymptotic theory is the n -> infinity limit of exactly
this family).  The mismatched conditional mean is computed by exact
enumeration over the codebook, in log space with max-subtraction, so there
is no second approximation layer between the simulation and the theory.

Determinism: every (codebook, trial) pair owns an independent RNG substream
derived by counter-mode seeding, SeedSequence(seed, spawn_key=(codebook_idx,
trial_idx + 1)); the codebook itself uses trial index 0.  Results are
therefore bit-identical for a given seed regardless of batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MismatchMseError
from .mse import mismatched_mse
from .rates import PhaseLabel
from .spectrum import FrequencyResponse, ProblemInstance, resample

MAX_CODEBOOK = 2**22
DEFAULT_ELEMENT_CAP = 2**26   # cap on n * M
_BATCH_ELEMENTS = 2**24       # scratch elements per trial batch


@dataclass(frozen=True)
class SimConfig:
    n: int
    rate: float
    inst: ProblemInstance
    trials: int
    codebooks: int = 1
    seed: int = 0
    max_elements: int = DEFAULT_ELEMENT_CAP
    keep_trials: bool = False

    def __post_init__(self):
        if self.n < 2 or (self.n & (self.n - 1)) != 0 or self.n > 4096:
            raise MismatchMseError(
                f"n must be a power of two in [2, 4096], got {self.n}")
        if self.trials < 1:
            raise MismatchMseError("trials must be >= 1")
        if self.codebooks < 1:
            raise MismatchMseError("codebooks must be >= 1")
        m = self.codebook_size
        if m > MAX_CODEBOOK:
            raise MismatchMseError(
                f"M = {m} exceeds the enumeration cap {MAX_CODEBOOK}")
        if self.n * m > self.max_elements:
            raise MismatchMseError(
                f"n*M = {self.n * m} exceeds memory cap {self.max_elements}")

    @property
    def codebook_size(self) -> int:
        return max(1, round(math.exp(self.n * self.rate)))


@dataclass(frozen=True)
class SimResult:
    empirical_mse_per_symbol: float
    mse_standard_error: float
    theory_mse_per_symbol: float
    empirical_log_partition_mean: float
    phase_predicted: PhaseLabel
    per_trial: list | None = None   # (codebook_idx, trial_idx, sq_err, log_z)


def _substream(seed: int, codebook_idx: int, trial_idx: int):
    ss = np.random.SeedSequence(entropy=seed,
                                spawn_key=(codebook_idx, trial_idx))
    return np.random.default_rng(ss)


def sample_codebook(n: int, m: int, p_x: float, rng) -> np.ndarray:
    """m independent points uniform on the sphere of radius sqrt(n P_x)."""
    if n < 2:
        raise MismatchMseError("n must be >= 2")
    x = rng.standard_normal((m, n))
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x * (np.sqrt(n * p_x) / norms)


def _symmetrized_eigenvalues(h: FrequencyResponse, n: int) -> np.ndarray:
    """Transfer function restricted to the length-n grid, made conjugate
    symmetric so the circulant has a real impulse response."""
    hn = resample(h, n).samples
    return 0.5 * (hn + np.conj(np.roll(hn[::-1], 1)))


def _circulant_apply(eigs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = IDFT(eigs * DFT(x)) along the last axis; real for symmetric eigs."""
    return np.fft.ifft(eigs * np.fft.fft(x, axis=-1), axis=-1).real


def apply_channel(h: FrequencyResponse, x: np.ndarray, beta: float,
                  rng) -> np.ndarray:
    """Push one block through the circulant channel and add white noise."""
    eigs = _symmetrized_eigenvalues(h, x.shape[-1])
    noise = rng.standard_normal(x.shape) / np.sqrt(beta)
    return _circulant_apply(eigs, x) + noise


def _posterior_stats(images, image_sq_norms, codebook, y_batch, beta, rate):
    """Exact conditional mean and log partition for a batch of outputs.

    images = A'C (codebook through the assumed channel).  Weights are
    exp(-beta ||y - A'x||^2 / 2), handled in log space with max-subtraction.
    Returns (xhat batch, per-symbol log partition incl. the Gaussian
    normalization constant).
    """
    n = y_batch.shape[1]
    logw = beta * (y_batch @ images.T - 0.5 * image_sq_norms[None, :])
    logw -= 0.5 * beta * np.sum(y_batch**2, axis=1, keepdims=True)
    m = np.max(logw, axis=1, keepdims=True)
    w = np.exp(logw - m)
    total = np.sum(w, axis=1, keepdims=True)
    xhat = (w / total) @ codebook
    log_z = (m[:, 0] + np.log(total[:, 0])) / n - rate \
        - 0.5 * np.log(2.0 * np.pi / beta)
    return xhat, log_z


def exact_posterior_mean(codebook: np.ndarray, y: np.ndarray,
                         h_assumed: FrequencyResponse, beta: float) -> np.ndarray:
    """Conditional mean of the codeword given y under the assumed channel."""
    eigs = _symmetrized_eigenvalues(h_assumed, codebook.shape[1])
    images = _circulant_apply(eigs, codebook)
    xhat, _ = _posterior_stats(images, np.sum(images**2, axis=1), codebook,
                               y[None, :], beta, rate=0.0)
    return xhat[0]


def run_simulation(cfg: SimConfig) -> SimResult:
    """Empirical mismatched MSE and log-partition diagnostics vs theory."""
    inst = cfg.inst
    n, m = cfg.n, cfg.codebook_size
    eigs_true = _symmetrized_eigenvalues(inst.h_true, n)
    eigs_assumed = _symmetrized_eigenvalues(inst.h_assumed, n)
    inv_sqrt_beta = 1.0 / np.sqrt(inst.beta)

    batch = max(1, min(cfg.trials, _BATCH_ELEMENTS // m))
    sq_errors = np.empty(cfg.codebooks * cfg.trials)
    log_parts = np.empty_like(sq_errors)
    records = [] if cfg.keep_trials else None

    pos = 0
    for c_idx in range(cfg.codebooks):
        rng_cb = _substream(cfg.seed, c_idx, 0)
        codebook = sample_codebook(n, m, inst.p_x, rng_cb)
        images = _circulant_apply(eigs_assumed, codebook)
        image_sq = np.sum(images**2, axis=1)
        sent = _circulant_apply(eigs_true, codebook)

        for start in range(0, cfg.trials, batch):
            idxs = range(start, min(start + batch, cfg.trials))
            tx = np.empty(len(idxs), dtype=np.int64)
            y = np.empty((len(idxs), n))
            for row, t_idx in enumerate(idxs):
                rng_t = _substream(cfg.seed, c_idx, t_idx + 1)
                tx[row] = rng_t.integers(m)
                y[row] = sent[tx[row]] \
                    + inv_sqrt_beta * rng_t.standard_normal(n)
            xhat, log_z = _posterior_stats(images, image_sq, codebook, y,
                                           inst.beta, cfg.rate)
            errs = np.sum((codebook[tx] - xhat) ** 2, axis=1) / n
            take = len(idxs)
            sq_errors[pos:pos + take] = errs
            log_parts[pos:pos + take] = log_z
            if records is not None:
                for row, t_idx in enumerate(idxs):
                    records.append((c_idx, t_idx, float(errs[row]),
                                    float(log_z[row])))
            pos += take

    report = mismatched_mse(inst, cfg.rate)
    mean = float(np.mean(sq_errors))
    stderr = float(np.std(sq_errors, ddof=1) / np.sqrt(sq_errors.size)) \
        if sq_errors.size > 1 else 0.0
    return SimResult(
        empirical_mse_per_symbol=mean,
        mse_standard_error=stderr,
        theory_mse_per_symbol=report.mse_per_symbol,
        empirical_log_partition_mean=float(np.mean(log_parts)),
        phase_predicted=report.phase,
        per_trial=records,
    )
