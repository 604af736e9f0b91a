"""Chaos quantifiers: finite-time and asymptotic Lyapunov exponents.

The maximal exponent follows from the accumulated log stretching of one
deviation vector with periodic renormalization; the full spectrum from the
volume growth of p deviation vectors, realized as per-vector log stretching
factors of a modified Gram-Schmidt pass.  Differences of the order-p volume
growth rates then give the individual exponents, which is what the
orthonormalization accumulates directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import ModelParams, random_deviations, validate_spins
from .propagators import SABA2, CompositionScheme, reduce_angle


class NumericalFailureError(RuntimeError):
    """Deviation vectors under/overflowed despite renormalization."""

    def __init__(self, step: int):
        super().__init__(f"deviation propagation failed at step {step}")
        self.step = step


class UndefinedRescalingError(ValueError):
    """Rescaled quantities need a positive leading exponent."""


@dataclass
class LyapunovResult:
    """Finite-time series, asymptotic spectrum and run diagnostics."""

    tau: float
    n_steps: int
    n_spins: int
    p: int
    renorm_every: int
    seed: object
    times: np.ndarray          # sample times on a log-spaced grid
    finite_time: np.ndarray    # (n_samples, p) finite-time exponents
    spectrum: np.ndarray       # (p,) asymptotic exponents, non-increasing
    lambda1: float
    jz_drift: float
    norm_drift: float
    mlce_error: float = math.nan

    @property
    def finite_time_series(self) -> np.ndarray:
        """(time, Lambda_1(t)) pairs."""
        return np.column_stack([self.times, self.finite_time[:, 0]])

    @property
    def rescaled(self) -> np.ndarray:
        """Lambda_i / Lambda_1 for the first min(p, N) exponents."""
        lead = self.spectrum[0]
        if lead <= 0.0:
            raise UndefinedRescalingError("leading exponent is not positive")
        n = min(self.p, self.n_spins)
        return self.spectrum[:n] / lead


def convergence_scale(n_steps: int, tau: float) -> float:
    """Finite-horizon resolution 1/(n_steps tau) of an exponent estimate."""
    return 1.0 / (n_steps * tau)


def classify_zero(spectrum: np.ndarray, n_steps: int, tau: float,
                  factor: float = 5.0) -> np.ndarray:
    """Mask of exponents indistinguishable from zero at this horizon."""
    return np.abs(spectrum) < factor * convergence_scale(n_steps, tau)


def _free_stage_trig(scheme: CompositionScheme, params: ModelParams, tau: float):
    rows = []
    row_of_stage = np.full(len(scheme.stages), -1, dtype=np.int64)
    for i, (kind, coeff) in enumerate(scheme.stages):
        if kind == "free":
            row_of_stage[i] = len(rows)
            angles = 2.0 * params.epsilons * (coeff * tau)
            rows.append([reduce_angle(a) for a in angles])
    if rows:
        angles = np.array(rows, dtype=float)
    else:
        angles = np.zeros((0, params.n_spins))
    return np.cos(angles), np.sin(angles), row_of_stage


def _sample_grid(n_steps: int, n_samples: int, extra=()) -> np.ndarray:
    pts = np.geomspace(1.0, n_steps, max(2, n_samples)).round().astype(np.int64)
    pts = np.concatenate([pts, np.asarray([n_steps], dtype=np.int64),
                          np.asarray(list(extra), dtype=np.int64)])
    pts = np.unique(pts)
    return pts[(pts >= 1) & (pts <= n_steps)]


def _run_kernel(params: ModelParams, spins: np.ndarray, devs: np.ndarray,
                tau: float, n_steps: int, scheme: CompositionScheme,
                renorm_every: int, sample_steps: np.ndarray,
                diag_every: int):
    from .core import degeneracy_threshold

    spins = np.ascontiguousarray(spins, dtype=float).copy()
    devs = np.ascontiguousarray(devs, dtype=float).copy()
    p = devs.shape[0]
    cos_rows, sin_rows, row_of_stage = _free_stage_trig(scheme, params, tau)
    log_accum = np.zeros(p)
    sample_logs = np.zeros((len(sample_steps), p))
    diag_out = np.zeros(2)
    status, at = _kernels.run_composed(
        spins, devs, scheme.kinds, scheme.coefficients, row_of_stage,
        cos_rows, sin_rows, params.coupling, tau, n_steps, renorm_every,
        degeneracy_threshold(params), log_accum, sample_steps, sample_logs,
        diag_every, diag_out,
    )
    if status != _kernels.STATUS_OK:
        raise NumericalFailureError(at)
    return spins, devs, log_accum, sample_logs, diag_out


def _windowed_rates(sample_steps, sample_logs, log_accum, tau, n_steps,
                    transient_fraction):
    """Asymptotic rates, optionally discarding an initial alignment window."""
    if transient_fraction <= 0.0:
        return log_accum / (n_steps * tau)
    cut = max(1, int(round(transient_fraction * n_steps)))
    if cut >= n_steps:
        raise ValueError("transient window must leave room for the estimate")
    idx = int(np.searchsorted(sample_steps, cut))
    cut_step = int(sample_steps[idx])
    return (log_accum - sample_logs[idx]) / ((n_steps - cut_step) * tau)


def run_mlce(params: ModelParams, spins: np.ndarray, tau: float, n_steps: int,
             scheme: CompositionScheme = SABA2, renorm_every: int = 1,
             seed=0, n_samples: int = 64, transient_fraction: float = 0.0,
             diag_every: int = 0) -> LyapunovResult:
    """Maximal Lyapunov exponent from one deviation vector (Benettin sum)."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    validate_spins(spins)
    devs = random_deviations(params.n_spins, 1, seed)
    extra = ()
    if transient_fraction > 0.0:
        extra = (max(1, int(round(transient_fraction * n_steps))),)
    sample_steps = _sample_grid(n_steps, n_samples, extra)
    if diag_every == 0:
        diag_every = max(1, n_steps // 1024)
    _, _, log_accum, sample_logs, diag = _run_kernel(
        params, spins, devs, tau, n_steps, scheme, renorm_every,
        sample_steps, diag_every)
    times = sample_steps * tau
    finite_time = sample_logs / times[:, None]
    lam = _windowed_rates(sample_steps, sample_logs[:, 0], log_accum[0], tau,
                          n_steps, transient_fraction)
    return LyapunovResult(
        tau=tau, n_steps=n_steps, n_spins=params.n_spins, p=1,
        renorm_every=renorm_every, seed=seed, times=times,
        finite_time=finite_time, spectrum=np.array([float(lam)]),
        lambda1=float(lam), jz_drift=diag[0], norm_drift=diag[1],
    )


def run_spectrum(params: ModelParams, spins: np.ndarray, tau: float,
                 n_steps: int, p: int, scheme: CompositionScheme = SABA2,
                 renorm_every: int = 1, seed=0, n_samples: int = 64,
                 transient_fraction: float = 0.0,
                 diag_every: int = 0) -> LyapunovResult:
    """Leading p Lyapunov exponents from orthonormalized deviation vectors."""
    if not 1 <= p <= 3 * params.n_spins:
        raise ValueError(f"need 1 <= p <= 3N, got p={p}")
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    validate_spins(spins)
    devs = random_deviations(params.n_spins, p, seed)
    sample_steps = _sample_grid(n_steps, n_samples)
    if diag_every == 0:
        diag_every = max(1, n_steps // 1024)
    _, _, log_accum, sample_logs, diag = _run_kernel(
        params, spins, devs, tau, n_steps, scheme, renorm_every,
        sample_steps, diag_every)
    times = sample_steps * tau
    finite_time = np.sort(sample_logs / times[:, None], axis=1)[:, ::-1]
    rates = _windowed_rates(sample_steps, sample_logs, log_accum, tau,
                            n_steps, transient_fraction)
    spectrum = np.sort(rates)[::-1]
    return LyapunovResult(
        tau=tau, n_steps=n_steps, n_spins=params.n_spins, p=p,
        renorm_every=renorm_every, seed=seed, times=times,
        finite_time=finite_time, spectrum=spectrum,
        lambda1=float(spectrum[0]), jz_drift=diag[0], norm_drift=diag[1],
    )


def ks_entropy(result: LyapunovResult) -> float:
    """Rescaled Kolmogorov-Sinai entropy, mean of Lambda_i/Lambda_1 for i = 2..N."""
    n = result.n_spins
    if result.p < n:
        raise ValueError(f"need at least the first N={n} exponents, have p={result.p}")
    lam1 = result.spectrum[0]
    if lam1 <= 0.0:
        raise UndefinedRescalingError("leading exponent is not positive")
    return float(np.sum(result.spectrum[1:n] / lam1) / (n - 1))


def ensemble_mlce(params: ModelParams, configs, tau: float, n_steps: int,
                  scheme: CompositionScheme = SABA2, renorm_every: int = 1,
                  seeds=None, **kwargs):
    """Run run_mlce over an ensemble of configurations.

    Returns (mean, standard error over members, list of results).  The error
    bar is the ensemble standard deviation of Lambda_1 across members.
    """
    configs = list(configs)
    if seeds is None:
        seeds = list(range(len(configs)))
    results = [
        run_mlce(params, spins, tau, n_steps, scheme=scheme,
                 renorm_every=renorm_every, seed=seed, **kwargs)
        for spins, seed in zip(configs, seeds)
    ]
    values = np.array([r.lambda1 for r in results])
    mean = float(values.mean())
    err = float(values.std(ddof=1)) if len(values) > 1 else math.nan
    for r in results:
        r.mlce_error = err
    return mean, err, results
