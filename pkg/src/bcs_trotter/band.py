"""Extrema of the energy band at fixed J^z.

The maximum-energy state at fixed J^z is the domain wall (lowest levels down,
the rest up) and has the closed form (N^2 - 4 J^2) / (4 (N-1)).  The minimum
lives on the coplanar branch with all spins tilted in the xz-plane; its tilt
angles follow from a chemical potential mu and a transverse total J_perp that
solve two coupled self-consistency equations.  The continuum limit of those
equations has a closed-form solution whose energy converges to the discrete
minimum as N grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import ModelParams, build_params, energy

_E = math.e
_COTH1 = (_E * _E + 1.0) / (_E * _E - 1.0)


class GapSolverError(RuntimeError):
    """Self-consistency solve failed; carries the last residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class BandPoint:
    """Band extrema and the minimizing configuration at one J^z."""

    j_z0: float
    e_max: float
    e_min_numeric: float
    e_min_analytic: float
    mu: float
    delta_perp: float          # Delta = g J_perp
    extremal_config: np.ndarray
    degenerate: bool = False   # J_perp collapsed to zero (normal state)


def _check_jz(n_spins: int, j_z0: float, strict: bool) -> None:
    lim = n_spins / 2.0
    if abs(j_z0) > lim + 1e-12 or (strict and abs(j_z0) >= lim - 1e-12):
        raise ValueError(f"infeasible J^z = {j_z0} for N = {n_spins}")


def e_max(n_spins: int, j_z0: float) -> float:
    """Maximum energy (N^2 - 4 J^2)/(4(N-1)); the domain-wall configuration."""
    _check_jz(n_spins, j_z0, strict=False)
    k = n_spins / 2.0 - j_z0
    if abs(k - round(k)) > 1e-12:
        raise ValueError(f"N - 2 J^z must be even, got N={n_spins}, J^z={j_z0}")
    return (n_spins ** 2 - 4.0 * j_z0 ** 2) / (4.0 * (n_spins - 1.0))


def continuum_mu(n_spins: int, j_z0: float) -> float:
    """Continuum-limit chemical potential, linear in J^z."""
    return j_z0 / (n_spins - 1.0) * _COTH1


def continuum_delta(n_spins: int, j_z0: float) -> float:
    """Continuum-limit gap; radicand clamped at the normal-state boundary."""
    mu = continuum_mu(n_spins, j_z0)
    e2 = _E * _E
    arg = (e2 + 1.0) ** 2 - 4.0 * (e2 - 1.0) ** 2 * mu * mu
    if arg < 0.0:
        arg = 0.0
    return _E * math.sqrt(arg) / (e2 * e2 - 1.0)


def e_min_analytic(n_spins: int, j_z0: float) -> float:
    """Closed-form continuum energy minimum at fixed J^z."""
    _check_jz(n_spins, j_z0, strict=False)
    mu = continuum_mu(n_spins, j_z0)
    delta = continuum_delta(n_spins, j_z0)
    d2 = delta * delta
    rm = math.sqrt(4.0 * d2 + (1.0 - 2.0 * mu) ** 2)
    rp = math.sqrt(4.0 * d2 + (1.0 + 2.0 * mu) ** 2)
    log_num = math.log((2.0 * mu - 1.0 + rm) * (-1.0 - 2.0 * mu + rp))
    log_den = math.log((1.0 - 2.0 * mu + rm) * (1.0 + 2.0 * mu + rp))
    bracket = (1.0 + 2.0 * mu) * rm + (1.0 - 2.0 * mu) * rp \
        + 2.0 * d2 * (log_num - log_den)
    return -(n_spins - 1.0) / 8.0 * bracket - d2 * (n_spins - 1.0)


def _roots_r(mu: float, delta: float, eps: np.ndarray) -> np.ndarray:
    return np.sqrt((mu - eps) ** 2 + delta * delta)


def gap_residuals(mu: float, j_perp: float, params: ModelParams, j_z0: float):
    """Residuals of the two self-consistency equations at (mu, J_perp)."""
    g = params.coupling
    r = _roots_r(mu, g * j_perp, params.epsilons)
    chem = float(np.sum((mu - params.epsilons) / (2.0 * r))) - j_z0
    gap = float(np.sum(g * j_perp / (2.0 * r))) - j_perp
    return chem, gap


def _solve_jperp(mu: float, params: ModelParams) -> float:
    """Gap equation at fixed mu: positive root, or 0 when it collapses."""
    g = params.coupling
    eps = params.epsilons
    n = params.n_spins

    def f(j_perp):
        return float(np.sum(g / (2.0 * _roots_r(mu, g * j_perp, eps)))) - 1.0

    hi = n / 2.0
    if f(hi) > 0.0:
        # the sum exceeds one even at maximal tilt; cannot happen for g = spacing
        raise GapSolverError(f"gap equation has no bracket at mu={mu}")
    lo = 1e-300
    if f(lo) <= 0.0:
        return 0.0
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def solve_extremal_min(n_spins: int, j_z0: float = 0.0,
                       params: ModelParams | None = None) -> BandPoint:
    """Minimum-energy configuration at fixed J^z from the coupled equations.

    The inner gap equation is solved for J_perp at fixed mu by bracketed root
    finding; the outer chemical-potential equation for mu likewise, seeded by
    the continuum value.  Both residuals of the returned point are below
    1e-12.
    """
    if params is None:
        params = build_params(n_spins)
    _check_jz(n_spins, j_z0, strict=True)
    eps = params.epsilons
    g = params.coupling

    def outer(mu):
        j_perp = _solve_jperp(mu, params)
        if j_perp == 0.0:
            r = np.abs(mu - eps)
            return float(np.sum(np.sign(mu - eps) / 2.0)) - j_z0
        r = _roots_r(mu, g * j_perp, eps)
        return float(np.sum((mu - eps) / (2.0 * r))) - j_z0

    mu_seed = continuum_mu(n_spins, j_z0)
    width = max(0.25, 4.0 * abs(mu_seed))
    lo, hi = mu_seed - width, mu_seed + width
    for _ in range(60):
        if outer(lo) < 0.0 < outer(hi):
            break
        lo -= width
        hi += width
        width *= 2.0
    else:
        raise GapSolverError(f"could not bracket mu for J^z={j_z0}")
    mu = brentq(outer, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    j_perp = _solve_jperp(mu, params)
    degenerate = j_perp == 0.0

    chem, gap = gap_residuals(mu, j_perp, params, j_z0)
    if degenerate:
        gap = 0.0  # gap equation not active on the collapsed branch
    if max(abs(chem), abs(gap)) > 1e-12:
        raise GapSolverError(
            f"self-consistency residuals too large at J^z={j_z0}",
            residuals=(chem, gap),
        )

    r = _roots_r(mu, g * j_perp, eps)
    spins = np.zeros((n_spins, 3))
    spins[:, 0] = g * j_perp / (2.0 * r)
    spins[:, 2] = (mu - eps) / (2.0 * r)
    return BandPoint(
        j_z0=j_z0,
        e_max=e_max(n_spins, j_z0) if _feasible_emax(n_spins, j_z0) else math.nan,
        e_min_numeric=energy(spins, params),
        e_min_analytic=e_min_analytic(n_spins, j_z0),
        mu=mu,
        delta_perp=g * j_perp,
        extremal_config=spins,
        degenerate=degenerate,
    )


def _feasible_emax(n_spins: int, j_z0: float) -> bool:
    k = n_spins / 2.0 - j_z0
    return abs(k - round(k)) <= 1e-12


def band_table(n_spins: int, j_z0_values, params: ModelParams | None = None):
    """Rows (j_z0, E_max, E_min_num, E_min_ana, mu, Delta) over a J^z grid."""
    rows = []
    for j in j_z0_values:
        point = solve_extremal_min(n_spins, j, params=params)
        rows.append((j, point.e_max, point.e_min_numeric, point.e_min_analytic,
                     point.mu, point.delta_perp))
    return rows
