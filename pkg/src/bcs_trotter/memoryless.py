"""Large-step analytics for the strongly chaotic regime.

For two spins with the particle-hole mirror symmetry the composed step acts on
a single spin: free stages rotate about z by the stage fraction of -tau (the
lowest level has 2 eps = -1), pairing stages rotate about x by an angle set by
the spin's own x component at stage entry.  The step's Jacobian is available
in closed form, and because the finite-time exponent saturates within one
step, ensemble-averaging ln|lambda_max| of that Jacobian over the sphere gives
the maximal exponent without any time evolution.  Replacing the coupling by
g_N = 1/sqrt(13 N / 3) extends the estimate to N spins, and the kicked-top
scaling forms describe how tau Lambda_1 grows with ln tau.

For the record (it drives no computation here): the composed step acts like a
twice-kicked top with anisotropy 4 b1 g tau, the two kicks corresponding to
field strengths 2 a1 tau mod pi/2 and a2 tau mod pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SPIN_LENGTH, variance_ratio  # noqa: F401  (re-exported)
from .propagators import SABA2_A1, SABA2_A2, SABA2_B1

_STAGES = ((0, SABA2_A1), (1, SABA2_B1), (0, SABA2_A2), (1, SABA2_B1), (0, SABA2_A1))


@dataclass(frozen=True)
class MemorylessPrediction:
    """Predicted maximal exponent in the memoryless regime."""

    tau: float
    n_spins: int
    lambda1: float
    method: str                  # jacobian_ensemble | kicked_top_n2 | kicked_top_largeN
    constant: float = math.nan   # fitted C for the kicked-top forms
    stderr: float = math.nan
    n_samples: int = 0
    warning: bool = False


def coupling_for(n_spins: int) -> float:
    """g = 1 for the two-spin system, g_N = 1/sqrt(13N/3) beyond it."""
    return 1.0 if n_spins == 2 else 1.0 / variance_ratio(n_spins)


def _rot_z_batch(spins: np.ndarray, angle: float) -> None:
    c, s = math.cos(angle), math.sin(angle)
    x = spins[:, 0].copy()
    y = spins[:, 1].copy()
    spins[:, 0] = c * x - s * y
    spins[:, 1] = s * x + c * y


def _rot_x_batch(spins: np.ndarray, angles: np.ndarray) -> None:
    c, s = np.cos(angles), np.sin(angles)
    y = spins[:, 1].copy()
    z = spins[:, 2].copy()
    spins[:, 1] = c * y - s * z
    spins[:, 2] = s * y + c * z


def n2_step_map(spin: np.ndarray, tau: float, g: float = 1.0) -> np.ndarray:
    """One composed step of the mirror-symmetric two-spin system, first spin."""
    out = np.atleast_2d(np.array(spin, dtype=float, copy=True))
    for kind, coeff in _STAGES:
        if kind == 0:
            _rot_z_batch(out, -coeff * tau)
        else:
            _rot_x_batch(out, -4.0 * g * coeff * tau * out[:, 0])
    return out[0] if np.ndim(spin) == 1 else out


def n2_jacobian(spin: np.ndarray, tau: float, g: float = 1.0) -> np.ndarray:
    """Analytic single-step Jacobian of n2_step_map at one or many spins.

    The pairing stages contribute a rank-one correction on top of the plain
    rotation because the rotation angle rides on the spin's x component.
    """
    spins = np.atleast_2d(np.array(spin, dtype=float, copy=True))
    n = spins.shape[0]
    jac = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    for kind, coeff in _STAGES:
        if kind == 0:
            angle = -coeff * tau
            c, s = math.cos(angle), math.sin(angle)
            rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            jac = np.einsum("ab,nbc->nac", rz, jac)
            _rot_z_batch(spins, angle)
        else:
            k = -4.0 * g * coeff * tau
            angles = k * spins[:, 0]
            c, s = np.cos(angles), np.sin(angles)
            stage = np.zeros((n, 3, 3))
            stage[:, 0, 0] = 1.0
            stage[:, 1, 1] = c
            stage[:, 1, 2] = -s
            stage[:, 2, 1] = s
            stage[:, 2, 2] = c
            _rot_x_batch(spins, angles)
            # d(angle)/dS^x feeds K_x R_x S = (0, -z', y') into the x column
            stage[:, 1, 0] = k * (-spins[:, 2])
            stage[:, 2, 0] = k * spins[:, 1]
            jac = np.einsum("nab,nbc->nac", stage, jac)
    return jac[0] if np.ndim(spin) == 1 else jac


def sample_sphere(n_samples: int, seed=0) -> np.ndarray:
    """Spins uniform on the radius-1/2 sphere: cos(theta) and phi uniform."""
    rng = np.random.default_rng(seed)
    cos_t = rng.uniform(-1.0, 1.0, n_samples)
    phi = rng.uniform(0.0, 2.0 * np.pi, n_samples)
    sin_t = np.sqrt(1.0 - cos_t * cos_t)
    pts = np.empty((n_samples, 3))
    pts[:, 0] = sin_t * np.cos(phi)
    pts[:, 1] = sin_t * np.sin(phi)
    pts[:, 2] = cos_t
    return SPIN_LENGTH * pts


def semi_analytic_mlce(tau: float, n_spins: int, n_samples: int = 100_000,
                       seed=0, g: float | None = None) -> MemorylessPrediction:
    """Ensemble-averaged exponent (1/tau) <ln |lambda_max|> of the step Jacobian."""
    if g is None:
        g = coupling_for(n_spins)
    spins = sample_sphere(n_samples, seed)
    logs = np.empty(n_samples)
    chunk = 65536
    for lo in range(0, n_samples, chunk):
        jac = n2_jacobian(spins[lo:lo + chunk], tau, g)
        lam = np.linalg.eigvals(jac)
        logs[lo:lo + chunk] = np.log(np.abs(lam).max(axis=1))
    mean = float(logs.mean()) / tau
    sem = float(logs.std(ddof=1)) / math.sqrt(n_samples) / tau
    return MemorylessPrediction(
        tau=tau, n_spins=n_spins, lambda1=mean, method="jacobian_ensemble",
        stderr=sem, n_samples=n_samples, warning=n_samples < 10_000,
    )


def kicked_top_log_argument(tau: float) -> float:
    """2 tau |sin(2 a1 tau) sin(a2 tau)|, the two-spin form's log argument."""
    return 2.0 * tau * abs(math.sin(2.0 * SABA2_A1 * tau) * math.sin(SABA2_A2 * tau))


def kicked_top_tau_lambda(tau: float, n_spins: int, constant: float,
                          form: str) -> float:
    """Kicked-top scaling for tau Lambda_1; -inf at exact resonances."""
    if form == "n2":
        if n_spins != 2:
            raise ValueError("the n2 form applies to two spins only")
        arg = kicked_top_log_argument(tau)
        if arg <= 0.0:
            return -math.inf
        return 2.0 * math.log(arg) + constant
    if form == "largeN":
        return 2.0 * math.log(tau / math.sqrt(n_spins)) + constant
    raise ValueError(f"unknown form {form!r}")


def fit_kicked_top_constant(taus, tau_lambda1, form: str, n_spins: int,
                            mask_threshold: float = 0.1):
    """Fit the additive constant with the slope pinned at 2.

    For the two-spin form, points whose log argument falls below
    mask_threshold are resonant and excluded.  Returns
    (constant, rms deviation, n_used, mask).
    """
    taus = np.asarray(taus, dtype=float)
    y = np.asarray(tau_lambda1, dtype=float)
    if form == "n2":
        args = np.array([kicked_top_log_argument(t) for t in taus])
        mask = args >= mask_threshold
        base = np.where(mask, 2.0 * np.log(np.maximum(args, 1e-300)), 0.0)
    elif form == "largeN":
        mask = np.ones(len(taus), dtype=bool)
        base = 2.0 * np.log(taus / math.sqrt(n_spins))
    else:
        raise ValueError(f"unknown form {form!r}")
    if mask.sum() < 2:
        raise ValueError("not enough non-resonant points to fit")
    resid = y[mask] - base[mask]
    constant = float(resid.mean())
    rms = float(np.sqrt(np.mean((resid - constant) ** 2)))
    return constant, rms, int(mask.sum()), mask
