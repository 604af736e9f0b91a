"""Model definition for the mean-field BCS pseudospin system.

The dynamical state is a set of N classical spins of fixed length 1/2 on
equidistant single-particle levels eps_j in [-1/2, +1/2].  The Hamiltonian
splits into a free precession part sum_j 2 eps_j S_j^z and a pairing part
-g [(J^x)^2 + (J^y)^2], where J^a = sum_j S_j^a.  This module holds the
parameter container, collective quantities (pairing field and its
rotating-frame extension), energies, axis-angle rotations, and the initial
condition generators used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPIN_LENGTH = 0.5

COUPLING_MODES = ("standard", "rescaled_sqrtN", "memoryless_gN", "explicit")

#: |S_j| and rotation-orthogonality tolerance used by validators.
NORM_TOL = 1e-12


class DegenerateFieldError(RuntimeError):
    """Raised when an operation needs a rotation axis but the field vanishes."""


def variance_ratio(n_spins: int) -> float:
    """Typical |H_free / H_int| scale for random configurations, sqrt(13 N / 3)."""
    if n_spins < 2:
        raise ValueError(f"need at least two spins, got {n_spins}")
    return math.sqrt(13.0 * n_spins / 3.0)


def tau_critical(n_spins: int) -> float:
    """Step size where the weakly chaotic regime crosses into the memoryless one."""
    return math.sqrt(n_spins)


@dataclass(frozen=True)
class ModelParams:
    """System size, single-particle levels and pairing coupling."""

    n_spins: int
    epsilons: np.ndarray
    coupling: float
    coupling_mode: str = "standard"

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        object.__setattr__(self, "epsilons", eps)
        if self.n_spins < 2:
            raise ValueError(f"invalid size: need N >= 2, got N={self.n_spins}")
        if eps.shape != (self.n_spins,):
            raise ValueError("epsilons must have one entry per spin")
        if self.coupling <= 0.0:
            raise ValueError("coupling must be positive")
        if self.coupling_mode not in COUPLING_MODES:
            raise ValueError(f"unknown coupling mode {self.coupling_mode!r}")


def level_spacing_energies(n_spins: int) -> np.ndarray:
    """Equidistant levels eps_j = -1/2 + (j-1)/(N-1), symmetric about zero."""
    return -0.5 + np.arange(n_spins, dtype=float) / (n_spins - 1)


def build_params(n_spins: int, mode: str = "standard", coupling: float | None = None) -> ModelParams:
    """Build ModelParams for one of the supported coupling modes.

    standard:       g = 1/(N-1), the single-particle level spacing
    rescaled_sqrtN: g = sqrt(N)/(N-1)
    memoryless_gN:  g = 1/sqrt(13 N / 3)
    explicit:       g = coupling (required)
    """
    if n_spins < 2:
        raise ValueError(f"invalid size: need N >= 2, got N={n_spins}")
    eps = level_spacing_energies(n_spins)
    if mode == "standard":
        g = 1.0 / (n_spins - 1)
    elif mode == "rescaled_sqrtN":
        g = math.sqrt(n_spins) / (n_spins - 1)
    elif mode == "memoryless_gN":
        g = 1.0 / variance_ratio(n_spins)
    elif mode == "explicit":
        if coupling is None:
            raise ValueError("explicit mode requires a coupling value")
        g = float(coupling)
    else:
        raise ValueError(f"unknown coupling mode {mode!r}")
    return ModelParams(n_spins=n_spins, epsilons=eps, coupling=g, coupling_mode=mode)


# ---------------------------------------------------------------------------
# rotations


def skew_matrix(n: np.ndarray) -> np.ndarray:
    """Cross-product generator K(n) with K(n) v = n x v."""
    return np.array(
        [
            [0.0, -n[2], n[1]],
            [n[2], 0.0, -n[0]],
            [-n[1], n[0], 0.0],
        ]
    )


def rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Anticlockwise rotation about a unit axis, R = 1 + sin(t) K + (1-cos(t)) K^2."""
    axis = np.asarray(axis, dtype=float)
    nrm = math.sqrt(axis @ axis)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must be a unit vector, |axis| = {nrm}")
    k = skew_matrix(axis)
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def rotation_apply(axis: np.ndarray, angle: float, v: np.ndarray) -> np.ndarray:
    """Apply R(axis, angle) to a 3-vector (or an (..., 3) stack of them)."""
    return np.asarray(v, dtype=float) @ rotation_matrix(axis, angle).T


def rotate_z(spins: np.ndarray, angles: np.ndarray | float) -> np.ndarray:
    """Rotate (..., 3) vectors about z by per-row angles; z components untouched."""
    c = np.cos(angles)
    s = np.sin(angles)
    out = np.empty_like(spins)
    out[..., 0] = c * spins[..., 0] - s * spins[..., 1]
    out[..., 1] = s * spins[..., 0] + c * spins[..., 1]
    out[..., 2] = spins[..., 2]
    return out


# ---------------------------------------------------------------------------
# collective quantities and energies


@dataclass(frozen=True)
class CollectiveQuantities:
    """Totals J^a, pairing field Delta, and its rotating-frame extension."""

    j_x: float
    j_y: float
    j_z: float
    delta: np.ndarray            # (Delta_x, Delta_y) = g (J^x, J^y)
    delta_rot: np.ndarray        # Delta + g j_z0 z
    delta_rot_norm: float
    n_rot: np.ndarray            # unit axis, undefined when degenerate
    degenerate: bool


def degeneracy_threshold(params: ModelParams) -> float:
    # |Delta_rot| below this is treated as a vanishing field (identity flow).
    return 1e-14 * max(1.0, params.coupling * params.n_spins)


def collective(spins: np.ndarray, params: ModelParams, j_z0: float) -> CollectiveQuantities:
    """Collective quantities of a configuration, with Delta_rot built from j_z0."""
    jx, jy, jz = spins.sum(axis=0)
    g = params.coupling
    delta = np.array([g * jx, g * jy])
    delta_rot = np.array([delta[0], delta[1], g * j_z0])
    nrm = math.sqrt(delta_rot @ delta_rot)
    if nrm < degeneracy_threshold(params):
        return CollectiveQuantities(jx, jy, jz, delta, delta_rot, nrm, np.zeros(3), True)
    return CollectiveQuantities(jx, jy, jz, delta, delta_rot, nrm, delta_rot / nrm, False)


def energy(spins: np.ndarray, params: ModelParams) -> float:
    """Total energy sum_j 2 eps_j S_j^z - g [(J^x)^2 + (J^y)^2]."""
    jx = spins[:, 0].sum()
    jy = spins[:, 1].sum()
    free = 2.0 * float(params.epsilons @ spins[:, 2])
    return free - params.coupling * (jx * jx + jy * jy)


def free_energy_part(spins: np.ndarray, params: ModelParams) -> float:
    return 2.0 * float(params.epsilons @ spins[:, 2])


def interaction_energy_part(spins: np.ndarray, params: ModelParams) -> float:
    jx = spins[:, 0].sum()
    jy = spins[:, 1].sum()
    return -params.coupling * (jx * jx + jy * jy)


def validate_spins(spins: np.ndarray, tol: float = NORM_TOL) -> None:
    """Check |S_j| = 1/2 within relative tolerance."""
    norms = np.linalg.norm(spins, axis=1)
    worst = np.max(np.abs(norms / SPIN_LENGTH - 1.0))
    if worst > tol:
        raise ValueError(f"spin norms deviate from 1/2 by relative {worst:.3e}")


# ---------------------------------------------------------------------------
# tangent bundle


@dataclass
class TangentBundle:
    """A spin configuration plus p deviation vectors in the 3N tangent space.

    deviations has shape (p, N, 3); block k,j is the j-th spin's entry of the
    k-th deviation vector.  May be None for trajectory-only evolution.
    """

    spins: np.ndarray
    deviations: np.ndarray | None = None

    @property
    def n_spins(self) -> int:
        return self.spins.shape[0]

    @property
    def p(self) -> int:
        return 0 if self.deviations is None else self.deviations.shape[0]

    def copy(self) -> "TangentBundle":
        dev = None if self.deviations is None else self.deviations.copy()
        return TangentBundle(self.spins.copy(), dev)


def random_deviations(n_spins: int, p: int, seed) -> np.ndarray:
    """p orthonormal Gaussian deviation vectors, shape (p, N, 3)."""
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((p, 3 * n_spins))
    q, _ = np.linalg.qr(w.T)
    return np.ascontiguousarray(q.T.reshape(p, n_spins, 3))


# ---------------------------------------------------------------------------
# initial conditions

INITIAL_KINDS = (
    "random_sphere",
    "random_xy",
    "fixed_jz_mixed",
    "max_energy",
    "min_energy",
    "perturbed_max",
    "perturbed_min",
    "ph_symmetric",
)


def _sphere_points(rng, n: int) -> np.ndarray:
    # uniform measure: cos(theta) ~ U[-1, 1], phi ~ U[0, 2pi)
    cos_t = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    sin_t = np.sqrt(1.0 - cos_t * cos_t)
    pts = np.empty((n, 3))
    pts[:, 0] = sin_t * np.cos(phi)
    pts[:, 1] = sin_t * np.sin(phi)
    pts[:, 2] = cos_t
    return SPIN_LENGTH * pts


def _xy_points(rng, n: int) -> np.ndarray:
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    pts = np.zeros((n, 3))
    pts[:, 0] = SPIN_LENGTH * np.cos(phi)
    pts[:, 1] = SPIN_LENGTH * np.sin(phi)
    return pts


def _domain_wall(n_spins: int, j_z0: float) -> np.ndarray:
    # first K spins down, the rest up; K = N/2 - j_z0 must be a whole number
    k_float = n_spins / 2.0 - j_z0
    k = round(k_float)
    if abs(k_float - k) > 1e-12 or not (0 <= k <= n_spins):
        raise ValueError(f"infeasible constraint: J^z = {j_z0} with N = {n_spins}")
    spins = np.zeros((n_spins, 3))
    spins[:k, 2] = -SPIN_LENGTH
    spins[k:, 2] = SPIN_LENGTH
    return spins


def sample_initial(kind: str, n_spins: int, j_z0: float = 0.0, seed=0,
                   params: ModelParams | None = None) -> np.ndarray:
    """Deterministic initial spin configuration of the requested kind.

    Fixed-J^z kinds return a configuration whose J^z equals j_z0 exactly.
    min_energy and perturbed_min solve the extremal-band equations and
    propagate solver failures.
    """
    if kind not in INITIAL_KINDS:
        raise ValueError(f"unknown initial-condition kind {kind!r}")
    if abs(j_z0) > n_spins / 2.0 + 1e-12:
        raise ValueError(f"infeasible constraint: |J^z| = {abs(j_z0)} > N/2")
    rng = np.random.default_rng(seed)

    if kind == "random_sphere":
        return _sphere_points(rng, n_spins)

    if kind == "random_xy":
        return _xy_points(rng, n_spins)

    if kind == "fixed_jz_mixed":
        n_pinned = round(2.0 * abs(j_z0))
        if abs(n_pinned - 2.0 * abs(j_z0)) > 1e-12 or n_pinned > n_spins:
            raise ValueError(f"infeasible constraint: J^z = {j_z0} with N = {n_spins}")
        spins = _xy_points(rng, n_spins)
        idx = rng.choice(n_spins, size=n_pinned, replace=False)
        spins[idx] = 0.0
        spins[idx, 2] = math.copysign(SPIN_LENGTH, j_z0) if j_z0 != 0.0 else SPIN_LENGTH
        return spins

    if kind == "max_energy":
        return _domain_wall(n_spins, j_z0)

    if kind == "perturbed_max":
        spins = _domain_wall(n_spins, j_z0)
        k = round(n_spins / 2.0 - j_z0)
        if k == 0 or k == n_spins:
            raise ValueError("fully polarized state has no domain wall to perturb")
        spins[[k - 1, k]] = _xy_points(rng, 2)
        return spins

    if kind == "ph_symmetric":
        if n_spins % 2:
            raise ValueError("particle-hole symmetric states need even N")
        if j_z0 != 0.0:
            raise ValueError("particle-hole symmetric states have J^z = 0")
        half = _sphere_points(rng, n_spins // 2)
        spins = np.empty((n_spins, 3))
        spins[: n_spins // 2] = half
        mirror = half[::-1].copy()
        mirror[:, 1] *= -1.0
        mirror[:, 2] *= -1.0
        spins[n_spins // 2:] = mirror
        return spins

    # min_energy / perturbed_min need the band solver
    from . import band

    point = band.solve_extremal_min(n_spins, j_z0, params=params)
    spins = point.extremal_config.copy()
    if kind == "perturbed_min":
        lo = n_spins // 2 - 1
        angles = rng.uniform(0.0, 2.0 * np.pi, 2)
        spins[lo] = rotate_z(spins[lo], angles[0])
        spins[lo + 1] = rotate_z(spins[lo + 1], angles[1])
    return spins
