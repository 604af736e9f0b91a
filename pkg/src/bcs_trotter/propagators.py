"""Exact single-addend flows and their composition into splitting integrators.

Both Hamiltonian addends generate rotations that can be written in closed
form for an arbitrary step:

* free part: each spin precesses about z by 2 eps_j t, and deviation blocks
  precess with it;
* pairing part: the total spin J is parallel to the rotating-frame field
  Delta_rot = Delta(0) + g J^z z, so every spin is carried by
  R_z(2 g J^z t) R_n(-2 |Delta_rot| t) with the field snapshotted at entry.

The tangent map of the pairing flow is the analytic derivative of that
composition; the variations of the angles and of the axis feed through the
axis-angle form of the rotation matrices.  Deviation propagation therefore
stays exact to round-off at any step size, which is what makes the large-step
regime accessible at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ModelParams,
    TangentBundle,
    degeneracy_threshold,
    rotation_matrix,
    skew_matrix,
)

FREE = 0
INT = 1

_STAGE_KINDS = {"free": FREE, "int": INT}

# SABA2 coefficients
SABA2_A1 = 0.5 * (1.0 - 1.0 / math.sqrt(3.0))
SABA2_A2 = 1.0 / math.sqrt(3.0)
SABA2_B1 = 0.5


class InvalidSchemeError(ValueError):
    """Composition coefficients do not sum to one per stage kind."""


@dataclass(frozen=True)
class CompositionScheme:
    """Ordered splitting stages (kind, coefficient) and the claimed order."""

    stages: tuple
    order_claim: int = 2
    name: str = "custom"

    def __post_init__(self):
        kinds = []
        coeffs = []
        for kind, c in self.stages:
            if kind not in _STAGE_KINDS:
                raise InvalidSchemeError(f"unknown stage kind {kind!r}")
            kinds.append(_STAGE_KINDS[kind])
            coeffs.append(float(c))
        object.__setattr__(self, "_kinds", np.array(kinds, dtype=np.int8))
        object.__setattr__(self, "_coeffs", np.array(coeffs, dtype=float))
        for label, code in _STAGE_KINDS.items():
            total = self._coeffs[self._kinds == code].sum()
            if abs(total - 1.0) > 1e-15 * max(1, len(coeffs)):
                raise InvalidSchemeError(
                    f"{label} coefficients sum to {total!r}, expected 1"
                )

    @property
    def kinds(self) -> np.ndarray:
        return self._kinds

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs


SABA2 = CompositionScheme(
    stages=(
        ("free", SABA2_A1),
        ("int", SABA2_B1),
        ("free", SABA2_A2),
        ("int", SABA2_B1),
        ("free", SABA2_A1),
    ),
    order_claim=2,
    name="SABA2",
)


# ---------------------------------------------------------------------------
# angle reduction

_TWO_PI = 2.0 * math.pi
# double-double tail of 2*pi: 2*pi = _TWO_PI + _TWO_PI_LO exactly to ~107 bits
_TWO_PI_LO = 2.4492935982947064e-16
_INV_TWO_PI = 1.0 / _TWO_PI
_REDUCE_THRESHOLD = float(2 ** 30)
_SPLITTER = 134217729.0  # 2^27 + 1, Dekker split constant


def _two_prod(a: float, b: float):
    # exact product a*b = p + err for doubles
    p = a * b
    c = _SPLITTER * a
    a_hi = c - (c - a)
    a_lo = a - a_hi
    c = _SPLITTER * b
    b_hi = c - (c - b)
    b_lo = b - b_hi
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


def reduce_angle(x: float) -> float:
    """Reduce an angle to [-pi, pi] keeping ~1 ulp accuracy for |x| < 2^46.

    For |x| below 2^30 the value passes through untouched (libm handles it);
    beyond that the multiple of 2*pi is removed in double-double arithmetic so
    the huge-step runs keep full trigonometric accuracy.
    """
    if abs(x) <= _REDUCE_THRESHOLD:
        return x
    k = round(x * _INV_TWO_PI)
    p, err = _two_prod(k, _TWO_PI)
    return (x - p) - (err + k * _TWO_PI_LO)


def _reduce_angles(x: np.ndarray) -> np.ndarray:
    if np.max(np.abs(x)) <= _REDUCE_THRESHOLD:
        return x
    return np.array([reduce_angle(v) for v in np.atleast_1d(x)]).reshape(np.shape(x))


# ---------------------------------------------------------------------------
# exact flows


def flow_free(bundle: TangentBundle, params: ModelParams, t: float) -> TangentBundle:
    """Exact free flow: spin j and its deviation blocks rotate about z by 2 eps_j t."""
    angles = _reduce_angles(2.0 * params.epsilons * t)
    c = np.cos(angles)
    s = np.sin(angles)

    def rot(vecs):
        out = np.empty_like(vecs)
        out[..., 0] = c * vecs[..., 0] - s * vecs[..., 1]
        out[..., 1] = s * vecs[..., 0] + c * vecs[..., 1]
        out[..., 2] = vecs[..., 2]
        return out

    dev = None if bundle.deviations is None else rot(bundle.deviations)
    return TangentBundle(rot(bundle.spins), dev)


def _interaction_rotations(spins: np.ndarray, params: ModelParams, t: float):
    """Snapshot the pairing field and build the two stage rotations.

    Returns (R_total, R_n, geometry dict) or None when the field is degenerate
    and the flow is the identity.
    """
    g = params.coupling
    jx, jy, jz = spins.sum(axis=0)
    delta_rot = np.array([g * jx, g * jy, g * jz])
    norm = math.sqrt(delta_rot @ delta_rot)
    if norm < degeneracy_threshold(params):
        return None
    n = delta_rot / norm
    theta_n = reduce_angle(-2.0 * norm * t)
    theta_z = reduce_angle(2.0 * g * jz * t)
    r_n = rotation_matrix(n, theta_n)
    r_z = rotation_matrix(np.array([0.0, 0.0, 1.0]), theta_z)
    geom = {
        "g": g,
        "jz": jz,
        "delta": delta_rot[:2],
        "norm": norm,
        "n": n,
        "theta_n": theta_n,
        "theta_z": theta_z,
        "r_n": r_n,
        "r_z": r_z,
    }
    return r_z @ r_n, r_n, geom


_KZ = skew_matrix(np.array([0.0, 0.0, 1.0]))
_KZ2 = _KZ @ _KZ


def _interaction_tangent(devs: np.ndarray, spins: np.ndarray, r_total: np.ndarray,
                         geom: dict, t: float) -> np.ndarray:
    """Propagate deviation vectors through one pairing stage.

    Product rule through S' = R_z R_n S: the variations of the z angle, of the
    tilt angle and of the axis each contribute a matrix applied to the entry
    configuration, on top of the plain rotation of the deviation itself.
    """
    g = geom["g"]
    jz = geom["jz"]
    dx, dy = geom["delta"]
    norm = geom["norm"]
    n = geom["n"]
    theta_n = geom["theta_n"]
    theta_z = geom["theta_z"]
    k_n = skew_matrix(n)
    k_n2 = k_n @ k_n
    cos_n, sin_n = math.cos(theta_n), math.sin(theta_n)
    cos_z, sin_z = math.cos(theta_z), math.sin(theta_z)
    r_n, r_z = geom["r_n"], geom["r_z"]

    out = np.empty_like(devs)
    for k in range(devs.shape[0]):
        w = devs[k]
        d_dx = g * w[:, 0].sum()
        d_dy = g * w[:, 1].sum()
        d_jz = w[:, 2].sum()
        d_norm = (dx * d_dx + dy * d_dy + g * g * jz * d_jz) / norm
        d_theta_n = -2.0 * t * d_norm
        d_theta_z = 2.0 * g * t * d_jz
        d_n = np.array(
            [
                d_dx / norm - dx * d_norm / norm ** 2,
                d_dy / norm - dy * d_norm / norm ** 2,
                g * (d_jz / norm - jz * d_norm / norm ** 2),
            ]
        )
        d_k = skew_matrix(d_n)
        d_r_n = (
            d_theta_n * cos_n * k_n
            + sin_n * d_k
            + d_theta_n * sin_n * k_n2
            + (1.0 - cos_n) * (k_n @ d_k + d_k @ k_n)
        )
        d_r_z = d_theta_z * cos_z * _KZ + d_theta_z * sin_z * _KZ2
        # combined action on the entry spins: dR_z R_n + R_z dR_n
        m = d_r_z @ r_n + r_z @ d_r_n
        out[k] = spins @ m.T + w @ r_total.T
    return out


def flow_int(bundle: TangentBundle, params: ModelParams, j_z0: float, t: float) -> TangentBundle:
    """Exact pairing flow with the field snapshotted from the entry configuration."""
    spins = bundle.spins
    jz = spins[:, 2].sum()
    if abs(jz - j_z0) > 1e-6 * max(1.0, abs(j_z0)):
        raise ValueError(f"j_z0 = {j_z0} does not match configuration J^z = {jz}")
    rot = _interaction_rotations(spins, params, t)
    if rot is None:
        # vanishing field: free precession by nothing
        return bundle.copy()
    r_total, _, geom = rot
    new_spins = spins @ r_total.T
    dev = None
    if bundle.deviations is not None:
        dev = _interaction_tangent(bundle.deviations, spins, r_total, geom, t)
    return TangentBundle(new_spins, dev)


def step(scheme: CompositionScheme, bundle: TangentBundle, params: ModelParams,
         j_z0: float, tau: float) -> TangentBundle:
    """One composed splitting step: stage flows applied left to right."""
    for kind, coeff in scheme.stages:
        if kind == "free":
            bundle = flow_free(bundle, params, coeff * tau)
        else:
            bundle = flow_int(bundle, params, j_z0, coeff * tau)
    return bundle


def integrate(scheme: CompositionScheme, bundle: TangentBundle, params: ModelParams,
              j_z0: float, tau: float, n_steps: int, observer=None,
              observe_every: int = 1) -> TangentBundle:
    """Apply `step` n_steps times, optionally sampling through a callback.

    The observer is called as observer(step_index, bundle) after every
    observe_every-th step (and after the last one).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    for i in range(1, n_steps + 1):
        bundle = step(scheme, bundle, params, j_z0, tau)
        if observer is not None and (i % observe_every == 0 or i == n_steps):
            observer(i, bundle)
    return bundle
