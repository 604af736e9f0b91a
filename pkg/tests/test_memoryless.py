"""Tests for the large-step analytics."""

import math

import numpy as np
import pytest

from bcs_trotter import SABA2, TangentBundle, build_params, sample_initial, step
from bcs_trotter.core import free_energy_part, interaction_energy_part
from bcs_trotter.lyapunov import run_mlce
from bcs_trotter.memoryless import (
    coupling_for,
    fit_kicked_top_constant,
    kicked_top_log_argument,
    kicked_top_tau_lambda,
    n2_jacobian,
    n2_step_map,
    sample_sphere,
    semi_analytic_mlce,
    variance_ratio,
)
from bcs_trotter.propagators import SABA2_A1, SABA2_A2


def test_n2_map_zero_tau_identity():
    s = sample_sphere(1, seed=3)[0]
    assert np.allclose(n2_step_map(s, 0.0, 1.0), s)


def test_n2_map_norm_preserving():
    for seed in range(5):
        s = sample_sphere(1, seed=seed)[0]
        out = n2_step_map(s, 37.0, 1.0)
        assert np.linalg.norm(out) == pytest.approx(0.5, rel=1e-14)


def test_n2_interaction_stage_fixes_x_axis():
    """A spin on the x-axis is invariant under the pairing rotation alone."""
    from bcs_trotter import flow_int

    params = build_params(2)
    s1 = np.array([0.5, 0.0, 0.0])
    spins = np.array([s1, [0.5, 0.0, 0.0]])
    spins[1, 1:] *= -1.0
    out = flow_int(TangentBundle(spins.copy()), params, 0.0, 13.0)
    assert np.allclose(out.spins[0], s1, atol=1e-14)


def test_n2_map_matches_full_propagator():
    """The one-spin reduction equals the two-spin propagator on mirror pairs."""
    params = build_params(2)
    assert params.coupling == 1.0
    for seed in range(6):
        s1 = sample_sphere(1, seed=seed)[0]
        spins = np.array([s1, [s1[0], -s1[1], -s1[2]]])
        full = step(SABA2, TangentBundle(spins.copy()), params, 0.0, 2.0)
        direct = n2_step_map(s1, 2.0, g=1.0)
        assert np.abs(full.spins[0] - direct).max() < 1e-12


def test_n2_jacobian_zero_tau():
    s = sample_sphere(1, seed=1)[0]
    assert np.allclose(n2_jacobian(s, 0.0, 1.0), np.eye(3))


def test_n2_jacobian_free_only():
    """g = 0 removes the pairing stages: the step is R_z(-tau)."""
    s = np.array([0.1, 0.2, 0.44])
    jac = n2_jacobian(s, 3.0, g=0.0)
    c, sn = math.cos(-3.0), math.sin(-3.0)
    expected = np.array([[c, -sn, 0.0], [sn, c, 0.0], [0.0, 0.0, 1.0]])
    assert np.abs(jac - expected).max() < 1e-14


@pytest.mark.parametrize("tau", [0.5, 5.0, 50.0])
def test_n2_jacobian_matches_finite_differences(tau):
    s = sample_sphere(1, seed=42)[0]
    jac = n2_jacobian(s, tau, 1.0)
    fd = np.empty((3, 3))
    h = 1e-7
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd[:, j] = (n2_step_map(s + e, tau, 1.0) - n2_step_map(s - e, tau, 1.0)) / (2 * h)
    assert np.abs(jac - fd).max() / np.abs(fd).max() < 1e-5


def test_n2_jacobian_volume_preservation():
    """|det J| = 1: the composed stage maps preserve phase-space volume.

    Entries grow like 2 tau, so the determinant of the rounded matrix drifts
    from 1 by the conditioning envelope ~eps (2 tau)^3 however exactly the map
    preserves volume; the spec tolerance is checked where doubles can carry it
    and the envelope bounds the rest (see decisions ledger).
    """
    spins = sample_sphere(50, seed=9)
    for tau in (3.0, 30.0, 170.0, 4e3):
        jac = n2_jacobian(spins, tau, 1.0)
        err = np.abs(np.abs(np.linalg.det(jac)) - 1.0).max()
        envelope = 30.0 * 2.2e-16 * max(2.0 * tau, 1.0) ** 3
        assert err < max(1e-10, envelope), (tau, err)
    # beyond tau ~ 1e4 the rounded matrix no longer carries the determinant;
    # the per-stage test below certifies volume preservation at tau = 1e5


def test_n2_pairing_stage_unit_determinant():
    """Each pairing-stage Jacobian has unit determinant at any step size.

    The stage is a rotation plus a rank-one correction k (K_x R S) e_x^T whose
    column is orthogonal to x, so the determinant is exactly one; with a single
    large column this stays numerically verifiable even at tau = 1e5.
    """
    for seed in range(5):
        s = sample_sphere(1, seed=seed)[0]
        for tau in (7.0, 4e3, 1e5):
            k = -4.0 * 0.5 * tau          # -4 g b1 tau at g = 1
            phi = k * s[0]
            c, sn = math.cos(phi), math.sin(phi)
            rx = np.array([[1.0, 0.0, 0.0], [0.0, c, -sn], [0.0, sn, c]])
            rotated = rx @ s
            stage = rx.copy()
            stage[:, 0] += k * np.array([0.0, -rotated[2], rotated[1]])
            assert abs(np.linalg.det(stage) - 1.0) < 1e-10


def test_semi_analytic_seed_stability():
    a = semi_analytic_mlce(500.0, 2, n_samples=40_000, seed=1)
    b = semi_analytic_mlce(500.0, 2, n_samples=40_000, seed=2)
    assert abs(a.lambda1 - b.lambda1) < 3 * math.hypot(a.stderr, b.stderr)
    assert not a.warning
    assert semi_analytic_mlce(50.0, 2, n_samples=500, seed=0).warning


def test_semi_analytic_matches_simulation():
    """Ensemble Jacobian average reproduces the evolved exponent at large steps."""
    params = build_params(2)
    tau = 500.0
    pred = semi_analytic_mlce(tau, 2, n_samples=100_000, seed=3)
    sims = [run_mlce(params, sample_initial("ph_symmetric", 2, seed=s), tau,
                     10_000, seed=s + 40).lambda1 for s in range(4)]
    assert abs(np.mean(sims) - pred.lambda1) / pred.lambda1 < 0.02


def test_semi_analytic_tau_doubling():
    """tau Lambda_1 grows by ~2 ln 2 per doubling along a tau ladder.

    Individual doublings scatter by a few units from the stage-sine factors,
    so the growth rate is read off as the regression slope over the ladder.
    """
    ladder = [1e3 * 2 ** k for k in range(15)]
    values = [tau * semi_analytic_mlce(tau, 2, n_samples=20_000, seed=5).lambda1
              for tau in ladder]
    slope = np.polyfit(np.arange(len(ladder)), values, 1)[0]
    assert slope == pytest.approx(2 * math.log(2.0), abs=0.6)


def test_coupling_for():
    assert coupling_for(2) == 1.0
    assert coupling_for(32) == pytest.approx(1.0 / math.sqrt(13 * 32 / 3))


def test_variance_ratio_monte_carlo():
    """sigma(H_free) over the pairing scale Var(Delta_x)/g within 20 percent."""
    n = 32
    params = build_params(n)
    rng = np.random.default_rng(77)
    h_free, delta_x = [], []
    for _ in range(4000):
        cos_t = rng.uniform(-1, 1, n)
        phi = rng.uniform(0, 2 * np.pi, n)
        sin_t = np.sqrt(1 - cos_t ** 2)
        spins = 0.5 * np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])
        h_free.append(free_energy_part(spins, params))
        delta_x.append(params.coupling * spins[:, 0].sum())
    ratio = np.std(h_free) / (np.var(delta_x) / params.coupling)
    assert ratio == pytest.approx(variance_ratio(n), rel=0.2)


def test_kicked_top_forms():
    assert kicked_top_tau_lambda(100.0, 16, 1.5, "largeN") == pytest.approx(
        2 * math.log(100.0 / 4.0) + 1.5)
    # slope in ln(tau/sqrt(N)) is exactly 2 by construction
    lo = kicked_top_tau_lambda(100.0, 16, 0.0, "largeN")
    hi = kicked_top_tau_lambda(100.0 * math.e, 16, 0.0, "largeN")
    assert hi - lo == pytest.approx(2.0)
    with pytest.raises(ValueError):
        kicked_top_tau_lambda(10.0, 4, 0.0, "n2")
    with pytest.raises(ValueError):
        kicked_top_tau_lambda(10.0, 2, 0.0, "bogus")


def test_kicked_top_resonance_sentinel():
    """Resonances send the form to -inf (exact zero) or far negative (near zero),
    and the fitter masks them."""
    assert kicked_top_tau_lambda(0.0, 2, 0.0, "n2") == -math.inf
    tau_res = 40 * math.pi / SABA2_A2   # sin(a2 tau) ~ 1e-12 in floating point
    assert kicked_top_tau_lambda(tau_res, 2, 0.0, "n2") < -20.0
    taus = [tau_res, 100.0, 150.0, 230.0]
    constant, rms, used, mask = fit_kicked_top_constant(
        taus, [0.0, 7.0, 8.6, 10.3], "n2", 2)
    assert used == 3 and not mask[0]


def test_fit_kicked_top_requires_points():
    with pytest.raises(ValueError):
        fit_kicked_top_constant([math.pi / SABA2_A2], [1.0], "n2", 2)


def test_resonance_dips_in_simulation():
    """Measured tau Lambda_1 dips where a stage sine vanishes."""
    params = build_params(2)
    tau_res = 40 * math.pi / SABA2_A2
    values = {}
    for tau in (0.97 * tau_res, tau_res, 1.03 * tau_res):
        lams = [run_mlce(params, sample_initial("ph_symmetric", 2, seed=s),
                         tau, 3000, seed=s).lambda1 for s in range(3)]
        values[tau] = tau * np.mean(lams)
    assert values[tau_res] < values[0.97 * tau_res] - 1.0
    assert values[tau_res] < values[1.03 * tau_res] - 1.0


def test_sample_sphere_statistics():
    pts = sample_sphere(20_000, seed=4)
    assert np.allclose(np.linalg.norm(pts, axis=1), 0.5, atol=1e-12)
    assert np.abs(pts.mean(axis=0)).max() < 0.01
    assert pts[:, 2].var() == pytest.approx(1.0 / 12.0, rel=0.05)
