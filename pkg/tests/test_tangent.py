"""Finite-difference oracles for the analytic tangent maps."""

import numpy as np
import pytest

from bcs_trotter import SABA2, TangentBundle, build_params, flow_free, flow_int, sample_initial, step

EPS = 1e-7


def _fd_directional(map_fn, spins, w, eps=EPS):
    """Central finite difference of the nonlinear map along direction w."""
    return (map_fn(spins + eps * w) - map_fn(spins - eps * w)) / (2.0 * eps)


def _maps(params, tau):
    def free(s):
        return flow_free(TangentBundle(s), params, tau).spins

    def inter(s):
        return flow_int(TangentBundle(s), params, s[:, 2].sum(), tau).spins

    def full(s):
        return step(SABA2, TangentBundle(s), params, s[:, 2].sum(), tau).spins

    return {"free": free, "int": inter, "step": full}


def _propagated(params, tau, flavor, spins, w):
    bundle = TangentBundle(spins.copy(), w[None].copy())
    if flavor == "free":
        out = flow_free(bundle, params, tau)
    elif flavor == "int":
        out = flow_int(bundle, params, spins[:, 2].sum(), tau)
    else:
        out = step(SABA2, bundle, params, spins[:, 2].sum(), tau)
    return out.deviations[0]


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("tau", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("flavor", ["free", "int", "step"])
def test_tangent_matches_finite_differences(n, tau, flavor):
    """Analytic deviation propagation vs central differences, rel err < 1e-5."""
    params = build_params(n)
    rng = np.random.default_rng(100 * n + int(10 * tau))
    spins = sample_initial("random_sphere", n, seed=n + 1)
    map_fn = _maps(params, tau)[flavor]
    for _ in range(3):
        w = rng.standard_normal((n, 3))
        w /= np.linalg.norm(w)
        analytic = _propagated(params, tau, flavor, spins, w)
        numeric = _fd_directional(map_fn, spins, w)
        rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
        assert rel < 1e-5, f"{flavor} N={n} tau={tau}: rel={rel:.2e}"


def test_tangent_degenerate_field_identity():
    """Vanishing pairing field: deviations pass through the interaction flow."""
    params = build_params(4)
    spins = np.zeros((4, 3))
    spins[:2, 2] = 0.5
    spins[2:, 2] = -0.5
    w = np.random.default_rng(0).standard_normal((1, 4, 3))
    out = flow_int(TangentBundle(spins.copy(), w.copy()), params, 0.0, 3.0)
    assert np.array_equal(out.deviations, w)
    assert np.array_equal(out.spins, spins)


def test_tangent_linear_in_deviation():
    """The tangent map is linear: scaling the deviation scales the output."""
    params = build_params(6)
    spins = sample_initial("random_sphere", 6, seed=5)
    jz0 = spins[:, 2].sum()
    w = np.random.default_rng(1).standard_normal((1, 6, 3))
    one = flow_int(TangentBundle(spins.copy(), w.copy()), params, jz0, 2.0)
    three = flow_int(TangentBundle(spins.copy(), 3.0 * w), params, jz0, 2.0)
    assert np.allclose(3.0 * one.deviations, three.deviations, rtol=1e-13)
