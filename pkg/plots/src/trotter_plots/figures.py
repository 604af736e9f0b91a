"""One renderer per figure kind, plus the dispatch table.

Every renderer takes the parsed input tables and an Axes, draws, and returns
nothing; selection emptiness and schema problems raise SchemaError before any
artist is created.  Styling is intentionally plain: these are verification
aids for the scan outputs, not publication assets.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import (
    BAND_COLUMNS,
    SCAN_COLUMNS,
    SEMIANALYTIC_COLUMNS,
    SPECTRUM_COLUMNS,
    SchemaError,
    ok_rows,
    read_table,
)

# SABA2 stage fractions; the two-spin scaling overlay needs them
_A1 = 0.5 * (1.0 - 1.0 / math.sqrt(3.0))
_A2 = 1.0 / math.sqrt(3.0)


def _group_mean(rows, key_cols, value_col):
    groups = {}
    for r in rows:
        key = tuple(r[c] for c in key_cols)
        groups.setdefault(key, []).append(r[value_col])
    return {k: (float(np.mean(v)), float(np.std(v) / math.sqrt(len(v))))
            for k, v in groups.items()}


def _require(rows, label):
    if not rows:
        raise SchemaError(f"empty selection after filtering: {label}")
    return rows


def render_mlce_vs_tau(paths, ax, log_lambda=True):
    """log10 Lambda_1 against log10 tau, one errorbar series per system size."""
    rows = ok_rows([r for p in paths for r in read_table(p, SCAN_COLUMNS)])
    _require(rows, "no ok rows with finite lambda1")
    by_n = _group_mean(rows, ("N", "tau"), "lambda1")
    sizes = sorted({n for n, _ in by_n})
    for n in sizes:
        taus = sorted(t for nn, t in by_n if nn == n)
        mean = np.array([by_n[(n, t)][0] for t in taus])
        err = np.array([by_n[(n, t)][1] for t in taus])
        ax.errorbar(taus, mean, yerr=err, marker="o", label=f"N = {n}")
    ax.set_xscale("log")
    if log_lambda:
        ax.set_yscale("log")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\Lambda_1$")
    ax.legend()


def render_spectra(paths, ax, log_y=True):
    """Rescaled spectra against the normalized index, one curve per (N, tau)."""
    rows = [r for p in paths for r in read_table(p, SPECTRUM_COLUMNS)]
    _require(rows, "no spectrum rows")
    by_run = {}
    for r in rows:
        by_run.setdefault((r["N"], r["tau"], r["seed"]), {})[r["i"]] = r["lambda_i"]
    curves = {}
    for (n, tau, _seed), spec in by_run.items():
        idx = sorted(spec)
        lam = np.array([spec[i] for i in idx])
        if lam[0] <= 0:
            continue
        curves.setdefault((n, tau), []).append(lam[: n] / lam[0])
    _require(list(curves), "no positive leading exponents")
    for (n, tau), members in sorted(curves.items()):
        shortest = min(len(m) for m in members)
        mean = np.mean([m[:shortest] for m in members], axis=0)
        rho = np.arange(1, shortest + 1) / n
        ax.plot(rho, np.maximum(mean, 1e-300), marker=".",
                label=rf"N={n}, $\tau$={tau:g}")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(r"$\rho = i/N$")
    ax.set_ylabel(r"$\Lambda_i/\Lambda_1$")
    ax.legend(fontsize=8)


def render_ks_entropy(paths, ax):
    """Rescaled Kolmogorov-Sinai entropy against log10 tau."""
    rows = ok_rows([r for p in paths for r in read_table(p, SCAN_COLUMNS)])
    rows = [r for r in rows if math.isfinite(r["ks_entropy"])]
    _require(rows, "no rows with a ks_entropy value")
    by_n = _group_mean(rows, ("N", "tau"), "ks_entropy")
    for n in sorted({n for n, _ in by_n}):
        taus = sorted(t for nn, t in by_n if nn == n)
        ax.errorbar(taus, [by_n[(n, t)][0] for t in taus],
                    yerr=[by_n[(n, t)][1] for t in taus], marker="s",
                    label=f"N = {n}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\kappa$")
    ax.legend()


def render_large_tau(paths, ax, semianalytic=None):
    """Memoryless-branch exponents per N, with optional Jacobian-ensemble crosses."""
    render_mlce_vs_tau(paths, ax)
    if semianalytic:
        rows = read_table(semianalytic, SEMIANALYTIC_COLUMNS)
        for n in sorted({r["N"] for r in rows}):
            sel = sorted((r["tau"], r["lambda1"]) for r in rows if r["N"] == n)
            ax.plot([t for t, _ in sel], [v for _, v in sel], "kx",
                    label=f"ensemble Jacobian N={n}")
        ax.legend(fontsize=8)


def render_memoryless_collapse(paths, ax):
    """tau Lambda_1 against ln(tau/sqrt(N)) with the slope-2 guide line."""
    rows = ok_rows([r for p in paths for r in read_table(p, SCAN_COLUMNS)])
    _require(rows, "no ok rows with finite lambda1")
    by_n = _group_mean(rows, ("N", "tau"), "lambda1")
    xs = []
    for n in sorted({n for n, _ in by_n}):
        taus = sorted(t for nn, t in by_n if nn == n)
        x = np.log(np.array(taus) / math.sqrt(n))
        y = np.array([t * by_n[(n, t)][0] for t in taus])
        ax.scatter(x, y, label=f"N = {n}", s=18)
        xs.extend(x)
    xs = np.array(sorted(xs))
    anchor = np.median([t * by_n[(n, t)][0] - 2.0 * math.log(t / math.sqrt(n))
                        for n, t in by_n])
    ax.plot(xs, 2.0 * xs + anchor, "k--", label="slope 2")
    ax.set_xlabel(r"$\ln(\tau/\sqrt{N})$")
    ax.set_ylabel(r"$\tau\,\Lambda_1$")
    ax.legend()


def render_band(paths, ax):
    """Band extrema against J^z: closed-form maxima, solved and continuum minima."""
    for path in paths:
        rows = read_table(path, BAND_COLUMNS)
        rows.sort(key=lambda r: r["j_z0"])
        js = [r["j_z0"] for r in rows]
        ax.plot(js, [r["e_max"] for r in rows], "-", color="tab:blue",
                label="E_max (closed form)")
        ax.plot(js, [r["e_min_numeric"] for r in rows], "-", color="tab:red",
                label="E_min (solved)")
        ax.plot(js, [r["e_min_analytic"] for r in rows], "--", color="tab:brown",
                label="E_min (continuum)")
    ax.set_xlabel(r"$J^z_0$")
    ax.set_ylabel("E")
    handles, labels = ax.get_legend_handles_labels()
    seen = dict(zip(labels, handles))
    ax.legend(seen.values(), seen.keys(), fontsize=8)


def render_jz_scan(paths, ax):
    """log10 Lambda_1 against J^z, one series per step size."""
    rows = ok_rows([r for p in paths for r in read_table(p, SCAN_COLUMNS)])
    _require(rows, "no ok rows with finite lambda1")
    by_tau = _group_mean(rows, ("tau", "j_z0"), "lambda1")
    for tau in sorted({t for t, _ in by_tau}):
        js = sorted(j for tt, j in by_tau if tt == tau)
        ax.errorbar(js, [by_tau[(tau, j)][0] for j in js],
                    yerr=[by_tau[(tau, j)][1] for j in js], marker="o",
                    label=rf"$\tau$ = {tau:g}")
    ax.set_yscale("log")
    ax.set_xlabel(r"$J^z_0$")
    ax.set_ylabel(r"$\Lambda_1$")
    ax.legend(fontsize=8)


def render_n2_scaling(paths, ax, constant=None):
    """Two-spin tau Lambda_1 against ln(2 tau), with the closed-form overlay."""
    rows = ok_rows([r for p in paths for r in read_table(p, SCAN_COLUMNS)])
    rows = [r for r in rows if r["N"] == 2]
    _require(rows, "no two-spin rows")
    by_tau = _group_mean(rows, ("tau",), "lambda1")
    taus = np.array(sorted(t for (t,) in by_tau))
    y = np.array([t * by_tau[(t,)][0] for t in taus])
    ax.plot(np.log(2 * taus), y, "rs", label="measured")
    args = 2.0 * taus * np.abs(np.sin(2 * _A1 * taus) * np.sin(_A2 * taus))
    base = np.where(args > 0, 2.0 * np.log(np.maximum(args, 1e-300)), -np.inf)
    if constant is None:
        good = args > 0.1
        if good.any():
            constant = float(np.mean(y[good] - base[good]))
        else:
            constant = 0.0
    ax.plot(np.log(2 * taus), base + constant, "g+",
            label=f"two-kick form, C = {constant:.2f}")
    ax.set_xlabel(r"$\ln(2\tau)$")
    ax.set_ylabel(r"$\tau\,\Lambda_1$")
    ax.legend()


FIGURES = {
    "fig1_trotter_transition": render_mlce_vs_tau,
    "fig2_spectra": render_spectra,
    "fig3_ks_entropy": render_ks_entropy,
    "fig4_large_tau": render_large_tau,
    "fig5_memoryless_scaling": render_memoryless_collapse,
    "figS1_band": render_band,
    "figS2_S3_jz_scan": render_jz_scan,
    "figS6_n2": render_n2_scaling,
    "figS7_rescaled_g": render_mlce_vs_tau,
}


def render(kind, paths, out_path, **kwargs):
    """Validate, draw and write one figure; returns the Figure for inspection."""
    if kind not in FIGURES:
        raise SchemaError(f"unknown figure kind {kind!r}")
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=120)
    try:
        FIGURES[kind](paths, ax, **kwargs)
        fig.tight_layout()
        fig.savefig(out_path)
    finally:
        plt.close(fig)
    return fig
