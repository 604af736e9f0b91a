"""Grid runner: deterministic scans with CSV/JSON emission.

One CSV row per (N, tau, j_z0, seed); spectra go to a separate long-format
file.  Row order is fixed by the sorted grid so re-runs with identical
configuration and seeds are byte-identical; the wall clock lives only in the
JSON sidecar.  Per-point failures are recorded as rows with a non-ok status
and the scan continues.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

import subprocess

from .. import __version__
from ..core import build_params, energy, sample_initial
from ..lyapunov import ks_entropy, run_mlce, run_spectrum
from ..propagators import SABA2
from .config import ExperimentConfig
from .fits import fit_linear, fit_loglog

CSV_COLUMNS = ("preset", "N", "tau", "j_z0", "seed", "n_steps", "lambda1",
               "lambda1_err", "ks_entropy", "e_initial", "jz_drift", "status")
SPECTRUM_COLUMNS = ("preset", "N", "tau", "seed", "i", "lambda_i")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_FATAL = 3


def version_string() -> str:
    """Package version, extended with the git description when available."""
    base = f"bcs-trotter {__version__}"
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"],
                              capture_output=True, text=True, timeout=5)
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{base} ({desc.stdout.strip()})"
    except OSError:
        pass
    return base


def fmt(value) -> str:
    """Serialize one CSV cell; floats carry 17 significant digits."""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass
class RowResult:
    key: tuple
    values: dict
    spectrum: np.ndarray | None
    status: str


def _scheme_for(name: str):
    if name != "SABA2":
        raise ValueError(f"unknown scheme {name!r}; only SABA2 ships as a preset")
    return SABA2


def _initial_kind_for(cfg: ExperimentConfig, n: int) -> str:
    # the two-spin memoryless rows use the mirror-symmetric generator
    if cfg.initial_kind == "random_xy" and n == 2:
        return "ph_symmetric"
    return cfg.initial_kind


def _tau_grid_for(cfg: ExperimentConfig, n: int):
    # the collapse preset stores tau/sqrt(N) in its grid
    if cfg.preset == "fig5_memoryless_scaling":
        return tuple(t * math.sqrt(n) for t in cfg.tau_grid)
    return cfg.tau_grid


def grid_keys(cfg: ExperimentConfig):
    """Sorted (N, tau, j_z0, seed) grid; the fixed row order of the CSV."""
    keys = []
    for n in sorted(cfg.n_spins):
        for tau in sorted(_tau_grid_for(cfg, n)):
            for jz in sorted(cfg.j_z0):
                for seed in cfg.seeds:
                    keys.append((n, float(tau), float(jz), int(seed)))
    return keys


def run_point(cfg_dict: dict, key: tuple) -> RowResult:
    """Compute one grid point; exceptions become a non-ok status."""
    cfg = ExperimentConfig(**cfg_dict)
    n, tau, jz, seed = key
    values = {
        "preset": cfg.preset, "N": n, "tau": tau, "j_z0": jz, "seed": seed,
        "n_steps": cfg.steps_for(tau), "lambda1": math.nan,
        "lambda1_err": math.nan, "ks_entropy": math.nan,
        "e_initial": math.nan, "jz_drift": math.nan, "status": "ok",
    }
    try:
        params = build_params(n, cfg.coupling_mode)
        kind = _initial_kind_for(cfg, n)
        spins = sample_initial(kind, n, jz, seed=(seed, n), params=params)
        values["e_initial"] = energy(spins, params)
        scheme = _scheme_for(cfg.scheme)
        n_steps = cfg.steps_for(tau)
        p = n if cfg.p == "N" else int(cfg.p)
        if p == 0:
            result = run_mlce(params, spins, tau, n_steps, scheme=scheme,
                              renorm_every=cfg.renorm_every, seed=(seed, n, 1),
                              transient_fraction=cfg.transient_fraction)
            spectrum = None
        else:
            result = run_spectrum(params, spins, tau, n_steps, p=p,
                                  scheme=scheme, renorm_every=cfg.renorm_every,
                                  seed=(seed, n, 1),
                                  transient_fraction=cfg.transient_fraction)
            spectrum = result.spectrum
            if p >= n:
                values["ks_entropy"] = ks_entropy(result)
        values["lambda1"] = result.lambda1
        values["jz_drift"] = result.jz_drift
        return RowResult(key, values, spectrum, "ok")
    except Exception as exc:  # recorded, the scan continues
        values["status"] = f"error:{type(exc).__name__}"
        return RowResult(key, values, None, values["status"])


def run_band_preset(cfg: ExperimentConfig, out_dir):
    """Band-extrema tables: the figS1 preset has no dynamics to run."""
    from ..band import band_table

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    paths = []
    for n in sorted(cfg.n_spins):
        path = out / f"band_N{n}.csv"
        with open(path, "w") as fh:
            fh.write("j_z0,e_max,e_min_numeric,e_min_analytic,mu,delta\n")
            for row in band_table(n, sorted(cfg.j_z0)):
                fh.write(",".join(fmt(float(v)) for v in row) + "\n")
        paths.append(path)
    sidecar = {
        "config": cfg.to_dict(),
        "version": version_string(),
        "paper_target": cfg.paper_target,
        "wall_clock_seconds": time.time() - t0,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "n_rows": len(cfg.n_spins) * len(cfg.j_z0),
    }
    with open(out / f"{cfg.preset}_run.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, default=str)
        fh.write("\n")
    return paths[0], 0


def run(cfg: ExperimentConfig, out_dir, threads: int = 1):
    """Run the full grid and write CSV, spectra and sidecar files.

    Returns (csv_path, n_failures).
    """
    cfg.validate()
    if cfg.preset == "figS1_band":
        return run_band_preset(cfg, out_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys = grid_keys(cfg)
    cfg_dict = cfg.to_dict()
    t0 = time.time()

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_point, [cfg_dict] * len(keys), keys,
                                    chunksize=1))
    else:
        results = [run_point(cfg_dict, key) for key in keys]
    by_key = {r.key: r for r in results}

    # ensemble spread over seeds fills lambda1_err for every member row
    groups = {}
    for r in results:
        groups.setdefault(r.key[:3], []).append(r.values["lambda1"])
    for r in results:
        vals = [v for v in groups[r.key[:3]] if math.isfinite(v)]
        if len(vals) > 1:
            r.values["lambda1_err"] = float(np.std(vals, ddof=1))

    csv_path = out / f"{cfg.preset}.csv"
    with open(csv_path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for key in keys:
            row = by_key[key].values
            fh.write(",".join(fmt(row[c]) for c in CSV_COLUMNS) + "\n")

    if any(r.spectrum is not None for r in results):
        spec_path = out / f"{cfg.preset}_spectrum.csv"
        with open(spec_path, "w") as fh:
            fh.write(",".join(SPECTRUM_COLUMNS) + "\n")
            for key in keys:
                r = by_key[key]
                if r.spectrum is None:
                    continue
                n, tau, _, seed = key
                for i, lam in enumerate(r.spectrum, start=1):
                    fh.write(",".join(fmt(v) for v in
                                      (cfg.preset, n, tau, seed, i, float(lam))) + "\n")

    sidecar = {
        "config": cfg_dict,
        "version": version_string(),
        "paper_target": cfg.paper_target,
        "wall_clock_seconds": time.time() - t0,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "n_rows": len(keys),
    }
    with open(out / f"{cfg.preset}_run.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, default=str)
        fh.write("\n")

    failures = sum(1 for r in results if r.status != "ok")
    return csv_path, failures


# ---------------------------------------------------------------------------
# reflection scan


def reflection_scan(cfg: ExperimentConfig, out_dir, threads: int = 1,
                    coverage: float = 3.0):
    """Lambda_1(j_z0) tables with reflection-symmetry diagnostics.

    For every tau: the asymmetry metric max_j |L(j) - L(-j)| / L(0), the
    matching ensemble error (coverage x the worst pair's combined standard
    error of the mean), and in the memoryless branch the slope m of
    log10 Lambda_1 vs |j_z0|.  Across taus, a log-log fit of |m| vs tau.
    Fully polarized rows (|j| = N/2) are flagged degenerate.
    """
    csv_path, failures = run(cfg, out_dir, threads=threads)
    rows = read_rows(csv_path)
    n = sorted(cfg.n_spins)[0]
    diagnostics = {}
    slopes = []
    for tau in sorted(cfg.tau_grid):
        sel = [r for r in rows if r["tau"] == tau and r["status"] == "ok"]
        means, sems = {}, {}
        for jz in sorted({r["j_z0"] for r in sel}):
            vals = np.array([r["lambda1"] for r in sel if r["j_z0"] == jz])
            means[jz] = float(vals.mean())
            sems[jz] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        pos = sorted(j for j in means if j > 0 and -j in means)
        lam0 = means.get(0.0, math.nan)
        asym = max((abs(means[j] - means[-j]) for j in pos), default=math.nan) / lam0
        err = coverage * max((math.hypot(sems[j], sems[-j]) for j in pos),
                             default=math.nan) / lam0
        entry = {"means": means, "sems": sems, "asymmetry": asym,
                 "ensemble_error": err,
                 "degenerate": [j for j in means if abs(j) >= n / 2.0]}
        if tau > 1e3:  # memoryless branch: linear dependence on |j|
            js = np.array(sorted(means))
            fit = fit_linear(np.abs(js), np.log10([means[j] for j in js]))
            entry["slope"] = fit
            slopes.append((tau, abs(fit.slope)))
        diagnostics[tau] = entry
    if len(slopes) >= 2:
        taus, ms = zip(*slopes)
        diagnostics["slope_vs_tau"] = fit_loglog(np.array(taus), np.array(ms))
    return diagnostics


def read_rows(csv_path):
    """Parse a scan CSV back into typed row dicts."""
    rows = []
    with open(csv_path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            row = dict(zip(header, parts))
            for col in ("tau", "j_z0", "lambda1", "lambda1_err", "ks_entropy",
                        "e_initial", "jz_drift", "lambda_i"):
                if col in row:
                    row[col] = float(row[col])
            for col in ("N", "seed", "n_steps", "i"):
                if col in row:
                    row[col] = int(row[col])
            rows.append(row)
    return rows
