"""Render smoke tests over fixture CSVs, schema rejection, and the fig5 guide."""

import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from trotter_plots import FIGURES, SchemaError, render
from trotter_plots.schema import SCAN_COLUMNS, read_table

SCAN_HEADER = ",".join(SCAN_COLUMNS)


def write_scan_csv(path, rows):
    lines = [SCAN_HEADER]
    for r in rows:
        lines.append(",".join(str(r[c]) for c in SCAN_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def scan_row(preset="custom", n=16, tau=1.0, jz=0.0, seed=0, lam=1e-3,
             ks="nan", status="ok"):
    err = lam * 0.05 if isinstance(lam, float) else "nan"
    return {"preset": preset, "N": n, "tau": tau, "j_z0": jz, "seed": seed,
            "n_steps": 1000, "lambda1": lam, "lambda1_err": err,
            "ks_entropy": ks, "e_initial": 0.1, "jz_drift": 1e-14,
            "status": status}


@pytest.fixture
def fixtures(tmp_path):
    out = {}
    # generic scan over tau for two sizes (fig1, figS7)
    rows = []
    for n in (32, 64):
        for tau in np.geomspace(0.2, 2.0, 6):
            for seed in (0, 1):
                rows.append(scan_row(n=n, tau=float(tau), seed=seed,
                                     lam=2e-4 * tau ** 1.4 * (1 + 0.03 * seed)))
    out["scan"] = write_scan_csv(tmp_path / "scan.csv", rows)

    # collapse data (fig5, fig4)
    rows = []
    for n in (16, 32):
        for tau in np.geomspace(4e2 * math.sqrt(n), 6e4 * math.sqrt(n), 6):
            for seed in (0, 1):
                lam = (2.0 * math.log(tau / math.sqrt(n)) - 2.4) / tau
                rows.append(scan_row(n=n, tau=float(tau), seed=seed,
                                     lam=lam * (1 + 0.02 * seed)))
    out["collapse"] = write_scan_csv(tmp_path / "collapse.csv", rows)

    # KS entropy scan
    rows = [scan_row(n=32, tau=float(t), seed=s, lam=1e-3,
                     ks=0.3 if t < 10 else 0.01)
            for t in (0.5, 1.0, 1e3, 1e6) for s in (0, 1)]
    out["ks"] = write_scan_csv(tmp_path / "ks.csv", rows)

    # J^z scan
    rows = [scan_row(n=32, tau=tau, jz=float(j), seed=s, lam=1e-5 * 10 ** (-0.02 * abs(j)))
            for tau in (1.0, 1e6) for j in (-5.0, 0.0, 5.0) for s in (0, 1)]
    out["jz"] = write_scan_csv(tmp_path / "jz.csv", rows)

    # two-spin curve (figS6)
    rows = [scan_row(n=2, tau=float(t), seed=s,
                     lam=(2 * math.log(2 * t) - 5.0) / t)
            for t in np.geomspace(80, 7e4, 8) for s in (0, 1)]
    out["n2"] = write_scan_csv(tmp_path / "n2.csv", rows)

    # spectra long file
    lines = ["preset,N,tau,seed,i,lambda_i"]
    for tau, decay in ((1.0, 0.5), (1e6, 0.05)):
        for i in range(1, 5):
            lines.append(f"custom,4,{tau},0,{i},{1e-3 * decay ** (i - 1)}")
    spec = tmp_path / "spec.csv"
    spec.write_text("\n".join(lines) + "\n")
    out["spectrum"] = spec

    # band table
    lines = ["j_z0,e_max,e_min_numeric,e_min_analytic,mu,delta"]
    for j in (-8.0, -4.0, 0.0, 4.0, 8.0):
        emax = (32 ** 2 - 4 * j * j) / (4 * 31)
        lines.append(f"{j},{emax},{-10.8 + 0.02 * j * j},{-10.2 + 0.02 * j * j},"
                     f"{0.02 * j},{0.43}")
    band = tmp_path / "band.csv"
    band.write_text("\n".join(lines) + "\n")
    out["band"] = band

    # ensemble-Jacobian table
    lines = ["N,tau,lambda1,stderr,n_samples"]
    for n in (2, 16):
        for t in (1e2, 1e3, 1e4):
            lines.append(f"{n},{t},{(2 * math.log(t) - 3) / t},1e-6,10000")
    semi = tmp_path / "semi.csv"
    semi.write_text("\n".join(lines) + "\n")
    out["semi"] = semi
    return out


FIXTURE_FOR = {
    "fig1_trotter_transition": "scan",
    "fig2_spectra": "spectrum",
    "fig3_ks_entropy": "ks",
    "fig4_large_tau": "collapse",
    "fig5_memoryless_scaling": "collapse",
    "figS1_band": "band",
    "figS2_S3_jz_scan": "jz",
    "figS6_n2": "n2",
    "figS7_rescaled_g": "scan",
}


@pytest.mark.parametrize("kind", sorted(FIGURES))
def test_every_kind_renders(kind, fixtures, tmp_path):
    """Acceptance 14: each figure kind renders an image from fixture CSVs."""
    out = tmp_path / f"{kind}.png"
    render(kind, [fixtures[FIXTURE_FOR[kind]]], out)
    assert out.exists() and out.stat().st_size > 2000
    print(f"\nACCEPTANCE 14 ({kind}): PASS - rendered {out.name}", flush=True)


def test_fig5_includes_slope_two_guide(fixtures, tmp_path):
    fig = render("fig5_memoryless_scaling", [fixtures["collapse"]],
                 tmp_path / "fig5.png")
    labels = [line.get_label() for line in fig.axes[0].get_lines()]
    assert "slope 2" in labels
    guide = [l for l in fig.axes[0].get_lines() if l.get_label() == "slope 2"][0]
    x, y = guide.get_data()
    slope = (y[-1] - y[0]) / (x[-1] - x[0])
    assert slope == pytest.approx(2.0, abs=1e-12)


def test_fig4_overlays_semianalytic(fixtures, tmp_path):
    fig = render("fig4_large_tau", [fixtures["collapse"]], tmp_path / "f4.png",
                 semianalytic=fixtures["semi"])
    labels = [line.get_label() for line in fig.axes[0].get_lines()]
    assert any("Jacobian" in lab for lab in labels)


def test_schema_violation_raises(fixtures, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("preset,N,tau\ncustom,4,1.0\n")
    with pytest.raises(SchemaError):
        render("fig1_trotter_transition", [bad], tmp_path / "no.png")
    assert not (tmp_path / "no.png").exists()


def test_empty_selection_raises(fixtures, tmp_path):
    rows = [scan_row(status="error:GapSolverError", lam="nan")]
    path = write_scan_csv(tmp_path / "allbad.csv", rows)
    with pytest.raises(SchemaError):
        render("fig1_trotter_transition", [path], tmp_path / "no.png")
    assert not (tmp_path / "no.png").exists()


def test_reader_type_enforcement(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(SCAN_HEADER + "\n" +
                    ",".join(["custom", "4", "oops"] + ["0"] * 8 + ["ok"]) + "\n")
    with pytest.raises(SchemaError):
        read_table(path, SCAN_COLUMNS)


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "trotter_plots.cli", *args],
                          capture_output=True, text=True)


def test_cli_renders_and_rejects(fixtures, tmp_path):
    out = tmp_path / "cli.png"
    r = _cli("--kind", "fig5_memoryless_scaling",
             "--in", str(fixtures["collapse"]), "--out", str(out))
    assert r.returncode == 0 and out.exists()
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n1\n")
    r2 = _cli("--kind", "fig1_trotter_transition", "--in", str(bad),
              "--out", str(tmp_path / "x.png"))
    assert r2.returncode != 0
    assert not (tmp_path / "x.png").exists()
    print("\nACCEPTANCE 14 (schema rejection): PASS - nonzero exit, no file",
          flush=True)
