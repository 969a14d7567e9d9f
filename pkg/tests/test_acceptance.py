"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line with the measured quantity; the lines are
printed together in the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from lmthresh import (
    GpdParams,
    KappaParams,
    PotConfig,
    RandomStream,
    analyze,
    build_grid,
    ci_tau4_given_t3,
    forward_stop,
    gof_pvalue,
    gof_z_statistic,
    gpd_cdf,
    gpd_fit_pwm,
    gpd_g,
    gpd_g_inv,
    gpd_quantile,
    kappa_cdf,
    kappa_fit_lmom,
    kappa_lmoments,
    kappa_quantile,
    l_statistics,
    lmom_acov,
    pwm_acov,
    ratio_acov,
    ratio_acov_gpd,
)
from lmthresh.cli import run_cli
from lmthresh.lmoments import l_ratios_rows

from conftest import ACCEPTANCE_LINES, gpd_draw

TABLE_Z = [-0.559, -0.219, 0.992, 1.596, 1.663, 2.057, 0.936, 0.143, -0.341, -0.306]
TABLE_P = [0.576, 0.826, 0.321, 0.110, 0.096, 0.040, 0.349, 0.887, 0.733, 0.759]
TABLE_FS = [0.858, 1.304, 0.999, 0.778, 0.643, 0.542, 0.526, 0.733, 0.798, 0.861]


def record(num, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def test_c01_forward_stop_column():
    k, fs = forward_stop(TABLE_P, 0.1)
    err = float(np.max(np.abs(fs - TABLE_FS)))
    record(1, err <= 0.002 and k == 0, f"ForwardStop column max |err| = {err:.4f} (tol 0.002), k_hat = {k}")


def test_c02_pvalue_column():
    p = gof_pvalue(np.array(TABLE_Z))
    err = float(np.max(np.abs(p - TABLE_P)))
    record(2, err <= 0.001, f"z -> p column max |err| = {err:.5f} (tol 0.001)")


def test_c03_ratio_geometry():
    e1 = abs(gpd_g(1 / 3) - 1 / 6)
    t = np.linspace(0, 1, 1002)[1:-1]
    e2 = float(np.max(np.abs(gpd_g_inv(gpd_g(t)) - t)))
    xis = np.linspace(-0.99, 0.99, 45)
    e3 = max(abs(kappa_lmoments(KappaParams(0, 1, xi, 1))[3] - gpd_g((1 + xi) / (3 - xi))) for xi in xis)
    ok = e1 <= 1e-15 and e2 <= 1e-12 and e3 <= 1e-9
    record(3, ok, f"|g(1/3)-1/6| = {e1:.1e}, roundtrip {e2:.1e}, quadrature tau4 over xi in [-0.99, 0.99] {e3:.1e}")


def test_c04_kappa_gpd_special_case():
    worst = 0.0
    for xi in (-0.4, 0.0, 0.4):
        g, k = GpdParams(1.0, xi), KappaParams(0.0, 1.0, xi, 1.0)
        F = np.linspace(0, 0.999, 400)
        x = gpd_quantile(F, g)
        worst = max(
            worst,
            float(np.max(np.abs(kappa_quantile(F, k) - x) / np.maximum(1, np.abs(x)))),
            float(np.max(np.abs(kappa_cdf(x, k) - gpd_cdf(x, g)))),
        )
    record(4, worst <= 1e-12, f"Kappa(h=1) vs GPd cdf/quantile max err = {worst:.1e} (tol 1e-12)")


def test_c05_kappa_fit_roundtrip():
    t0 = time.perf_counter()
    bad = []
    worst = 0.0
    for xi in np.linspace(-0.4, 0.4, 9):
        for h in np.linspace(-0.9, 2.0, 9):
            true = KappaParams(0.0, 1.0, float(xi), float(h))
            try:
                fit = kappa_fit_lmom(*kappa_lmoments(true))
                err = max(abs(fit.xi - xi), abs(fit.h - h))
            except Exception as exc:  # noqa: BLE001 - record any failure
                err = math.inf
                bad.append((round(float(xi), 3), round(float(h), 4), type(exc).__name__))
                continue
            worst = max(worst, err) if err <= 1e-6 else worst
            if err > 1e-6:
                bad.append((round(float(xi), 3), round(float(h), 4), f"got ({fit.xi:.4f}, {fit.h:.4f})"))
    dt = time.perf_counter() - t0
    record(
        5,
        not bad and dt < 60,
        f"81-point grid: {81 - len(bad)} recovered to 1e-6 (worst {worst:.1e}), misses {bad}, {dt:.1f}s",
    )


@pytest.mark.slow
def test_c06_ratio_covariance_monte_carlo():
    n, reps, chunk = 5000, 10_000, 1000
    rows = []
    for xi in (-0.2, 0.0, 0.2):
        t3s, t4s = [], []
        for c in range(reps // chunk):
            u = RandomStream(606, (int(xi * 10) + 5, c)).generator().random((chunk, n))
            x = np.sort(gpd_quantile(u, GpdParams(1.0, xi)), axis=1)
            t3, t4 = l_ratios_rows(x, presorted=True)
            t3s.append(t3)
            t4s.append(t4)
        t3, t4 = np.concatenate(t3s), np.concatenate(t4s)
        C = n * np.cov(t3, t4)
        rc = ratio_acov_gpd(GpdParams(1.0, xi))
        rel = [abs(C[0, 0] / rc.T33 - 1), abs(C[0, 1] / rc.T34 - 1), abs(C[1, 1] / rc.T44 - 1)]
        rows.append((xi, max(rel)))
    worst = max(r for _, r in rows)
    detail = ", ".join(f"xi={xi:+.1f}: {r:.3f}" for xi, r in rows)
    record(6, worst <= 0.10, f"max relative error of n cov(t3, t4) vs T: {detail} (tol 0.10)")


def _band_for_sample(x, alpha=0.05):
    ls = l_statistics(x)
    fit = gpd_fit_pwm(x)
    rc = ratio_acov(lmom_acov(pwm_acov(fit)), ls.l2, ls.t3, gpd_g(ls.t3))
    return ls, ci_tau4_given_t3(ls.t3, x.size, alpha, rc)


@pytest.mark.slow
def test_c07_band_coverage():
    n, reps = 1000, 5000
    rates = []
    for xi in (-0.2, 0.0, 0.2):
        u = RandomStream(707, (int(xi * 10) + 5,)).generator().random((reps, n))
        x = gpd_quantile(u, GpdParams(1.0, xi))
        hits = 0
        for row in x:
            ls, band = _band_for_sample(row)
            hits += band.contains(ls.t4)
        rates.append((xi, hits / reps))
    ok = all(abs(r - 0.95) <= 0.02 for _, r in rates)
    detail = ", ".join(f"xi={xi:+.1f}: {r:.4f}" for xi, r in rates)
    record(7, ok, f"tau4 band coverage {detail} (target 0.95 +/- 0.02)")


@pytest.mark.slow
def test_c08_gof_null_calibration():
    n_u, n_sim, reps = 470, 500, 500
    rates = []
    for xi in (-0.2, 0.0, 0.2):
        rej = 0
        for r in range(reps):
            x = gpd_draw(n_u, 1.0, xi, seed=808, key=(int(xi * 10) + 5, r))
            z = gof_z_statistic(x, n_sim, RandomStream(809, (int(xi * 10) + 5, r))).z
            rej += gof_pvalue(z) < 0.1
        rates.append((xi, rej / reps))
    ok = all(abs(r - 0.10) <= 0.03 for _, r in rates)
    detail = ", ".join(f"xi={xi:+.1f}: {r:.3f}" for xi, r in rates)
    record(8, ok, f"GoF rejection rate at 0.1 under GPd null {detail} (target 0.10 +/- 0.03)")


def test_c09_grid_checks():
    # series data are not bundled; check the grid convention on rank data of the same sizes
    cases = [
        (315, 20, 7, 155),
        (315, 20, 13, 85),
        (628, 20, 15, 123),
        (628, 10, 0, 470),
        (315, 10, 0, 236),
    ]
    got = []
    for n, I, k, expect in cases:
        g = build_grid(np.arange(1.0, n + 1), I)
        got.append((n, I, k + 1, int(g.exceedance_counts[k]), expect))
    ok = all(abs(c - e) <= 1 for *_, c, e in got)
    detail = "; ".join(f"n={n} I={I} i={i}: n*={c} (want {e})" for n, I, i, c, e in got)
    record(9, ok, f"fallback grid checks {detail}; fixture rows also rely on criteria 1-8")


def test_c10_runtime():
    x = 2.2 + gpd_draw(628, 2.6, -0.24, seed=1010)
    cfg = PotConfig(n_candidates=20, n_sim=500, seed=1)
    analyze(x[:100], PotConfig(n_candidates=10, n_sim=50))  # warm caches
    t0 = time.perf_counter()
    rep = analyze(x, cfg)
    dt = time.perf_counter() - t0
    assert set(rep.results) == {"alcbsm", "algfsm"}
    record(10, dt <= 2.0, f"both methods, n=628, I=20, N=500: {dt:.2f}s (limit 2s)")


def test_c11_determinism(tmp_path):
    x = 1.0 + gpd_draw(700, 1.0, 0.05, seed=1111)
    data = tmp_path / "x.csv"
    data.write_text("\n".join(repr(float(v)) for v in x) + "\n")
    outs = []
    for k, workers in enumerate(("1", "4", "1", "2")):
        d = tmp_path / f"r{k}"
        d.mkdir()
        run_cli([
            "--input", str(data), "--nsim", "300", "--seed", "42", "--workers", workers,
            "--out-report", str(d / "r.json"), "--out-diagnostics", str(d / "d.tsv"),
        ])
        outs.append(((d / "r.json").read_bytes(), (d / "d.tsv").read_bytes()))
    ok = all(o == outs[0] for o in outs)
    record(11, ok, f"JSON/TSV byte-identical across 4 runs with workers 1/4/1/2: {ok}")
