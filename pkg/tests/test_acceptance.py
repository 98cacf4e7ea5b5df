"""The fourteen acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary by ``conftest.py``.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_INFO, ACCEPTANCE_RESULTS
from orbitcount.clt import (
    asymptotic_mean_variance,
    distributions_float,
    kolmogorov_distance,
    log_concavity_check,
    moment_centering,
    pmf,
    psi_mgf,
    refined_centering,
)
from orbitcount.oracle import (
    brute_force_counts,
    ewens_exact,
    ewens_mean_feller,
    feller_samples,
    partition_numbers,
    stirling_first_row,
)
from orbitcount.orbit_series import build_orbit_table, h_at_one_vs_partitions, log_h_float
from orbitcount.saddle import (
    contour_integral_J,
    j_gaussian_prediction,
    log_h_contour,
    solve_saddle,
)
from orbitcount.zfun import (
    kappa_constant,
    staircase_alphas,
    z_asymptotic_constant,
    z_staircase,
)

POW2_GRID = (2**8, 2**10, 2**12, 2**14)
DOUBLING_GRID = tuple(2**e for e in range(8, 15))
XS = (0.5, 1.0, 2.0)

_DISTS: dict = {}


def record(num: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((num, title, bool(ok), detail))
    assert ok, f"criterion {num} ({title}) failed: {detail}"


def strictly_decreasing(vals) -> bool:
    return all(a > b for a, b in zip(vals, vals[1:]))


def dists(n: int):
    """Float PMFs for ell = 2 at x in XS, sharing one column pass per n."""
    if n not in _DISTS:
        _DISTS[n] = dict(zip(XS, distributions_float(2, n, XS)))
    return _DISTS[n]


def fmt(vals) -> str:
    return "[" + ", ".join(f"{v:.6g}" for v in vals) + "]"


def test_01_oracle_equivalence():
    t0 = time.perf_counter()
    bad = []
    for ell, n_max in ((1, 7), (2, 6), (3, 4)):
        table = build_orbit_table(ell, n_max)
        for n in range(n_max + 1):
            if table.row(n) != brute_force_counts(ell, n):
                bad.append((ell, n))
    dt = time.perf_counter() - t0
    record(1, "oracle equivalence", not bad and dt < 300, f"mismatches={bad}, {dt:.1f}s")


def test_02_partition_identity():
    t0 = time.perf_counter()
    report = h_at_one_vs_partitions(200)
    table = build_orbit_table(2, 200)
    p = partition_numbers(200)
    sums_ok = all(sum(table.row(n)) == math.factorial(n) * p[n] for n in range(201))
    dt = time.perf_counter() - t0
    ok = report.ok and sums_ok and dt < 60
    record(2, "partition identity", ok, f"H(1)=p(n) first mismatch={report.first_mismatch}, row sums ok={sums_ok}, {dt:.1f}s")


def test_03_stirling_identity():
    table = build_orbit_table(1, 7)
    bad = [n for n in range(8) if table.row(n) != stirling_first_row(n)]
    record(3, "Stirling identity", not bad, f"mismatches at n={bad}")


def test_04_hardy_ramanujan():
    t0 = time.perf_counter()
    p = partition_numbers(5000)

    def ratio(n):
        lp = math.log(p[n])
        return math.exp(lp + math.log(4 * n * math.sqrt(3)) - math.pi * math.sqrt(2 * n / 3))

    r500, r5000 = ratio(500), ratio(5000)
    dt = time.perf_counter() - t0
    ok = 0.95 <= r5000 <= 1.05 and abs(r5000 - 1) < abs(r500 - 1) and dt < 60
    record(4, "Hardy-Ramanujan", ok, f"ratio n=500: {r500:.6f}, n=5000: {r5000:.6f}, {dt:.1f}s")


def test_05_log_h_asymptotics():
    t0 = time.perf_counter()

    def pred(ell, n):
        return ell / (ell - 1) * kappa_constant(ell) ** (1 / ell) * n ** ((ell - 1) / ell)

    lh2 = log_h_float(2, 1.0, 10**4)
    r2 = [lh2[n] / pred(2, n) for n in (10**2, 10**4)]
    lh3 = log_h_float(3, 1.0, 10**4)
    r3 = [lh3[n] / pred(3, n) for n in (10**3, 10**4)]
    dt = time.perf_counter() - t0
    # for ell = 2 the prediction is 2 sqrt(zeta(2) n)
    assert pred(2, 100) == pytest.approx(2 * math.sqrt(kappa_constant(2) * 100), rel=1e-14)
    ok = (
        0.9 <= r2[1] <= 1.0
        and abs(r2[1] - 1) < abs(r2[0] - 1)
        and 0.85 <= r3[1] <= 1.05
        and abs(r3[1] - 1) < abs(r3[0] - 1)
        and dt < 120
    )
    record(5, "ln H asymptotics", ok, f"ell=2 {fmt(r2)}, ell=3 {fmt(r3)}, {dt:.1f}s")


def test_06_saddle_solver():
    worst = 0.0
    for ell in (2, 3, 4):
        for x in (0.5, 1.0, 2.0):
            for e in range(1, 7):
                n = 10**e
                sp = solve_saddle(ell, x, n)
                # residual recomputed independently of the solver's own report
                res = abs(x * z_staircase(ell, ell, sp.t_n).value - n) / n
                worst = max(worst, res)
    ratios = {}
    for ell in (2, 3, 4):
        for x in (0.5, 1.0, 2.0):
            n = 10**6
            ratios[(ell, x)] = solve_saddle(ell, x, n).t_n * (n / (x * kappa_constant(ell))) ** (1 / ell)
    lo, hi = min(ratios.values()), max(ratios.values())
    ok = worst <= 1e-9 and 0.99 <= lo and hi <= 1.01
    record(6, "saddle solver", ok, f"max relative residual {worst:.2e}, t_n ratio at 1e6 in [{lo:.5f}, {hi:.5f}]")


def test_07_contour_round_trip():
    t0 = time.perf_counter()
    worst = 0.0
    for ell in (2, 3):
        table = build_orbit_table(ell, 200)
        for x in (Fraction(1, 2), Fraction(1), Fraction(2)):
            for n in range(1, 201):
                v = table.h_value(n, x)
                ref = math.log(v.numerator) - math.log(v.denominator)
                worst = max(worst, abs(math.expm1(log_h_contour(ell, float(x), n) - ref)))
    dt = time.perf_counter() - t0
    record(7, "contour round-trip", worst <= 1e-8 and dt < 300, f"max relative error {worst:.2e}, {dt:.1f}s")


def test_08_j_gaussian_law():
    ratios = []
    for n in (10**2, 10**3, 10**4):
        sp = solve_saddle(2, 1.0, n)
        ratios.append(contour_integral_J(2, 1.0, sp.t_n, n).value / j_gaussian_prediction(2, 1.0, n))
    devs = [abs(r - 1) for r in ratios]
    ok = 0.9 <= ratios[-1] <= 1.1 and strictly_decreasing(devs)
    record(8, "J Gaussian law", ok, f"ratios {fmt(ratios)}")


def test_09_mgf_limit():
    s_values = (-1.0, -0.5, 0.5, 1.0)
    devs = {s: [] for s in s_values}
    info = {s: [] for s in s_values}
    for n in POW2_GRID:
        d = dists(n)[1.0]
        a, b = refined_centering(2, 1.0, n)
        am, bm = moment_centering(d)
        for s in s_values:
            devs[s].append(abs(psi_mgf(d, s, a, b) - s * s / 2))
            info[s].append(abs(psi_mgf(d, s, am, bm) - s * s / 2))
    failing = [s for s in s_values if not strictly_decreasing(devs[s])]
    detail = "; ".join(f"s={s:g} {fmt(devs[s])}" for s in s_values)
    for s in s_values:
        ACCEPTANCE_INFO.append(f"criterion 9, moment centering (not the criterion), s={s:g}: {fmt(info[s])}")
    record(9, "MGF limit", not failing, f"{detail}; not strictly decreasing for s={failing}")


def test_10_mean_variance():
    mr, vr = [], []
    for n in DOUBLING_GRID:
        d = dists(n)[1.0]
        m_pred, v_pred = asymptotic_mean_variance(2, 1.0, n)
        mr.append(float(d.mean) / m_pred)
        vr.append(float(d.variance) / v_pred)
    ok = (
        0.85 <= mr[-1] <= 1.15
        and 0.85 <= vr[-1] <= 1.15
        and strictly_decreasing([abs(r - 1) for r in mr])
        and strictly_decreasing([abs(r - 1) for r in vr])
    )
    record(10, "mean/variance asymptotics", ok, f"mean ratios {fmt(mr)}, variance ratios {fmt(vr)}")


def test_11_clt_trend():
    rows = {}
    for x in XS:
        vals = []
        for n in POW2_GRID:
            d = dists(n)[x]
            vals.append(kolmogorov_distance(d, *moment_centering(d)))
        rows[x] = vals
    ok = all(strictly_decreasing(v) for v in rows.values())
    record(11, "CLT trend", ok, "; ".join(f"x={x:g} {fmt(v)}" for x, v in rows.items()))


def test_12_z_asymptotics():
    t = 1e-3
    worst_const = 0.0
    for ell in (2, 3, 4):
        for m in range(ell - 1, ell + 3):
            alphas = staircase_alphas(ell, m)
            c = z_asymptotic_constant(alphas)
            worst_const = max(worst_const, abs(t ** alphas[0] * z_staircase(ell, m, t).value / c - 1))
    worst_der, worst_fixed = 0.0, 0.0
    for ell in (2, 3, 4):
        for m in range(ell - 1, ell + 3):
            for t0 in (0.1, 0.5, 1.0):
                target = -z_staircase(ell, m + 1, t0).value
                # relative step: the O(h^2) truncation term scales like (h/t)^2
                h = 1e-4 * t0
                cd = (z_staircase(ell, m, t0 + h).value - z_staircase(ell, m, t0 - h).value) / (2 * h)
                worst_der = max(worst_der, abs(cd / target - 1))
                h = 1e-4
                cd = (z_staircase(ell, m, t0 + h).value - z_staircase(ell, m, t0 - h).value) / (2 * h)
                worst_fixed = max(worst_fixed, abs(cd / target - 1))
    ACCEPTANCE_INFO.append(f"criterion 12, derivative check with fixed h=1e-4: worst relative error {worst_fixed:.2e}")
    ok = worst_const <= 0.02 and worst_der <= 1e-6
    record(12, "Z asymptotics", ok, f"constants worst {worst_const:.2e}, derivative worst {worst_der:.2e} (h=1e-4 t)")


def test_13_ewens():
    table = build_orbit_table(1, 50)
    bad = []
    for x in (Fraction(1, 2), Fraction(1), Fraction(2)):
        for n in range(1, 51):
            feller = ewens_mean_feller(n, x)
            if pmf(table, n, x).mean != feller or ewens_exact(n, x)[1] != feller:
                bad.append((n, x))
    draws = feller_samples(100, 1.0, 100_000, seed=13)
    mean = math.fsum(1.0 / (1 + j) for j in range(100))
    se = float(draws.std(ddof=1)) / math.sqrt(len(draws))
    z = abs(float(draws.mean()) - mean) / se
    record(13, "Ewens exact", not bad and z < 4, f"exact mismatches={bad}, sampler |z|={z:.2f}")


def test_14_log_concavity():
    violations = []
    for ell, n_max in ((2, 100), (3, 60)):
        table = build_orbit_table(ell, n_max)
        for n in range(1, n_max + 1):
            rep = log_concavity_check(table.row(n))
            if not rep.ok:
                violations.append((ell, n, rep.first_violation))
    # a violation would be a reportable finding about the conjecture, not a defect
    ACCEPTANCE_RESULTS.append((14, "log-concavity diagnostic", not violations, f"violations={violations}"))
    if violations:
        ACCEPTANCE_INFO.append(f"criterion 14 finding: log-concavity violated at {violations}")
