"""Acceptance criteria, one test each.  Every test prints a single PASS/FAIL line;
the lines are also collected into the terminal summary by conftest."""

import math
import time

import numpy as np
import pytest

from superperiod.cli import run_scenario
from superperiod.elliptic import TWO_PI_I, EllipticContext, wp_laurent
from superperiod.hyperelliptic import SPINS, genus1_mumford_coefficient, genus1_pole_order_fit
from superperiod.laws import run_laws
from superperiod.oracle import degeneration_log_probe
from superperiod.scenarios import oracle_table, seed, witten_ratio

LINES = {}


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES[n] = line
    print(line)
    assert ok, line


def random_pairs(count, salt):
    rng = np.random.default_rng(seed() * 1000 + salt)
    return [(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5)),
             complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5))) for _ in range(count)]


def pair_config(mode, t1, t2, **extra):
    return dict(mode=mode, tau1=[t1.real, t1.imag], tau2=[t2.real, t2.imag], **extra)


def failed(rep, prefix=""):
    return [c["name"] for c in rep["comparisons"] if c["name"].startswith(prefix) and not c["pass"]]


def worst(rep, prefix=""):
    return max((c["error"] for c in rep["comparisons"] if c["name"].startswith(prefix)), default=0.0)


def test_criterion_01_even_omega_mod_q4():
    bad, slowest, err = [], 0.0, 0.0
    for t1, t2 in random_pairs(5, 1):
        start = time.perf_counter()
        rep, _ = run_scenario(pair_config("even", t1, t2, N=4), timestamp=False)
        slowest = max(slowest, time.perf_counter() - start)
        bad += failed(rep, "Omega")
        err = max(err, worst(rep, "Omega"))
    report(1, not bad and slowest < 1.0,
           f"even Omega q^0..q^3 vs closed form: worst error {err:.1e}, slowest pair {slowest:.2f} s")


def test_criterion_02_super_omega_mod_t5():
    bad, slowest, err, count = [], 0.0, 0.0, 0
    for t1, t2 in random_pairs(5, 2):
        start = time.perf_counter()
        rep, _ = run_scenario(pair_config("plus_plus", t1, t2, N=4), timestamp=False)
        slowest = max(slowest, time.perf_counter() - start)
        rows = [c for c in rep["comparisons"] if c["name"].startswith("Omega")]
        count += len(rows)
        bad += [c["name"] for c in rows if not c["pass"]]
        err = max(err, max(c["error"] for c in rows))
    # 3 entries x 2 components x t^0..t^4 per pair
    report(2, not bad and count == 5 * 30 and slowest < 5.0,
           f"{count} super Omega coefficients through t^4: worst error {err:.1e}, slowest pair {slowest:.2f} s")


def test_criterion_03_canonical_pullback():
    rep, _ = run_scenario({"mode": "plus_plus"}, timestamp=False)
    f = [c for c in rep["comparisons"] if c["name"].startswith("pullback f")]
    g = [c for c in rep["comparisons"] if c["name"].startswith("pullback g")]
    ok = len(f) == 4 and len(g) == 2 and all(c["pass"] for c in f + g) and all(c["tolerance"] <= 1e-12 for c in f)
    report(3, ok, f"f = 1/2 mod t^4 (error {worst(rep, 'pullback f'):.1e}), "
                  f"g1, g2 at t^3 (error {worst(rep, 'pullback g'):.1e})")


def test_criterion_04_oracle_cross_check():
    t1, t2 = complex(0, 1.7), complex(0.3, 2.1)
    q = 1e-3 * np.exp(1j * np.pi / 5)
    C = 1e3
    start = time.perf_counter()
    rows = oracle_table(t1, t2, [q, q / 2])
    elapsed = time.perf_counter() - start
    bound_ok = all(r["error"] <= 1e-9 + C * abs(r["q"]) ** 4 for r in rows)
    ratio = rows[0]["ratio_to_next"]
    report(4, bound_ok and 12 <= ratio <= 20 and elapsed < 60,
           f"errors {rows[0]['error']:.2e}, {rows[1]['error']:.2e}; ratio {ratio:.2f}; {elapsed:.1f} s")


def test_criterion_05_h_expansion_identity():
    rng = np.random.default_rng(seed() * 1000 + 5)
    bad, err = [], 0.0
    for t1, t2 in random_pairs(3, 5):
        tt1 = complex(rng.uniform(-0.5, 0.5), -rng.uniform(0.8, 2.5))
        tt2 = complex(rng.uniform(-0.5, 0.5), -rng.uniform(0.8, 2.5))
        cfg = pair_config("plus_plus", t1, t2, N=4, taut1=[tt1.real, tt1.imag], taut2=[tt2.real, tt2.imag])
        rep, _ = run_scenario(cfg, timestamp=False)
        rows = [c for c in rep["comparisons"] if c["name"].startswith("h")]
        bad += [c["name"] for c in rows if not c["pass"]]
        bad += [] if len(rows) == 5 else ["missing h comparisons"]
        err = max(err, max(c["error"] for c in rows))
    report(5, not bad, f"h0^4 h11/(t t~) = -8 pi^2 h0^6 and component formulas: worst error {err:.1e}")


def test_criterion_06_minus_minus_sector():
    rep, _ = run_scenario({"mode": "minus_minus"}, timestamp=False)
    names = ("Omega12[eta1*eta2][t^-1]", "Omega12[1][t^2]", "pullback f[t^-2]", "pullback f[t^-1]")
    rows = [c for c in rep["comparisons"] if c["name"] in names]
    ok = len(rows) == len(names) and all(c["pass"] for c in rows)
    report(6, ok, f"polar and t^2 terms of Omega12, pullback of t: worst error {max(c['error'] for c in rows):.1e}")


def test_criterion_07_theta_berezinian():
    rep, _ = run_scenario({"mode": "minus_minus"}, timestamp=False)
    rows = [c for c in rep["comparisons"] if c["name"].startswith("Ber[")]
    sources = {c["name"].split("]")[0][4:] for c in rows}
    ok = sources == {"closed_form", "solver"} and all(c["pass"] and c["tolerance"] <= 1e-12 for c in rows)
    report(7, ok, f"Ber = -t^2 mod t^3 from both matrices: worst error {max(c['error'] for c in rows):.1e}")


def test_criterion_08_genus1_mumford():
    rng = np.random.default_rng(seed() * 1000 + 8)
    worst_sum = 0.0
    for _ in range(10):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5))
        c = [genus1_mumford_coefficient(tau, s) for s in SPINS]
        worst_sum = max(worst_sum, abs(sum(c)) / max(abs(x) for x in c))
    fit = genus1_pole_order_fit((1e-2, 1e-3, 1e-4))
    lim = fit["limits"]
    converging = abs(lim[2] - lim[1]) < abs(lim[1] - lim[0]) and abs(lim[2]) > 1
    ok = worst_sum < 1e-12 and abs(fit["k"] - 1) <= 0.02 and converging
    report(8, ok, f"spin sums {worst_sum:.1e} relative; pole order {fit['k']:.6f}; "
                  f"F (v1 - v2) -> {lim[2].real:.4g}")


def test_criterion_09_witten_ratio():
    pairs = random_pairs(4, 9)
    r = [witten_ratio(a, b) for a, b in pairs]
    spread = max(abs(x - r[0]) / abs(r[0]) for x in r)
    report(9, spread < 1e-6, f"A/(BC) over c1 c2 across 4 pairs: {r[0].real:.6g}, relative spread {spread:.1e}")


def test_criterion_10_elliptic_suite():
    rng = np.random.default_rng(seed() * 1000 + 10)
    errs = {"Legendre": 0.0, "4e1e2e3=g3": 0.0, "h-square": 0.0, "ODE": 0.0}
    for _ in range(10):
        tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 2.5))
        ctx = EllipticContext(tau)
        # eta2 from the quasi-period of zeta, not from the relation itself
        z0 = 0.21 + 0.13j
        eta2 = ctx.zeta(z0 + tau) - ctx.zeta(z0)
        errs["Legendre"] = max(errs["Legendre"], abs(tau * ctx.eta1 - eta2 - TWO_PI_I))
        e1, e2, e3 = ctx.e
        errs["4e1e2e3=g3"] = max(errs["4e1e2e3=g3"], abs(4 * e1 * e2 * e3 - ctx.g3) / max(1, abs(ctx.g3)))
        z = rng.uniform(0.05, 0.95) + rng.uniform(0.05, 0.45) * tau
        w = ctx.wp(z)
        h2 = (w - e2) * (w - e3) / (w - e1)
        errs["h-square"] = max(errs["h-square"], abs(ctx.h(0.5, z) ** 2 - h2) / max(1, abs(h2)))
        s = wp_laurent(ctx, 24)
        ds = s.derivative()
        resid = ds * ds - (4 * s * s * s - ctx.g2 * s - ctx.g3)
        scale = max(abs(ctx.g2), abs(ctx.g3))
        errs["ODE"] = max(errs["ODE"], max(abs(resid[p]) for p in range(-6, 16)) / scale)
    lam16 = []
    for x in (1e-3, 1e-4):
        lam16.append(EllipticContext(1j * -math.log(x) / math.pi).lam / x)
    tols = {"Legendre": 1e-12, "4e1e2e3=g3": 1e-12, "h-square": 1e-10, "ODE": 1e-10}
    ok = all(errs[k] < tols[k] for k in tols) and abs(lam16[-1] - 16) < 0.16
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
    report(10, ok, f"{detail}; lambda/q^(1/2) -> {abs(lam16[-1]):.4f}")


@pytest.mark.parametrize("merge", ["uu"])
def test_criterion_11_log_degeneration(merge):
    pr = degeneration_log_probe(merge_type=merge, gaps=(1e-2, 1e-3, 1e-4))
    dev = max(abs(k - pr.nearest_integer) / abs(pr.nearest_integer) for k in pr.k_increments)
    ok = pr.nearest_integer != 0 and dev < 0.02 and pr.offdiag_drift < 1e-3
    report(11, ok, f"k = {pr.k:.6f} (nearest {pr.nearest_integer}, deviation {dev:.1e}); "
                   f"off-diagonal drift {pr.offdiag_drift:.1e}")


def test_criterion_12_algebra_laws():
    rng = np.random.default_rng(seed() * 1000 + 12)
    tally = run_laws(rng, rounds=1667, tol=1e-12)
    report(12, tally.checks >= 10 ** 4 and tally.failures == 0,
           f"{tally.checks} randomized law checks, {tally.failures} failures, "
           f"worst {max(tally.worst.values()):.1e}")
