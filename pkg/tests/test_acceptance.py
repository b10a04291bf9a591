"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL criterion N: ...`` line, printed in the
terminal summary, and then asserts the criterion.  Tolerances and runtime
limits are fixed here and never relaxed.
"""

import time
from fractions import Fraction

import numpy as np
import pytest
from _oracles import oracle
from conftest import ACCEPTANCE_LINES

from zeromass import bessel
from zeromass.asymptotics import envelope_constants, envelope_limit, fit_origin_behavior
from zeromass.checks import nonexistence_evidence, solution_checks, sup_distance
from zeromass.green import FixedPointOptions, builtin_init, fixed_point_solve
from zeromass.pohozaev import obstruction_suite
from zeromass.regions import Region, ScanSpec, classify, critical_curves, scan_grid
from zeromass.scaling import Parameters
from zeromass.shooting import bisect_ground_state, find_bracket

pytestmark = pytest.mark.acceptance


def record(n: int, ok: bool, text: str, elapsed: float, limit: float):
    in_time = elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    ACCEPTANCE_LINES.append(f"{verdict} criterion {n}: {text} [{elapsed:.2f} s, limit {limit:g} s]")
    print(ACCEPTANCE_LINES[-1])
    return ok and in_time


def _fd_order(f, exact, t, h):
    """Observed order of the central difference of ``f`` at ``t`` from steps ``h`` and ``h/2``."""
    e1 = abs((f(t + h) - f(t - h)) / (2 * h) - exact)
    e2 = abs((f(t + h / 2) - f(t - h / 2)) / h - exact)
    return np.log2(e1 / e2), e1


def test_criterion_1_bessel_identities():
    start = time.perf_counter()
    orders = np.linspace(0.3, 4.0, 6)
    ts = np.geomspace(1e-2, 50.0, 40)
    worst = 0.0
    for nu in orders:
        for t in ts:
            i0, k0 = bessel.eval_i(nu, t), bessel.eval_k(nu, t)
            i1, k1 = bessel.eval_i(nu + 1, t), bessel.eval_k(nu + 1, t)
            worst = max(worst, abs(t * (i0 * k1 + k0 * i1) - 1.0))
    obs = []
    for nu in orders:
        for t in (0.5, 2.0, 10.0):
            h = 1e-2 * t
            exact_i = bessel.eval_i(nu + 1, t) + nu / t * bessel.eval_i(nu, t)
            exact_k = -bessel.eval_k(nu + 1, t) + nu / t * bessel.eval_k(nu, t)
            obs.append(_fd_order(lambda s: bessel.eval_i(nu, s), exact_i, t, h)[0])
            obs.append(_fd_order(lambda s: bessel.eval_k(nu, s), exact_k, t, h)[0])
    lo, hi = min(obs), max(obs)
    ok = worst <= 1e-9 and 1.8 <= lo and hi <= 2.2
    elapsed = time.perf_counter() - start
    assert record(1, ok, f"max Wronskian defect {worst:.2e} (<= 1e-9); observed FD order in [{lo:.3f}, {hi:.3f}]", elapsed, 5)


def test_criterion_2_envelope_constants():
    start = time.perf_counter()
    p55, p5 = Parameters(3, 1, 1, "5.5"), Parameters(3, 1, 1, 5)
    c = envelope_constants(p55)
    power, log = envelope_limit(p55, t_ref=1e-3), envelope_limit(p5, t_ref=1e-3)
    e_pow, e_log = power.relative_error(), log.relative_error()
    ok = c["C1"] + c["C2"] == Fraction(4, 3) and c["C3"] == Fraction(1, 2) and e_pow <= 0.02 and e_log <= 0.02
    elapsed = time.perf_counter() - start
    text = (
        f"p=5.5 limit of t^0.5 w = {power.limit:.6f} vs C1+C2 = {float(power.predicted):.6f} (rel {e_pow:.1e}); "
        f"p=5 limit of w/(-ln t) = {log.limit:.6f} vs 1/(2nu) = 0.5 (rel {e_log:.1e}); "
        f"fit over t in [1e-6, 1e-3], raw values at t=1e-3: {power.normalised:.4f}, {log.normalised:.4f}"
    )
    assert record(2, ok, text, elapsed, 30)


def test_criterion_3_cross_method():
    start = time.perf_counter()
    prm = Parameters(3, 1, 1, 4)
    bracket = find_bracket(prm)
    gs = bisect_ground_state(prm, bracket, rel_width=1e-15) if bracket else None
    shoot = None if gs is None else gs.profile
    pic = fixed_point_solve(prm, builtin_init("expdecay"), FixedPointOptions())
    parts, ok = [], True
    if shoot is None:
        ok = False
        parts.append("shooting did not produce a ground-state candidate")
    if not pic.converged:
        ok = False
        parts.append(f"Picard did not converge ({pic.status})")
    if ok:
        dist = sup_distance(shoot, pic.profile, 0.05, 10.0)
        reps = {"shooting": solution_checks(prm, shoot), "picard": solution_checks(prm, pic.profile)}
        ok = dist <= 1e-3 and all(r.passed for r in reps.values())
        parts.append(f"sup distance on [0.05, 10] = {dist:.2e} (<= 1e-3)")
        for name, r in reps.items():
            v = r.values
            parts.append(
                f"{name}: ode {v['ode_residual']:.1e}, H {r.results['H']}, Pohozaev {v['pohozaev']['normalized']:.1e}"
                + ("" if r.passed else f", failed {r.failed}")
            )
    elapsed = time.perf_counter() - start
    assert record(3, ok, "; ".join(parts), elapsed, 120)


def test_criterion_4_origin_exponents():
    start = time.perf_counter()
    p55, p4 = Parameters(3, 1, 1, "5.5"), Parameters(3, 1, 1, 4)
    fits, checked = {}, {}
    for prm in (p55, p4):
        bracket = find_bracket(prm)
        gs = bisect_ground_state(prm, bracket) if bracket else None
        fits[float(prm.power)] = None if gs is None or gs.profile is None else fit_origin_behavior(gs.profile, prm)
        checked[float(prm.power)] = gs is not None and gs.profile is not None and solution_checks(prm, gs.profile).passed
    f55, f4 = fits[5.5], fits[4.0]
    ok55 = f55 is not None and abs(f55.fitted_exponent + 0.5) <= 0.05
    ok4 = f4 is not None and abs(f4.fitted_exponent) <= 0.05
    describe = lambda f: "no converged solution" if f is None else f"fitted exponent {f.fitted_exponent:+.3e} ({f.case.value})"
    text = f"p=5.5 {describe(f55)} (solution checks passed: {checked[5.5]}), required -0.5 +- 0.05 [{'ok' if ok55 else 'not met'}]; p=4 {describe(f4)}, required |e| <= 0.05 [{'ok' if ok4 else 'not met'}]"
    elapsed = time.perf_counter() - start
    assert record(4, ok55 and ok4, text, elapsed, 120)


def test_criterion_5_obstruction_suite():
    start = time.perf_counter()
    out = obstruction_suite(3, 100)
    ok = out["points"] == 10000 and out["total_failures"] == 0
    elapsed = time.perf_counter() - start
    bad = {k: v for k, v in out["failures"].items() if v}
    assert record(5, ok, f"{out['points']} rational points, {out['total_failures']} failures {bad or ''}".rstrip(), elapsed, 10)


def test_criterion_6_region_map():
    start = time.perf_counter()
    m = scan_grid(ScanSpec(dim=3, alpha_range=(0, 4), p_range=(2, 8), resolution=50))
    mismatches = sum(m.cells[i][j].label != oracle(3, a, p) for i, a in enumerate(m.alpha_grid) for j, p in enumerate(m.p_grid))
    counts = m.counts()
    band = counts["RadialNonexistence"] > 0
    order_bad = 0
    for k in range(1, 200):
        c = critical_curves(3, Fraction(k, 100))
        if k < 200 and not (2 < c["two_alpha"] < c["two_alpha_star"] < c["two_star"]):
            order_bad += 1
    for k in range(1, 200):
        c = critical_curves(3, 2 + Fraction(k, 100))
        if not c["two_star"] < c["two_alpha_star"]:
            order_bad += 1
    deg = critical_curves(3, 2)
    degenerate = deg["two_alpha"] == deg["two_alpha_star"] == deg["two_star"] == 6
    examples = [
        ((3, 2, 6), Region.EXISTENCE_EXPLICIT),
        ((3, 1, Fraction(16, 5)), Region.RADIAL_NONEXISTENCE),
        ((3, 1, 4), Region.EXISTENCE_RADIAL),
        ((3, 1, 7), Region.NONEXISTENCE),
        ((3, 1, 3), Region.NONEXISTENCE),
        ((3, Fraction(5, 2), 10), Region.OPEN),
    ]
    ex_ok = sum(classify(*args).region is want for args, want in examples)
    ok = mismatches == 0 and band and order_bad == 0 and degenerate and ex_ok == 6
    elapsed = time.perf_counter() - start
    text = f"50x50 map, {mismatches} mismatches with the rule oracle, counts {counts}; curve-order violations {order_bad}; alpha=2 degeneracy {degenerate}; examples {ex_ok}/6"
    assert record(6, ok, text, elapsed, 5)


def test_criterion_7_nonexistence_evidence():
    start = time.perf_counter()
    ev = nonexistence_evidence(Parameters(3, 1, 1, "3.2"))
    entries = ev["shooting"] + ev["picard"]
    named = all(e.get("failed") for e in entries)
    ok = ev["every_run_fails"] and named and len(ev["picard"]) > 0 and len(ev["shooting"]) > 0
    reasons = sorted({f for e in entries for f in e.get("failed", [])})
    elapsed = time.perf_counter() - start
    text = f"{len(ev['shooting'])} shooting runs and {len(ev['picard'])} Picard runs, none passes all checks; failed checks named: {reasons}"
    assert record(7, ok, text, elapsed, 300)
