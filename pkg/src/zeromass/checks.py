"""A posteriori checks that decide whether a sampled profile is a solution.

A candidate ``v`` passes when it is positive on its grid, lies in ``H`` and in
``L^p(r**(N-1) dr)``, has a small residual in the differential equation and
satisfies the Pohozaev-type identity on an interior interval.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import ConvergenceError, DomainError
from .green import FixedPointOptions, GreenOperator, builtin_init, fixed_point_solve, ode_residual
from .pohozaev import identity_residual
from .scaling import Parameters, VProfile, log_grid, membership_report, phi_from_v
from .shooting import Classification, bisect_ground_state, integrate_v

ODE_TOL = 1e-6
POHOZAEV_TOL = 1e-5
POHOZAEV_INTERVAL = (0.1, 10.0)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of every check; ``values`` holds the measured quantities."""

    results: dict
    values: dict = field(default_factory=dict)

    @property
    def failed(self) -> list[str]:
        return [k for k, ok in self.results.items() if ok is not True]

    @property
    def passed(self) -> bool:
        return not self.failed

    def as_dict(self) -> dict:
        return {"passed": self.passed, "failed": self.failed, "results": dict(self.results), "values": dict(self.values)}


def solution_checks(params: Parameters, v: VProfile, *, ode_tol: float = ODE_TOL, pohozaev_tol: float = POHOZAEV_TOL, interval=POHOZAEV_INTERVAL) -> CheckReport:
    """Positivity, ``H``, ``L^p``, ODE residual and Pohozaev residual of ``v``.

    The Pohozaev interval is in ``r``; it is shrunk to the profile's range if
    needed.  Checks that cannot be evaluated count as failed, with the reason in
    ``values``.
    """
    results: dict = {}
    values: dict = {}
    results["positivity"] = bool(v.is_positive)
    if not results["positivity"]:
        values["min_v"] = float(np.min(v.values))

    mem = membership_report(params, v)
    results["H"] = mem.in_H is True
    results["Lp"] = mem.in_Lp_r is True
    values["norms"] = {k: float(x) for k, x in mem.norms.items()}
    if mem.notes:
        values["membership_notes"] = list(mem.notes)

    try:
        res = ode_residual(params, v)
    except DomainError as exc:
        res = math.nan
        values["ode_note"] = str(exc)
    values["ode_residual"] = res
    results["ode"] = bool(res <= ode_tol)

    phi = phi_from_v(params, v)
    a = max(interval[0], float(phi.grid[0]))
    b = min(interval[1], float(phi.grid[-1]))
    try:
        if not a < b:
            raise DomainError("profile too short for the Pohozaev interval")
        rep = identity_residual(params, phi, a, b)
        values["pohozaev"] = rep.as_dict()
        results["pohozaev"] = bool(rep.normalized <= pohozaev_tol)
    except (DomainError, ConvergenceError) as exc:
        values["pohozaev_note"] = str(exc)
        results["pohozaev"] = False
    return CheckReport(results, values)


def sup_distance(u: VProfile, v: VProfile, lo: float, hi: float) -> float:
    """``max |u - v|`` over the grid points of ``u`` inside ``[lo, hi]`` (``v`` interpolated)."""
    g = u.grid[(u.grid >= lo) & (u.grid <= hi)]
    return float(np.max(np.abs(u.interpolate(g) - v.interpolate(g))))


# ---------------------------------------------------------------------------
# evidence for a parameter point


def shooting_scan(params: Parameters, v0_range=(1e-3, 1e3), n: int = 61, deadline: float | None = None) -> list:
    """Classified trajectories for a log-spaced range of ``v0``."""
    out = []
    for v0 in np.geomspace(*v0_range, n):
        if deadline is not None and time.monotonic() > deadline:
            break
        out.append(integrate_v(params, float(v0)))
    return out


def _bracket_from_scan(scan: list) -> tuple[float, float] | None:
    wanted = {Classification.CROSSING, Classification.GROWING}
    for a, b in zip(scan[:-1], scan[1:]):
        if {a.classification, b.classification} == wanted:
            return a.v0, b.v0
    return None


def cell_evidence(params: Parameters, budget: float = 30.0) -> dict:
    """Shooting plus solution checks for one parameter point under a wall-clock budget.

    The budget is checked between trajectories, so a cell can overrun it by
    one integration; it is then reported as ``TimedOut``.
    """
    start = time.monotonic()
    if not params.transform_available:
        return {"status": "NotApplicable", "note": "numerics need 0 < alpha < 2"}
    deadline = start + budget
    scan = shooting_scan(params, n=25, deadline=deadline)
    if time.monotonic() > deadline:
        return {"status": "TimedOut", "elapsed": time.monotonic() - start}
    bracket = _bracket_from_scan(scan)
    if bracket is None:
        return {"status": "NoCandidate", "classes": sorted({t.classification.value for t in scan}), "elapsed": time.monotonic() - start}
    gs = bisect_ground_state(params, bracket)
    if time.monotonic() > deadline:
        return {"status": "TimedOut", "elapsed": time.monotonic() - start}
    if gs.profile is None:
        return {"status": "NoCandidate", "v0": gs.v0, "elapsed": time.monotonic() - start}
    rep = solution_checks(params, gs.profile)
    status = "CandidatePasses" if rep.passed else "CandidateFails"
    if time.monotonic() > deadline:
        status = "TimedOut"
    return {"status": status, "v0": gs.v0, "failed": rep.failed, "elapsed": time.monotonic() - start}


def picard_inits(grid=None) -> dict:
    """Starting profiles for nonexistence probes: multiples of ``exp(-t)`` and a slow algebraic decay."""
    g = log_grid() if grid is None else grid
    base = builtin_init("expdecay", g)
    out = {f"{c:g}*exp(-t)": VProfile(g, c * base.values, c * base.derivative_values) for c in (0.1, 1.0, 10.0)}
    out["(1+t)^-2 exp(-t/2)"] = VProfile(g, (1 + g) ** -2 * np.exp(-g / 2))
    return out


def nonexistence_evidence(params: Parameters, *, n_scan: int = 61, max_iter: int = 500) -> dict:
    """Every shooting candidate and Picard run at ``params``, with the check each one fails.

    Crossing and growing trajectories are recorded as non-candidates with the
    reason.  A trajectory without an event, or a bisected bracket, gives a
    candidate that goes through :func:`solution_checks`.  Picard runs that do
    not converge are reported as such; converged ones are checked.
    """
    shooting = []
    scan = shooting_scan(params, n=n_scan)
    for tr in scan:
        entry = {"v0": tr.v0, "classification": tr.classification.value}
        if tr.classification is Classification.CROSSING:
            entry.update(candidate=False, failed=["positivity"], note=f"v crosses zero at t={tr.event_t:.6g}")
        elif tr.classification is Classification.GROWING:
            entry.update(candidate=False, failed=["decay"], note=tr.note)
        else:
            rep = solution_checks(params, tr.profile)
            entry.update(candidate=True, failed=rep.failed, passed=rep.passed)
        shooting.append(entry)
    bracket = _bracket_from_scan(scan)
    if bracket is not None:
        gs = bisect_ground_state(params, bracket)
        if gs.profile is None:
            shooting.append({"bracket": list(bracket), "candidate": False, "failed": ["no decaying profile"]})
        else:
            rep = solution_checks(params, gs.profile)
            shooting.append({"bracket": list(bracket), "v0": gs.v0, "candidate": True, "failed": rep.failed, "passed": rep.passed})

    picard = []
    grid = log_grid()
    op = GreenOperator(params, grid)
    for name, init in picard_inits(grid).items():
        try:
            res = fixed_point_solve(params, init, FixedPointOptions(max_iter=max_iter), op)
        except (DomainError, ConvergenceError) as exc:
            picard.append({"init": name, "converged": False, "status": "error", "failed": ["iteration"], "note": str(exc)})
            continue
        entry = {"init": name, "converged": res.converged, "status": res.status, "residual_sup": res.residual_sup}
        if res.converged and not res.trivial:
            rep = solution_checks(params, res.profile)
            entry.update(failed=rep.failed, passed=rep.passed)
        else:
            entry.update(failed=["convergence"], passed=False)
        picard.append(entry)

    any_pass = any(e.get("passed") for e in shooting + picard)
    return {"params": params.as_dict(), "shooting": shooting, "picard": picard, "every_run_fails": not any_pass}
