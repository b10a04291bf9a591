"""Shooting on the initial value ``v(0) = v0`` for the radial problem in ``t``.

Regular solutions start from the two-term expansion

    v(t) = v0 (1 + t**2 / (4(nu+1))) - B v0**(p-1) t**(m+2) / ((m+2)(m+2nu+2)) + ...

with ``m = 2 alpha/(2-alpha)`` and are integrated with an embedded Runge-Kutta
pair.  Trajectories are sorted into

* ``Crossing``: ``v`` reaches zero at a finite ``t``;
* ``Growing``: ``v`` stays positive but turns back up (a positive local
  minimum), or exceeds ``1e6 * v0``.  Past a positive minimum the trajectory
  never returns to the decaying branch;
* ``Decaying``: no event up to the end of the span and a log-log slope below
  ``-0.5`` over the last decade;
* ``Inconclusive``: anything else, including integrator failures.

The ground state sits on the boundary between ``Crossing`` and ``Growing``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import bessel
from ._validation import DomainError, check_positive_finite
from .quadrature import endpoint_slope
from .scaling import Parameters, VProfile, log_grid

logger = logging.getLogger(__name__)

T_MIN = 1e-4
T_END = 40.0
RTOL = 1e-10
ATOL = 1e-12
GROWTH_FACTOR = 1e6
DECAY_SLOPE = -0.5
SEPARATION = 1e-9
# the bisected profile is differentiated twice by the residual check, so it is
# integrated more tightly than the classification runs
GROUND_RTOL = 1e-12
GROUND_ATOL = 1e-14


class Classification(enum.Enum):
    CROSSING = "Crossing"
    GROWING = "Growing"
    DECAYING = "Decaying"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Trajectory:
    """A classified solution of the initial value problem.

    ``profile`` covers ``[t_min, t_stop]`` where ``t_stop`` is the event time or
    the end of the span.
    """

    v0: float
    profile: VProfile
    classification: Classification
    event_t: float | None = None
    note: str = ""
    dense: Callable | None = field(default=None, repr=False, compare=False)

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        """``v`` and ``v'`` at ``t`` from the integrator's dense output (profile interpolation otherwise)."""
        t = np.asarray(t, dtype=float)
        if self.dense is None:
            return self.profile.interpolate(t), self.profile.interpolate(t, derivative=True)
        y = self.dense(t)
        return y[0], y[1]

    def as_dict(self) -> dict:
        return {
            "v0": self.v0,
            "classification": self.classification.value,
            "event_t": self.event_t,
            "t_stop": float(self.profile.grid[-1]),
            "note": self.note,
        }


def _coefficients(params: Parameters) -> tuple[float, float, float, float]:
    if not params.transform_available:
        raise DomainError("shooting works in the t variable and needs 0 < alpha < 2")
    return float(params.nu), params.b_const, float(params.forcing_exponent), float(params.power)


def initial_data(params: Parameters, v0: float, t0: float, nonlinear: bool = True) -> tuple[float, float]:
    """``(v, v')`` at ``t0`` on the regular branch with ``v(0) = v0``."""
    nu, b, m, p = _coefficients(params)
    c2 = v0 / (4.0 * (nu + 1.0))
    v = v0 + c2 * t0**2
    dv = 2.0 * c2 * t0
    if nonlinear and v0 > 0:
        k = m + 2.0
        ck = -b * v0 ** (p - 1.0) / (k * (k + 2.0 * nu))
        v += ck * t0**k
        dv += k * ck * t0 ** (k - 1.0)
    return v, dv


def integrate_v(
    params: Parameters,
    v0: float,
    t_span: tuple[float, float] = (T_MIN, T_END),
    *,
    rtol: float = RTOL,
    atol: float = ATOL,
    nonlinear: bool = True,
    n_out: int = 1024,
) -> Trajectory:
    """Integrate the regular solution with ``v(0) = v0`` and classify it."""
    from scipy.integrate import solve_ivp

    nu, b, m, p = _coefficients(params)
    if isinstance(v0, bool) or not math.isfinite(v0) or v0 < 0:
        raise DomainError(f"v0 must be finite and >= 0, got {v0!r}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (0 < t0 < t1 and math.isfinite(t1)):
        raise DomainError(f"t_span must satisfy 0 < t0 < t1 < inf, got {t_span}")
    v0 = float(v0)
    if v0 == 0.0:
        g = log_grid(t0, t1, n_out)
        zero = np.zeros_like(g)
        return Trajectory(0.0, VProfile(g, zero, zero), Classification.DECAYING, None, "trivial solution")

    c_lin = 2.0 * nu + 1.0
    gain = b if nonlinear else 0.0

    def rhs(t, y):
        v, dv = y
        return [dv, v - c_lin / t * dv - gain * t**m * abs(v) ** (p - 2.0) * v]

    def crossing(t, y):
        return y[0]

    crossing.terminal, crossing.direction = True, -1

    def minimum(t, y):
        # v' = 0 from below while v > 0: a positive local minimum
        return y[1] if y[0] > 0 else -1.0

    minimum.terminal, minimum.direction = True, 1

    bound = GROWTH_FACTOR * v0

    def blowup(t, y):
        return y[0] - bound

    blowup.terminal, blowup.direction = True, 1

    events = [crossing, blowup] + ([minimum] if nonlinear else [])
    y0 = initial_data(params, v0, t0, nonlinear)
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol, events=events, dense_output=True)
    t_stop = float(sol.t[-1])
    if t_stop <= t0:
        g = np.array([t0, t0 * (1 + 1e-12)])
        return Trajectory(v0, VProfile(g, np.full(2, y0[0]), np.full(2, y0[1])), Classification.INCONCLUSIVE, None, sol.message)
    g = log_grid(t0, t_stop, n_out)
    y = sol.sol(g)
    profile = VProfile(g, y[0], y[1])

    def make(cls, event=None, note=""):
        return Trajectory(v0, profile, cls, event, note, sol.sol)

    if sol.status == -1:
        return make(Classification.INCONCLUSIVE, None, f"integrator failure: {sol.message}")
    hits = sol.t_events
    if hits[0].size:
        return make(Classification.CROSSING, float(hits[0][0]))
    if hits[1].size:
        return make(Classification.GROWING, float(hits[1][0]), f"v exceeds {GROWTH_FACTOR:g} v0")
    if nonlinear and hits[2].size:
        return make(Classification.GROWING, float(hits[2][0]), "positive local minimum")
    slope, _ = endpoint_slope(g, y[0], "tail")
    if np.all(y[0] > 0) and slope < DECAY_SLOPE:
        return make(Classification.DECAYING, None, f"log-log slope {slope:.3g} over the last decade")
    return make(Classification.INCONCLUSIVE, None, f"no event; log-log slope {slope:.3g}")


def classify_v0(params: Parameters, v0: float, **kwargs) -> Classification:
    return integrate_v(params, v0, **kwargs).classification


def find_bracket(params: Parameters, v0_range: tuple[float, float] = (1e-3, 1e3), n: int = 61, **kwargs) -> tuple[float, float] | None:
    """First adjacent pair of a log-spaced scan of ``v0`` with ``Growing`` / ``Crossing`` outcomes."""
    lo, hi = (check_positive_finite(x, "v0 range") for x in v0_range)
    if not lo < hi or n < 2:
        raise DomainError("need v0_range[0] < v0_range[1] and n >= 2")
    grid = np.geomspace(lo, hi, n)
    wanted = {Classification.CROSSING, Classification.GROWING}
    prev = classify_v0(params, grid[0], **kwargs)
    for a, b in zip(grid[:-1], grid[1:]):
        cur = classify_v0(params, b, **kwargs)
        if {prev, cur} == wanted:
            return float(a), float(b)
        prev = cur
    return None


@dataclass(frozen=True)
class GroundState:
    """Outcome of the bisection: final bracket, the two bounding trajectories and the stitched profile."""

    v0: float
    bracket: tuple[float, float]
    low: Trajectory
    high: Trajectory
    t_stitch: float
    profile: VProfile | None
    bisections: int

    def as_dict(self) -> dict:
        return {
            "v0": self.v0,
            "bracket": list(self.bracket),
            "t_stitch": self.t_stitch,
            "bisections": self.bisections,
            "low": self.low.as_dict(),
            "high": self.high.as_dict(),
            "found": self.profile is not None,
        }


def bisect_ground_state(
    params: Parameters,
    bracket: tuple[float, float],
    *,
    rel_width: float = 1e-12,
    grid=None,
    rtol: float = GROUND_RTOL,
    atol: float = GROUND_ATOL,
    t_span: tuple[float, float] = (T_MIN, T_END),
    max_bisections: int = 200,
) -> GroundState:
    """Bisect ``bracket`` down to ``rel_width`` and stitch the decaying tail.

    The two final trajectories agree up to the point where the growing mode
    separates them.  The profile follows them up to the last grid point where
    they agree to ``SEPARATION`` (relative), and continues as
    ``c t**-nu K_nu(t)``, the decaying solution of the linearised equation,
    beyond it.
    """
    a, b = (check_positive_finite(x, "bracket endpoint") for x in bracket)
    if a == b:
        raise DomainError("bracket endpoints coincide")
    a, b = min(a, b), max(a, b)
    kw = dict(rtol=rtol, atol=atol, t_span=t_span)
    lo, hi = integrate_v(params, a, **kw), integrate_v(params, b, **kw)
    if lo.classification == hi.classification:
        raise DomainError(f"both bracket endpoints classify as {lo.classification.value}")
    decaying = None
    count = 0
    for count in range(1, max_bisections + 1):
        if hi.v0 - lo.v0 <= rel_width * hi.v0:
            break
        mid_v0 = 0.5 * (lo.v0 + hi.v0)
        if mid_v0 in (lo.v0, hi.v0):
            break
        mid = integrate_v(params, mid_v0, **kw)
        if mid.classification == Classification.DECAYING:
            decaying = mid
            break
        if mid.classification == lo.classification:
            lo = mid
        elif mid.classification == hi.classification:
            hi = mid
        else:
            logger.info("bisection stopped at an inconclusive trajectory, v0=%.17g", mid_v0)
            break
    g = log_grid(t_span[0], 50.0, 2048) if grid is None else np.asarray(grid, dtype=float)
    if decaying is not None:
        profile, t_stitch = _stitch(params, decaying, decaying, g)
        return GroundState(decaying.v0, (lo.v0, hi.v0), lo, hi, t_stitch, profile, count)
    profile, t_stitch = _stitch(params, lo, hi, g)
    return GroundState(0.5 * (lo.v0 + hi.v0), (lo.v0, hi.v0), lo, hi, t_stitch, profile, count)


def _stitch(params: Parameters, lo: Trajectory, hi: Trajectory, grid: np.ndarray) -> tuple[VProfile | None, float]:
    nu = float(params.nu)
    t_end = min(lo.profile.grid[-1], hi.profile.grid[-1])
    inside = grid[grid <= t_end]
    if inside.size < 8:
        return None, math.nan
    va, da = lo.evaluate(inside)
    vb, db = hi.evaluate(inside)
    scale = np.maximum(np.abs(va), np.abs(vb))
    agree = (np.abs(va - vb) <= SEPARATION * scale) & (va > 0) & (vb > 0)
    if not agree[0]:
        return None, math.nan
    last = agree.size - 1 if agree.all() else int(np.argmin(agree)) - 1
    # the linear tail only models a decreasing solution
    if da[last] >= 0:
        return None, math.nan
    t_cut = float(inside[last])
    values = np.empty_like(grid)
    deriv = np.empty_like(grid)
    n_head = last + 1
    values[:n_head] = 0.5 * (va[:n_head] + vb[:n_head])
    deriv[:n_head] = 0.5 * (da[:n_head] + db[:n_head])
    ts = grid[n_head:]
    if ts.size:
        tail = _nonlinear_tail(params, t_cut, float(values[last]), ts)
        if tail is None:
            tail = _linear_tail(nu, t_cut, float(values[last]), ts)
        values[n_head:], deriv[n_head:] = tail
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        return None, t_cut
    return VProfile(grid, values, deriv), t_cut


def _linear_tail(nu: float, t_cut: float, v_cut: float, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``c t**-nu K_nu(t)`` through ``v_cut``; ``(t**-nu K_nu)' = -t**-nu K_{nu+1}``."""
    k_cut = bessel.eval_k_scaled(nu, t_cut) * math.exp(-t_cut)
    c = v_cut / (t_cut**-nu * k_cut)
    ks = np.array([bessel.eval_k_scaled(nu, x) for x in ts])
    k1s = np.array([bessel.eval_k_scaled(nu + 1.0, x) for x in ts])
    factor = c * ts**-nu * np.exp(-ts)
    return factor * ks, -factor * k1s


def _nonlinear_tail(params: Parameters, t_cut: float, v_cut: float, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Decaying solution of the full equation on ``[t_cut, ts[-1]]`` with ``v(t_cut) = v_cut``.

    A boundary-value solve: Dirichlet data at ``t_cut`` and, at the far end,
    the log-derivative of the linear decaying mode.  The linear tail is the
    initial guess; ``None`` when the solver does not converge.
    """
    from scipy.integrate import solve_bvp

    nu, b, m, p = _coefficients(params)
    t_far = float(ts[-1])
    if t_far <= t_cut:
        return None
    ratio = bessel.eval_k_scaled(nu + 1.0, t_far) / bessel.eval_k_scaled(nu, t_far)
    mesh = np.concatenate([[t_cut], ts[ts > t_cut]])
    # work with w = v / v_cut so that the collocation tolerance is relative
    guess = np.vstack(_linear_tail(nu, t_cut, 1.0, mesh))
    c_lin = 2.0 * nu + 1.0
    gain = b * v_cut ** (p - 2.0)

    def rhs(t, y):
        w, dw = y
        return np.vstack([dw, w - c_lin / t * dw - gain * t**m * np.abs(w) ** (p - 2.0) * w])

    def bc(ya, yb):
        return np.array([ya[0] - 1.0, yb[1] + ratio * yb[0]])

    sol = solve_bvp(rhs, bc, mesh, guess, tol=1e-10, max_nodes=200000)
    if not sol.success:
        logger.info("tail boundary-value solve failed: %s", sol.message)
        return None
    y = sol.sol(ts)
    if np.any(y[0] <= 0):
        return None
    return v_cut * y[0], v_cut * y[1]


def find_ground_state(params: Parameters, bracket: tuple[float, float], **kwargs) -> VProfile | None:
    """Ground-state candidate bisected from ``bracket``; ``None`` when no decaying profile emerges."""
    return bisect_ground_state(params, bracket, **kwargs).profile


class ShootingSolver(BaseEstimator):
    """Estimator front end: bracket search over ``v0_range`` followed by bisection."""

    def __init__(self, dim=3, amplitude=1.0, alpha=1.0, power=4.0, v0_min=1e-3, v0_max=1e3, n_scan=61, rel_width=1e-15, rtol=GROUND_RTOL, atol=GROUND_ATOL):
        self.dim = dim
        self.amplitude = amplitude
        self.alpha = alpha
        self.power = power
        self.v0_min = v0_min
        self.v0_max = v0_max
        self.n_scan = n_scan
        self.rel_width = rel_width
        self.rtol = rtol
        self.atol = atol

    def fit(self, X=None, y=None):
        """``X``, if given, is an explicit ``(low, high)`` bracket."""
        params = Parameters(self.dim, self.amplitude, self.alpha, self.power)
        bracket = tuple(X) if X is not None else find_bracket(params, (self.v0_min, self.v0_max), self.n_scan)
        self.bracket_ = bracket
        kw = dict(rtol=self.rtol, atol=self.atol, rel_width=self.rel_width)
        self.result_ = None if bracket is None else bisect_ground_state(params, bracket, **kw)
        self.profile_ = None if self.result_ is None else self.result_.profile
        self.found_ = self.profile_ is not None
        return self

    def predict(self, X):
        check_is_fitted(self, "found_")
        if self.profile_ is None:
            raise DomainError("no ground-state candidate was found")
        return self.profile_.interpolate(np.asarray(X, dtype=float).ravel())
