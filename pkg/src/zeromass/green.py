"""Green's-operator representation of radial solutions and its fixed-point iteration.

For ``g`` continuous on ``(0, inf)`` the linear equation
``-v'' - (2nu+1)/t v' + v = g`` has the general solution (:func:`general_solution`)

    v(t) = t**-nu [ (c1 - int_1^t s**(1+nu) K_nu g) I_nu(t) + (c2 + int_1^t s**(1+nu) I_nu g) K_nu(t) ],

and the positive solutions of the nonlinear problem in ``H`` are exactly the
fixed points of

    (Tv)(t) = B t**-nu [ I_nu(t) int_t^inf K(s) v**(p-1) ds + K_nu(t) int_0^t I(s) v**(p-1) ds ]

with ``I(s) = s**w I_nu(s)``, ``K(s) = s**w K_nu(s)``, ``w = (N+alpha)/(2-alpha)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import bessel
from ._validation import ConvergenceError, DomainError, check_grid, check_samples
from .quadrature import endpoint_slope, gauss_legendre, panel_nodes, power_law_head
from .scaling import Parameters, VProfile, log_grid

logger = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e8
ODE_TOL = 1e-6
COLLAPSE_LEVEL = 1e4


# ---------------------------------------------------------------------------
# linear problem


@dataclass(frozen=True, eq=False)
class GeneralSolutionSpec:
    c1: float
    c2: float
    forcing_grid: np.ndarray
    forcing_values: np.ndarray

    def __post_init__(self):
        g = check_grid(self.forcing_grid, "forcing grid")
        object.__setattr__(self, "forcing_grid", g)
        object.__setattr__(self, "forcing_values", check_samples(self.forcing_values, g.size, "forcing"))

    @classmethod
    def from_callable(cls, c1, c2, func, grid=None):
        g = log_grid(1e-4, 50.0, 2048) if grid is None else np.asarray(grid, dtype=float)
        return cls(float(c1), float(c2), g, np.asarray(func(g), dtype=float) * np.ones_like(g))


def general_solution(params: Parameters, spec: GeneralSolutionSpec, t):
    """Evaluate the general solution of the linear equation at ``t`` (scalar or array).

    The base point of both integrals is ``1``; ``t`` and ``1`` must lie inside the
    forcing grid.
    """
    from scipy.interpolate import CubicSpline

    nu = float(params.nu)
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = spec.forcing_grid[0], spec.forcing_grid[-1]
    if np.any(ts <= 0) or np.any(~np.isfinite(ts)):
        raise DomainError("evaluation points must be finite and positive")
    if ts.min() < lo or ts.max() > hi or not (lo <= 1.0 <= hi):
        raise DomainError(f"evaluation points and the base point 1 must lie in the forcing grid [{lo}, {hi}]")
    spline = CubicSpline(np.log(spec.forcing_grid), spec.forcing_values)

    def g(s):
        return spline(np.log(s))

    # cumulative integrals from 1 to every requested point via shared panels
    pts = np.unique(np.concatenate([ts, [1.0]]))
    edges = _refine_edges(pts)
    s, w = panel_nodes(edges, 16)
    i_n, k_n = bessel.ik_arrays(nu, s)
    gs = g(s)
    pan_k = np.sum(s ** (1 + nu) * k_n * gs * w, axis=1)
    pan_i = np.sum(s ** (1 + nu) * i_n * gs * w, axis=1)
    cum_k = np.concatenate([[0.0], np.cumsum(pan_k)])
    cum_i = np.concatenate([[0.0], np.cumsum(pan_i)])
    one = np.searchsorted(edges, 1.0)
    idx = np.searchsorted(edges, ts)
    int_k = cum_k[idx] - cum_k[one]
    int_i = cum_i[idx] - cum_i[one]
    if not (np.all(np.isfinite(int_k)) and np.all(np.isfinite(int_i))):
        raise ConvergenceError("quadrature of the forcing terms produced non-finite values")
    i_t, k_t = bessel.ik_arrays(nu, ts)
    out = ts**-nu * ((spec.c1 - int_k) * i_t + (spec.c2 + int_i) * k_t)
    return float(out[0]) if scalar else out


def _refine_edges(pts: np.ndarray, max_log_width: float = 0.1) -> np.ndarray:
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = max(1, int(math.ceil(math.log(b / a) / max_log_width)))
        edges.extend(np.geomspace(a, b, m + 1)[1:])
    out = np.asarray(edges)
    out[np.searchsorted(out, pts)] = pts  # exact hits for searchsorted
    return out


# ---------------------------------------------------------------------------
# nonlinear operator


class GreenOperator:
    """Discretisation of ``T`` on a fixed log grid.

    Kernel values at the Gauss nodes of every grid interval are tabulated once;
    :meth:`apply` then costs one Hermite interpolation of the profile.
    """

    def __init__(self, params: Parameters, grid=None, order: int = 8):
        if not params.transform_available:
            raise DomainError("the integral representation needs 0 < alpha < 2")
        self.params = params
        self.grid = log_grid() if grid is None else check_grid(grid)
        if self.grid.size < 8:
            raise DomainError("grid needs at least 8 points")
        self.order = order
        self.nu = float(params.nu)
        self.b = params.b_const
        self.q = float(params.power) - 1.0
        w = float(params.weight_exponent)
        self.weight_exponent = w
        self.nodes, self.weights = panel_nodes(self.grid, order)
        i_n, k_n = bessel.ik_arrays(self.nu, self.nodes)
        self.big_i_nodes = self.nodes**w * i_n
        self.big_k_nodes = self.nodes**w * k_n
        i0, k0, i1, k1 = bessel.ik_table(self.nu, self.grid)
        self.i_grid, self.k_grid, self.i1_grid, self.k1_grid = i0, k0, i1, k1
        self.big_i_grid = self.grid**w * i0
        self.big_k_grid = self.grid**w * k0

    def _check(self, v: VProfile):
        if v.grid.shape != self.grid.shape or not np.allclose(v.grid, self.grid, rtol=1e-13, atol=0):
            raise DomainError("profile grid differs from the operator grid")
        if np.any(v.values < 0):
            raise DomainError("T is defined on nonnegative profiles")
        tail = v.values[v.grid >= v.grid[-1] / 10]
        if np.any(tail > 0):
            slope, _ = endpoint_slope(v.grid, v.values, "tail")
            if not math.isnan(slope) and slope > -self.nu + 0.1:
                raise DomainError(f"profile decays like t**{slope:.3f} at the right end; need O(t**-nu), nu={self.nu:.4g}")

    def integrals(self, v: VProfile) -> tuple[np.ndarray, np.ndarray]:
        """``int_0^t I v**(p-1)`` and ``int_t^inf K v**(p-1)`` at every grid point."""
        self._check(v)
        vn = np.clip(v.interpolate(self.nodes), 0.0, None)
        fq = vn**self.q
        head_panels = np.sum(self.big_i_nodes * fq * self.weights, axis=1)
        tail_panels = np.sum(self.big_k_nodes * fq * self.weights, axis=1)

        fv = v.values**self.q
        f_head = self.big_i_grid * fv
        head0 = 0.0
        if f_head[0] > 0:
            e, _ = endpoint_slope(self.grid, f_head, "head")
            head0 = power_law_head(self.grid[0], f_head[0], e)
        f_tail = self.big_k_grid * fv
        tail_inf = 0.0
        if f_tail[-1] > 0:
            rate, _ = endpoint_slope(self.grid, f_tail, "tail", linear=True)
            if not rate < 0:
                raise ConvergenceError(f"tail integrand does not decay (fitted rate {rate:.4g})")
            tail_inf = f_tail[-1] / -rate
        left = head0 + np.concatenate([[0.0], np.cumsum(head_panels)])
        right = tail_inf + np.concatenate([np.cumsum(tail_panels[::-1])[::-1], [0.0]])
        return left, right

    def apply(self, v: VProfile) -> VProfile:
        """``Tv`` and its derivative on the operator grid."""
        left, right = self.integrals(v)
        pre = self.b * self.grid**-self.nu
        values = pre * (self.i_grid * right + self.k_grid * left)
        deriv = pre * (self.i1_grid * right - self.k1_grid * left)
        return VProfile(self.grid, values, deriv)

    def head_exponent(self, v: VProfile) -> float:
        """Fitted exponent of ``I(s) v(s)**(p-1)`` over the first grid decade."""
        f = self.big_i_grid * v.values**self.q
        return endpoint_slope(self.grid, f, "head")[0]


def apply_operator(params: Parameters, v: VProfile, order: int = 8) -> VProfile:
    """One application of ``T`` on the grid of ``v``."""
    return GreenOperator(params, v.grid, order).apply(v)


# ---------------------------------------------------------------------------
# residual of the differential equation


def ode_residual(params: Parameters, v: VProfile, trim: int = 3) -> float:
    """Normalised sup residual of ``-v'' - (2nu+1)/t v' + v - B t**m v**(p-1)``.

    Derivatives come from fourth-order differences of the values in ``u = ln t``
    (the stored derivatives are not used).  The pointwise residual is multiplied
    by ``min(t**2, 1)``, which is the natural scale of the equation written in
    ``u``, and divided by ``max |v|``.
    """
    g, y = v.grid, v.values
    u = np.log(g)
    du = np.diff(u)
    if g.size < 2 * trim + 5 or not np.allclose(du, du[0], rtol=1e-9, atol=0):
        raise DomainError("ode_residual needs a uniform log grid with enough points")
    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        return 0.0
    h = du[0]
    yu = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    yuu = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
    t = g[2:-2]
    yc = y[2:-2]
    nu, b, m, p = float(params.nu), params.b_const, float(params.forcing_exponent), float(params.power)
    forcing = b * t**m * np.abs(yc) ** (p - 2) * yc
    res_u = -yuu - 2 * nu * yu + t * t * (yc - forcing)
    res = np.abs(res_u) / np.maximum(t * t, 1.0) / scale
    lo = max(trim - 2, 0)
    return float(np.max(res[lo : res.size - lo]))


# ---------------------------------------------------------------------------
# fixed-point iteration


@dataclass(frozen=True)
class FixedPointOptions:
    max_iter: int = 500
    tol: float = 1e-8
    damping: float = 0.5
    stabilize: bool = True
    ode_tol: float = ODE_TOL


@dataclass(frozen=True)
class FixedPointResult:
    profile: VProfile
    residual_sup: float
    iterations: int
    converged: bool
    status: str
    ode_residual: float = math.nan
    trivial: bool = False
    history: tuple = field(default=(), repr=False)

    @property
    def verified(self) -> bool:
        return self.converged and not self.trivial and self.ode_residual <= FixedPointOptions.ode_tol

    def report(self) -> dict:
        return {
            "status": self.status,
            "converged": self.converged,
            "trivial": self.trivial,
            "iterations": self.iterations,
            "residual_sup": self.residual_sup,
            "ode_residual": self.ode_residual,
            "verified": self.verified,
        }


def _weighted_inner(grid, a, b, weight_exponent):
    from scipy.integrate import simpson

    return float(simpson(a * b * grid ** (weight_exponent + 1.0), x=np.log(grid)))


def fixed_point_solve(params: Parameters, init: VProfile, options: FixedPointOptions | None = None, operator: GreenOperator | None = None) -> FixedPointResult:
    """Damped iteration ``v <- (1-lam) v + lam * M**gamma * T v``.

    ``M = <v, v> / <v, Tv>`` (weight ``t**(2nu+1)``) with ``gamma = (p-1)/(p-2)``
    cancels the scaling mode ``T(cv) = c**(p-1) T v``, which otherwise drives the
    plain iteration to zero or to infinity.  ``M -> 1`` at a fixed point, so the
    limit solves ``v = Tv``.  Set ``stabilize=False`` for the plain damped
    iteration.
    """
    opts = options or FixedPointOptions()
    if not 0 < opts.damping <= 1:
        raise DomainError("damping must lie in (0, 1]")
    op = operator or GreenOperator(params, init.grid)
    p = float(params.power)
    gamma = (p - 1.0) / (p - 2.0)
    wexp = float(params.h_weight_exponent)
    lam = opts.damping
    v = init
    history = []
    if np.any(v.values < 0):
        raise DomainError("initial profile must be nonnegative")
    for it in range(1, opts.max_iter + 1):
        tv = op.apply(v)
        resid = float(np.max(np.abs(tv.values - v.values)))
        history.append(resid)
        if not np.any(v.values):
            return FixedPointResult(v, resid, it, True, "trivial", 0.0, True, tuple(history))
        if resid <= opts.tol:
            if np.max(v.values) <= COLLAPSE_LEVEL * opts.tol:
                # T v is tiny because v is: the iteration slid down c*v, not onto a fixed point
                return FixedPointResult(v, resid, it, False, "collapsed", math.nan, False, tuple(history))
            res = ode_residual(params, v)
            status = "converged" if res <= opts.ode_tol else "unverified"
            logger.debug("fixed point after %d iterations, ode residual %.3g", it, res)
            return FixedPointResult(v, resid, it, True, status, res, False, tuple(history))
        scale = 1.0
        if opts.stabilize:
            num = _weighted_inner(v.grid, v.values, v.values, wexp)
            den = _weighted_inner(v.grid, v.values, tv.values, wexp)
            if den <= 0:
                return FixedPointResult(v, resid, it, False, "diverged", math.nan, False, tuple(history))
            scale = (num / den) ** gamma
        new_vals = (1 - lam) * v.values + lam * scale * tv.values
        new_der = (1 - lam) * v.derivative_values + lam * scale * tv.derivative_values
        if not np.all(np.isfinite(new_vals)) or np.max(np.abs(new_vals)) > DIVERGENCE_BOUND:
            return FixedPointResult(v, resid, it, False, "diverged", math.nan, False, tuple(history))
        if np.max(new_vals) < 1e-300:
            return FixedPointResult(v, resid, it, False, "collapsed", math.nan, False, tuple(history))
        v = VProfile(v.grid, new_vals, new_der)
    tv = op.apply(v)
    resid = float(np.max(np.abs(tv.values - v.values)))
    return FixedPointResult(v, resid, opts.max_iter, False, "max_iter", ode_residual(params, v), False, tuple(history))


def builtin_init(name: str, grid=None) -> VProfile:
    """Named starting profiles; ``expdecay`` is ``exp(-t)``."""
    g = log_grid() if grid is None else check_grid(grid)
    if name == "expdecay":
        return VProfile(g, np.exp(-g), -np.exp(-g))
    if name == "zero":
        return VProfile(g, np.zeros_like(g), np.zeros_like(g))
    raise DomainError(f"unknown builtin profile {name!r}")


class FixedPointSolver(BaseEstimator):
    """Estimator wrapper around :func:`fixed_point_solve`.

    ``fit`` runs the iteration from ``init`` (``exp(-t)`` by default) and stores
    the result; ``predict`` interpolates the fitted profile.
    """

    def __init__(self, dim=3, amplitude=1.0, alpha=1.0, power=4.0, tol=1e-8, max_iter=500, damping=0.5, stabilize=True, t_min=1e-4, t_max=50.0, n_points=2048):
        self.dim = dim
        self.amplitude = amplitude
        self.alpha = alpha
        self.power = power
        self.tol = tol
        self.max_iter = max_iter
        self.damping = damping
        self.stabilize = stabilize
        self.t_min = t_min
        self.t_max = t_max
        self.n_points = n_points

    def _params(self) -> Parameters:
        return Parameters(self.dim, self.amplitude, self.alpha, self.power)

    def fit(self, X=None, y=None):
        """``X`` is an optional initial :class:`VProfile`; ``y`` is ignored."""
        params = self._params()
        grid = log_grid(self.t_min, self.t_max, self.n_points)
        init = X if isinstance(X, VProfile) else builtin_init("expdecay", grid)
        opts = FixedPointOptions(self.max_iter, self.tol, self.damping, self.stabilize)
        self.operator_ = GreenOperator(params, init.grid)
        self.result_ = fixed_point_solve(params, init, opts, self.operator_)
        self.profile_ = self.result_.profile
        self.converged_ = self.result_.converged
        return self

    def predict(self, X):
        check_is_fitted(self, "profile_")
        t = np.asarray(X, dtype=float).ravel()
        return self.profile_.interpolate(t)
