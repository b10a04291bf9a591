"""Behaviour of radial solutions at the origin and the pointwise envelope.

A solution in ``H`` satisfies ``v(t) <= C t**-nu``; feeding this bound back into
the integral representation gives ``v <= B C**(p-1) w`` with

    w(t) = t**-nu [ I_nu(t) int_t^inf K(s) s**(-nu(p-1)) ds + K_nu(t) int_0^t I(s) s**(-nu(p-1)) ds ].

Near ``t = 0``

* ``w ~ const`` when ``p < 2* - 1``,
* ``w ~ C3 (-ln t)`` with ``C3 = 1/(2 nu)`` when ``p = 2* - 1``,
* ``w ~ (C1 + C2) t**(nu(2*-1-p))`` with ``C1 = 1/(2 nu**2 (2*+1-p))`` and
  ``C2 = -1/(2 nu**2 (2*-1-p))`` when ``p > 2* - 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import bessel
from ._validation import DomainError, check_positive_finite
from .quadrature import integrate, integrate_to_infinity, power_law_head
from .scaling import Parameters, PhiProfile, VProfile, log_grid, membership_report

R2_MIN = 0.99
BOUNDED_EXPONENT = 0.02
LIMIT_EXPONENT_BAND = 0.02


class OriginCase(enum.Enum):
    BOUNDED = "Bounded"
    LOGARITHMIC = "Logarithmic"
    POWER = "Power"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class OriginBehavior:
    """Predicted or measured behaviour at the origin.

    ``t_exponent`` is the power of ``t`` (zero unless ``case`` is ``Power``) and
    ``r_exponent`` the same power expressed in ``r``.  Measured instances also
    carry the raw fitted slope and its 95% confidence interval.
    """

    case: OriginCase
    t_exponent: object = 0
    r_exponent: object = 0
    constants: dict | None = None
    fitted_exponent: float | None = None
    interval: tuple[float, float] | None = None
    r2: float | None = None
    note: str = ""

    def as_dict(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        return {
            "case": self.case.value,
            "t_exponent": num(self.t_exponent),
            "r_exponent": num(self.r_exponent),
            "constants": None if self.constants is None else {k: float(v) for k, v in self.constants.items()},
            "fitted_exponent": self.fitted_exponent,
            "interval": None if self.interval is None else list(self.interval),
            "r2": self.r2,
            "note": self.note,
        }


def _check_range(params: Parameters):
    if not params.transform_available:
        raise DomainError("origin asymptotics need 0 < alpha < 2")
    lo, hi = params.two_alpha, params.two_star
    if not lo < params.power < hi:
        raise DomainError(f"need 2_alpha < p < 2*, i.e. {float(lo):.6g} < p < {float(hi):.6g}; got p={params.power}")


def envelope_constants(params: Parameters) -> dict:
    """``C1``, ``C2`` and ``C3`` (the ones that are defined for this ``p``)."""
    nu, s, p = params.nu, params.two_star, params.power
    out = {"C1": 1 / (2 * nu**2 * (s + 1 - p)), "C3": 1 / (2 * nu)}
    if p != s - 1:
        out["C2"] = -1 / (2 * nu**2 * (s - 1 - p))
    return out


def predicted_origin_behavior(params: Parameters) -> OriginBehavior:
    """Case, exponents and constants for solutions with data ``params``.

    The comparison with ``2* - 1`` is exact for rational ``p``.
    """
    _check_range(params)
    nu, s, p = params.nu, params.two_star, params.power
    consts = envelope_constants(params)
    if p < s - 1:
        return OriginBehavior(OriginCase.BOUNDED, 0, 0)
    if p == s - 1:
        return OriginBehavior(OriginCase.LOGARITHMIC, 0, 0, {"C3": consts["C3"]})
    t_exp = nu * (s - 1 - p)
    r_exp = -(params.dim - 2) * (p - s + 1) / 2
    return OriginBehavior(OriginCase.POWER, t_exp, r_exp, {"C1": consts["C1"], "C2": consts["C2"]})


# ---------------------------------------------------------------------------
# envelope


def envelope_w(params: Parameters, t, order: int = 16) -> float | np.ndarray:
    """``w(t)`` by direct panel quadrature (scalar or array ``t``).

    The head integral below ``1e-8 t`` is closed with the exact power law of the
    integrand there, ``s**(nu(2*+1-p) - 1)``.
    """
    _check_range(params)
    if np.ndim(t):
        return np.array([envelope_w(params, float(x), order) for x in np.ravel(t)]).reshape(np.shape(t))
    t = check_positive_finite(t, "t")
    nu = float(params.nu)
    w = float(params.weight_exponent)
    q = -nu * (float(params.power) - 1.0)

    def big_i(s):
        return s ** (w + q) * bessel.iv(nu, s)

    def big_k(s):
        return s ** (w + q) * bessel.kv(nu, s)

    s0 = 1e-8 * t
    head_exp = nu * float(params.two_star + 1 - params.power) - 1.0
    left = power_law_head(s0, float(big_i(np.array([s0]))[0]), head_exp) + integrate(big_i, s0, t, order)
    right = integrate_to_infinity(big_k, t, order)
    i_t, k_t = bessel.ik_arrays(nu, np.array([t]))
    return float(t**-nu * (i_t[0] * right + k_t[0] * left))


def envelope_w_grid(params: Parameters, grid=None) -> VProfile:
    """``w`` on a whole grid, computed as ``T(t**-nu) / B`` with the operator quadrature."""
    from .green import GreenOperator

    _check_range(params)
    g = log_grid() if grid is None else np.asarray(grid, dtype=float)
    nu = float(params.nu)
    env = VProfile(g, g**-nu, -nu * g ** (-nu - 1.0))
    tw = GreenOperator(params, g).apply(env)
    b = params.b_const
    return VProfile(g, tw.values / b, tw.derivative_values / b)


@dataclass(frozen=True)
class EnvelopeLimit:
    """Limit of the normalised envelope as ``t -> 0``.

    ``normalised`` is ``t**-e w`` (Power), ``w / (-ln t)`` (Logarithmic) or
    ``w`` (Bounded) at ``t_ref``; ``limit`` removes the leading correction by a
    two-term fit over ``ts``.
    """

    case: OriginCase
    predicted: float | None
    normalised: float
    limit: float
    t_ref: float
    ts: tuple = field(repr=False, default=())

    def relative_error(self, which: str = "limit") -> float:
        if self.predicted is None:
            return math.nan
        return abs(getattr(self, which) / self.predicted - 1.0)

    def as_dict(self) -> dict:
        return {
            "case": self.case.value,
            "predicted": self.predicted,
            "normalised_at_t_ref": self.normalised,
            "fitted_limit": self.limit,
            "t_ref": self.t_ref,
        }


def envelope_limit(params: Parameters, t_ref: float = 1e-3, ts=None) -> EnvelopeLimit:
    """Measure the small-``t`` constant of ``w`` and compare it with the prediction.

    Corrections are of relative size ``t**|e|`` (Power), ``1/(-ln t)``
    (Logarithmic) and ``t**...`` (Bounded), so the limit is read off from a fit
    of ``w`` against the leading term plus a constant.
    """
    pred = predicted_origin_behavior(params)
    ts = np.geomspace(t_ref * 1e-3, t_ref, 7) if ts is None else np.asarray(ts, dtype=float)
    ws = envelope_w(params, ts)
    w_ref = envelope_w(params, t_ref)
    consts = envelope_constants(params)
    if pred.case is OriginCase.POWER:
        e = float(pred.t_exponent)
        lead = ts**e
        predicted = float(consts["C1"] + consts["C2"])
        normalised = w_ref * t_ref**-e
    elif pred.case is OriginCase.LOGARITHMIC:
        lead = -np.log(ts)
        predicted = float(consts["C3"])
        normalised = w_ref / -math.log(t_ref)
    else:
        lead = np.ones_like(ts)
        predicted = None
        normalised = w_ref
    if pred.case is OriginCase.BOUNDED:
        limit = float(ws[0])
    else:
        # w = L * lead + D
        design = np.column_stack([lead, np.ones_like(lead)])
        coef, *_ = np.linalg.lstsq(design, ws, rcond=None)
        limit = float(coef[0])
    return EnvelopeLimit(pred.case, predicted, float(normalised), limit, float(t_ref), tuple(ts))


# ---------------------------------------------------------------------------
# measured behaviour


@dataclass(frozen=True)
class _LineFit:
    slope: float
    intercept: float
    stderr: float
    r2: float
    rms: float
    n: int

    def interval(self, level: float = 0.95) -> tuple[float, float]:
        from scipy.stats import t as student

        half = float(student.ppf(0.5 + level / 2, max(self.n - 2, 1))) * self.stderr
        return self.slope - half, self.slope + half


def _line(x: np.ndarray, y: np.ndarray) -> _LineFit:
    from scipy.stats import linregress

    if np.ptp(y) == 0.0:
        return _LineFit(0.0, float(y[0]), 0.0, 1.0, 0.0, x.size)
    fit = linregress(x, y)
    resid = y - (fit.slope * x + fit.intercept)
    return _LineFit(float(fit.slope), float(fit.intercept), float(fit.stderr), float(fit.rvalue**2), float(np.sqrt(np.mean(resid**2))), x.size)


def fit_origin_behavior(profile: VProfile, params: Parameters | None = None, decade: float = 10.0) -> OriginBehavior:
    """Classify the smallest decade of ``profile`` as Bounded, Logarithmic or Power.

    Three models are compared by residual on ``v`` itself: a constant, ``a + b ln t``
    and ``c t**e``.  Exponents within ``BOUNDED_EXPONENT`` of zero count as bounded;
    a fit with ``R**2 < 0.99`` is Inconclusive.  ``params`` (optional) supplies the
    ``t``-to-``r`` exponent conversion.
    """
    g = profile.grid
    if g[0] >= 1e-3:
        raise DomainError("the profile grid must reach below t = 1e-3")
    mask = g <= g[0] * decade
    t, v = g[mask], profile.values[mask]
    if t.size < 5:
        raise DomainError("too few samples in the smallest decade")
    if np.any(v <= 0):
        return OriginBehavior(OriginCase.INCONCLUSIVE, note="profile is not positive near the origin")
    lt = np.log(t)
    power = _line(lt, np.log(v))
    logm = _line(lt, v)
    scale = float(np.mean(v))
    rms_pow = float(np.sqrt(np.mean((v - np.exp(power.intercept + power.slope * lt)) ** 2))) / scale
    rms_log = logm.rms / scale
    rms_const = float(np.std(v)) / scale
    e = power.slope
    ci = power.interval()
    conv = None
    if params is not None and params.transform_available:
        conv = (2 - float(params.alpha)) / 2

    def measured(case, t_exp=0.0, r2=power.r2, note=""):
        r_exp = None if conv is None else t_exp * conv
        return OriginBehavior(case, t_exp, r_exp, None, e, ci, r2, note)

    if abs(e) <= BOUNDED_EXPONENT and rms_const <= 0.05:
        return measured(OriginCase.BOUNDED, note=f"relative spread {rms_const:.2e}")
    if power.r2 < R2_MIN and logm.r2 < R2_MIN:
        return measured(OriginCase.INCONCLUSIVE, e, max(power.r2, logm.r2), "no model reaches R^2 >= 0.99")
    if rms_log < rms_pow and logm.slope < 0 and logm.r2 >= R2_MIN:
        return OriginBehavior(OriginCase.LOGARITHMIC, 0.0, None if conv is None else 0.0, {"C_log": -logm.slope}, e, ci, logm.r2, "v ~ a + b (-ln t)")
    if power.r2 >= R2_MIN:
        return measured(OriginCase.POWER, e)
    return measured(OriginCase.INCONCLUSIVE, e, power.r2, "power model preferred but R^2 < 0.99")


def radial_bound_check(params: Parameters, profile: VProfile) -> float:
    """``sup t**nu |v| / ||v'||`` with ``||v'||**2 = int v'**2 t**(2nu+1) dt``."""
    if not np.any(profile.values):
        return 0.0
    report = membership_report(params, profile)
    if report.in_H is not True:
        raise DomainError(f"profile is not (measurably) in H: {report.as_dict()}")
    grad = math.sqrt(report.norms["weighted_L2_grad"])
    if grad == 0.0:
        raise DomainError("v' vanishes identically but v does not")
    nu = float(params.nu)
    return float(np.max(profile.grid**nu * np.abs(profile.values))) / grad


def envelope_domination(params: Parameters, profile: VProfile, slack: float = 0.05) -> dict:
    """Check ``v <= B C**(p-1) w (1 + slack)`` on the grid with ``C = sup t**nu v``.

    ``C`` is the radial-bound ratio times ``||v'||``, i.e. the smallest constant
    with ``v <= C t**-nu`` on the grid.
    """
    nu, p = float(params.nu), float(params.power)
    c = float(np.max(profile.grid**nu * profile.values))
    w = envelope_w_grid(params, profile.grid).values
    bound = params.b_const * c ** (p - 1.0) * w
    ratio = profile.values / bound
    return {"C": c, "max_ratio": float(np.max(ratio)), "holds": bool(np.all(ratio <= 1.0 + slack))}


@dataclass(frozen=True)
class LimitReport:
    value_at_min: float
    r_min: float
    exponent: float
    r2: float
    limit: float
    status: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def liminf_check(params: Parameters, phi: PhiProfile, decade: float = 10.0) -> LimitReport:
    """Value and fitted ``r -> 0`` limit of ``r**(beta-2) phi**2``.

    The smallest decade is fitted with a power law ``r**e``.  ``e`` within
    ``LIMIT_EXPONENT_BAND`` of zero, or a poor fit, gives status Inconclusive;
    otherwise the limit is ``0`` (``e > 0``) or ``inf`` (``e < 0``).
    """
    r = phi.grid
    if r[0] >= 1e-3:
        raise DomainError("phi must be sampled below r = 1e-3")
    beta = float(params.beta)
    f = r ** (beta - 2.0) * phi.values**2
    mask = r <= r[0] * decade
    value = float(f[0])
    if np.all(f[mask] == 0.0):
        return LimitReport(value, float(r[0]), math.inf, 1.0, 0.0, "zero")
    if np.any(f[mask] <= 0.0):
        return LimitReport(value, float(r[0]), math.nan, math.nan, math.nan, "Inconclusive")
    fit = _line(np.log(r[mask]), np.log(f[mask]))
    e = fit.slope
    if fit.r2 < R2_MIN and fit.rms > 1e-6:
        return LimitReport(value, float(r[0]), e, fit.r2, math.nan, "Inconclusive")
    if abs(e) <= LIMIT_EXPONENT_BAND:
        return LimitReport(value, float(r[0]), e, fit.r2, math.nan, "Inconclusive")
    if e > 0:
        return LimitReport(value, float(r[0]), e, fit.r2, 0.0, "zero")
    return LimitReport(value, float(r[0]), e, fit.r2, math.inf, "infinite")


def decay_exponent(params: Parameters):
    """``(2*-1-p)(N-2) + beta - 2``, the decay rate of ``r**(beta-2) phi**2`` in the worst case."""
    return (params.two_star - 1 - params.power) * (params.dim - 2) + params.beta - 2
