"""Energy, the Pohozaev-type identity and the sign obstruction in the ``r`` variable.

With ``E = phi'**2/2 - A r**-alpha phi**2/2 + phi**p/p``, ``E_beta = r**beta E``
and ``beta = alpha p/(p-2)``, every solution of
``-phi'' - (N-1)/r phi' + A r**-alpha phi = phi**(p-1)`` satisfies on ``[a, b]``

    gamma1 int r**(beta-1) phi'**2 + A ((alpha-beta)/2 + beta/p) int r**(beta-alpha-1) phi**2
        + gamma2 int r**(beta-3) phi**2
    = (beta/p) [ r**(beta-1) phi' phi - (beta-N)/2 r**(beta-2) phi**2 ]_a^b + E_beta(b) - E_beta(a)

with ``gamma1 = beta/p + beta/2 - N + 1`` and ``gamma2 = beta (N-beta)(beta-2)/(2p)``.
The middle coefficient vanishes identically.  Letting ``b -> inf`` leaves

    gamma1 int_a^inf r**(beta-1) phi'**2 + gamma2 int_a^inf r**(beta-3) phi**2 = F(a),

whose left side is positive when ``2_alpha < p <= 2_alpha*`` while ``F(a)`` is at
most ``o(1)`` as ``a -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import DomainError, check_positive_finite
from .quadrature import integrate, tail_extrapolation
from .scaling import Parameters, PhiProfile, log_derivative

COEFFICIENT_TOL = 1e-12


@dataclass(frozen=True)
class EnergyRecord:
    r: float
    E: float
    E_beta: float


class _Interpolant:
    """``phi`` and ``phi'`` at arbitrary ``r`` inside the grid.

    ``phi`` uses the Hermite spline of the profile; ``phi'`` gets its own cubic
    spline in ``ln r`` so that it keeps fourth-order accuracy.
    """

    def __init__(self, phi: PhiProfile):
        from scipy.interpolate import CubicSpline

        self.phi = phi
        self.lo, self.hi = float(phi.grid[0]), float(phi.grid[-1])
        self._d = CubicSpline(np.log(phi.grid), phi.derivative_values)

    def check(self, r, name="r"):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.lo * (1 - 1e-12)) or np.any(r > self.hi * (1 + 1e-12)):
            raise DomainError(f"{name} outside the profile grid [{self.lo:.6g}, {self.hi:.6g}]")
        return np.clip(r, self.lo, self.hi)

    def __call__(self, r) -> tuple[np.ndarray, np.ndarray]:
        r = self.check(r)
        return self.phi.interpolate(r), self._d(np.log(r))


def _energy_values(params: Parameters, r, f, df) -> tuple[np.ndarray, np.ndarray]:
    a, p, amp, beta = float(params.alpha), float(params.power), float(params.amplitude), float(params.beta)
    e = 0.5 * df**2 - 0.5 * amp * r**-a * f**2 + np.abs(f) ** p / p
    return e, r**beta * e


def energy(params: Parameters, phi: PhiProfile, r: float) -> EnergyRecord:
    """``E`` and ``E_beta`` at ``r`` (interpolated inside the grid)."""
    r = check_positive_finite(r, "r")
    f, df = _Interpolant(phi)(np.array([r]))
    e, eb = _energy_values(params, r, f[0], df[0])
    return EnergyRecord(r, float(e), float(eb))


def energy_profile(params: Parameters, phi: PhiProfile) -> tuple[np.ndarray, np.ndarray]:
    return _energy_values(params, phi.grid, phi.values, phi.derivative_values)


def energy_rate_residual(params: Parameters, phi: PhiProfile, trim: int = 4) -> float:
    """Sup of ``|dE/dr - (-(N-1)/r phi'**2 + alpha A/(2 r**(alpha+1)) phi**2)|``.

    ``dE/dr`` is differentiated numerically from the sampled energy; the
    residual is relative to the sup of the two terms on the right.
    """
    r, f, df = phi.grid, phi.values, phi.derivative_values
    e, _ = energy_profile(params, phi)
    de = log_derivative(r, e)
    n, a, amp = params.dim, float(params.alpha), float(params.amplitude)
    t1 = -(n - 1) / r * df**2
    t2 = 0.5 * a * amp * r ** (-a - 1) * f**2
    scale = np.maximum(np.abs(t1) + np.abs(t2), 1e-300)
    res = np.abs(de - (t1 + t2))[trim:-trim]
    return float(np.max(res) / np.max(scale[trim:-trim]))


# ---------------------------------------------------------------------------
# identity on [a, b]


def middle_coefficient(params: Parameters):
    """``(alpha-beta)/2 + beta/p``; exactly zero for rational data."""
    a, b, p = params.alpha, params.beta, params.power
    return (a - b) / 2 + b / p


def _assert_middle_vanishes(params: Parameters):
    c = middle_coefficient(params)
    if isinstance(c, Fraction) and c != 0:
        raise ArithmeticError(f"(alpha-beta)/2 + beta/p = {c} is not zero")
    if abs(float(c)) > COEFFICIENT_TOL:
        raise ArithmeticError(f"(alpha-beta)/2 + beta/p = {float(c):.3g} is not zero")
    return c


def boundary_bracket(params: Parameters, r, f, df):
    """``(beta/p) [r**(beta-1) phi' phi - (beta-N)/2 r**(beta-2) phi**2] + E_beta`` at ``r``."""
    beta, p, n = float(params.beta), float(params.power), params.dim
    _, eb = _energy_values(params, r, f, df)
    return (beta / p) * (r ** (beta - 1) * df * f - 0.5 * (beta - n) * r ** (beta - 2) * f**2) + eb


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs: float
    residual: float
    a: float
    b: float
    normalized: float
    middle_coefficient: float

    def passes(self, tol: float = 1e-5) -> bool:
        return self.normalized <= tol

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def identity_residual(params: Parameters, phi: PhiProfile, a: float, b: float) -> IdentityReport:
    """Both sides of the identity on ``[a, b]`` with log-panel Gauss quadrature.

    ``normalized`` is ``|lhs - rhs| / max(|lhs|, |rhs|)``.
    """
    a, b = check_positive_finite(a, "a"), check_positive_finite(b, "b")
    if a >= b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    ip = _Interpolant(phi)
    ip.check([a, b], "[a, b]")
    coef = _assert_middle_vanishes(params)
    beta = float(params.beta)
    g1, g2 = float(params.gamma1), float(params.gamma2)
    amp, al = float(params.amplitude), float(params.alpha)

    def integrand(s):
        f, df = ip(s)
        out = g1 * s ** (beta - 1) * df**2 + g2 * s ** (beta - 3) * f**2
        if coef != 0:
            out = out + amp * float(coef) * s ** (beta - al - 1) * f**2
        return out

    lhs = integrate(integrand, a, b)
    (fa, fb), (da, db) = ip(np.array([a, b]))
    rhs = float(boundary_bracket(params, b, fb, db) - boundary_bracket(params, a, fa, da))
    resid = lhs - rhs
    scale = max(abs(lhs), abs(rhs))
    norm = abs(resid) / scale if scale > 0 else 0.0
    return IdentityReport(float(lhs), rhs, float(resid), a, b, float(norm), float(coef))


# ---------------------------------------------------------------------------
# obstruction


def in_obstruction_region(params: Parameters) -> bool:
    """``0 < alpha < 2`` and ``2_alpha < p <= 2_alpha*``."""
    if not 0 < params.alpha < 2:
        return False
    return params.two_alpha < params.power <= params.two_alpha_star


def f_raw(params: Parameters, a, f, df):
    """``F(a) = -(beta/p) a**(beta-1) phi' phi - beta(N-beta)/(2p) a**(beta-2) phi**2 - E_beta(a)``."""
    beta, p, n = float(params.beta), float(params.power), params.dim
    _, eb = _energy_values(params, a, f, df)
    return -(beta / p) * a ** (beta - 1) * df * f - beta * (n - beta) / (2 * p) * a ** (beta - 2) * f**2 - eb


def f_completed_square(params: Parameters, a, f, df) -> tuple:
    """``F(a)`` split as ``(square, power, remainder)`` with

    ``square = -a**(beta-2) (a phi' + (beta/p) phi)**2 / 2``,
    ``power = -a**beta phi**p / p`` and
    ``remainder = a**(beta-2) phi**2 (beta**2/(2p**2) - beta(N-beta)/(2p)) + A a**(beta-alpha) phi**2 / 2``.
    """
    beta, p, n = float(params.beta), float(params.power), params.dim
    amp, al = float(params.amplitude), float(params.alpha)
    square = -0.5 * a ** (beta - 2) * (a * df + (beta / p) * f) ** 2
    power = -(a**beta) * np.abs(f) ** p / p
    rem = a ** (beta - 2) * f**2 * (beta**2 / (2 * p**2) - beta * (n - beta) / (2 * p)) + 0.5 * amp * a ** (beta - al) * f**2
    return square, power, rem


def boundary_terms(params: Parameters, phi: PhiProfile) -> np.ndarray:
    """``r**(beta-1)|phi'| phi + r**(beta-2) phi**2 + r**beta phi'**2 + r**(beta-alpha) phi**2 + r**beta |phi|**p``."""
    r, f, df = phi.grid, phi.values, phi.derivative_values
    beta, al, p = float(params.beta), float(params.alpha), float(params.power)
    return (
        r ** (beta - 1) * np.abs(df * f)
        + r ** (beta - 2) * f**2
        + r**beta * df**2
        + r ** (beta - al) * f**2
        + r**beta * np.abs(f) ** p
    )


def limit_gate(params: Parameters, phi: PhiProfile) -> tuple[bool, list]:
    """Boundary terms at the ends of the last three grid decades must decrease strictly."""
    r = phi.grid
    bt = boundary_terms(params, phi)
    pts = [r[-1] / 100.0, r[-1] / 10.0, r[-1]]
    if pts[0] < r[0]:
        return False, []
    vals = [float(np.interp(np.log(x), np.log(r), bt)) for x in pts]
    return bool(vals[0] > vals[1] > vals[2]), vals


@dataclass(frozen=True)
class Obstruction:
    a: float
    lhs_tail: float
    F_a: float
    contradiction_margin: float
    F_square: float
    F_power: float
    F_remainder: float
    limit_taken: bool
    tail_note: str = ""

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _tail_integral(r: np.ndarray, f: np.ndarray, a: float, ip_integrand) -> tuple[float, str]:
    body = integrate(ip_integrand, a, float(r[-1]))
    tail, finite, note = tail_extrapolation(r, f)
    if finite is not True:
        return math.inf if finite is False else math.nan, note
    return body + tail, note


def obstruction(params: Parameters, phi: PhiProfile, a: float) -> Obstruction:
    """``lhs_tail``, ``F(a)`` and their difference for a candidate profile.

    Only defined for ``0 < alpha < 2`` and ``2_alpha < p <= 2_alpha*``.  The
    integral to infinity is the grid integral plus a fitted tail; ``limit_taken``
    reports whether the boundary terms decrease over the last three decades.
    """
    if not in_obstruction_region(params):
        raise DomainError("the obstruction needs 0 < alpha < 2 and 2_alpha < p <= 2_alpha*")
    a = check_positive_finite(a, "a")
    ip = _Interpolant(phi)
    ip.check([a], "a")
    _assert_middle_vanishes(params)
    beta = float(params.beta)
    g1, g2 = float(params.gamma1), float(params.gamma2)

    def integrand(s):
        f, df = ip(s)
        return g1 * s ** (beta - 1) * df**2 + g2 * s ** (beta - 3) * f**2

    r = phi.grid
    samples = g1 * r ** (beta - 1) * phi.derivative_values**2 + g2 * r ** (beta - 3) * phi.values**2
    lhs, note = _tail_integral(r, samples, a, integrand)
    (fa,), (da,) = ip(np.array([a]))
    fval = float(f_raw(params, a, fa, da))
    sq, pw, rem = (float(x) for x in f_completed_square(params, a, fa, da))
    gate, _ = limit_gate(params, phi)
    return Obstruction(a, float(lhs), fval, float(lhs - fval), sq, pw, rem, gate, note)


# ---------------------------------------------------------------------------
# exact algebra on the region


def rational_region_grid(dim: int, n: int = 100) -> list[Parameters]:
    """``n x n`` rational points of ``{0 < alpha < 2, 2_alpha < p <= 2_alpha*}``.

    ``alpha = 2i/(n+1)`` and ``p = 2_alpha + j (2_alpha* - 2_alpha)/n`` for
    ``i, j = 1..n``; ``j = n`` lands on ``p = 2_alpha*`` exactly.
    """
    out = []
    for i in range(1, n + 1):
        alpha = Fraction(2 * i, n + 1)
        base = Parameters(dim, 1, alpha, 3)
        lo, hi = base.two_alpha, base.two_alpha_star
        for j in range(1, n + 1):
            out.append(Parameters(dim, 1, alpha, lo + (hi - lo) * Fraction(j, n)))
    return out


def algebraic_checks(params: Parameters) -> dict:
    """Exact identities and inequalities behind the obstruction at one rational point."""
    n, a, p = params.dim, params.alpha, params.power
    beta, g1, g2 = params.beta, params.gamma1, params.gamma2
    top = params.two_alpha_star
    factored = (2 * n - 2 - a) / (2 * (p - 2)) * (top - p)
    return {
        "middle_coefficient_zero": middle_coefficient(params) == 0,
        "beta_range": (2 * n - 2 + a) / 2 <= beta < n,
        "beta_minus_two": beta - 2 >= (2 * n - 6 + a) / 2 > 0,
        "gamma1_factored": g1 == factored,
        "gamma1_sign": (g1 >= 0) and ((g1 == 0) == (p == top)),
        "gamma2_positive": g2 > 0,
        "decay_exponent_positive": (params.two_star - 1 - p) * (n - 2) + beta - 2 > 0,
    }


def obstruction_suite(dim: int = 3, n: int = 100) -> dict:
    """Run :func:`algebraic_checks` over :func:`rational_region_grid`; returns failure counts."""
    failures: dict[str, int] = {}
    points = rational_region_grid(dim, n)
    for prm in points:
        for key, ok in algebraic_checks(prm).items():
            failures.setdefault(key, 0)
            if not ok:
                failures[key] += 1
    return {"points": len(points), "failures": failures, "total_failures": sum(failures.values())}
