r"""Modified Bessel functions :math:`I_\nu`, :math:`K_\nu` for real order and argument.

Evaluation is split into two regimes at :func:`crossover`:

* ``SERIES``: :math:`I_\nu` from its ascending power series; :math:`K_\nu` from
  Temme's series (``t <= 2``) or Steed's continued fraction (``t > 2``) for an
  order :math:`\mu \in [-1/2, 1/2)` followed by upward recurrence.  Temme's
  series is the uniform form of the logarithmic limit at integer orders, so no
  special case is needed there.
* ``ASYMPTOTIC``: Hankel's large-argument expansion with as many correction
  terms as are needed to reach machine precision.

All internal work is done on exponentially scaled values
(:math:`e^{-t} I_\nu`, :math:`e^{t} K_\nu`) which are what the ``*_scaled``
entry points return.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass

import numpy as np

from ._validation import DomainError, check_positive_finite

EPS = sys.float_info.epsilon
MAX_ITER = 10_000

# Taylor coefficients of 1/Gamma(z) about 0 (c[k] multiplies z**k).
_RGAMMA_TAYLOR = (
    0.0,
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19,
)


class Regime(enum.Enum):
    SERIES = "SeriesRegion"
    ASYMPTOTIC = "AsymptoticRegion"


@dataclass(frozen=True)
class BesselEval:
    order: float
    argument: float
    i_value: float
    k_value: float
    regime: Regime
    scaled: bool = False


@dataclass(frozen=True)
class WeightedKernels:
    big_i: float
    big_k: float
    weight_exponent: float


def crossover(order: float) -> float:
    """Argument above which the Hankel expansion is used.

    Below ``t = 30`` the truncation error of the expansion (about ``exp(-2t)``)
    is not small enough for 1e-10 relative accuracy, and for ``t < order**2``
    the leading terms grow before they start to decrease.
    """
    return max(30.0, order * order)


def regime(order: float, argument: float) -> Regime:
    return Regime.ASYMPTOTIC if argument > crossover(order) else Regime.SERIES


def _check_args(order, argument) -> tuple[float, float]:
    return check_positive_finite(order, "order"), check_positive_finite(argument, "argument")


# ---------------------------------------------------------------------------
# building blocks


def _temme_gammas(mu: float) -> tuple[float, float, float, float]:
    """gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu) for |mu| <= 1/2."""
    mu2 = mu * mu
    gam1 = 0.0
    gam2 = 0.0
    power = 1.0
    for k in range(1, len(_RGAMMA_TAYLOR), 2):
        gam2 += _RGAMMA_TAYLOR[k] * power
        if k + 1 < len(_RGAMMA_TAYLOR):
            gam1 -= _RGAMMA_TAYLOR[k + 1] * power
        power *= mu2
    return gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1


def _k_temme(mu: float, t: float) -> tuple[float, float]:
    """K_mu(t), K_{mu+1}(t) by Temme's series, 0 < t <= 2."""
    half = 0.5 * t
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
    d = -math.log(half)
    e = mu * d
    fact2 = 1.0 if abs(e) < EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = half * half
    total1 = p
    mu2 = mu * mu
    for i in range(1, MAX_ITER):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= d / i
        p /= i - mu
        q /= i + mu
        term = c * ff
        total += term
        total1 += c * (p - i * ff)
        if abs(term) < abs(total) * EPS:
            break
    else:  # pragma: no cover - the series converges in a few dozen terms
        raise ArithmeticError("Temme series did not converge")
    return total, total1 * 2.0 / t


def _k_steed_scaled(mu: float, t: float) -> tuple[float, float]:
    """exp(t) K_mu(t), exp(t) K_{mu+1}(t) by Steed's continued fraction, t > 2."""
    b = 2.0 * (1.0 + t)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, MAX_ITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("Steed continued fraction did not converge")
    h *= a1
    kmu = math.sqrt(math.pi / (2.0 * t)) / s
    return kmu, kmu * (mu + t + 0.5 - h) / t


def _k_pair_scaled_series(order: float, t: float) -> tuple[float, float]:
    """exp(t) K_order(t) and exp(t) K_{order+1}(t) for the series regime."""
    n = int(math.floor(order + 0.5))
    mu = order - n
    if t <= 2.0:
        kmu, k1 = _k_temme(mu, t)
        scale = math.exp(t)
        kmu *= scale
        k1 *= scale
    else:
        kmu, k1 = _k_steed_scaled(mu, t)
    for i in range(1, n + 1):
        kmu, k1 = k1, (mu + i) * (2.0 / t) * k1 + kmu
    return kmu, k1


def _i_series_scaled(order: float, t: float) -> float:
    """exp(-t) I_order(t) from the ascending series, summed with rescaling."""
    log_lead = order * math.log(0.5 * t) - math.lgamma(order + 1.0) - t
    quarter = 0.25 * t * t
    term = 1.0
    total = 1.0
    log_offset = 0.0
    k = 0
    while True:
        k += 1
        term *= quarter / (k * (order + k))
        total += term
        if total > 1e280:
            total *= 1e-280
            term *= 1e-280
            log_offset += 280.0 * math.log(10.0)
        if term < EPS * total * 0.25 and k > 0.5 * t:
            break
        if k > MAX_ITER:  # pragma: no cover
            raise ArithmeticError("I series did not converge")
    return math.exp(log_lead + log_offset + math.log(total))


def _hankel_scaled(order: float, t: float) -> tuple[float, float]:
    """exp(-t) I_order(t), exp(t) K_order(t) from Hankel's expansion."""
    four_nu2 = 4.0 * order * order
    term = 1.0
    sum_k = 1.0
    sum_i = 1.0
    prev = math.inf
    for k in range(1, MAX_ITER):
        term *= (four_nu2 - (2 * k - 1) ** 2) / (k * 8.0 * t)
        mag = abs(term)
        if mag > prev:
            break
        sum_k += term
        sum_i += term if k % 2 == 0 else -term
        prev = mag
        if mag < EPS * 0.25 * min(abs(sum_k), abs(sum_i)):
            break
    return sum_i / math.sqrt(2.0 * math.pi * t), math.sqrt(math.pi / (2.0 * t)) * sum_k


def _pair_scaled(order: float, t: float) -> tuple[float, float, Regime]:
    reg = regime(order, t)
    if reg is Regime.ASYMPTOTIC:
        i_s, k_s = _hankel_scaled(order, t)
    else:
        i_s = _i_series_scaled(order, t)
        k_s = _k_pair_scaled_series(order, t)[0]
    return i_s, k_s, reg


def _unscale(value: float, exponent: float, what: str) -> float:
    try:
        out = value * math.exp(exponent)
    except OverflowError:
        out = math.inf
    if not math.isfinite(out) or (value > 0.0 and out < sys.float_info.min):
        raise OverflowError(f"{what} is not representable in double precision; use the scaled entry point")
    return out


# ---------------------------------------------------------------------------
# public scalar API


def eval_i_scaled(order: float, argument: float) -> float:
    """``exp(-t) * I_nu(t)``."""
    nu, t = _check_args(order, argument)
    return _pair_scaled(nu, t)[0]


def eval_k_scaled(order: float, argument: float) -> float:
    """``exp(t) * K_nu(t)``."""
    nu, t = _check_args(order, argument)
    return _pair_scaled(nu, t)[1]


def eval_i(order: float, argument: float) -> float:
    """Modified Bessel function of the first kind, ``I_nu(t)``.

    Raises
    ------
    DomainError
        If ``order`` or ``argument`` is not finite and positive.
    OverflowError
        If the value exceeds the double range (use :func:`eval_i_scaled`).
    """
    nu, t = _check_args(order, argument)
    return _unscale(_pair_scaled(nu, t)[0], t, f"I_{nu}({t})")


def eval_k(order: float, argument: float) -> float:
    """Macdonald's function ``K_nu(t)`` (modified Bessel, second kind)."""
    nu, t = _check_args(order, argument)
    return _unscale(_pair_scaled(nu, t)[1], -t, f"K_{nu}({t})")


def bessel_eval(order: float, argument: float, scaled: bool = False) -> BesselEval:
    nu, t = _check_args(order, argument)
    i_s, k_s, reg = _pair_scaled(nu, t)
    if not scaled:
        i_s = _unscale(i_s, t, f"I_{nu}({t})")
        k_s = _unscale(k_s, -t, f"K_{nu}({t})")
    return BesselEval(nu, t, i_s, k_s, reg, scaled)


def ik_with_next(order: float, argument: float) -> tuple[float, float, float, float]:
    """Return ``(I_nu, K_nu, I_{nu+1}, K_{nu+1})`` at one argument (unscaled)."""
    nu, t = _check_args(order, argument)
    i0, k0, _ = _pair_scaled(nu, t)
    i1, k1, _ = _pair_scaled(nu + 1.0, t)
    up, down = math.exp(t), math.exp(-t)
    return i0 * up, k0 * down, i1 * up, k1 * down


def weighted_kernels(params, t: float) -> WeightedKernels:
    """``I(t) = t**w I_nu(t)`` and ``K(t) = t**w K_nu(t)`` with ``w = (N+alpha)/(2-alpha)``."""
    if not params.transform_available:
        raise DomainError("weighted kernels need 0 < alpha < 2")
    t = check_positive_finite(t, "t")
    nu = float(params.nu)
    w = float(params.weight_exponent)
    weight = t**w
    return WeightedKernels(weight * eval_i(nu, t), weight * eval_k(nu, t), w)


# ---------------------------------------------------------------------------
# array helpers


def iv(order: float, t) -> np.ndarray:
    """Vectorised :func:`eval_i` over an array of arguments."""
    nu = check_positive_finite(order, "order")
    arr = np.asarray(t, dtype=float)
    return np.array([eval_i(nu, x) for x in arr.ravel()]).reshape(arr.shape)


def kv(order: float, t) -> np.ndarray:
    """Vectorised :func:`eval_k` over an array of arguments."""
    nu = check_positive_finite(order, "order")
    arr = np.asarray(t, dtype=float)
    return np.array([eval_k(nu, x) for x in arr.ravel()]).reshape(arr.shape)


def ik_arrays(order: float, t) -> tuple[np.ndarray, np.ndarray]:
    """Arrays of ``I_nu`` and ``K_nu`` over ``t`` (one shared evaluation per point)."""
    nu = check_positive_finite(order, "order")
    arr = np.asarray(t, dtype=float)
    i_out = np.empty(arr.size)
    k_out = np.empty(arr.size)
    for j, x in enumerate(arr.ravel()):
        x = check_positive_finite(x, "argument")
        i_s, k_s, _ = _pair_scaled(nu, x)
        i_out[j] = _unscale(i_s, x, f"I_{nu}({x})")
        k_out[j] = _unscale(k_s, -x, f"K_{nu}({x})")
    return i_out.reshape(arr.shape), k_out.reshape(arr.shape)


def ik_table(order: float, t) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Arrays of ``I_nu, K_nu, I_{nu+1}, K_{nu+1}`` over ``t``."""
    arr = np.asarray(t, dtype=float)
    out = np.array([ik_with_next(order, x) for x in arr.ravel()])
    if out.size == 0:
        empty = np.empty(arr.shape)
        return empty, empty.copy(), empty.copy(), empty.copy()
    return tuple(out[:, j].reshape(arr.shape) for j in range(4))  # type: ignore[return-value]


def small_argument_i(order: float, t: float) -> float:
    """Leading behaviour ``t**nu / (2**nu Gamma(nu+1))`` as ``t -> 0``."""
    return math.exp(order * math.log(t) - order * math.log(2.0) - math.lgamma(order + 1.0))


def small_argument_k(order: float, t: float) -> float:
    """Leading behaviour ``Gamma(nu) 2**(nu-1) t**(-nu)`` as ``t -> 0``."""
    return math.exp(math.lgamma(order) + (order - 1.0) * math.log(2.0) - order * math.log(t))


__all__ = [
    "BesselEval",
    "DomainError",
    "Regime",
    "WeightedKernels",
    "bessel_eval",
    "crossover",
    "eval_i",
    "eval_i_scaled",
    "eval_k",
    "eval_k_scaled",
    "ik_arrays",
    "ik_table",
    "ik_with_next",
    "iv",
    "kv",
    "regime",
    "small_argument_i",
    "small_argument_k",
    "weighted_kernels",
]
