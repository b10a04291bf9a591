"""Problem parameters, critical exponents and the ``phi(r) <-> v(t)`` change of variables.

The radial equation

    -phi'' - (N-1)/r phi' + A r**(-alpha) phi = phi**(p-1)

becomes, under ``t = 2 sqrt(A) r**((2-alpha)/2) / (2-alpha)`` and ``v(t) = phi(r(t))``,

    -v'' - (2 nu + 1)/t v' + v = B t**(2 alpha/(2-alpha)) v**(p-1)

with ``nu = (N-2)/(2-alpha)`` and ``B = ((2-alpha)/(2 A**(1/alpha)))**(2 alpha/(2-alpha))``.

Weighted integrals transport with explicit constants.  Writing
``c = (2-alpha)/(2 sqrt(A))`` and ``k = 2/(2-alpha)`` (so ``r = (c t)**k``):

* ``int phi**2 r**(N-1-alpha) dr = k c**(k(N-alpha)) int v**2 t**(2nu+1) dt``
* ``int phi'**2 r**(N-1) dr = A k c**(k(N-alpha)) int v'**2 t**(2nu+1) dt``
* ``int phi**p r**(N-1) dr = k c**(kN) int v**p t**(kN-1) dt``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational, Real

import numpy as np

from ._validation import DomainError, check_grid, check_positive_finite, check_samples

Number = Fraction | float


def as_number(value) -> Number:
    """Exact :class:`Fraction` for ints, fractions and decimal strings; float otherwise."""
    if isinstance(value, bool):
        raise DomainError(f"expected a number, got {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse number {value!r}") from exc
    if isinstance(value, Real):
        x = float(value)
        if not math.isfinite(x):
            raise DomainError(f"non-finite parameter {value!r}")
        return x
    raise DomainError(f"expected a number, got {value!r}")


@dataclass(frozen=True)
class Parameters:
    """Data ``(N, A, alpha, p)`` of the problem.

    Derived exponents are exact fractions whenever ``N``, ``alpha`` and ``p`` are
    rational (ints, :class:`~fractions.Fraction` or decimal strings).
    """

    dim: int
    amplitude: Number = 1
    alpha: Number = 1
    power: Number = 4

    def __post_init__(self):
        if isinstance(self.dim, bool) or int(self.dim) != self.dim or self.dim < 3:
            raise DomainError(f"dim must be an integer >= 3, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        for name in ("amplitude", "alpha", "power"):
            object.__setattr__(self, name, as_number(getattr(self, name)))
        if self.amplitude <= 0:
            raise DomainError(f"amplitude must be > 0, got {self.amplitude}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if self.power <= 2:
            raise DomainError(f"power must be > 2, got {self.power}")

    # -- critical exponents ------------------------------------------------

    @property
    def two_star(self) -> Number:
        n = self.dim
        return Fraction(2 * n, n - 2)

    @property
    def two_alpha(self) -> Number | None:
        """``2N/(N-alpha)``; ``None`` when ``alpha >= N``."""
        n, a = self.dim, self.alpha
        if a >= n:
            return None
        return 2 * n / (n - a)

    @property
    def two_alpha_star(self) -> Number | None:
        """``2(2N-2+alpha)/(2N-2-alpha)``; ``None`` when ``alpha >= 2N-2``."""
        n, a = self.dim, self.alpha
        if a >= 2 * n - 2:
            return None
        return 2 * (2 * n - 2 + a) / (2 * n - 2 - a)

    @property
    def beta(self) -> Number:
        p = self.power
        return self.alpha * p / (p - 2)

    @property
    def gamma1(self) -> Number:
        b, p = self.beta, self.power
        return b / p + b / 2 - self.dim + 1

    @property
    def gamma2(self) -> Number:
        b, p, n = self.beta, self.power, self.dim
        return b * (n - b) * (b - 2) / (2 * p)

    # -- transform constants (0 < alpha < 2) --------------------------------

    @property
    def transform_available(self) -> bool:
        return self.alpha < 2

    def _need_transform(self):
        if not self.transform_available:
            raise DomainError(f"the change of variables needs 0 < alpha < 2, got alpha={self.alpha}")

    @property
    def nu(self) -> Number:
        self._need_transform()
        return (self.dim - 2) / (2 - self.alpha)

    @property
    def b_const(self) -> float:
        self._need_transform()
        a, amp = float(self.alpha), float(self.amplitude)
        return ((2.0 - a) / (2.0 * amp ** (1.0 / a))) ** (2.0 * a / (2.0 - a))

    @property
    def weight_exponent(self) -> Number:
        """``(N+alpha)/(2-alpha)``, the power in the kernels ``I(t)``, ``K(t)``."""
        self._need_transform()
        return (self.dim + self.alpha) / (2 - self.alpha)

    @property
    def forcing_exponent(self) -> Number:
        """``2 alpha/(2-alpha)``, the power of ``t`` in front of ``v**(p-1)``."""
        self._need_transform()
        return 2 * self.alpha / (2 - self.alpha)

    @property
    def h_weight_exponent(self) -> Number:
        """``(2N-2-alpha)/(2-alpha) = 2 nu + 1``, the weight of the space ``H``."""
        self._need_transform()
        return (2 * self.dim - 2 - self.alpha) / (2 - self.alpha)

    def as_dict(self) -> dict:
        return {
            "N": self.dim,
            "A": _jsonable(self.amplitude),
            "alpha": _jsonable(self.alpha),
            "p": _jsonable(self.power),
        }


def _jsonable(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    return x


@dataclass(frozen=True)
class DerivedConstants:
    nu: Number | None
    b_const: float | None
    two_star: Number
    two_alpha: Number | None
    two_alpha_star: Number | None
    beta: Number
    gamma1: Number
    gamma2: Number
    weight_exponent: Number | None
    transform_available: bool


def derive_constants(params: Parameters) -> DerivedConstants:
    """Snapshot of every constant derived from ``params``.

    Transform-specific entries are ``None`` when ``alpha >= 2``.
    """
    ok = params.transform_available
    return DerivedConstants(
        nu=params.nu if ok else None,
        b_const=params.b_const if ok else None,
        two_star=params.two_star,
        two_alpha=params.two_alpha,
        two_alpha_star=params.two_alpha_star,
        beta=params.beta,
        gamma1=params.gamma1,
        gamma2=params.gamma2,
        weight_exponent=params.weight_exponent if ok else None,
        transform_available=ok,
    )


# ---------------------------------------------------------------------------
# change of variables


def _c_and_k(params: Parameters) -> tuple[float, float]:
    params._need_transform()
    a = float(params.alpha)
    return (2.0 - a) / (2.0 * math.sqrt(float(params.amplitude))), 2.0 / (2.0 - a)


def _positive(x, name):
    if np.ndim(x):
        return np.asarray(x, dtype=float)
    return check_positive_finite(x, name)


def t_of_r(params: Parameters, r):
    """``t = (2 sqrt(A)/(2-alpha)) r**((2-alpha)/2)``; accepts scalars or arrays."""
    c, k = _c_and_k(params)
    return _positive(r, "r") ** (1.0 / k) / c


def r_of_t(params: Parameters, t):
    """``r = ((2-alpha) t/(2 sqrt(A)))**(2/(2-alpha))``; accepts scalars or arrays."""
    c, k = _c_and_k(params)
    return (c * _positive(t, "t")) ** k


def dt_dr(params: Parameters, r):
    """``dt/dr = sqrt(A) r**(-alpha/2)``."""
    params._need_transform()
    return math.sqrt(float(params.amplitude)) * np.asarray(r, dtype=float) ** (-0.5 * float(params.alpha))


def gradient_norm_factor(params: Parameters) -> float:
    """``A k c**(k(N-alpha))``: ``int phi'**2 r**(N-1) dr`` over ``int v'**2 t**(2nu+1) dt``."""
    return float(params.amplitude) * l2_alpha_factor(params)


def l2_alpha_factor(params: Parameters) -> float:
    """``k c**(k(N-alpha))``: ``int phi**2 r**(N-1-alpha) dr`` over ``int v**2 t**(2nu+1) dt``."""
    c, k = _c_and_k(params)
    return k * c ** (k * (params.dim - float(params.alpha)))


def lp_factor(params: Parameters) -> float:
    """Constant with ``int phi**p r**(N-1) dr = factor * int v**p t**(kN - 1) dt``."""
    c, k = _c_and_k(params)
    return c ** (k * params.dim) * k


def lp_weight_exponent(params: Parameters) -> float:
    """Power of ``t`` in the transported ``L^p(r**(N-1) dr)`` integrand, ``2N/(2-alpha) - 1``."""
    _, k = _c_and_k(params)
    return k * params.dim - 1.0


# ---------------------------------------------------------------------------
# profiles


def log_derivative(grid, values) -> np.ndarray:
    """``d values / d grid`` from differences in ``u = ln(grid)``.

    Fourth-order central differences on uniform log grids (five-point one-sided
    stencils at the two ends), second-order :func:`numpy.gradient` otherwise.
    """
    g = check_grid(grid)
    y = check_samples(values, g.size, "values")
    u = np.log(g)
    n = g.size
    if n < 2:
        return np.zeros(n)
    du = np.diff(u)
    if n < 5 or not np.allclose(du, du[0], rtol=1e-9, atol=0.0):
        return np.gradient(y, u, edge_order=2 if n > 2 else 1) / g
    h = du[0]
    dy = np.empty(n)
    dy[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    head, tail = y[:5], y[-5:][::-1]
    dy[0] = _one_sided(head, 0, h)
    dy[1] = _one_sided(head, 1, h)
    dy[-1] = -_one_sided(tail, 0, h)
    dy[-2] = -_one_sided(tail, 1, h)
    return dy / g


def _one_sided(s: np.ndarray, offset: int, h: float) -> float:
    # five-point stencils for the derivative at node `offset` of s[0..4]
    if offset == 0:
        return (-25 * s[0] + 48 * s[1] - 36 * s[2] + 16 * s[3] - 3 * s[4]) / (12.0 * h)
    return (-3 * s[0] - 10 * s[1] + 18 * s[2] - 6 * s[3] + s[4]) / (12.0 * h)


def log_grid(t_min: float = 1e-4, t_max: float = 50.0, n: int = 2048) -> np.ndarray:
    """Logarithmically spaced grid, the default sampling for profiles."""
    if n < 2 or not (0 < t_min < t_max):
        raise DomainError("log_grid needs n >= 2 and 0 < t_min < t_max")
    return np.geomspace(t_min, t_max, n)


@dataclass(frozen=True, eq=False)
class _Profile:
    grid: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        g = check_grid(self.grid, self._grid_name)
        v = check_samples(self.values, g.size, "values")
        if self.derivative_values is None:
            dv = log_derivative(g, v) if g.size > 1 else np.zeros(1)
        else:
            dv = check_samples(self.derivative_values, g.size, "derivative_values")
        for name, arr in (("grid", g), ("values", v), ("derivative_values", dv)):
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.grid.size

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0.0))

    def restrict(self, lo: float, hi: float):
        mask = (self.grid >= lo) & (self.grid <= hi)
        return type(self)(self.grid[mask], self.values[mask], self.derivative_values[mask])

    def interpolate(self, x, derivative: bool = False) -> np.ndarray:
        """Cubic Hermite interpolation in ``ln(grid)`` using the stored derivatives."""
        from scipy.interpolate import CubicHermiteSpline

        x = np.asarray(x, dtype=float)
        u = np.log(self.grid)
        spline = CubicHermiteSpline(u, self.values, self.grid * self.derivative_values, extrapolate=False)
        if not derivative:
            return spline(np.log(x))
        return spline(np.log(x), 1) / x


class VProfile(_Profile):
    """Samples of ``v(t)`` and ``v'(t)`` on a strictly increasing positive ``t`` grid."""

    _grid_name = "t grid"


class PhiProfile(_Profile):
    """Samples of ``phi(r)`` and ``phi'(r)`` on a strictly increasing positive ``r`` grid."""

    _grid_name = "r grid"


def v_from_phi(params: Parameters, phi: PhiProfile) -> VProfile:
    if len(phi) == 0:
        raise DomainError("empty profile")
    t = t_of_r(params, phi.grid)
    # phi'(r) = sqrt(A) v'(t) r**(-alpha/2)
    dv = phi.derivative_values / dt_dr(params, phi.grid)
    return VProfile(t, phi.values.copy(), dv)


def phi_from_v(params: Parameters, v: VProfile) -> PhiProfile:
    if len(v) == 0:
        raise DomainError("empty profile")
    r = r_of_t(params, v.grid)
    return PhiProfile(r, v.values.copy(), v.derivative_values * dt_dr(params, r))


def sample_v(params: Parameters, func, grid=None, dfunc=None) -> VProfile:
    """Build a :class:`VProfile` from callables (``dfunc`` defaults to finite differences)."""
    g = log_grid() if grid is None else check_grid(grid)
    vals = np.asarray(func(g), dtype=float) * np.ones_like(g)
    dvals = None if dfunc is None else np.asarray(dfunc(g), dtype=float) * np.ones_like(g)
    return VProfile(g, vals, dvals)


# ---------------------------------------------------------------------------
# membership in H and L^p


@dataclass(frozen=True)
class MembershipReport:
    in_weighted_L2: bool | None
    in_weighted_L2_grad: bool | None
    in_Lp_r: bool | None
    norms: dict
    inconclusive: bool
    notes: tuple = ()

    @property
    def in_H(self) -> bool | None:
        # one divergent norm is enough to rule membership out
        if self.in_weighted_L2 is False or self.in_weighted_L2_grad is False:
            return False
        if self.in_weighted_L2 is None or self.in_weighted_L2_grad is None:
            return None
        return self.in_weighted_L2 and self.in_weighted_L2_grad

    def as_dict(self) -> dict:
        return {
            "in_weighted_L2": self.in_weighted_L2,
            "in_weighted_L2_grad": self.in_weighted_L2_grad,
            "in_Lp_r": self.in_Lp_r,
            "in_H": self.in_H,
            "norms": dict(self.norms),
            "inconclusive": self.inconclusive,
            "notes": list(self.notes),
        }


MIN_SPAN = (1e-4, 50.0)


def membership_report(params: Parameters, v: VProfile) -> MembershipReport:
    """Quadrature estimates of the three defining integrals with endpoint extrapolation.

    The integrals are ``int v**2 t**(2nu+1)``, ``int v'**2 t**(2nu+1)`` and the
    transported ``int phi**p r**(N-1) dr``.  Each endpoint contribution is
    extrapolated from the behaviour fitted over the outermost decade; a
    borderline fit makes the corresponding flag ``None``.
    """
    from .quadrature import integrate_samples

    g = v.grid
    short = g[0] > MIN_SPAN[0] * (1 + 1e-9) or g[-1] < MIN_SPAN[1] * (1 - 1e-9)
    w = float(params.h_weight_exponent)
    p = float(params.power)
    integrands = {
        "weighted_L2": v.values**2 * g**w,
        "weighted_L2_grad": v.derivative_values**2 * g**w,
        "Lp_r": np.abs(v.values) ** p * g ** lp_weight_exponent(params),
    }
    flags = {}
    norms = {}
    notes = []
    for key, f in integrands.items():
        if short:
            flags[key] = None
            norms[key] = math.nan
            continue
        res = integrate_samples(g, f)
        norms[key] = res.value
        flags[key] = res.finite
        if res.finite is None:
            notes.append(f"{key}: {res.note}")
    if "Lp_r" in norms and math.isfinite(norms["Lp_r"]):
        norms["Lp_r"] *= lp_factor(params)
    if short:
        notes.append(f"grid must span at least [{MIN_SPAN[0]}, {MIN_SPAN[1]}]")
    return MembershipReport(
        flags["weighted_L2"],
        flags["weighted_L2_grad"],
        flags["Lp_r"],
        norms,
        inconclusive=any(x is None for x in flags.values()),
        notes=tuple(notes),
    )
