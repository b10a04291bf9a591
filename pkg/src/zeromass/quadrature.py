"""Composite Gauss-Legendre rules on logarithmic panels, with endpoint extrapolation.

Integrands in this package are products of powers and exponentials of ``t``,
so panels are uniform in ``u = ln t`` near the origin and capped in absolute
width further out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import ConvergenceError, DomainError

DEFAULT_ORDER = 16
PANELS_PER_DECADE = 8
MAX_PANEL_WIDTH = 1.0
BORDERLINE = 0.05


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def breakpoints(a: float, b: float, per_decade: int = PANELS_PER_DECADE, max_width: float = MAX_PANEL_WIDTH) -> np.ndarray:
    """Panel edges on ``[a, b]``: geometric spacing, no panel wider than ``max_width``."""
    if not (0 < a < b):
        raise DomainError(f"need 0 < a < b, got a={a}, b={b}")
    edges = [a]
    ratio = 10.0 ** (1.0 / per_decade)
    x = a
    while x < b:
        x = min(x * ratio, x + max_width, b)
        if b - x < 1e-12 * b:
            x = b
        edges.append(x)
    return np.asarray(edges)


def panel_nodes(edges: np.ndarray, order: int = DEFAULT_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights (shape ``(panels, order)``) of the composite rule in ``u = ln t``."""
    x, w = gauss_legendre(order)
    u = np.log(edges)
    half = 0.5 * np.diff(u)
    mid = 0.5 * (u[:-1] + u[1:])
    s = np.exp(mid[:, None] + half[:, None] * x[None, :])
    return s, s * half[:, None] * w[None, :]


def integrate(f, a: float, b: float, order: int = DEFAULT_ORDER, per_decade: int = PANELS_PER_DECADE) -> float:
    """``int_a^b f(s) ds`` for a vectorised ``f`` on ``0 < a < b``."""
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, order, per_decade)
    s, w = panel_nodes(breakpoints(a, b, per_decade), order)
    vals = np.asarray(f(s), dtype=float)
    total = float(np.sum(vals * w))
    if not math.isfinite(total):
        raise ConvergenceError(f"non-finite quadrature on [{a}, {b}]")
    return total


def integrate_to_infinity(f, a: float, order: int = DEFAULT_ORDER, rel_tol: float = 1e-15, max_length: float = 2000.0) -> float:
    """``int_a^inf f`` for an exponentially decaying ``f``; extends until the last panel is negligible."""
    total = 0.0
    lo = a
    length = max(1.0, a)
    while True:
        hi = lo + length
        piece = integrate(f, lo, hi, order)
        total += piece
        if abs(piece) <= rel_tol * abs(total) or (total == 0.0 and piece == 0.0):
            return total
        if hi - a > max_length:
            raise ConvergenceError(f"integrand does not decay on [{a}, {hi}]")
        lo = hi


def power_law_head(t0: float, f0: float, exponent: float) -> float:
    """``int_0^t0 f`` for ``f(s) = f0 (s/t0)**exponent``."""
    if f0 == 0.0:
        return 0.0
    if exponent <= -1.0:
        raise ConvergenceError(f"integrand ~ s**{exponent:.4g} is not integrable at 0")
    return t0 * f0 / (exponent + 1.0)


# ---------------------------------------------------------------------------
# sampled integrands


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and R**2 of ``y`` against ``x``."""
    if x.size < 2:
        return math.nan, math.nan
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss == 0.0 else 1.0 - float(np.sum(resid**2)) / ss
    return float(slope), r2


def endpoint_slope(grid: np.ndarray, f: np.ndarray, end: str, decade: float = 10.0, linear: bool = False) -> tuple[float, float]:
    """Log-log (or log-linear when ``linear``) slope of ``|f|`` over the outermost decade."""
    if end == "head":
        mask = grid <= grid[0] * decade
    else:
        mask = grid >= grid[-1] / decade
    g, y = grid[mask], np.abs(f[mask])
    keep = y > 0
    if keep.sum() < 3:
        return math.nan, math.nan
    x = g[keep] if linear else np.log(g[keep])
    return _fit(x, np.log(y[keep]))


def tail_extrapolation(grid: np.ndarray, f: np.ndarray) -> tuple[float, bool | None, str]:
    """``int_{grid[-1]}^inf f`` from the last decade: exponential or power-law fit, whichever is tighter."""
    e_tail, r2_pow = endpoint_slope(grid, f, "tail")
    rate, r2_exp = endpoint_slope(grid, f, "tail", linear=True)
    if f[-1] == 0.0 or math.isnan(e_tail):
        return 0.0, True, ""
    if e_tail < -1.0 - BORDERLINE:
        if rate < 0 and r2_exp >= r2_pow:
            return f[-1] / (-rate), True, ""
        return grid[-1] * f[-1] / (-e_tail - 1.0), True, ""
    if e_tail > -1.0 + BORDERLINE:
        return math.inf, False, f"decay exponent {e_tail:.3f} >= -1 at infinity"
    return math.nan, None, f"decay exponent {e_tail:.3f} too close to -1"


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    finite: bool | None
    head: float
    body: float
    tail: float
    note: str = ""


def integrate_samples(grid, f) -> IntegralEstimate:
    """``int_0^inf f`` from samples on a log grid plus fitted endpoint contributions.

    ``finite`` is ``None`` when an endpoint exponent sits within ``BORDERLINE`` of
    the integrability threshold ``-1``.
    """
    from scipy.integrate import simpson

    g = np.asarray(grid, dtype=float)
    f = np.asarray(f, dtype=float)
    if not np.any(f):
        return IntegralEstimate(0.0, True, 0.0, 0.0, 0.0)
    u = np.log(g)
    body = float(simpson(f * g, x=u))
    notes = []
    finite: bool | None = True

    e_head, _ = endpoint_slope(g, f, "head")
    if f[0] == 0.0 or math.isnan(e_head):
        head = 0.0
    elif e_head > -1.0 + BORDERLINE:
        head = g[0] * f[0] / (e_head + 1.0)
    elif e_head < -1.0 - BORDERLINE:
        head, finite = math.inf, False
        notes.append(f"origin exponent {e_head:.3f} <= -1")
    else:
        head, finite = math.nan, None
        notes.append(f"origin exponent {e_head:.3f} too close to -1")

    tail, tail_finite, note = tail_extrapolation(g, f)
    if note:
        notes.append(note)
    if tail_finite is False:
        finite = False
    elif tail_finite is None and finite is not False:
        finite = None

    value = head + body + tail if finite is not None else math.nan
    if finite is False:
        value = math.inf
    return IntegralEstimate(value, finite, head, body, tail, "; ".join(notes))
