"""Classification of the ``(alpha, p)`` plane for fixed ``N``.

Known results, in the order they are applied:

1. ``(2, 2*)``: all radial solutions are known explicitly.
2. ``alpha = 2`` with ``p != 2*``, and the lines ``p = 2*`` and ``p = 2_alpha``:
   no solution.
3. ``0 < alpha < 2``: no solution for ``p > 2*`` or ``p < 2_alpha``; no radial
   solution for ``2_alpha < p <= 2_alpha*``; radial solutions exist for
   ``2_alpha* < p < 2*``.
4. ``alpha > 2``: no solution for ``p < 2*`` or (when ``alpha < N``)
   ``p > 2_alpha``; radial solutions exist for ``2* < p < 2_alpha*`` (any
   ``p > 2*`` once ``alpha >= 2N-2``).
5. Everything else is open.

Comparisons are exact when ``alpha`` and ``p`` are rational.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import DomainError
from .scaling import Parameters, as_number

CELL_BUDGET = 30.0


class Region(enum.Enum):
    NONEXISTENCE = "Nonexistence"
    RADIAL_NONEXISTENCE = "RadialNonexistence"
    EXISTENCE_RADIAL = "ExistenceRadial"
    EXISTENCE_EXPLICIT = "ExistenceExplicit"
    OPEN = "Open"


class Source(enum.Enum):
    TERRACINI = "Terracini"
    COCRPAR = "CoCrPar"
    BRPOW = "BRpow"
    SUWANGWILL = "SuWangWill"
    THIS_PAPER = "ThisPaper"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class RegionClass:
    region: Region
    source: Source | None
    boundary_note: str | None = None

    @property
    def label(self) -> str:
        return self.region.value

    def as_dict(self) -> dict:
        return {
            "class": self.region.value,
            "source": None if self.source is None else self.source.value,
            "boundary_note": self.boundary_note,
        }


def classify(dim: int, alpha, p) -> RegionClass:
    """Class of ``(alpha, p)`` for dimension ``dim`` (``N >= 3``, ``alpha > 0``, ``p > 2``)."""
    prm = Parameters(dim, 1, alpha, p)
    a, q = prm.alpha, prm.power
    star, ta, tas = prm.two_star, prm.two_alpha, prm.two_alpha_star
    if a == 2:
        if q == star:
            return RegionClass(Region.EXISTENCE_EXPLICIT, Source.TERRACINI)
        return RegionClass(Region.NONEXISTENCE, Source.TERRACINI, "line alpha = 2")
    if q == star:
        return RegionClass(Region.NONEXISTENCE, Source.BOUNDARY, "line p = 2*")
    if ta is not None and q == ta:
        return RegionClass(Region.NONEXISTENCE, Source.BOUNDARY, "line p = 2_alpha")
    if a < 2:
        if q > star:
            return RegionClass(Region.NONEXISTENCE, Source.COCRPAR)
        if q < ta:
            return RegionClass(Region.NONEXISTENCE, Source.BRPOW)
        if q <= tas:
            note = "line p = 2_alpha*" if q == tas else None
            return RegionClass(Region.RADIAL_NONEXISTENCE, Source.THIS_PAPER, note)
        return RegionClass(Region.EXISTENCE_RADIAL, Source.SUWANGWILL)
    if q < star:
        return RegionClass(Region.NONEXISTENCE, Source.COCRPAR)
    if ta is not None and q > ta:
        return RegionClass(Region.NONEXISTENCE, Source.BRPOW)
    if tas is None or q < tas:
        return RegionClass(Region.EXISTENCE_RADIAL, Source.SUWANGWILL)
    note = "line p = 2_alpha*" if q == tas else None
    return RegionClass(Region.OPEN, None, note)


def critical_curves(dim: int, alpha) -> dict:
    """``2*``, ``2_alpha`` and ``2_alpha*`` at ``alpha`` (``None`` where undefined)."""
    prm = Parameters(dim, 1, alpha, 3)
    return {"two_star": prm.two_star, "two_alpha": prm.two_alpha, "two_alpha_star": prm.two_alpha_star}


# ---------------------------------------------------------------------------
# grids


def parse_range(text: str) -> list:
    """``"a:b:s"`` to the exact list ``a, a+s, ...`` up to ``b``; a bare number is a single point."""
    parts = [p.strip() for p in str(text).split(":")]
    if len(parts) == 1:
        return [as_number(parts[0])]
    if len(parts) != 3:
        raise DomainError(f"range must look like a:b:s, got {text!r}")
    a, b, s = (as_number(x) for x in parts)
    if s <= 0:
        raise DomainError(f"step must be positive in {text!r}")
    if b < a:
        raise DomainError(f"empty range {text!r}")
    n = int(math.floor((b - a) / s + 1e-9)) + 1
    return [a + k * s for k in range(n)]


def cell_centres(lo, hi, n: int) -> list:
    """Centres of ``n`` equal cells of ``(lo, hi)``, exact for rational ends."""
    if n <= 0:
        raise DomainError("resolution must be positive")
    lo, hi = as_number(lo), as_number(hi)
    if not lo < hi:
        raise DomainError(f"empty interval ({lo}, {hi})")
    return [lo + (hi - lo) * Fraction(2 * k + 1, 2 * n) for k in range(n)]


@dataclass(frozen=True)
class ScanSpec:
    dim: int = 3
    alpha_range: tuple = (0, 4)
    p_range: tuple = (2, 8)
    resolution: int | tuple = 50
    with_numerics: bool = False
    cell_budget: float = CELL_BUDGET
    alpha_grid: tuple | None = None
    p_grid: tuple | None = None

    def grids(self) -> tuple[list, list]:
        if self.alpha_grid is not None and self.p_grid is not None:
            return list(self.alpha_grid), list(self.p_grid)
        res = self.resolution
        na, np_ = (res, res) if isinstance(res, int) else res
        return cell_centres(*self.alpha_range, na), cell_centres(*self.p_range, np_)

    def as_dict(self) -> dict:
        a, p = self.grids()
        return {
            "N": self.dim,
            "alpha_range": [str(x) for x in self.alpha_range],
            "p_range": [str(x) for x in self.p_range],
            "resolution": self.resolution,
            "with_numerics": self.with_numerics,
            "cell_budget": self.cell_budget,
            "n_alpha": len(a),
            "n_p": len(p),
        }


@dataclass
class RegionMap:
    dim: int
    alpha_grid: list
    p_grid: list
    cells: list
    evidence: list | None = None
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, g in (("alpha_grid", self.alpha_grid), ("p_grid", self.p_grid)):
            if not g or any(b <= a for a, b in zip(g[:-1], g[1:])):
                raise DomainError(f"{name} must be nonempty and strictly increasing")
        if len(self.cells) != len(self.alpha_grid) or any(len(row) != len(self.p_grid) for row in self.cells):
            raise DomainError("cells must have shape len(alpha_grid) x len(p_grid)")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.alpha_grid), len(self.p_grid)

    def counts(self) -> dict:
        out = {r.value: 0 for r in Region}
        for row in self.cells:
            for c in row:
                out[c.region.value] += 1
        return out

    def timed_out(self) -> int:
        if not self.evidence:
            return 0
        return sum(1 for row in self.evidence for e in row if e is not None and e.get("status") == "TimedOut")

    def rows(self):
        for i, a in enumerate(self.alpha_grid):
            for j, p in enumerate(self.p_grid):
                c = self.cells[i][j]
                row = {"alpha": float(a), "p": float(p), "class": c.region.value, "source": "" if c.source is None else c.source.value}
                if self.evidence is not None:
                    e = self.evidence[i][j]
                    row["evidence"] = "" if e is None else e.get("status", "")
                yield row


def _cell_numerics(dim: int, alpha, p, budget: float) -> dict:
    from .checks import cell_evidence

    return cell_evidence(Parameters(dim, 1, alpha, p), budget)


def scan_grid(spec: ScanSpec, workers: int = 1) -> RegionMap:
    """Classify every cell; with ``with_numerics`` attach numerical evidence per cell.

    Evidence never alters the analytic class.  With ``workers > 1`` the cells
    run in a process pool and are reassembled by index.
    """
    alphas, ps = spec.grids()
    alphas = [a for a in alphas if a > 0]
    ps = [p for p in ps if p > 2]
    if not alphas or not ps:
        raise DomainError("no admissible grid points (need alpha > 0 and p > 2)")
    cells = [[classify(spec.dim, a, p) for p in ps] for a in alphas]
    evidence = None
    if spec.with_numerics:
        jobs = [(spec.dim, a, p, spec.cell_budget) for a in alphas for p in ps]
        if workers > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(workers) as pool:
                flat = list(pool.map(_cell_numerics, *zip(*jobs)))
        else:
            flat = [_cell_numerics(*job) for job in jobs]
        evidence = [flat[i * len(ps) : (i + 1) * len(ps)] for i in range(len(alphas))]
    return RegionMap(spec.dim, alphas, ps, cells, evidence, spec.as_dict())


# ---------------------------------------------------------------------------
# rendering

FILL = {
    Region.NONEXISTENCE: "#d9d9d9",
    Region.RADIAL_NONEXISTENCE: "url(#hatch)",
    Region.EXISTENCE_RADIAL: "#595959",
    Region.EXISTENCE_EXPLICIT: "#262626",
    Region.OPEN: "#ffffff",
}


def _edges(centres: list) -> list[float]:
    c = [float(x) for x in centres]
    if len(c) == 1:
        return [c[0] - 0.5, c[0] + 0.5]
    mids = [(a + b) / 2 for a, b in zip(c[:-1], c[1:])]
    return [c[0] - (mids[0] - c[0])] + mids + [c[-1] + (c[-1] - mids[-1])]


def render_svg(region_map: RegionMap, width: int = 640, height: int = 480, margin: int = 50) -> str:
    """SVG of the map: light gray nonexistence (hatched where only radial), dark gray existence, white open."""
    ae, pe = _edges(region_map.alpha_grid), _edges(region_map.p_grid)
    a0, a1, p0, p1 = ae[0], ae[-1], pe[0], pe[-1]
    w, h = width - 2 * margin, height - 2 * margin

    def x(a):
        return margin + (a - a0) / (a1 - a0) * w

    def y(p):
        return height - margin - (p - p0) / (p1 - p0) * h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" patternTransform="rotate(45)">',
        '<rect width="6" height="6" fill="#d9d9d9"/><line x1="0" y1="0" x2="0" y2="6" stroke="#7f7f7f" stroke-width="2"/>',
        "</pattern>",
        "</defs>",
        '<g id="cells" shape-rendering="crispEdges">',
    ]
    for i in range(len(region_map.alpha_grid)):
        for j in range(len(region_map.p_grid)):
            c = region_map.cells[i][j]
            xa, xb = x(ae[i]), x(ae[i + 1])
            ya, yb = y(pe[j + 1]), y(pe[j])
            out.append(
                f'<rect x="{xa:.2f}" y="{ya:.2f}" width="{xb - xa:.2f}" height="{yb - ya:.2f}" '
                f'fill="{FILL[c.region]}" data-class="{c.region.value}"/>'
            )
    out.append("</g>")
    out.append('<g id="curves" fill="none" stroke-width="1.5">')
    samples = np.linspace(a0, a1, 400)
    for key, colour in (("two_star", "#1f77b4"), ("two_alpha", "#d62728"), ("two_alpha_star", "#2ca02c")):
        pts = []
        segments = []
        for a in samples:
            if a <= 0:
                continue
            val = critical_curves(region_map.dim, float(a))[key]
            if val is None or not p0 <= float(val) <= p1:
                if len(pts) > 1:
                    segments.append(pts)
                pts = []
                continue
            pts.append(f"{x(a):.2f},{y(float(val)):.2f}")
        if len(pts) > 1:
            segments.append(pts)
        for seg in segments:
            out.append(f'<polyline data-curve="{key}" stroke="{colour}" points="{" ".join(seg)}"/>')
    out.append("</g>")
    out.append(f'<rect x="{margin}" y="{margin}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    out.append(f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="14">alpha</text>')
    out.append(f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-size="14" transform="rotate(-90 14 {height / 2:.0f})">p</text>')
    for val, label in ((a0, f"{a0:g}"), (a1, f"{a1:g}")):
        out.append(f'<text x="{x(val):.1f}" y="{height - margin + 16}" text-anchor="middle" font-size="11">{label}</text>')
    for val, label in ((p0, f"{p0:g}"), (p1, f"{p1:g}")):
        out.append(f'<text x="{margin - 6}" y="{y(val) + 4:.1f}" text-anchor="end" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out)


def render_csv(region_map: RegionMap) -> str:
    buf = io.StringIO()
    rows = list(region_map.rows())
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def render_map(region_map: RegionMap) -> tuple[str, str]:
    """``(svg, csv)`` documents for ``region_map``."""
    return render_svg(region_map), render_csv(region_map)


def sidecar(region_map: RegionMap) -> dict:
    from . import __version__

    out = {"tool": "zeromass", "version": __version__, "spec": region_map.spec, "counts": region_map.counts(), "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if region_map.evidence is not None:
        out["evidence"] = [[e for e in row] for row in region_map.evidence]
    return out


def save_map(region_map: RegionMap, csv_path, svg_path=None) -> None:
    from pathlib import Path

    svg, table = render_map(region_map)
    Path(csv_path).write_text(table)
    Path(str(csv_path) + ".json").write_text(json.dumps(sidecar(region_map), indent=2, default=str))
    if svg_path is not None:
        Path(svg_path).write_text(svg)


class RegionClassifier(ClassifierMixin, BaseEstimator):
    """Estimator view of :func:`classify`: rows of ``X`` are ``(alpha, p)`` pairs.

    There is nothing to learn; ``fit`` only records the class labels.
    """

    def __init__(self, dim=3):
        self.dim = dim

    def fit(self, X=None, y=None):
        self.classes_ = np.array([r.value for r in Region])
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        rows = X.tolist() if isinstance(X, np.ndarray) else list(X)
        return np.array([classify(self.dim, a, p).region.value for a, p in rows])
