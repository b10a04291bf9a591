import csv
import io
import json
import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zeromass._validation import DomainError
from _oracles import oracle
from zeromass.regions import (
    Region,
    RegionClassifier,
    RegionMap,
    ScanSpec,
    Source,
    cell_centres,
    classify,
    critical_curves,
    parse_range,
    render_csv,
    render_svg,
    save_map,
    scan_grid,
)

SPEC_EXAMPLES = [
    ((3, 2, 6), Region.EXISTENCE_EXPLICIT),
    ((3, 1, Fraction(16, 5)), Region.RADIAL_NONEXISTENCE),
    ((3, 1, 4), Region.EXISTENCE_RADIAL),
    ((3, 1, 7), Region.NONEXISTENCE),
    ((3, 1, 3), Region.NONEXISTENCE),
    ((3, Fraction(5, 2), 10), Region.OPEN),
]


@pytest.mark.parametrize("args,expected", SPEC_EXAMPLES, ids=str)
def test_spec_examples(args, expected):
    assert classify(*args).region is expected


def test_sources():
    assert classify(3, 2, 6).source is Source.TERRACINI
    assert classify(3, 1, Fraction(16, 5)).source is Source.THIS_PAPER
    assert classify(3, 1, 3).source is Source.BOUNDARY
    assert classify(3, Fraction(5, 2), 10).source is None
    assert classify(3, 1, Fraction(10, 3)).region is Region.RADIAL_NONEXISTENCE


def test_default_scan_matches_oracle():
    m = scan_grid(ScanSpec())
    assert m.shape == (50, 50)
    for i, a in enumerate(m.alpha_grid):
        for j, p in enumerate(m.p_grid):
            assert m.cells[i][j].label == oracle(3, a, p), (a, p)
    counts = m.counts()
    assert sum(counts.values()) == 2500
    assert counts == {"Nonexistence": 1547, "RadialNonexistence": 54, "ExistenceRadial": 884, "ExistenceExplicit": 0, "Open": 15}


@given(st.integers(3, 9), st.fractions(Fraction(1, 100), Fraction(20), max_denominator=200), st.fractions(Fraction(201, 100), Fraction(40), max_denominator=200))
def test_classify_matches_oracle(n, a, p):
    assert classify(n, a, p).label == oracle(n, a, p)


@given(st.integers(3, 9), st.fractions(Fraction(1, 50), Fraction(20), max_denominator=50))
def test_lines_are_exact(n, a):
    curves = critical_curves(n, a)
    for key in ("two_star", "two_alpha", "two_alpha_star"):
        p = curves[key]
        if p is not None and p > 2:
            assert classify(n, a, p).label == oracle(n, a, p)


@given(st.integers(3, 9), st.fractions(Fraction(1, 1000), Fraction(1999, 1000)))
def test_curve_ordering_small_alpha(n, a):
    c = critical_curves(n, a)
    assert 2 < c["two_alpha"] < c["two_alpha_star"] < c["two_star"]


@given(st.integers(3, 9), st.fractions(Fraction(1, 1000), Fraction(999, 1000)))
def test_curve_ordering_large_alpha(n, frac):
    a = 2 + frac * (2 * n - 4)
    c = critical_curves(n, a)
    assert c["two_star"] < c["two_alpha_star"]


@pytest.mark.parametrize("n", range(3, 12))
def test_alpha_two_degeneracy(n):
    c = critical_curves(n, 2)
    assert c["two_alpha"] == c["two_alpha_star"] == c["two_star"] == Fraction(2 * n, n - 2)


@given(st.integers(3, 6), st.floats(0.01, 6), st.floats(2.01, 12))
def test_deterministic(n, a, p):
    assert classify(n, a, p) == classify(n, a, p)


def test_parse_range_exact():
    assert parse_range("0.1:0.3:0.1") == [Fraction(1, 10), Fraction(2, 10), Fraction(3, 10)]
    assert parse_range("16/5") == [Fraction(16, 5)]
    for bad in ("1:2", "1:0:0.1", "0:1:0", "x:1:1"):
        with pytest.raises(DomainError):
            parse_range(bad)


def test_cell_centres():
    assert cell_centres(0, 4, 2) == [1, 3]
    with pytest.raises(DomainError):
        cell_centres(0, 4, 0)


def test_single_cell_map():
    m = scan_grid(ScanSpec(alpha_grid=(1,), p_grid=(4,)))
    assert m.shape == (1, 1) and m.cells[0][0].region is Region.EXISTENCE_RADIAL
    svg = render_svg(m)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    rows = list(csv.DictReader(io.StringIO(render_csv(m))))
    assert rows == [{"alpha": "1.0", "p": "4.0", "class": "ExistenceRadial", "source": "SuWangWill"}]


def test_resolution_zero_is_error():
    with pytest.raises(DomainError):
        scan_grid(ScanSpec(resolution=0))


def test_region_map_validation():
    with pytest.raises(DomainError):
        RegionMap(3, [1, 1], [4], [[None], [None]])


def test_svg_shading_and_curves():
    m = scan_grid(ScanSpec(resolution=10))
    svg = render_svg(m)
    ET.fromstring(svg)
    assert 'id="hatch"' in svg and "#d9d9d9" in svg and "#595959" in svg
    assert svg.count("<polyline") >= 3


def test_save_map(tmp_path):
    m = scan_grid(ScanSpec(resolution=4))
    out = tmp_path / "m.csv"
    save_map(m, out, tmp_path / "m.svg")
    side = json.loads((tmp_path / "m.csv.json").read_text())
    assert side["counts"] == m.counts() and "version" in side and side["spec"]["n_alpha"] == 4
    assert len(out.read_text().strip().splitlines()) == 17
    assert (tmp_path / "m.svg").exists()


def test_numerics_are_evidence_only():
    spec = ScanSpec(alpha_grid=(1,), p_grid=(Fraction(16, 5), 4), with_numerics=True, cell_budget=60)
    m = scan_grid(spec)
    plain = scan_grid(ScanSpec(alpha_grid=(1,), p_grid=(Fraction(16, 5), 4)))
    assert [c.region for c in m.cells[0]] == [c.region for c in plain.cells[0]]
    assert m.evidence[0][0]["status"] == "NoCandidate"
    assert m.evidence[0][1]["status"] == "CandidatePasses"
    assert m.timed_out() == 0


def test_tiny_budget_times_out():
    m = scan_grid(ScanSpec(alpha_grid=(1,), p_grid=(4,), with_numerics=True, cell_budget=1e-6))
    assert m.timed_out() == 1


@pytest.mark.slow
def test_numerics_on_existence_subgrid():
    """5x5 interior grid of 2_alpha* < p < 2*: at least 80% of cells give a passing candidate."""
    alphas = [Fraction(k, 10) for k in (4, 6, 8, 10, 12)]
    grid_p = []
    ok = total = 0
    for a in alphas:
        c = critical_curves(3, a)
        lo, hi = c["two_alpha_star"], c["two_star"]
        ps = tuple(lo + (hi - lo) * Fraction(k, 6) for k in range(1, 6))
        m = scan_grid(ScanSpec(alpha_grid=(a,), p_grid=ps, with_numerics=True))
        for e in m.evidence[0]:
            total += 1
            ok += e["status"] == "CandidatePasses"
            grid_p.append((float(a), e["status"]))
    assert total == 25 and ok >= 20, grid_p


def test_estimator():
    clf = RegionClassifier().fit()
    X = np.array([[1, 4], [1, 3.2], [2, 6]])
    assert list(clf.predict(X)) == ["ExistenceRadial", "RadialNonexistence", "ExistenceExplicit"]
    assert "Open" in clf.classes_
