import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rdeq import closed_form as cf
from rdeq.model import DomainError

# frozen high-precision evaluations
H_025 = 0.81127812445913286
H_04 = 0.97095059445466864
HY_025 = 1.5612781244591329
HY_04 = 1.5709505944546686
L3_RATE = 0.53100440641071878          # 1 - h(0.1)
L4_RATE = 0.54770850725747087          # 0.25(1 - h(0.08)) + 0.75(1 - h(0.1))
G3_RATE = 0.075488750216346854         # 0.4(1 - h(0.25))
FRONT_A0 = (1 / 3, 0.44902249956730629, 1.5219280948873623)
FRONT_A02 = (0.2, 0.27807190511263765, 1.404107451387086)

ps = st.floats(0.01, 0.99)


@pytest.mark.parametrize("d1,d2,p,label", [
    (0.6, 0.2, 0.25, "L1"),
    (0.6, 0.05, 0.25, "L2"),
    (0.1, 0.05, 0.25, "L3"),
    (0.1, 0.02, 0.25, "L4"),
])
def test_classify_uninformed(d1, d2, p, label):
    assert cf.classify_uninformed(d1, d2, p) == label


@pytest.mark.parametrize("args", [(-0.1, 0.1, 0.25), (0.1, -0.1, 0.25), (0.1, 0.1, 0.0), (0.1, 0.1, 1.0)])
def test_domain_errors(args):
    with pytest.raises(DomainError):
        cf.classify_uninformed(*args)
    with pytest.raises(DomainError):
        cf.classify_informed(*args)


def test_rate_uninformed_examples():
    assert cf.rate_uninformed(0.6, 0.2, 0.25) == 0.0
    assert cf.rate_uninformed(0.1, 0.05, 0.25) == pytest.approx(L3_RATE, abs=1e-12)
    assert cf.rate_uninformed(0.1, 0.02, 0.25) == pytest.approx(L4_RATE, abs=1e-12)


def test_rate_clamping_flag():
    region, rate, clamped = cf.rate_uninformed_detail(0.1, 0.5, 0.25)
    assert (region, clamped) == ("L3", True)
    assert rate == pytest.approx(L3_RATE, abs=1e-12)
    assert not cf.rate_uninformed_detail(0.1, 0.02, 0.25)[2]


def test_equivocation_uninformed_examples():
    assert cf.equivocation_uninformed(0.0, 0.25) == pytest.approx(H_025, abs=1e-12)
    assert cf.equivocation_uninformed(0.5, 0.25) == pytest.approx(HY_025, abs=1e-12)
    assert cf.equivocation_uninformed(0.9, 0.25) == cf.equivocation_uninformed(0.5, 0.25)
    with pytest.raises(DomainError):
        cf.equivocation_uninformed(-1.0, 0.25)


@pytest.mark.parametrize("d1,d2,labels", [
    (0.6, 0.3, ("G1",)),
    (0.2, 0.3, ("G4",)),
    (0.5, 0.1, ("G2", "G3")),
    (0.2, 0.1, ("G5",)),
])
def test_classify_informed(d1, d2, labels):
    assert cf.classify_informed(d1, d2, 0.4) == labels


def test_informed_closed_examples():
    pt = cf.rate_equivocation_informed_closed(0.6, 0.3, 0.4)
    assert pt.rate == 0.0 and pt.equivocation == pytest.approx(HY_04, abs=1e-12)
    pt = cf.rate_equivocation_informed_closed(0.45, 0.1, 0.4)
    assert pt.rate == pytest.approx(G3_RATE, abs=1e-12)
    assert pt.equivocation == pytest.approx(HY_04, abs=1e-12)
    pt = cf.rate_equivocation_informed_closed(0.5, 0.2, 0.4)
    assert pt.rate == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(cf.RegimeError):
        cf.rate_equivocation_informed_closed(0.2, 0.3, 0.4)


def test_perfect_privacy():
    assert cf.perfect_privacy_achievable(0.45, 0.1, 0.4)
    assert not cf.perfect_privacy_achievable(0.2, 0.3, 0.4)
    assert cf.perfect_privacy_achievable(0.6, 0.3, 0.4)


def test_frontier_anchor_points():
    sweep = cf.frontier_informed(0.2, 0.3, 0.4, [0.0, 0.2, 0.5])
    assert (sweep.regime, sweep.optimality) == ("G4", "tight")
    a0, a2, a5 = sweep.points
    assert (a0.beta, a0.rate, a0.equivocation) == pytest.approx(FRONT_A0, abs=1e-12)
    assert (a2.beta, a2.rate, a2.equivocation) == pytest.approx(FRONT_A02, abs=1e-12)
    assert a5.beta == 0.0
    assert a5.rate == pytest.approx(0.6, abs=1e-12)
    assert a5.equivocation == pytest.approx(H_04, abs=1e-12)


def test_frontier_rejects_out_of_range_alpha():
    sweep = cf.frontier_informed(0.2, 0.3, 0.4, [0.1, 0.6, -0.1])
    assert [fp.alpha for fp in sweep.points] == [0.1]
    assert [a for a, _ in sweep.rejected] == [0.6, -0.1]


def test_frontier_regimes():
    assert cf.frontier_informed(0.2, 0.1, 0.4).optimality == "achievable-only"
    assert cf.frontier_informed(0.2, 0.1, 0.4).alpha_max == pytest.approx(0.25)
    with pytest.raises(cf.RegimeError):
        cf.frontier_informed(0.6, 0.3, 0.4)


def test_default_alpha_grid():
    g = cf.default_alpha_grid(0.5)
    assert len(g) == 513
    assert g[0] == 0.0 and g[256] == 0.25 and g[-1] == 0.5


def test_curve_sweep_examples():
    p = 0.25
    grid = [i / 100 for i in range(51)]
    rows = cf.curve_sweep("uninformed", p, "d2", p / 2, grid)
    assert [r.d1 for r in rows] == grid
    for r in rows:
        assert r.region in ("L3", "L1")
        if r.d1 < 0.5:
            assert r.rate == pytest.approx(1 - cf.h(r.d1), abs=1e-12)
    assert cf.curve_sweep("uninformed", p, "d2", p / 8, [0.25])[0].region == "L4"
    rows = cf.curve_sweep("informed", 0.4, "d1", 0.2, [0.3], [0.0, 0.2, 0.5])
    assert [r.alpha for r in rows] == [0.0, 0.2, 0.5]
    assert rows[1].rate == pytest.approx(FRONT_A02[1], abs=1e-12)


def test_curve_sweep_flags_inadmissible():
    rows = cf.curve_sweep("uninformed", 0.25, "d2", 0.1, [0.1, -0.2])
    assert rows[0].admissible and not rows[1].admissible
    assert math.isnan(rows[1].rate)
    with pytest.raises(ValueError):
        cf.curve_sweep("other", 0.25, "d2", 0.1, [0.1])


# -- properties ---------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), ps)
def test_equivocation_ceiling(d1, d2, p):
    ceiling = cf.side_info_entropy(p) + 1e-12
    assert cf.equivocation_uninformed(d1, p) <= ceiling
    for row in cf.curve_sweep("informed", p, "d2", d2, [d1], cf.default_alpha_grid(1.0, 9)):
        if row.admissible:
            assert row.equivocation <= ceiling


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 0.5), st.floats(0, 0.5), ps)
def test_gamma_monotone_and_concave(a, b, p):
    lo, hi = min(a, b), max(a, b)
    f = lambda d: cf.equivocation_uninformed(d, p)
    assert f(lo) <= f(hi) + 1e-12
    assert f(0.5 * (lo + hi)) >= 0.5 * (f(lo) + f(hi)) - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), ps)
def test_gamma_independent_of_d2(d1, d2a, d2b, p):
    rows = cf.curve_sweep("uninformed", p, "d1", d1, [d2a, d2b])
    assert rows[0].equivocation == rows[1].equivocation


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), ps)
def test_rate_continuous_across_boundaries(t, p):
    eps = 1e-11
    # d1 = 1/2 line
    d2 = t * p
    assert cf.rate_uninformed(0.5 - eps, d2, p) == pytest.approx(cf.rate_uninformed(0.5 + eps, d2, p), abs=1e-9)
    # d2 = p/2 line
    d1 = 0.5 + t
    assert cf.rate_uninformed(d1, p / 2 - eps, p) == pytest.approx(cf.rate_uninformed(d1, p / 2 + eps, p), abs=1e-9)
    # d2 = p d1 line
    d1 = 0.5 * t
    assert cf.rate_uninformed(d1, max(p * d1 - eps, 0.0), p) == pytest.approx(
        cf.rate_uninformed(d1, p * d1 + eps, p), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.001, 0.499), st.floats(0, 1), ps)
def test_informed_dominance(d1, t, p):
    d2 = d1 + t * (1 - d1)
    pt = cf.frontier_value(d1, p, d1)
    assert pt.rate == pytest.approx(1 - cf.h(d1), abs=1e-12)
    assert pt.equivocation == pytest.approx(cf.equivocation_uninformed(d1, p), abs=1e-12)
    # smallest alpha keeping beta <= 1/2, then halfway towards d1
    a_lo = max(0.0, (d1 - (1 - p) / 2) / p)
    sweep = cf.frontier_informed(d1, d2, p, [0.5 * (a_lo + d1)])
    best = max(fp.equivocation for fp in sweep.points)
    assert best > pt.equivocation


@settings(max_examples=200, deadline=None)
@given(ps, st.floats(0, 1), st.floats(0, 1))
def test_informed_perfect_privacy_region_is_larger(p, s, t):
    d2 = s * p / 2
    d1 = d2 + (1 - p) / 2 + t * (0.5 - d2 - (1 - p) / 2)
    assume(d1 < 0.5 - 1e-4)
    assert "G3" in cf.classify_informed(d1, d2, p)
    assert cf.perfect_privacy_achievable(d1, d2, p)
    assert cf.equivocation_uninformed(d1, p) < cf.side_info_entropy(p)


@settings(max_examples=300, deadline=None)
@given(ps, st.floats(0, 0.5), st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 1))
def test_rate_midpoint_convex_inside_l4(p, a1, s1, b1, s2):
    pts = [(a1, s1 * p * a1), (b1, s2 * p * b1)]
    mid = tuple(0.5 * (u + v) for u, v in zip(*pts))
    for d1, d2 in pts + [mid]:
        assume(cf.classify_uninformed(d1, d2, p) == "L4")
    f = lambda d: cf.rate_uninformed(d[0], d[1], p)
    assert f(mid) <= 0.5 * (f(pts[0]) + f(pts[1])) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), ps)
def test_informed_labels_cover_plane(d1, d2, p):
    labels = cf.classify_informed(d1, d2, p)
    assert labels, (d1, d2, p)
