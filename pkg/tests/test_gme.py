import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitaev_potts.ed import open_grid_graph
from kitaev_potts.gme import (
    _overlap_from_bra,
    ProductAnsatz,
    brute_force_overlap,
    build_perturbed_ground_state,
    ed_state_gme,
    gme_scan,
    gme_value,
    grid_search_overlap,
    maximize_overlap,
    overlap,
    recount_classes,
)

angles = st.tuples(
    st.floats(0, math.pi / 2), st.floats(0, math.pi / 2), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi)
)


def test_counts_at_25():
    c = build_perturbed_ground_state(0.1, 25).counts()
    assert c["nn_pair"] == 100 and c["nnn_diagonal"] == 200 and c["line_111"] == 50
    assert c["double_pair"] == 8600


def test_norm_series():
    s = build_perturbed_ground_state(0.1, 25)
    series = s.norm_squared_series()
    assert series[:4] == [1, 0, 0, 25]
    # the x^3 term is the cross term of x/2 and x^2/4 on the 4n pair class
    assert series[3] == 4 * 25 * 2 * Fraction(1, 2) * Fraction(1, 4)
    rest = sum(float(c) * 0.1**k for k, c in enumerate(series) if k >= 4)
    assert s.norm_squared() == pytest.approx(1 + 25e-3 + rest, abs=1e-14)


def test_normalization_scaling_slope():
    xs = np.geomspace(1e-3, 1e-2, 8)
    errs = [abs(build_perturbed_ground_state(x, 25).norm_squared() - 1) for x in xs]
    slope = np.polyfit(np.log(xs), np.log(errs), 1)[0]
    assert slope >= 3


def test_preconditions():
    with pytest.raises(ValueError):
        build_perturbed_ground_state(0.1, 3)
    with pytest.raises(ValueError):
        build_perturbed_ground_state(-0.1, 10)
    with pytest.raises(ValueError):
        maximize_overlap(build_perturbed_ground_state(0.1, 10), restarts=0)


def test_vacuum_ansatz_sees_only_vacuum():
    s = build_perturbed_ground_state(0.07, 12)
    ov = overlap(s, ProductAnsatz(0.0, 0.3, 1.0, 2.0))
    vac = 1 - 12 * 0.07**2 / 2
    assert ov == pytest.approx(vac / math.sqrt(s.norm_squared()), abs=1e-15)


def test_gme_zero_at_origin():
    _, g = maximize_overlap(build_perturbed_ground_state(0.0, 25), restarts=2)
    assert g == 0


@settings(max_examples=15, deadline=None)
@given(angles)
def test_closed_form_matches_brute_force(p):
    s = build_perturbed_ground_state(0.05, 10)
    a = ProductAnsatz(*p)
    assert abs(overlap(s, a) - brute_force_overlap(s, a)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(angles, st.floats(0, 2 * math.pi))
def test_global_phase_invariance(p, phase):
    s = build_perturbed_ground_state(0.12, 25)
    bra = np.conj(ProductAnsatz(*p).components())
    a = _overlap_from_bra(s, bra)
    b = _overlap_from_bra(s, bra * np.exp(-1j * phase))
    assert abs(b) ** 2 == pytest.approx(abs(a) ** 2, rel=1e-12, abs=1e-300)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 0.3), angles)
def test_gme_nonnegative(x, p):
    s = build_perturbed_ground_state(x, 25)
    assert gme_value(s, ProductAnsatz(*p)) >= -1e-12


@pytest.mark.parametrize("x", [0.05, 0.3])
def test_optimizer_matches_grid_oracle(x):
    s = build_perturbed_ground_state(x, 4)
    _, g = maximize_overlap(s, restarts=16)
    _, h = grid_search_overlap(s, resolution=1e-3)
    assert abs(g - h) < 1e-6


def test_small_x_maximizer_is_vacuum_aligned():
    a, _ = maximize_overlap(build_perturbed_ground_state(1e-3, 25), restarts=4)
    assert abs(math.sin(a.theta)) < 1e-4


def test_recount_reports_diagonal_discrepancy():
    rep = recount_classes(6)
    assert rep["nn_pair"] == (144, 144)
    assert rep["double_pair"][0] == rep["double_pair"][1]
    # distinct diagonal placements are 4n; the printed class size is 8n
    assert rep["nnn_diagonal"] == (144, 288)


def test_scan_monotone_and_transition():
    sc = gme_scan(np.linspace(0, 0.3, 31), n=25, restarts=4)
    assert sc.gme[0] == 0
    early = sc.gme[sc.xs <= 0.1]
    assert np.all(np.diff(early) > 0)
    assert 0.13 <= sc.convexity_change <= 0.19
    assert 0.13 <= sc.jump_location <= 0.19


def test_ed_cross_check_is_qualitatively_similar():
    g = open_grid_graph(2, 3)
    vals = [ed_state_gme(g, x, restarts=3)[1] for x in (0.0, 0.05, 0.1)]
    assert vals[0] == pytest.approx(0.0, abs=1e-9)
    assert vals[0] < vals[1] < vals[2]
    ours = [maximize_overlap(build_perturbed_ground_state(x, 6), 3)[1] for x in (0.05, 0.1)]
    for a, b in zip(vals[1:], ours):
        assert 0.3 < a / b < 3
