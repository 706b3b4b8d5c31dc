"""Acceptance suite: one test per criterion, summarized at the end of the run.

Run with ``pytest tests/test_acceptance.py -v`` (or ``python3 tests/test_acceptance.py``).
"""
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from kitaev_potts.algebra import Cyclo, SparseOperator, pauli_x, pauli_z
from kitaev_potts.analysis import (
    DefectivePadeError,
    bare_series_roots,
    dlog_pade_gap_closure,
    merge_and_locate_crossing,
    pade,
)
from kitaev_potts.ed import open_grid_graph, series_vs_ed, topological_degeneracy, verify_mapping
from kitaev_potts.gme import build_perturbed_ground_state, gme_scan, grid_search_overlap, maximize_overlap
from kitaev_potts.lattice import build_torus, stabilizers
from kitaev_potts.meanfield import general_minimize, restricted_minimize, scan_transition, symmetric_energy
from kitaev_potts.pcut import LARGE, SMALL, decompose_T, pcut_coefficients
from kitaev_potts.pcut.coefficients import expand_commutator
from kitaev_potts.pcut.evaluate import (
    calibration,
    cluster_block,
    cluster_energy_series,
    dispersion,
    gap_series,
    ground_energy_series,
    one_qp_amplitudes,
)
from kitaev_potts.series import RationalSeries, load_reference_series


def _product(ops):
    out = ops[0]
    for o in ops[1:]:
        out = out @ o
    return out


@pytest.mark.criterion("1")
def test_operator_algebra(criterion):
    t0 = time.perf_counter()
    ok = True
    for d in (2, 3, 4):
        X, Z = pauli_x(d), pauli_z(d)
        ok &= (X**d).is_identity() and (Z**d).is_identity()
        ok &= Z @ X == (X @ Z) * Cyclo.root(d, 1)
    for d in (2, 3):
        lat = build_torus(2)
        A, B = stabilizers(lat, d)
        ident = SparseOperator.identity(lat.num_edges, d)
        ok &= all(a.commutator(b).is_zero() for a in A for b in B)
        ok &= all(a.commutator(b).is_zero() for a in A for b in A)
        ok &= all(a.commutator(b).is_zero() for a in B for b in B)
        ok &= all((a**d).equals(ident) for a in A + B)
        ok &= _product(A).equals(ident) and _product(B).equals(ident)
    elapsed = time.perf_counter() - t0
    criterion(ok and elapsed < 10, "exact identities for d = 2, 3, 4 and the L=2 torus")
    assert ok and elapsed < 10


@pytest.mark.criterion("2")
def test_mapping(criterion):
    t0 = time.perf_counter()
    reps = [verify_mapping(J, K, lam, tol=1e-9) for J, K, lam in ((1, 1, 0), (1, 1, 0.3), (1, 1, 1), (1, 5, 0.3))]
    elapsed = time.perf_counter() - t0
    worst = max(abs(r.difference) for r in reps)
    ok = all(r.passed for r in reps) and elapsed < 300
    criterion(ok, f"max |E_full - E_A - E_B + 2KN| = {worst:.1e}")
    assert ok


@pytest.mark.criterion("3")
def test_topological_degeneracy(criterion):
    t0 = time.perf_counter()
    d3, d2 = topological_degeneracy(d=3, tol=1e-9), topological_degeneracy(d=2, tol=1e-9)
    elapsed = time.perf_counter() - t0
    ok = d3 == 9 and d2 == 4 and elapsed < 60
    criterion(ok, f"d=3: {d3}, d=2: {d2}")
    assert ok


PRINTED_HEFF3 = {
    1: [(F(-1), 0)],
    2: [(F(1), (1, -1)), (F(1, 2), (2, -2))],
    3: [
        (F(-1, 8), (2, (0, -2))),
        (F(-1, 8), ((2, 0), -2)),
        (F(-1, 2), (1, (1, -2))),
        (F(-1, 2), ((2, -1), -1)),
        (F(-1, 2), (1, (0, -1))),
        (F(-1, 2), ((1, 0), -1)),
    ],
}


@pytest.mark.criterion("4")
def test_heff_order3(criterion):
    table = pcut_coefficients(3)
    ok = True
    for k, terms in PRINTED_HEFF3.items():
        expected = {}
        for c, expr in terms:
            for seq, w in expand_commutator(expr).items():
                expected[seq] = expected.get(seq, 0) + c * w
        expected = {s: v for s, v in expected.items() if v}
        ok &= expected == table.signed(k, -1)
    criterion(ok, "coefficients {1, 1/2, -1/8, -1/2, -1/2} as exact rationals")
    assert ok


@pytest.mark.criterion("5")
def test_small_energy_order5(criterion):
    t0 = time.perf_counter()
    s = ground_energy_series(SMALL, 5)
    elapsed = time.perf_counter() - t0
    expected = [F(-2, 3), 0, -2, -1, F(-17, 2), F(-847, 36)]
    ok = list(s.coeffs) == expected and elapsed <= 900
    criterion(ok, f"{[str(c) for c in s.coeffs]}")
    assert ok


@pytest.mark.criterion("6")
def test_gap_and_dispersion(criterion):
    amps = one_qp_amplitudes(3)
    gap = gap_series(3, amps)
    ok_gap = list(gap.coeffs) == [1, -4, -10, -5]
    ks = 2 * np.pi * np.arange(32) / 32 - np.pi
    ok_min = True
    for x in np.linspace(0.005, 0.05, 10):
        p = x ** np.arange(4)
        vals = {(kx, ky): float(dispersion((kx, ky), amps) @ p) for kx in ks for ky in ks}
        ok_min &= np.allclose(min(vals, key=vals.get), (0.0, 0.0))
    criterion(ok_gap and ok_min, f"gap {[str(c) for c in gap.coeffs]}, minimum at k=0: {ok_min}")
    assert ok_gap and ok_min


@pytest.mark.criterion("7")
def test_large_energy(criterion):
    s = ground_energy_series(LARGE, 4)
    got = [s[2], s[3], s[4]]
    ok = got == [F(-1, 2), F(-1, 8), F(-19, 672)]
    criterion(ok, f"h^2..h^4 = {[str(c) for c in got]}")
    assert ok


@pytest.mark.criterion("8a")
def test_gap_closure_dlog(criterion):
    rep = dlog_pade_gap_closure(load_reference_series("small_gap"))
    ok = 0.114 <= rep.value <= 0.144
    criterion(ok, f"DlogPade x_c = {rep.value:.4f}, spread [{rep.metadata['spread'][0]:.4f}, {rep.metadata['spread'][1]:.4f}]")
    assert ok


@pytest.mark.criterion("8b")
@pytest.mark.xfail(
    strict=True,
    reason="bare roots of the printed gap alternate between even and odd truncations "
    "(0.1498, 0.1559, 0.1418, 0.1509, 0.1373); each parity decreases, the sequence does not",
)
def test_gap_closure_bare_monotone(criterion):
    roots = bare_series_roots(load_reference_series("small_gap"), orders=range(4, 9), window=(0.0, 0.5))
    vals = [roots[k] for k in range(4, 9)]
    ok = all(v is not None for v in vals) and all(b < a for a, b in zip(vals, vals[1:]))
    criterion(ok, f"bare roots orders 4..8: {[round(float(v), 4) for v in vals]}")
    assert ok


@pytest.mark.criterion("9")
def test_mean_field(criterion):
    rep, xs, e, _ = scan_transition(np.linspace(0.0, 0.3, 121), restarts=32)
    ok_kink = abs(rep.value - 0.115) <= 0.005
    ok_sym = symmetric_energy(1, F(3, 10)) == F(-2) - F(4, 3) * F(3, 10) and symmetric_energy(F(2), F(1)) == F(-16, 3)
    ok_order = True
    for x in np.linspace(0.0, 0.3, 50):
        lam = 4.5 * x
        g = general_minimize(1.0, lam, restarts=8, seed=2).energy
        r = restricted_minimize(1.0, lam)[0].energy
        ok_order &= g <= r + 1e-9 and r <= float(symmetric_energy(1.0, lam)) + 1e-12
    ok = ok_kink and ok_sym and ok_order
    criterion(ok, f"kink x_c = {rep.value:.4f}, symmetric identity {ok_sym}, ordering {ok_order}")
    assert ok


@pytest.mark.criterion("10")
def test_energy_merge(criterion):
    sc = load_reference_series("small_energy")
    lc = load_reference_series("large_energy")
    lc = RationalSeries("h", [0] + list(lc.coeffs[1:]))
    rep = merge_and_locate_crossing(sc, lc, calibration(SMALL), calibration(LARGE))
    j1 = rep.metadata["first_derivative"]["jump"]
    j2 = rep.metadata["second_derivative"]["jump"]
    ok = 0.45 <= rep.value <= 0.60 and abs(j1) > 1e-6 and abs(j2) > 1e-6
    criterion(ok, f"theta_c = {rep.value:.4f}, dE jump {j1:.3f}, d2E jump {j2:.3f}")
    assert ok


@pytest.mark.criterion("11")
def test_gme(criterion):
    _, g0 = maximize_overlap(build_perturbed_ground_state(0.0, 25), restarts=4)
    sc = gme_scan(np.linspace(0.0, 0.3, 61), n=25)
    ok_conv = sc.convexity_change is not None and 0.13 <= sc.convexity_change <= 0.19
    ok_jump = sc.jump_location is not None and 0.13 <= sc.jump_location <= 0.19
    s4 = build_perturbed_ground_state(0.05, 4)
    _, g_opt = maximize_overlap(s4, restarts=16)
    _, g_grid = grid_search_overlap(s4, resolution=1e-3)
    ok_grid = abs(g_opt - g_grid) < 1e-6
    ok = g0 == 0 and ok_conv and ok_jump and ok_grid
    criterion(ok, f"GME(0)={g0}, convexity change {sc.convexity_change}, jump {sc.jump_location}, |opt-grid|={abs(g_opt - g_grid):.1e}")
    assert ok


@pytest.mark.criterion("12")
def test_series_vs_ed(criterion):
    g = open_grid_graph(2, 3)
    s = cluster_energy_series(SMALL, g.num_sites, list(g.bonds), 4)
    rep = series_vs_ed(g, s)
    ok = rep.slope >= 4.7
    criterion(ok, f"slope {rep.slope:.3f}")
    assert ok


@pytest.mark.criterion("13")
def test_property_suites(criterion):
    checks = {}
    ok_q = ok_dag = True
    for regime in (SMALL, LARGE):
        T, Q, V = decompose_T(regime).sparse_templates()
        for n, t in T.items():
            ok_q &= (Q.commutator(t) - t * n).is_zero()
            ok_dag &= (t.dagger() - T[-n]).is_zero()
    checks["[Q,T_n]=nT_n"] = ok_q
    checks["T_n^dag=T_-n"] = ok_dag

    spec = decompose_T(SMALL)
    cfgs = [tuple(c) for c in np.ndindex(3, 3, 3)]
    bonds = [(0, 1), (1, 2)]
    q = spec.q_values(np.array(cfgs), bonds)
    blocks = cluster_block(spec, 3, bonds, cfgs, cfgs, 4)
    ok_conserve = ok_herm = True
    for mat in blocks.values():
        for a in range(len(cfgs)):
            for b in range(len(cfgs)):
                ok_conserve &= q[a] == q[b] or mat[a][b] == 0
                ok_herm &= mat[a][b] == mat[b][a]
    checks["[H_eff,Q]=0"] = ok_conserve
    checks["hermiticity"] = ok_herm

    one = cluster_energy_series(SMALL, 2, [(0, 1)], 5)
    two = cluster_energy_series(SMALL, 4, [(0, 1), (2, 3)], 5)
    checks["linked-cluster additivity"] = two == one * 2

    rng = np.random.default_rng(11)
    ok_pade = True
    for _ in range(50):
        c = rng.standard_normal(8)
        for L, M in ((2, 2), (3, 2), (2, 4)):
            try:
                p = pade(c, L, M)
            except DefectivePadeError:
                continue
            ok_pade &= np.allclose(p.taylor(L + M), c[: L + M + 1], atol=1e-8)
    checks["Pade re-expansion"] = ok_pade

    xs = np.geomspace(1e-3, 1e-2, 8)
    errs = [abs(build_perturbed_ground_state(x, 25).norm_squared() - 1) for x in xs]
    slope = np.polyfit(np.log(xs), np.log(errs), 1)[0]
    checks["normalization scaling"] = slope >= 3
    failed = [k for k, v in checks.items() if not v]
    criterion(not failed, f"{len(checks) - len(failed)}/{len(checks)} property checks" + (f", failed: {failed}" if failed else ""))
    assert not failed


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
