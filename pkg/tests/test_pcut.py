from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from kitaev_potts.pcut import LARGE, SMALL, decompose_T, pcut_coefficients
from kitaev_potts.pcut.coefficients import OrderCapError, expand_commutator
from kitaev_potts.pcut.evaluate import (
    DEFAULT_ORDER_CAP,
    RegimeMismatchError,
    calibration,
    cluster_block,
    cluster_energy_series,
    dispersion,
    gap_series,
    ground_energy_series,
    one_qp_amplitudes,
)
from kitaev_potts.series import RationalSeries

# printed order-3 effective Hamiltonian, H = Q - x sum T_n:
# Q - x T0 + x^2 [T1,T-1] + x^2/2 [T2,T-2] - x^3/8 (...) - x^3/2 (...) - x^3/2 (...)
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


def _expand(terms):
    out = {}
    for c, expr in terms:
        for seq, w in expand_commutator(expr).items():
            out[seq] = out.get(seq, 0) + c * w
    return {k: v for k, v in out.items() if v}


def test_low_order_weights():
    t = pcut_coefficients(3)
    assert t[(1, -1)] == 1 and t[(-1, 1)] == -1
    assert t[(2, -2)] == F(1, 2)
    assert t[(0,)] == 1
    assert t[(0, 2, -2)] == F(-1, 8)
    assert t[(-1, 0, 1)] == 1
    assert t[(0, -1, 1)] == F(-1, 2)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_matches_printed_heff3(k):
    assert _expand(PRINTED_HEFF3[k]) == pcut_coefficients(3).signed(k, -1)


def test_weights_are_zero_total_and_antisymmetric():
    t = pcut_coefficients(4)
    for m, c in t.sequences():
        assert sum(m) == 0
        # hermiticity of H_eff: C(reverse(-m)) = C(m)
        assert t[tuple(-n for n in reversed(m))] == c


def test_order_cap():
    with pytest.raises(OrderCapError):
        pcut_coefficients(9)
    with pytest.raises(OrderCapError):
        ground_energy_series(SMALL, DEFAULT_ORDER_CAP + 1)


@pytest.mark.parametrize("regime", [SMALL, LARGE])
def test_t_operator_algebra(regime):
    spec = decompose_T(regime)
    T, Q, V = spec.sparse_templates()
    total = None
    for n, t in T.items():
        assert (Q.commutator(t) - t * n).is_zero()
        assert (t.dagger() - T[-n]).is_zero()
        total = t if total is None else total + t
    assert (total - V).is_zero()


def _all_configs(n):
    return [tuple(c) for c in product(range(3), repeat=n)]


@pytest.mark.parametrize("regime", [SMALL, LARGE])
def test_heff_conserves_q_and_is_hermitian(regime):
    spec = decompose_T(regime)
    bonds = [(0, 1), (1, 2)]
    cfgs = _all_configs(3)
    env = None
    if regime == LARGE:
        env = [3, 2, 3]
    q = spec.q_values(np.array(cfgs), bonds, env)
    blocks = cluster_block(spec, 3, bonds, cfgs, cfgs, 3, env_degree=env)
    for k, mat in blocks.items():
        for a in range(len(cfgs)):
            for b in range(len(cfgs)):
                if q[a] != q[b]:
                    assert mat[a][b] == 0
                assert mat[a][b] == mat[b][a]


def test_small_energy_through_order4():
    s = ground_energy_series(SMALL, 4, threads=1)
    assert list(s.coeffs) == [F(-2, 3), 0, -2, -1, F(-17, 2)]


def test_large_energy_through_order4():
    s = ground_energy_series(LARGE, 4, threads=1)
    assert list(s.coeffs[2:]) == [F(-1, 2), F(-1, 8), F(-19, 672)]
    assert s[1] == 0


def test_gap_through_order3_and_flavours():
    a1 = one_qp_amplitudes(3, threads=1)
    a2 = one_qp_amplitudes(3, threads=1, flavor=2)
    assert a1 == a2
    assert list(gap_series(3, a1).coeffs) == [1, -4, -10, -5]
    # hopping respects the square-lattice point group
    assert a1[(1, 0)] == a1[(0, 1)] == a1[(-1, 0)]


def test_dispersion_minimum_at_gamma():
    amps = one_qp_amplitudes(3, threads=1)
    ks = 2 * np.pi * np.arange(32) / 32 - np.pi
    for x in (0.01, 0.03, 0.05):
        p = x ** np.arange(4)
        vals = {(kx, ky): dispersion((kx, ky), amps) @ p for kx in ks for ky in ks}
        kmin = min(vals, key=vals.get)
        assert np.allclose(kmin, (0.0, 0.0))


def test_large_regime_has_no_qp_amplitudes():
    with pytest.raises(RegimeMismatchError):
        one_qp_amplitudes(2, regime=LARGE)


def test_linked_cluster_additivity():
    # two disconnected bonds carry exactly twice the energy of one
    one = cluster_energy_series(SMALL, 2, [(0, 1)], 4)
    two = cluster_energy_series(SMALL, 4, [(0, 1), (2, 3)], 4)
    assert two == one * 2
    # the connected part of a two-bond chain needs both bonds twice
    chain = cluster_energy_series(SMALL, 3, [(0, 1), (1, 2)], 4)
    excl = chain - one * 2
    assert excl[1] == excl[2] == excl[3] == 0 and excl[4] != 0


def test_single_bond_series():
    # one bond; two bonds per site give the -2x^2 of the lattice series
    s = cluster_energy_series(SMALL, 2, [(0, 1)], 2)
    assert s == RationalSeries("x", [0, 0, -1])


def test_single_bond_against_three_level_problem():
    # |00>, |12>, |21> close under Z Z^dag + h.c.: H = diag(0, 2, 2) - x (ones - 1)
    s = cluster_energy_series(SMALL, 2, [(0, 1)], 5)
    for x in (0.01, 0.02):
        H = np.diag([0.0, 2.0, 2.0]) - x * (np.ones((3, 3)) - np.eye(3))
        exact = np.linalg.eigvalsh(H)[0]
        assert abs(float(s(x)) - exact) < 5 * x**6


def test_thread_count_does_not_change_results():
    assert ground_energy_series(SMALL, 3, threads=1) == ground_energy_series(SMALL, 3, threads=2)


def test_calibration_records():
    sc, lc = calibration(SMALL), calibration(LARGE)
    assert sc.unit == "3J" and lc.unit == "2lambda"
    assert sc.constant(1, 1) == F(-4, 3)
    assert lc.constant(1, 1) == -4
    # at J = 1, lambda -> 0 the small-coupling energy is -2J
    assert sc.absolute_energy(RationalSeries("x", [F(-2, 3)]), 1, 0) == -2
