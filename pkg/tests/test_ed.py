from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

from kitaev_potts.algebra import SparseOperator, pauli_x
from kitaev_potts.ed import (
    DimensionTooLargeError,
    NonHermitianError,
    degeneracy_report,
    ground_state,
    open_grid_graph,
    rayleigh_quotient_exact,
    series_vs_ed,
    topological_degeneracy,
    verify_mapping,
)
from kitaev_potts.ed import _exact_matrix
from kitaev_potts.lattice import build_mapped_hamiltonian
from kitaev_potts.pcut.evaluate import cluster_energy_series


def test_dense_and_iterative_agree():
    g = open_grid_graph(2, 3)
    H = build_mapped_hamiltonian(g, 1.0, 0.4)
    d = ground_state(H, "dense")
    it = ground_state(H, "iterative", num=2)
    assert abs(d.energy - it.energy) < 1e-8
    assert it.iterations and it.iterations > 0
    for r in (d, it):
        assert r.residual < 1e-8
        assert np.all(np.diff(r.eigenvalues) >= 0)


def test_iterative_is_seeded():
    H = build_mapped_hamiltonian(open_grid_graph(2, 2), 1.0, 0.2)
    a = ground_state(H, "iterative", seed=7)
    b = ground_state(H, "iterative", seed=7)
    assert a.iterations == b.iterations and a.energy == b.energy


def test_non_hermitian_rejected():
    op = SparseOperator(2, 3, [(1, {0: pauli_x(3)})])
    with pytest.raises(NonHermitianError):
        ground_state(op)


def test_dense_limit():
    M = sp.identity(20001, format="csr")
    with pytest.raises(DimensionTooLargeError):
        ground_state(M, "dense", check_hermitian=False)


def test_mapping_single_triple():
    rep = verify_mapping(1, 1, 0.3)
    assert rep.passed
    assert abs(rep.difference) < 1e-9
    assert rep.to_json()["passed"] is True


def test_degeneracy():
    assert topological_degeneracy(d=3) == 9
    assert topological_degeneracy(d=2) == 4
    rep = degeneracy_report(lam=0.05)
    assert rep["degeneracy"] == 1 and rep["splitting"] > 1e-3


def test_exact_rayleigh_quotient():
    H = build_mapped_hamiltonian(open_grid_graph(1, 2), Fraction(1, 3), Fraction(1, 10))
    exact = _exact_matrix(H)
    vec = ground_state(H, "dense", check_hermitian=False).vector
    e = rayleigh_quotient_exact(exact, vec)
    assert isinstance(e, Fraction)
    assert abs(float(e) - ground_state(H, "dense", check_hermitian=False).energy) < 1e-12


def test_series_vs_ed_single_bond():
    g = open_grid_graph(1, 2)
    s = cluster_energy_series("small", 2, list(g.bonds), 2)
    rep = series_vs_ed(g, s)
    assert rep.slope == pytest.approx(3.0, abs=0.1)
    assert rep.certified


def test_zero_perturbation_matches():
    # at x = 0 the mapped energy is exactly -2/3 per site in units of 3J
    g = open_grid_graph(2, 2)
    H = build_mapped_hamiltonian(g, Fraction(1, 3), Fraction(0))
    assert ground_state(H, "dense").energy == pytest.approx(-2 / 3 * 4, abs=1e-12)


def test_degenerate_fit_window():
    g = open_grid_graph(1, 2)
    s = cluster_energy_series("small", 2, list(g.bonds), 2)
    with pytest.raises(ValueError):
        series_vs_ed(g, s, x_grid=[0.01, 0.01])
