from fractions import Fraction

import numpy as np
import pytest

from kitaev_potts.algebra import Cyclo, SparseOperator
from kitaev_potts.lattice import (
    BondGraph,
    Couplings,
    DisconnectedGraphError,
    LatticeError,
    build_full_hamiltonian,
    build_kitaev_hamiltonian,
    build_mapped_hamiltonian,
    build_torus,
    kitaev_ground_state,
    r_basis_state,
    stabilizers,
    string_operators,
    sublattice_graph,
)


def _product(ops):
    out = ops[0]
    for o in ops[1:]:
        out = out @ o
    return out


@pytest.mark.parametrize("orientation", ["uniform", "bipartite"])
@pytest.mark.parametrize("d", [2, 3])
def test_stabilizers_commute_and_constraints(orientation, d):
    lat = build_torus(2, orientation)
    A, B = stabilizers(lat, d)
    for a in A:
        assert (a**d).equals(SparseOperator.identity(lat.num_edges, d))
        for b in B:
            assert a.commutator(b).is_zero()
    for a1 in A:
        for a2 in A:
            assert a1.commutator(a2).is_zero()
    ident = SparseOperator.identity(lat.num_edges, d)
    assert _product(A).equals(ident)
    assert _product(B).equals(ident)


def test_string_operators():
    lat = build_torus(2)
    d = 3
    A, B = stabilizers(lat, d)
    tz1, tz2, tx1, tx2 = string_operators(lat, d)
    for s in (tz1, tz2, tx1, tx2):
        for op in A + B:
            assert s.commutator(op).is_zero()
    # crossing loops pick up a single omega
    w = Cyclo.root(d, 1)
    lhs, rhs = tz1 @ tx1, tx1 @ tz1
    assert lhs.equals(rhs * w) or lhs.equals(rhs * w.conjugate())
    assert tz1.commutator(tx2).is_zero()


def test_torus_counts():
    lat = build_torus(4)
    assert (lat.num_vertices, lat.num_plaquettes, lat.num_edges) == (16, 16, 32)
    with pytest.raises(LatticeError):
        build_torus(3)


def test_hamiltonians_hermitian():
    lat = build_torus(2)
    assert build_kitaev_hamiltonian(lat, 3, 1, 1).is_hermitian()
    assert build_full_hamiltonian(lat, Couplings(1, 1, Fraction(3, 10))).is_hermitian()
    assert build_full_hamiltonian(lat, Couplings(1.0, 5.0, 0.3)).is_hermitian()
    g = sublattice_graph(lat, 0)
    assert build_mapped_hamiltonian(g, 1, Fraction(1, 2)).is_hermitian()


def test_kitaev_ground_state_stabilized():
    lat = build_torus(2)
    d = 3
    A, B = stabilizers(lat, d)
    gs = kitaev_ground_state(lat, d)
    for op in A + B:
        assert op.apply(gs) == gs


def test_r_basis_state_is_plaquette_eigenstate():
    lat = build_torus(2)
    _, B = stabilizers(lat, 3)
    st = r_basis_state(lat, [1, 2, 0, 1])
    for b in B:
        assert b.apply(st) == st


def test_sublattice_graph_shape():
    lat = build_torus(2)
    for which in (0, 1):
        g = sublattice_graph(lat, which)
        assert g.num_sites == 2
        assert g.is_connected()


def test_disconnected_graph_rejected():
    g = BondGraph(3, ((0, 1),), ((0, 0), (1, 0), (5, 5)))
    with pytest.raises(DisconnectedGraphError):
        build_mapped_hamiltonian(g, 1, 1)


def test_mapped_hamiltonian_z3_shift_invariant():
    from kitaev_potts.ed import ground_state, open_grid_graph

    g = open_grid_graph(2, 2)
    H = build_mapped_hamiltonian(g, 1.0, 0.7)
    M = H.to_dense()
    n = g.num_sites
    # global shift prod_i X_i
    shift = np.eye(1)
    xc = np.roll(np.eye(3), 1, axis=0)
    for _ in range(n):
        shift = np.kron(shift, xc)
    assert np.allclose(shift @ M @ shift.conj().T, M)
    assert ground_state(H, "dense").energy < 0
