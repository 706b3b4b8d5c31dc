from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from kitaev_potts.clusters import (
    POINT_GROUP,
    _act,
    canonical_bonds,
    clusters_from_json,
    clusters_to_json,
    count_torus_bond_clusters,
    enumerate_clusters,
    enumerate_site_clusters,
    fixed_bond_clusters,
)

# lattice animals on bonds of the square lattice (OEIS A001410 per site)
FIXED_PER_SITE = [2, 6, 22, 88, 372, 1628]


def test_fixed_counts():
    fixed = fixed_bond_clusters(6)
    for k, expected in enumerate(FIXED_PER_SITE, start=1):
        assert len(fixed[k]) == expected


def test_free_counts_and_weights():
    cl = enumerate_clusters(5)
    by = {}
    for c in cl:
        by.setdefault(c.size, []).append(c)
    assert [len(by[k]) for k in range(1, 6)] == [1, 2, 5, 16, 55]
    for k in range(1, 6):
        assert sum(c.embeddings_per_site for c in by[k]) == FIXED_PER_SITE[k - 1]


def test_polyominoes():
    cl = enumerate_site_clusters(4)
    fixed = {}
    for c in cl:
        fixed[c.size] = fixed.get(c.size, 0) + c.embeddings_per_site
    assert [fixed[k] for k in range(1, 5)] == [1, 2, 6, 19]


def test_torus_oracle_agrees():
    brute = count_torus_bond_clusters(6, 3)
    fixed = fixed_bond_clusters(3)
    for k in (1, 2, 3):
        assert brute[k] == len(fixed[k])


def test_json_roundtrip():
    cl = enumerate_clusters(3)
    back = clusters_from_json(clusters_to_json(cl))
    assert [(c.sites, c.bonds, c.embeddings_per_site) for c in back] == [(c.sites, c.bonds, c.embeddings_per_site) for c in cl]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 54), st.sampled_from(range(8)), st.integers(-5, 5), st.integers(-5, 5))
def test_canonical_key_invariant(idx, g, dx, dy):
    cl = [c for c in enumerate_clusters(5) if c.size == 5]
    bonds = cl[idx].bond_coords()
    moved = [(tuple(a + b for a, b in zip(_act(POINT_GROUP[g], p), (dx, dy))), tuple(a + b for a, b in zip(_act(POINT_GROUP[g], q), (dx, dy)))) for p, q in bonds]
    assert canonical_bonds(moved)[0] == canonical_bonds(bonds)[0]


def test_multiplicities_are_fractions():
    assert all(isinstance(c.embeddings_per_site, Fraction) for c in enumerate_clusters(3))
