"""Linked-cluster bookkeeping on the square lattice.

Two kinds of clusters are used:

* bond clusters (connected bond sets), for the small-coupling expansion
  where each bond carries a perturbation;
* site clusters (polyominoes), for the large-coupling expansion where each
  site carries a perturbation and the neighbours outside the cluster stay
  frozen in the reference state.

Fixed clusters are distinct up to translation; free clusters are distinct up
to translation and the eight point-group operations of the square lattice.
``embeddings_per_site`` of a free cluster is the number of fixed clusters in
its orbit, i.e. the number of its placements per lattice site.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

__all__ = [
    "Cluster",
    "POINT_GROUP",
    "canonical_bonds",
    "canonical_sites",
    "fixed_bond_clusters",
    "enumerate_clusters",
    "enumerate_site_clusters",
    "clusters_to_json",
    "clusters_from_json",
    "count_torus_bond_clusters",
]

# (a, b, c, d) acts as (x, y) -> (a x + b y, c x + d y)
POINT_GROUP = (
    (1, 0, 0, 1), (0, -1, 1, 0), (-1, 0, 0, -1), (0, 1, -1, 0),
    (1, 0, 0, -1), (-1, 0, 0, 1), (0, 1, 1, 0), (0, -1, -1, 0),
)
_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _act(g, p):
    a, b, c, d = g
    return (a * p[0] + b * p[1], c * p[0] + d * p[1])


def _bond(p, q):
    return (p, q) if p <= q else (q, p)


def _translate_bonds(bonds):
    sites = {p for b in bonds for p in b}
    ox, oy = min(sites)
    return tuple(sorted(_bond((p[0] - ox, p[1] - oy), (q[0] - ox, q[1] - oy)) for p, q in bonds))


def _translate_sites(sites):
    ox, oy = min(sites)
    return tuple(sorted((p[0] - ox, p[1] - oy) for p in sites))


def canonical_bonds(bonds, free=True):
    """Canonical key of a bond set given as coordinate pairs.

    Returns ``(key, g, shift)`` such that ``key`` is the sorted bond list of
    the image ``p -> g(p) - shift``.
    """
    best = None
    for g in (POINT_GROUP if free else POINT_GROUP[:1]):
        img = [(_act(g, p), _act(g, q)) for p, q in bonds]
        shift = min(p for b in img for p in b)
        key = _translate_bonds(img)
        if best is None or key < best[0]:
            best = (key, g, shift)
    return best


def canonical_sites(sites, free=True):
    best = None
    for g in (POINT_GROUP if free else POINT_GROUP[:1]):
        img = [_act(g, p) for p in sites]
        key = _translate_sites(img)
        if best is None or key < best[0]:
            best = (key, g, min(img))
    return best


@dataclass(frozen=True)
class Cluster:
    """A free cluster with canonical coordinates.

    ``sites`` are lattice coordinates (sorted); ``bonds`` index into
    ``sites``.  For site clusters ``bonds`` lists the internal
    nearest-neighbour bonds.
    """

    kind: str
    sites: tuple
    bonds: tuple
    embeddings_per_site: Fraction
    images: tuple = ()

    @property
    def size(self):
        return len(self.bonds) if self.kind == "bond" else len(self.sites)

    @property
    def num_sites(self):
        return len(self.sites)

    def bond_coords(self):
        return tuple((self.sites[i], self.sites[j]) for i, j in self.bonds)


def _from_bond_key(key, images, weight):
    sites = tuple(sorted({p for b in key for p in b}))
    index = {p: i for i, p in enumerate(sites)}
    bonds = tuple((index[p], index[q]) for p, q in key)
    return Cluster("bond", sites, bonds, Fraction(weight), tuple(images))


def _internal_bonds(sites):
    index = {p: i for i, p in enumerate(sites)}
    out = []
    for p in sites:
        for dx, dy in ((1, 0), (0, 1)):
            q = (p[0] + dx, p[1] + dy)
            if q in index:
                out.append((index[p], index[q]))
    return tuple(sorted(out))


def fixed_bond_clusters(max_bonds):
    """Translation classes of connected bond sets, grouped by bond count."""
    levels = {1: {(((0, 0), (1, 0)),), (((0, 0), (0, 1)),)}}
    for n in range(2, max_bonds + 1):
        grown = set()
        for cl in levels[n - 1]:
            have = set(cl)
            for p in {s for b in cl for s in b}:
                for dx, dy in _STEPS:
                    nb = _bond(p, (p[0] + dx, p[1] + dy))
                    if nb not in have:
                        grown.add(_translate_bonds(list(cl) + [nb]))
        levels[n] = grown
    return {n: sorted(v) for n, v in levels.items() if n <= max_bonds}


def enumerate_clusters(max_bonds):
    """Free bond clusters up to ``max_bonds`` bonds with their per-site embeddings."""
    if max_bonds < 1:
        return []
    out = []
    for n, fixed in sorted(fixed_bond_clusters(max_bonds).items()):
        orbits = {}
        for key in fixed:
            free_key = canonical_bonds(key)[0]
            orbits.setdefault(free_key, []).append(key)
        for free_key in sorted(orbits):
            imgs = orbits[free_key]
            out.append(_from_bond_key(free_key, imgs, len(imgs)))
    return out


def enumerate_site_clusters(max_sites):
    """Free polyominoes up to ``max_sites`` sites with their per-site embeddings."""
    if max_sites < 1:
        return []
    levels = {1: {((0, 0),)}}
    for n in range(2, max_sites + 1):
        grown = set()
        for cl in levels[n - 1]:
            have = set(cl)
            for p in cl:
                for dx, dy in _STEPS:
                    q = (p[0] + dx, p[1] + dy)
                    if q not in have:
                        grown.add(_translate_sites(list(cl) + [q]))
        levels[n] = grown
    out = []
    for n in range(1, max_sites + 1):
        orbits = {}
        for key in levels[n]:
            orbits.setdefault(canonical_sites(key)[0], []).append(key)
        for free_key in sorted(orbits):
            imgs = sorted(orbits[free_key])
            out.append(Cluster("site", free_key, _internal_bonds(free_key), Fraction(len(imgs)), tuple(imgs)))
    return out


def clusters_to_json(clusters):
    return json.dumps(
        [
            {
                "kind": c.kind,
                "sites": [list(p) for p in c.sites],
                "bonds": [list(b) for b in c.bonds],
                "multiplicity": f"{c.embeddings_per_site.numerator}/{c.embeddings_per_site.denominator}",
            }
            for c in clusters
        ],
        indent=1,
    )


def clusters_from_json(text):
    out = []
    for obj in json.loads(text):
        out.append(
            Cluster(
                obj["kind"],
                tuple(tuple(p) for p in obj["sites"]),
                tuple(tuple(b) for b in obj["bonds"]),
                Fraction(obj["multiplicity"]),
            )
        )
    return out


def count_torus_bond_clusters(L, max_bonds):
    """Brute-force oracle: connected bond subsets of an L x L torus, per site.

    Every subset of the 2 L^2 bonds with at most ``max_bonds`` elements is
    tested for connectivity.  Valid for clusters that do not wrap, i.e.
    ``max_bonds < L``.
    """
    from itertools import combinations

    bonds = []
    for x, y in product(range(L), repeat=2):
        bonds.append(((x, y), ((x + 1) % L, y)))
        bonds.append(((x, y), (x, (y + 1) % L)))
    counts = {}
    for n in range(1, max_bonds + 1):
        c = 0
        for sub in combinations(range(len(bonds)), n):
            adj = {}
            for b in sub:
                p, q = bonds[b]
                adj.setdefault(p, set()).add(q)
                adj.setdefault(q, set()).add(p)
            start = next(iter(adj))
            seen, stack = {start}, [start]
            while stack:
                for nb in adj[stack.pop()]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            c += len(seen) == len(adj)
        counts[n] = Fraction(c, L * L)
    return counts
