"""Linked-cluster evaluation of the PCUT effective Hamiltonian.

For a cluster the T-sequences of H_eff are applied right to left to integer
state tensors (shape ``(batch, 3, ..., 3)``); shared suffixes are applied
once.  Exclusive contributions follow from inclusion-exclusion over all
sub-clusters, and the per-site series is the embedding-weighted sum.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from ..clusters import canonical_bonds, canonical_sites, enumerate_clusters, enumerate_site_clusters, _act
from ..series import RationalSeries
from .coefficients import OrderCapError, pcut_coefficients
from .operators import LARGE, SMALL, decompose_T

__all__ = [
    "DEFAULT_ORDER_CAP",
    "CalibrationRecord",
    "RegimeMismatchError",
    "MissingClustersError",
    "calibration",
    "cluster_energy_series",
    "cluster_block",
    "ground_energy_series",
    "one_qp_amplitudes",
    "gap_series",
    "dispersion",
]

DEFAULT_ORDER_CAP = 5
D = 3


class RegimeMismatchError(ValueError):
    pass


class MissingClustersError(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationRecord:
    """Constants per site left out of the engine series.

    ``retained`` is already inside the series (its order-0 term); ``dropped``
    was removed during the decomposition.  Both are linear forms
    ``(coefficient of J, coefficient of lambda)`` in absolute energy units.
    """

    regime: str
    unit: str
    retained: tuple
    dropped: tuple

    def unit_scale(self, J, lam):
        return 3 * J if self.regime == SMALL else 2 * lam

    def constant(self, J, lam):
        return self.dropped[0] * J + self.dropped[1] * lam

    def absolute_energy(self, series, J, lam):
        """Per-site absolute energy from a series in the regime's variable."""
        if self.regime == SMALL:
            g = 2 * lam / (9 * J)
        else:
            g = J / (2 * lam)
        return self.unit_scale(J, lam) * series(g) + self.constant(J, lam)


def calibration(regime):
    if regime == SMALL:
        # -J(X + X^dag) = 3J q - 2J per site (kept as -2/3 in units of 3J);
        # -2 lam/3 per bond, two bonds per site, is dropped
        return CalibrationRecord(SMALL, "3J", (Fraction(-2), Fraction(0)), (Fraction(0), Fraction(-4, 3)))
    if regime == LARGE:
        # each bond is -2 lam + 2 lam * [misaligned]; -2 lam per bond, two per site
        return CalibrationRecord(LARGE, "2lambda", (Fraction(0), Fraction(0)), (Fraction(0), Fraction(-4)))
    raise ValueError(regime)


# ---------------------------------------------------------------------------
# per-cluster evaluation


def _apply(terms_n, psi):
    out = None
    for sites, block in terms_n:
        k = len(sites)
        axes = [s + 1 for s in sites]
        t = np.tensordot(psi, block.reshape((D,) * (2 * k)), axes=(axes, list(range(k, 2 * k))))
        t = np.moveaxis(t, list(range(t.ndim - k, t.ndim)), axes)
        out = t if out is None else out + t
    return out


def _sequence_trie(weights):
    """Group sequences by suffix: node -> {letter: child}, with terminal weights."""
    root = {}
    for m, c in weights.items():
        node = root
        for letter in reversed(m):
            node = node.setdefault(letter, {})
        node[None] = node.get(None, 0) + c
    return root


def cluster_block(spec, num_sites, bonds, initial, final, max_order, table=None, env_degree=None):
    """Exact matrix elements <final|H_eff^(k)|initial> for k = 1..max_order.

    ``initial``/``final`` are lists of site configurations.  Returns
    {k: list of rows of Fractions (len(initial) x len(final))}.  Energies are
    in the regime unit and exclude Q and constants.
    """
    if table is None:
        table = _table(spec.regime, max_order)
    terms = spec.cluster_terms(num_sites, bonds, env_degree)
    by_n = {}
    for term in terms:
        for n, b in term.blocks.items():
            if b.any():
                by_n.setdefault(n, []).append((term.sites, b))
    psi0 = np.zeros((len(initial),) + (D,) * num_sites, dtype=np.int64)
    for b, cfg in enumerate(initial):
        psi0[(b, *cfg)] = 1
    fidx = tuple(np.array(c) for c in zip(*final)) if num_sites else ()
    results = {}
    for k in range(1, max_order + 1):
        weights = {m: c * spec.prefactor**k for m, c in table.order(k).items()}
        acc = {}

        def walk(node, psi):
            for letter, child in node.items():
                if letter is None:
                    vals = psi[(slice(None),) + fidx]
                    acc[child] = acc.get(child, 0) + vals
                    continue
                if letter not in by_n:
                    continue
                nxt = _apply(by_n[letter], psi)
                if nxt.any():
                    walk(child, nxt)

        walk(_sequence_trie(weights), psi0)
        mat = [[Fraction(0)] * len(final) for _ in initial]
        for c, vals in acc.items():
            for a in range(len(initial)):
                for b in range(len(final)):
                    v = int(vals[a, b])
                    if v:
                        mat[a][b] += c * v
        results[k] = mat
    return results


@lru_cache(maxsize=None)
def _table(regime, max_order):
    alphabet = decompose_T(regime).n_range
    return pcut_coefficients(max_order, alphabet=alphabet, cap=max(max_order, 8))


def cluster_energy_series(regime, num_sites, bonds, max_order, env_degree=None):
    """Vacuum energy of one cluster as a series (no constants, no subtraction)."""
    spec = decompose_T(regime)
    vac = [(0,) * num_sites]
    res = cluster_block(spec, num_sites, bonds, vac, vac, max_order, env_degree=env_degree)
    var = "x" if regime == SMALL else "h"
    return RationalSeries(var, [0] + [res[k][0][0] for k in range(1, max_order + 1)])


# ---------------------------------------------------------------------------
# linked-cluster sums


def _components(bond_list):
    """Connected components of a list of coordinate bonds."""
    parent = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for p, q in bond_list:
        parent[find(p)] = find(q)
    groups = {}
    for b in bond_list:
        groups.setdefault(find(b[0]), []).append(b)
    return list(groups.values())


def _site_components(sites):
    sites = set(sites)
    out = []
    while sites:
        start = sites.pop()
        comp, stack = [start], [start]
        while stack:
            p = stack.pop()
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                q = (p[0] + dx, p[1] + dy)
                if q in sites:
                    sites.remove(q)
                    comp.append(q)
                    stack.append(q)
        out.append(comp)
    return out


def _eval_bond_cluster(args):
    key, max_order, with_qp = args
    spec = decompose_T(SMALL)
    sites = sorted({p for b in key for p in b})
    index = {p: i for i, p in enumerate(sites)}
    bonds = [(index[p], index[q]) for p, q in key]
    n = len(sites)
    vac = [(0,) * n]
    energy = cluster_block(spec, n, bonds, vac, vac, max_order)
    e = [energy[k][0][0] for k in range(1, max_order + 1)]
    qp = None
    if with_qp:
        states = []
        for f in (1, 2):
            for i in range(n):
                cfg = [0] * n
                cfg[i] = f
                states.append(tuple(cfg))
        blk = cluster_block(spec, n, bonds, states, states, max_order)
        qp = []
        for k in range(1, max_order + 1):
            m = blk[k]
            for a in range(len(states)):
                m[a][a] -= energy[k][0][0]
            qp.append(m)
    return key, e, qp, sites


def _eval_site_cluster(args):
    key, max_order = args
    spec = decompose_T(LARGE)
    index = {p: i for i, p in enumerate(key)}
    bonds = []
    for p in key:
        for dx, dy in ((1, 0), (0, 1)):
            q = (p[0] + dx, p[1] + dy)
            if q in index:
                bonds.append((index[p], index[q]))
    vac = [(0,) * len(key)]
    res = cluster_block(spec, len(key), bonds, vac, vac, max_order)
    return key, [res[k][0][0] for k in range(1, max_order + 1)]


def _map_pool(fn, tasks, threads):
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(tasks) < 4:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def _check_order(max_order, cap):
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    if max_order > cap:
        raise OrderCapError(f"order {max_order} exceeds the configured cap {cap}")


def _small_cluster_data(max_order, with_qp, threads):
    clusters = enumerate_clusters(max_order)
    _table(SMALL, max_order)
    tasks = [(c.bond_coords(), max_order, with_qp) for c in clusters]
    results = _map_pool(_eval_bond_cluster, tasks, threads)
    memo = {key: (e, qp, sites) for key, e, qp, sites in results}
    return clusters, memo


def _lookup(memo, bond_list):
    """Energy and 1-QP data of an arbitrary connected bond set via its canonical form."""
    key, g, shift = canonical_bonds(bond_list)
    e, qp, csites = memo[key]

    def to_canon(p):
        q = _act(g, p)
        return (q[0] - shift[0], q[1] - shift[1])

    return e, qp, csites, to_canon


def _exclusive_energy_small(cluster, memo, max_order):
    bonds = cluster.bond_coords()
    total = [Fraction(0)] * max_order
    nb = len(bonds)
    for r in range(1, nb + 1):
        sign = (-1) ** (nb - r)
        for sub in combinations(bonds, r):
            for comp in _components(list(sub)):
                e = _lookup(memo, comp)[0]
                for k in range(max_order):
                    total[k] += sign * e[k]
    return total


def ground_energy_series(regime, max_order, threads=None, cap=DEFAULT_ORDER_CAP):
    """Per-site ground-state energy series in the regime's unit.

    Small coupling includes the -2/3 offset; large coupling starts at h^1
    (the constant is carried by :func:`calibration`).
    """
    _check_order(max_order, cap)
    if regime == SMALL:
        coeffs = [Fraction(-2, 3)] + [Fraction(0)] * max_order
        if max_order == 0:
            return RationalSeries("x", coeffs)
        clusters, memo = _small_cluster_data(max_order, False, threads)
        for c in clusters:
            ex = _exclusive_energy_small(c, memo, max_order)
            for k in range(max_order):
                coeffs[k + 1] += c.embeddings_per_site * ex[k]
        return RationalSeries("x", coeffs)
    if regime == LARGE:
        coeffs = [Fraction(0)] * (max_order + 1)
        if max_order == 0:
            return RationalSeries("h", coeffs)
        clusters = enumerate_site_clusters(max(1, max_order // 2))
        _table(LARGE, max_order)
        results = _map_pool(_eval_site_cluster, [(c.sites, max_order) for c in clusters], threads)
        memo = dict(results)
        for c in clusters:
            ns = len(c.sites)
            for r in range(1, ns + 1):
                sign = (-1) ** (ns - r)
                for sub in combinations(c.sites, r):
                    for comp in _site_components(sub):
                        e = memo[canonical_sites(comp)[0]]
                        for k in range(max_order):
                            coeffs[k + 1] += c.embeddings_per_site * sign * e[k]
        return RationalSeries("h", coeffs)
    raise ValueError(f"unknown regime {regime!r}")


def _qp_matrix(memo, bond_list, flavor, max_order):
    """1-QP amplitudes of a connected bond set, keyed by (site_i, site_j) coordinates."""
    e, qp, csites, to_canon = _lookup(memo, bond_list)
    sites = sorted({p for b in bond_list for p in b})
    n = len(csites)
    cidx = {p: i for i, p in enumerate(csites)}
    off = (flavor - 1) * n
    out = {}
    for p in sites:
        a = cidx[to_canon(p)] + off
        for q in sites:
            b = cidx[to_canon(q)] + off
            out[(p, q)] = [qp[k][a][b] for k in range(max_order)]
    return out


def one_qp_amplitudes(max_order, regime=SMALL, threads=None, flavor=1, cap=DEFAULT_ORDER_CAP):
    """Hopping series t_delta, keyed by displacement (dx, dy); (0, 0) is the on-site term.

    Amplitudes are <j|H_eff|i> - E0 for a quasiparticle of the given flavor
    moving from i to j = i + delta, in units of 3J, including the bare gap 1.
    """
    if regime != SMALL:
        raise RegimeMismatchError("one-quasiparticle amplitudes are computed for small coupling only")
    _check_order(max_order, cap)
    hop = {(0, 0): [Fraction(1)] + [Fraction(0)] * max_order}
    if max_order == 0:
        return {d: RationalSeries("x", c) for d, c in hop.items()}
    clusters, memo = _small_cluster_data(max_order, True, threads)
    from ..clusters import POINT_GROUP

    for c in clusters:
        bonds = c.bond_coords()
        nb = len(bonds)
        excl = {}
        for r in range(1, nb + 1):
            sign = (-1) ** (nb - r)
            for sub in combinations(bonds, r):
                for comp in _components(list(sub)):
                    for pq, vals in _qp_matrix(memo, comp, flavor, max_order).items():
                        acc = excl.setdefault(pq, [Fraction(0)] * max_order)
                        for k in range(max_order):
                            acc[k] += sign * vals[k]
        # the empty subset and uncovered sites only feed order 0, which is kept in hop[(0, 0)]
        images = set()
        for g in POINT_GROUP:
            img = canonical_bonds([(_act(g, p), _act(g, q)) for p, q in bonds], free=False)[0]
            if img in images:
                continue
            images.add(img)
            for (p, q), vals in excl.items():
                dp = _act(g, (q[0] - p[0], q[1] - p[1]))
                acc = hop.setdefault(dp, [Fraction(0)] * (max_order + 1))
                for k in range(max_order):
                    acc[k + 1] += vals[k]
    return {d: RationalSeries("x", c) for d, c in sorted(hop.items()) if any(c)}


def gap_series(max_order, amplitudes=None, threads=None):
    """omega(k=0) = sum of all hopping amplitudes."""
    if amplitudes is None:
        amplitudes = one_qp_amplitudes(max_order, threads=threads)
    total = RationalSeries("x", [0] * (max_order + 1))
    for s in amplitudes.values():
        total = total + s.truncate(max_order)
    return total


def dispersion(k, amplitudes):
    """Float coefficients of omega(k) = sum_delta t_delta cos(k . delta) by order."""
    kx, ky = k
    order = max(s.order for s in amplitudes.values())
    out = np.zeros(order + 1)
    for (dx, dy), s in amplitudes.items():
        phase = math.cos(kx * dx + ky * dy)
        out[: len(s)] += phase * np.array(s.as_floats())
    return out
