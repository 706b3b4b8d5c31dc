"""Quasiparticle-number decomposition of the perturbation in both regimes.

Small coupling (field dominant): the local basis is the eigenbasis of X,
|k> with X|k> = omega^k |k>.  One quasiparticle sits on every site not in |0>,
and the bond perturbation is Z_i Z_j^dag + h.c. with coupling -x.

Large coupling (Potts dominant): the local basis is the clock basis, Q counts
misaligned bonds, and the site perturbation is -(X + X^dag) with coupling h.

Everything is derived from the exact operator layer and then frozen into
integer numpy blocks used by the cluster evaluator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ..algebra import Cyclo, LocalOp, SparseOperator, identity, pauli_x, pauli_z

__all__ = [
    "SMALL",
    "LARGE",
    "TOperatorSpec",
    "LocalTerm",
    "decompose_T",
    "qp_basis_change",
    "block_to_sparse",
]

SMALL = "small"
LARGE = "large"
D = 3


def _fourier(d=D):
    """Unnormalized change of basis; column k is sqrt(d) times the X eigenvector |k>."""
    return LocalOp.from_map(d, {(j, k): Cyclo.root(d, -j * k) for j in range(d) for k in range(d)})


def qp_basis_change(op, d=D):
    """Express a single-site operator in the X eigenbasis (exact)."""
    U = _fourier(d)
    return (U.dagger() @ op @ U) * Fraction(1, d)


def _to_int(entries):
    out = np.zeros((len(entries), len(entries)), dtype=np.int64)
    for i, row in enumerate(entries):
        for j, e in enumerate(row):
            q = e.to_fraction() if isinstance(e, Cyclo) else Fraction(e)
            if q.denominator != 1:
                raise ValueError("expected an integer matrix")
            out[i, j] = q.numerator
    return out


def _kron_exact(a, b):
    """Kronecker product of two exact LocalOp matrices as nested lists."""
    da, db = a.d, b.d
    return [
        [a.entries[i // db][j // db] * b.entries[i % db][j % db] for j in range(da * db)]
        for i in range(da * db)
    ]


def block_to_sparse(block, sites, num_sites, d=D):
    """Embed a dense k-site integer block as a SparseOperator of matrix units."""
    k = len(sites)
    terms = []
    rows, cols = np.nonzero(block)
    for r, c in zip(rows, cols):
        rd = np.unravel_index(r, (d,) * k)
        cd = np.unravel_index(c, (d,) * k)
        factors = {s: LocalOp.from_map(d, {(int(a), int(b)): 1}) for s, a, b in zip(sites, rd, cd)}
        terms.append((int(block[r, c]), factors))
    return SparseOperator(num_sites, d, terms)


@dataclass(frozen=True)
class LocalTerm:
    """T_n blocks acting on a tuple of cluster sites (first site most significant)."""

    sites: tuple
    blocks: dict = field(repr=False)


@dataclass(frozen=True)
class TOperatorSpec:
    """Per-bond or per-site T_n blocks with the quasiparticle counter.

    ``prefactor`` is the sign in front of the expansion parameter:
    ``H / unit = Q + prefactor * g * sum_n T_n + constants``.
    """

    regime: str
    n_range: tuple
    prefactor: int
    unit: str
    local_q: np.ndarray = field(repr=False)
    template_sites: int = 2
    templates: dict = field(repr=False, default_factory=dict)
    perturbation: np.ndarray = field(repr=False, default=None)

    @property
    def alphabet(self):
        return self.n_range

    # -- cluster terms -------------------------------------------------------

    def cluster_terms(self, num_sites, bonds, env_degree=None):
        """LocalTerm list for a cluster.

        Small coupling: one term per bond.  Large coupling: one term per site,
        acting on the site and its in-cluster neighbours; ``env_degree[i]``
        neighbours outside the cluster stay in |0>.
        """
        if self.regime == SMALL:
            return [LocalTerm((i, j), self.templates) for i, j in bonds]
        nb = {i: [] for i in range(num_sites)}
        for i, j in bonds:
            nb[i].append(j)
            nb[j].append(i)
        out = []
        for i in range(num_sites):
            inside = sorted(nb[i])
            env = 4 - len(inside) if env_degree is None else env_degree[i]
            if len(inside) + env != 4:
                raise ValueError("large-coupling sites need coordination 4")
            out.append(LocalTerm((i, *inside), _restrict_star(self.templates, len(inside))))
        return out

    def q_values(self, configs, bonds=(), env_degree=None):
        """Q eigenvalue of each computational configuration (rows of ``configs``)."""
        configs = np.asarray(configs)
        if self.regime == SMALL:
            return self.local_q[configs].sum(axis=1)
        qb = self.local_q
        tot = np.zeros(len(configs), dtype=np.int64)
        for i, j in bonds:
            tot += qb[configs[:, i], configs[:, j]]
        if env_degree is not None:
            for i, e in enumerate(env_degree):
                tot += e * qb[configs[:, i], 0]
        return tot

    # -- exact templates -----------------------------------------------------

    def sparse_templates(self):
        """T_n and Q as exact SparseOperators on the template sites.

        Small: two sites joined by one bond.  Large: a five-site star, the
        centre (site 0) carrying the flip and sites 1..4 its neighbours.
        """
        k = self.template_sites
        T = {n: block_to_sparse(b, tuple(range(k)), k) for n, b in self.templates.items()}
        if self.regime == SMALL:
            Q = SparseOperator(k, D, [])
            for s in range(k):
                Q = Q + block_to_sparse(np.diag(self.local_q), (s,), k)
        else:
            Q = SparseOperator(k, D, [])
            bond = np.diag([self.local_q[a, b] for a in range(D) for b in range(D)])
            for s in range(1, k):
                Q = Q + block_to_sparse(bond, (0, s), k)
        V = block_to_sparse(self.perturbation, tuple(range(k)), k)
        return T, Q, V


def _restrict_star(templates, inside):
    """Star blocks with the last 4 - inside neighbours frozen at |0>."""
    keep = [c for c in range(D**5) if all(np.unravel_index(c, (D,) * 5)[1 + inside + e] == 0 for e in range(4 - inside))]
    keep = np.array(keep)
    return {n: b[np.ix_(keep, keep)] for n, b in templates.items()}


def _split_by_q(matrix, qvals):
    out = {}
    dq = qvals[:, None] - qvals[None, :]
    for n in np.unique(dq[matrix != 0]):
        out[int(n)] = np.where(dq == n, matrix, 0)
    return out


def _small_spec():
    X, Z = pauli_x(D), pauli_z(D)
    # Q per site: (2 - X - X^dag)/3, diagonal in the X eigenbasis
    q_op = qp_basis_change((identity(D) * 2 - X - X.dagger()) * Fraction(1, 3))
    local_q = np.diag(_to_int(q_op.entries))
    Zq = qp_basis_change(Z)
    Zq_dag = qp_basis_change(Z.dagger())
    pair = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(_kron_exact(Zq, Zq_dag), _kron_exact(Zq_dag, Zq))]
    V = _to_int(pair)
    qvals = np.array([local_q[a] + local_q[b] for a, b in product(range(D), repeat=2)])
    blocks = _split_by_q(V, qvals)
    return TOperatorSpec(SMALL, tuple(sorted(blocks)), -1, "3J", local_q, 2, blocks, V)


def _large_spec():
    X, Z = pauli_x(D), pauli_z(D)
    # misaligned-bond counter (2 - Z Z^dag - Z^dag Z)/3, diagonal in the clock basis
    zz = _kron_exact(Z, Z.dagger())
    zz2 = _kron_exact(Z.dagger(), Z)
    bond_q = _to_int(
        [[((2 if i == j else 0) - zz[i][j] - zz2[i][j]) * Fraction(1, 3) for j in range(D * D)] for i in range(D * D)]
    )
    q_pair = np.diag(bond_q).reshape(D, D)
    flip = -_to_int([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(X.entries, X.dagger().entries)])
    configs = np.array(list(product(range(D), repeat=5)))
    qvals = sum(q_pair[configs[:, 0], configs[:, s]] for s in range(1, 5))
    V = np.kron(flip, np.eye(D**4, dtype=np.int64))
    blocks = _split_by_q(V, qvals)
    return TOperatorSpec(LARGE, tuple(sorted(blocks)), 1, "2lambda", q_pair, 5, blocks, V)


_CACHE = {}


def decompose_T(regime):
    """TOperatorSpec for ``"small"`` or ``"large"`` coupling."""
    if regime not in (SMALL, LARGE):
        raise ValueError(f"regime must be 'small' or 'large', got {regime!r}")
    if regime not in _CACHE:
        _CACHE[regime] = _small_spec() if regime == SMALL else _large_spec()
    return _CACHE[regime]
