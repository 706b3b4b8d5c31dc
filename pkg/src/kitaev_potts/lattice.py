"""Torus geometry, Kitaev/Potts Hamiltonians and the vertex-label mapping.

Vertices sit at (x, y) with x, y in Z_L, index ``x + L*y``.  Edge ``2*v``
is the horizontal edge from v to v + x-hat, edge ``2*v + 1`` the vertical edge
from v to v + y-hat.  Each edge carries an orientation flag: ``forward`` means
it points along +x (horizontal) or +y (vertical).

The Potts term couples perpendicular edges meeting at a vertex (the corner
pairs of the medial lattice).  For a pair (a, b) at vertex s it uses
``sigma_a^{e_a} sigma_b^{-e_b}`` with ``e = +1`` for an edge pointing into s
and ``-1`` otherwise; with the bipartite orientation every pair reduces to the
plain ``sigma_a sigma_b^dagger``.  In the vertex-label basis each pair acts as
``Z_i^dagger Z_j`` on the two far endpoints, which are diagonal neighbours on
the same checkerboard sublattice.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import Cyclo, SparseOperator, pauli_x, pauli_z

__all__ = [
    "LatticeError",
    "DisconnectedGraphError",
    "Couplings",
    "TorusLattice",
    "BondGraph",
    "build_torus",
    "stabilizers",
    "string_operators",
    "build_kitaev_hamiltonian",
    "build_potts_term",
    "build_full_hamiltonian",
    "build_mapped_hamiltonian",
    "sublattice_graph",
    "r_basis_state",
    "kitaev_ground_state",
]


class LatticeError(ValueError):
    pass


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True)
class Couplings:
    """Vertex coupling J, plaquette coupling K and Potts coupling lam."""

    J: float = 1.0
    K: float = 1.0
    lam: float = 0.0

    @property
    def x(self):
        """Small-coupling expansion parameter 2 lam / (9 J)."""
        if self.J == 0:
            raise ZeroDivisionError("x is undefined for J = 0")
        return _ratio(2 * self.lam, 9 * self.J)

    @property
    def h(self):
        """Large-coupling expansion parameter J / (2 lam)."""
        if self.lam == 0:
            raise ZeroDivisionError("h is undefined for lam = 0")
        return _ratio(self.J, 2 * self.lam)


def _exact(*vals):
    return all(isinstance(v, (int, Fraction)) for v in vals)


def _ratio(a, b):
    return Fraction(a) / Fraction(b) if _exact(a, b) else a / b


@dataclass(frozen=True)
class TorusLattice:
    L: int
    orientation: str = "uniform"
    forward: tuple = field(repr=False, default=())

    @property
    def N(self):
        return self.L * self.L

    @property
    def num_vertices(self):
        return self.N

    @property
    def num_plaquettes(self):
        return self.N

    @property
    def num_edges(self):
        return 2 * self.N

    def vertex(self, x, y):
        L = self.L
        return (x % L) + L * (y % L)

    def coords(self, v):
        return v % self.L, v // self.L

    def h_edge(self, x, y):
        return 2 * self.vertex(x, y)

    def v_edge(self, x, y):
        return 2 * self.vertex(x, y) + 1

    def endpoints(self, e):
        """(tail, head) in the +x / +y sense, before applying the orientation flag."""
        v, vertical = divmod(e, 2)
        x, y = self.coords(v)
        return (v, self.vertex(x, y + 1)) if vertical else (v, self.vertex(x + 1, y))

    def edges(self):
        """List of (tail, head, forward) with tail/head following the actual orientation."""
        out = []
        for e in range(self.num_edges):
            a, b = self.endpoints(e)
            out.append((a, b, True) if self.forward[e] else (b, a, False))
        return out

    def star(self, v):
        """The four edges at v as a dict W, E, S, N -> (edge, inward)."""
        x, y = self.coords(v)
        w, e = self.h_edge(x - 1, y), self.h_edge(x, y)
        s, n = self.v_edge(x, y - 1), self.v_edge(x, y)
        f = self.forward
        return {
            "W": (w, f[w]),
            "E": (e, not f[e]),
            "S": (s, f[s]),
            "N": (n, not f[n]),
        }

    def plaquette(self, p):
        """Edges of plaquette p (lower-left corner p) in counterclockwise order with traversal agreement."""
        x, y = self.coords(p)
        f = self.forward
        b, r = self.h_edge(x, y), self.v_edge(x + 1, y)
        t, l = self.h_edge(x, y + 1), self.v_edge(x, y)
        return [(b, f[b]), (r, f[r]), (t, not f[t]), (l, not f[l])]

    def sublattice(self, v):
        x, y = self.coords(v)
        return (x + y) % 2

    def sublattices(self):
        a = [v for v in range(self.N) if self.sublattice(v) == 0]
        b = [v for v in range(self.N) if self.sublattice(v) == 1]
        return a, b

    def corner_pairs(self):
        """Perpendicular edge pairs sharing a vertex: (vertex, (a, in_a), (b, in_b))."""
        out = []
        for v in range(self.N):
            st = self.star(v)
            for p, q in (("W", "S"), ("S", "E"), ("E", "N"), ("N", "W")):
                out.append((v, st[p], st[q]))
        return out

    def other_end(self, e, v):
        a, b = self.endpoints(e)
        return b if a == v else a


def build_torus(L, orientation="uniform"):
    """Periodic L x L square lattice with N = L^2 vertices, N plaquettes, 2N edges.

    ``orientation='uniform'`` points every horizontal edge along +x and every
    vertical edge along +y.  ``'bipartite'`` points every edge into the even
    (x + y even) endpoint.
    """
    if not isinstance(L, (int, np.integer)) or L < 2 or L % 2:
        raise LatticeError(f"L must be an even integer >= 2, got {L!r}")
    L = int(L)
    tmp = TorusLattice(L, orientation, tuple([True] * (2 * L * L)))
    if orientation == "uniform":
        fwd = [True] * (2 * L * L)
    elif orientation == "bipartite":
        fwd = []
        for e in range(2 * L * L):
            _, head = tmp.endpoints(e)
            fwd.append(tmp.sublattice(head) == 0)
    else:
        raise LatticeError(f"unknown orientation {orientation!r}")
    return TorusLattice(L, orientation, tuple(fwd))


def _sigma_power(kind, d, k):
    base = pauli_x(d) if kind == "X" else pauli_z(d)
    return base ** (k % d)


def stabilizers(lat, d):
    """Vertex operators A_s and plaquette operators B_p as single-term SparseOperators."""
    n = lat.num_edges
    A = []
    for v in range(lat.N):
        factors = {e: _sigma_power("X", d, 1 if inward else -1) for e, inward in lat.star(v).values()}
        A.append(SparseOperator(n, d, [(1, factors)]))
    B = []
    for p in range(lat.N):
        factors = {e: _sigma_power("Z", d, 1 if agree else -1) for e, agree in lat.plaquette(p)}
        B.append(SparseOperator(n, d, [(1, factors)]))
    return A, B


def string_operators(lat, d):
    """Non-contractible loop operators (T_z1, T_z2, T_x1, T_x2).

    T_z1 runs along the row y = 0, T_z2 along the column x = 0.  T_x1 acts on
    the horizontal edges h(0, y), i.e. the dual loop crossing T_z1 once; T_x2
    acts on the vertical edges v(x, 0) crossing T_z2 once.
    """
    n, L, f = lat.num_edges, lat.L, lat.forward

    def loop(kind, edges):
        factors = {e: _sigma_power(kind, d, 1 if f[e] else -1) for e in edges}
        return SparseOperator(n, d, [(1, factors)])

    tz1 = loop("Z", [lat.h_edge(x, 0) for x in range(L)])
    tz2 = loop("Z", [lat.v_edge(0, y) for y in range(L)])
    tx1 = loop("X", [lat.h_edge(0, y) for y in range(L)])
    tx2 = loop("X", [lat.v_edge(x, 0) for x in range(L)])
    return tz1, tz2, tx1, tx2


def build_kitaev_hamiltonian(lat, d, J, K):
    """-J sum_s (A_s + A_s^dag) - K sum_p (B_p + B_p^dag)."""
    A, B = stabilizers(lat, d)
    terms = []
    for op in A:
        terms += [(-J * c, f) for c, f in (op + op.dagger()).terms]
    for op in B:
        terms += [(-K * c, f) for c, f in (op + op.dagger()).terms]
    return SparseOperator(lat.num_edges, d, terms)


def build_potts_term(lat, lam, d=3):
    """-(lam / 2d) sum_{corner pairs} sum_r [(s_a^{e_a} s_b^{-e_b})^r + h.c.]."""
    n = lat.num_edges
    Z = pauli_z(d)
    terms = []
    pref = -Fraction(1, 2 * d) * lam if isinstance(lam, (int, Fraction)) else -lam / (2 * d)
    for _, (a, in_a), (b, in_b) in lat.corner_pairs():
        ea = 1 if in_a else -1
        eb = 1 if in_b else -1
        base = {a: Z ** (ea % d), b: Z ** ((-eb) % d)}
        for r in range(d):
            pw = {s: op ** r for s, op in base.items()}
            term = SparseOperator(n, d, [(1, pw)])
            for c, fct in (term + term.dagger()).terms:
                terms.append((pref * c, fct))
    return SparseOperator(n, d, terms)


def build_full_hamiltonian(lat, couplings, d=3):
    """Kitaev model plus lam-weighted Potts interaction on corner edge pairs."""
    c = couplings
    H = build_kitaev_hamiltonian(lat, d, c.J, c.K)
    if c.lam != 0:
        H = H + build_potts_term(lat, c.lam, d)
    return H


# ---------------------------------------------------------------------------
# mapped (vertex-label) model


@dataclass(frozen=True)
class BondGraph:
    """Sites 0..num_sites-1 with a bond list; repeated bonds are allowed."""

    num_sites: int
    bonds: tuple
    positions: tuple = ()

    def neighbors(self):
        nb = {i: set() for i in range(self.num_sites)}
        for i, j in self.bonds:
            nb[i].add(j)
            nb[j].add(i)
        return nb

    def is_connected(self):
        if self.num_sites == 0:
            return False
        nb = self.neighbors()
        seen, stack = {0}, [0]
        while stack:
            for j in nb[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.num_sites


def sublattice_graph(lat, which=0):
    """Mapped-model graph on one checkerboard sublattice.

    One bond per plaquette diagonal joining two vertices of the sublattice;
    each such bond collects the two corner pairs that produce it.
    """
    members = [v for v in range(lat.N) if lat.sublattice(v) == which]
    index = {v: i for i, v in enumerate(members)}
    bonds = []
    for p in range(lat.N):
        x, y = lat.coords(p)
        corners = [lat.vertex(x, y), lat.vertex(x + 1, y + 1), lat.vertex(x + 1, y), lat.vertex(x, y + 1)]
        for u, w in ((corners[0], corners[1]), (corners[2], corners[3])):
            if lat.sublattice(u) == which:
                bonds.append((index[u], index[w]))
    positions = tuple(lat.coords(v) for v in members)
    return BondGraph(len(members), tuple(bonds), positions)


def build_mapped_hamiltonian(graph, J, lam):
    """-J sum_i (X_i + X_i^dag) - (lam/3) sum_<ij> sum_r [(Z_i Z_j^dag)^r + (Z_j Z_i^dag)^r].

    The r-sum is expanded exactly: per bond a constant -2 lam/3 plus
    -(2 lam/3)(Z_i Z_j^dag + Z_i^dag Z_j).
    """
    if not graph.is_connected():
        raise DisconnectedGraphError("mapped Hamiltonian needs a connected graph")
    d = 3
    n = graph.num_sites
    X, Z = pauli_x(d), pauli_z(d)
    exact = _exact(J, lam)
    third = Fraction(2, 3) if exact else 2.0 / 3.0
    terms = []
    for i in range(n):
        terms.append((-J, {i: X}))
        terms.append((-J, {i: X.dagger()}))
    for i, j in graph.bonds:
        terms.append((-third * lam, {}))
        terms.append((-third * lam, {i: Z, j: Z.dagger()}))
        terms.append((-third * lam, {i: Z.dagger(), j: Z}))
    return SparseOperator(n, d, terms)


def r_basis_state(lat, labels, d=3):
    """|r> = prod_s A_s^{r_s} |0...0> as an exact {config: coeff} dict."""
    A, _ = stabilizers(lat, d)
    cfg = np.zeros((1, lat.num_edges), dtype=np.int64)
    expo = np.zeros(1, dtype=np.int64)
    for v, r in enumerate(labels):
        for _ in range(r % d):
            cfg, ex = A[v].monomial_action(cfg)
            expo = (expo + ex) % d
    return {tuple(int(c) for c in cfg[0]): Cyclo.root(d, int(expo[0]))}


def kitaev_ground_state(lat, d):
    """prod_s (1 + A_s + ... + A_s^{d-1}) |0...0> as an exact state dict."""
    A, _ = stabilizers(lat, d)
    state = {tuple([0] * lat.num_edges): Cyclo.rational(d, 1)}
    for op in A:
        new = dict(state)
        cur = state
        for _ in range(d - 1):
            cur = op.apply(cur)
            for k, v in cur.items():
                new[k] = new.get(k, 0) + v
        state = {k: v for k, v in new.items() if v}
    return state
