"""Exact diagonalization of small systems."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .algebra import Cyclo, SparseOperator, basis_config, basis_index
from .lattice import (
    BondGraph,
    Couplings,
    build_full_hamiltonian,
    build_mapped_hamiltonian,
    build_torus,
    stabilizers,
    string_operators,
    sublattice_graph,
)

__all__ = [
    "SpectrumResult",
    "MappingReport",
    "ScalingReport",
    "DimensionTooLargeError",
    "NonHermitianError",
    "DENSE_LIMIT",
    "ITERATIVE_LIMIT",
    "to_matrix",
    "ground_state",
    "blocked_spectrum",
    "verify_mapping",
    "topological_degeneracy",
    "degeneracy_report",
    "rayleigh_quotient_exact",
    "series_vs_ed",
    "open_grid_graph",
]

DENSE_LIMIT = 20_000
ITERATIVE_LIMIT = 10_000_000


class DimensionTooLargeError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    vector: np.ndarray | None = None
    method: str = "dense"
    tolerance: float = 1e-10
    iterations: int | None = None
    residual: float = 0.0

    @property
    def energy(self):
        return float(self.eigenvalues[0])


def to_matrix(H):
    """scipy CSR matrix of a SparseOperator; real when the operator is real."""
    if sp.issparse(H):
        return H.tocsr()
    if isinstance(H, np.ndarray):
        return sp.csr_matrix(H)
    try:
        return H.to_sparse(float).tocsr()
    except ValueError:
        return H.to_sparse(complex).tocsr()


def _check_hermitian(H, M):
    if isinstance(H, SparseOperator):
        if not H.is_hermitian():
            raise NonHermitianError("operator is not Hermitian")
    elif abs(M - M.conj().T).max() > 1e-12:
        raise NonHermitianError("matrix is not Hermitian")


def ground_state(H, method="auto", tol=1e-10, num=1, seed=1234, check_hermitian=True):
    """Lowest ``num`` eigenpairs; ``method`` is 'dense', 'iterative' or 'auto'."""
    M = to_matrix(H)
    dim = M.shape[0]
    if check_hermitian:
        _check_hermitian(H, M)
    if method == "auto":
        method = "dense" if dim <= 2000 else "iterative"
    if method == "dense":
        if dim > DENSE_LIMIT:
            raise DimensionTooLargeError(f"dense limit is {DENSE_LIMIT}, got {dim}")
        w, v = np.linalg.eigh(M.toarray())
        vec = v[:, 0]
        res = float(np.linalg.norm(M @ vec - w[0] * vec))
        return SpectrumResult(w, vec, "dense", tol, None, res)
    if method == "iterative":
        if dim > ITERATIVE_LIMIT:
            raise DimensionTooLargeError(f"iterative limit is {ITERATIVE_LIMIT}, got {dim}")
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim)
        if np.iscomplexobj(M.data):
            v0 = v0.astype(complex)
        counter = {"n": 0}

        def mv(x):
            counter["n"] += 1
            return M @ x

        op = sla.LinearOperator(M.shape, matvec=mv, dtype=M.dtype)
        k = min(num, dim - 1)
        w, v = sla.eigsh(op, k=k, which="SA", v0=v0, tol=0, ncv=min(dim, max(2 * k + 1, 20)))
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        vec = v[:, 0]
        res = float(np.linalg.norm(M @ vec - w[0] * vec))
        return SpectrumResult(w, vec, "iterative", tol, counter["n"], res)
    raise ValueError(f"unknown method {method!r}")


def _all_configs(num_sites, d):
    return np.array(np.unravel_index(np.arange(d**num_sites), (d,) * num_sites)).T


def blocked_spectrum(H, charges, d):
    """Full spectrum of H split by the eigenvalues of commuting diagonal monomials.

    ``charges`` are single-term diagonal SparseOperators.  Returns a dict
    label -> (indices, eigenvalues, eigenvectors).
    """
    M = to_matrix(H)
    configs = _all_configs(H.num_sites, d)
    labels = []
    for c in charges:
        new, expo = c.monomial_action(configs)
        if not np.array_equal(new, configs):
            raise ValueError("charges must be diagonal")
        labels.append(expo % d)
    labels = np.stack(labels, axis=1) if labels else np.zeros((len(configs), 0), dtype=int)
    out = {}
    keys, inverse = np.unique(labels, axis=0, return_inverse=True)
    for b, key in enumerate(keys):
        idx = np.nonzero(inverse.ravel() == b)[0]
        block = M[idx][:, idx].toarray()
        w, v = np.linalg.eigh(block)
        out[tuple(int(k) for k in key)] = (idx, w, v)
    return out


@dataclass
class MappingReport:
    couplings: tuple
    e_full: float
    e_sublattices: tuple
    constant: float
    difference: float
    tolerance: float
    bp_expectation: float
    ground_degeneracy: int
    sector_energies: dict = field(default_factory=dict)
    sectors_consistent: bool = True

    @property
    def passed(self):
        return abs(self.difference) <= self.tolerance and abs(self.bp_expectation - 1) <= self.tolerance and self.sectors_consistent

    def to_json(self):
        return {
            "couplings": {"J": self.couplings[0], "K": self.couplings[1], "lambda": self.couplings[2]},
            "e_full": self.e_full,
            "e_sublattice_A": self.e_sublattices[0],
            "e_sublattice_B": self.e_sublattices[1],
            "plaquette_constant": self.constant,
            "difference": self.difference,
            "tolerance": self.tolerance,
            "bp_expectation": self.bp_expectation,
            "ground_degeneracy": self.ground_degeneracy,
            "sector_energies": {f"{a},{b}": e for (a, b), e in self.sector_energies.items()},
            "sectors_consistent": self.sectors_consistent,
            "passed": self.passed,
        }


def _full_blocks(lat, couplings, d=3):
    H = build_full_hamiltonian(lat, couplings, d)
    _, B = stabilizers(lat, d)
    tz1, tz2, _, _ = string_operators(lat, d)
    # the last plaquette is fixed by prod B_p = 1
    return blocked_spectrum(H, B[:-1] + [tz1, tz2], d), len(B) - 1


def verify_mapping(J, K, lam, L=2, orientation="uniform", tol=1e-9, degeneracy_tol=1e-9):
    """E0(full) = E0(H_A) + E0(H_B) - 2 K N, plus B_p and string-sector checks."""
    if L != 2:
        raise ValueError("verify_mapping supports L = 2 only")
    lat = build_torus(L, orientation)
    blocks, nb = _full_blocks(lat, Couplings(J, K, lam))
    e_full = min(float(w[0]) for _, w, _ in blocks.values())
    ground = [(key, int(np.sum(w < e_full + degeneracy_tol))) for key, (_, w, _) in blocks.items() if w[0] < e_full + degeneracy_tol]
    # B_p eigenvalue of a block is omega^charge; the ground multiplet must have all charges 0
    bp = 1.0 if all(all(c == 0 for c in key[:nb]) for key, _ in ground) else 0.0
    sector = {}
    for key, (_, w, _) in blocks.items():
        if all(c == 0 for c in key[:nb]):
            sector[key[nb:]] = float(w[0])
    eA = ground_state(build_mapped_hamiltonian(sublattice_graph(lat, 0), J, lam), "dense").energy
    eB = ground_state(build_mapped_hamiltonian(sublattice_graph(lat, 1), J, lam), "dense").energy
    const = -2 * K * lat.N
    consistent = abs(min(sector.values()) - e_full) <= tol
    return MappingReport(
        (J, K, lam), e_full, (eA, eB), const, e_full - (eA + eB + const), tol, bp, sum(c for _, c in ground), sector, consistent
    )


def degeneracy_report(L=2, d=3, J=1, K=1, lam=0, tol=1e-9):
    """Ground multiplet size and the spread of the lowest d^2 levels."""
    lat = build_torus(L)
    if lam and d != 3:
        raise ValueError("the Potts perturbation is defined for d = 3")
    H = build_full_hamiltonian(lat, Couplings(J, K, lam), d)
    _, B = stabilizers(lat, d)
    tz1, tz2, _, _ = string_operators(lat, d)
    blocks = blocked_spectrum(H, B[:-1] + [tz1, tz2], d)
    levels = np.sort(np.concatenate([w for _, w, _ in blocks.values()]))
    e0 = levels[0]
    count = int(np.sum(levels < e0 + tol))
    return {"degeneracy": count, "e0": float(e0), "splitting": float(levels[d * d - 1] - e0), "levels": levels[: d * d + 1].tolist()}


def topological_degeneracy(L=2, d=3, lam=0, tol=1e-9, J=1, K=1):
    return degeneracy_report(L, d, J, K, lam, tol)["degeneracy"]


# ---------------------------------------------------------------------------
# series versus exact energies


def _fraction_vector(vec):
    return [Fraction(float(v)) for v in np.real(vec)]


def rayleigh_quotient_exact(M, vec):
    """v.Mv / v.v with exact rationals; M must hold exactly representable rationals.

    ``M`` is given as a dict {(i, j): Fraction}.
    """
    v = _fraction_vector(vec)
    num = Fraction(0)
    for (i, j), m in M.items():
        if v[i] and v[j]:
            num += v[i] * m * v[j]
    den = sum(c * c for c in v)
    return num / den


def _exact_matrix(op):
    """{(i, j): Fraction} for a SparseOperator with rational matrix elements."""
    out = {}
    for j in range(op.d**op.num_sites):
        for cfg, amp in op.apply_basis(basis_config(j, op.num_sites, op.d)).items():
            q = amp.to_fraction() if isinstance(amp, Cyclo) else Fraction(amp)
            out[(basis_index(cfg, op.d), j)] = q
    return out


@dataclass
class ScalingReport:
    slope: float
    xs: list
    errors: list
    order: int

    @property
    def certified(self):
        return self.slope >= self.order + 1 - 0.3


def series_vs_ed(graph, series, x_grid=None, order=None):
    """Log-log slope of |E_series(x) - E_ED(x)| for one cluster of the mapped model.

    ``graph`` is a BondGraph; ``series`` is the cluster's PCUT vacuum series
    in units of 3J without constants (as from ``cluster_energy_series``).
    The exact energy is an exact Rayleigh quotient of the dense ground vector
    of H/(3J) at J = 1, with the constants -2/3 per site and -x per bond
    added back to the series.
    """
    if x_grid is None:
        x_grid = [Fraction(1, 1000) * Fraction(10) ** Fraction(k, 7) for k in range(8)]
    xs = [Fraction(x).limit_denominator(10**9) for x in x_grid]
    if len(xs) < 2 or min(xs) == max(xs):
        raise ValueError("fit window is degenerate")
    order = series.order if order is None else order
    n, nb = graph.num_sites, len(graph.bonds)
    errors = []
    for x in xs:
        if x == 0:
            raise ValueError("x = 0 cannot enter a log-log fit")
        lam = Fraction(9, 2) * x
        H = build_mapped_hamiltonian(graph, Fraction(1, 3), lam / 3)
        exact = _exact_matrix(H)
        vec = ground_state(H, "dense", check_hermitian=False).vector
        e_ed = rayleigh_quotient_exact(exact, vec)
        e_ser = series.truncate(order)(x) - Fraction(2, 3) * n - x * nb
        errors.append(abs(e_ser - e_ed))
    lx = np.log([float(x) for x in xs])
    ly = np.log([float(e) if e else 1e-300 for e in errors])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return ScalingReport(slope, [float(x) for x in xs], [float(e) for e in errors], order)


def open_grid_graph(nx, ny):
    """Open nx x ny patch of the square lattice as a BondGraph."""
    idx = {(x, y): i for i, (x, y) in enumerate((x, y) for x in range(nx) for y in range(ny))}
    bonds = []
    for (x, y), i in idx.items():
        if (x + 1, y) in idx:
            bonds.append((i, idx[(x + 1, y)]))
        if (x, y + 1) in idx:
            bonds.append((i, idx[(x, y + 1)]))
    return BondGraph(len(idx), tuple(bonds), tuple(idx))
