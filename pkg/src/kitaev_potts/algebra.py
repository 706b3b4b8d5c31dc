"""Exact generalized Pauli (Weyl) operators for qudits.

Numbers live in the cyclotomic field Q(omega), omega = exp(2 pi i / d), stored
as integer coordinates over the power basis 1, omega, ..., omega^(phi(d)-1)
with a common positive denominator.  For d = 2 this is just Q, for d = 3 it is
a + b*omega with omega^2 = -1 - omega, for d = 4 the Gaussian rationals.

Many-body operators are sums of tensor-product terms (``SparseOperator``).
Floating-point coefficients are allowed so that Hamiltonians with numeric
couplings share the same container; exact checks use exact coefficients.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Cyclo",
    "LocalOp",
    "SparseOperator",
    "InvalidDimensionError",
    "generalized_pauli",
    "pauli_x",
    "pauli_z",
    "conjugation_u",
    "identity",
    "embed",
    "basis_index",
    "basis_config",
]


class InvalidDimensionError(ValueError):
    """Raised for a local dimension d < 2."""


def _check_d(d):
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"local dimension must be an integer >= 2, got {d!r}")
    return int(d)


# ---------------------------------------------------------------------------
# cyclotomic arithmetic


def _poly_divmod(num, den):
    """Integer polynomial division by a monic divisor, coefficients low -> high."""
    num = list(num)
    out = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    rem = num[: len(den) - 1]
    return out, rem


@lru_cache(maxsize=None)
def cyclotomic_polynomial(d):
    """Integer coefficients (low -> high) of the d-th cyclotomic polynomial."""
    poly = [-1] + [0] * (d - 1) + [1]
    for m in range(1, d):
        if d % m == 0:
            poly, rem = _poly_divmod(poly, cyclotomic_polynomial(m))
            assert not any(rem)
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_table(d):
    """omega^k in the power basis, for k = 0 .. d-1."""
    phi = cyclotomic_polynomial(d)
    deg = len(phi) - 1
    rows = []
    vec = [1] + [0] * (deg - 1)
    for _ in range(d):
        rows.append(tuple(vec))
        # multiply by omega and reduce with the monic relation
        top = vec[-1]
        vec = [0] + vec[:-1]
        if top:
            vec = [v - top * p for v, p in zip(vec, phi[:-1])]
    return tuple(rows)


class Cyclo:
    """Exact element of Q(omega_d).

    ``Cyclo.root(d, k)`` is omega^k; ``Cyclo.rational(d, q)`` embeds q.
    Arithmetic with ints and Fractions stays exact; mixing with float or
    complex returns a Python complex.
    """

    __slots__ = ("d", "num", "den", "_hash")

    def __init__(self, d, num, den=1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = tuple(-n for n in num), -den
        g = den
        for n in num:
            g = math.gcd(g, n)
            if g == 1:
                break
        if g > 1:
            num = tuple(n // g for n in num)
            den //= g
        self.d = d
        self.num = tuple(num)
        self.den = den
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def rational(cls, d, q=0):
        q = Fraction(q)
        deg = len(cyclotomic_polynomial(d)) - 1
        return cls(d, (q.numerator,) + (0,) * (deg - 1), q.denominator)

    @classmethod
    def root(cls, d, k=1):
        return cls(d, _power_table(d)[k % d], 1)

    @classmethod
    def from_power_coeffs(cls, d, coeffs):
        """Build sum_k coeffs[k] * omega^k from rational coefficients."""
        table = _power_table(d)
        den = 1
        for c in coeffs:
            den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
        acc = [0] * len(table[0])
        for k, c in enumerate(coeffs):
            c = Fraction(c)
            if c:
                n = c.numerator * (den // c.denominator)
                for i, t in enumerate(table[k % d]):
                    acc[i] += n * t
        return cls(d, tuple(acc), den)

    # predicates ---------------------------------------------------------
    def is_zero(self):
        return not any(self.num)

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self):
        return not any(self.num[1:])

    def root_exponent(self):
        """k if self == omega^k exactly, else None."""
        table = _power_table(self.d)
        if self.den != 1:
            return None
        for k, row in enumerate(table):
            if row == self.num:
                return k
        return None

    # conversions --------------------------------------------------------
    def __complex__(self):
        w = cmath.exp(2j * math.pi / self.d)
        return sum(n * w**k for k, n in enumerate(self.num)) / self.den

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return Fraction(self.num[0], self.den)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Cyclo):
            if other.d != self.d:
                raise ValueError("cannot mix different cyclotomic fields")
            return other
        if isinstance(other, (int, Rational)):
            return Cyclo.rational(self.d, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) + other
        den = self.den * o.den // math.gcd(self.den, o.den)
        a, b = den // self.den, den // o.den
        return Cyclo(self.d, tuple(a * x + b * y for x, y in zip(self.num, o.num)), den)

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.d, tuple(-x for x in self.num), self.den)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) * other
        deg = len(self.num)
        conv = [0] * (2 * deg - 1)
        for i, x in enumerate(self.num):
            if x:
                for j, y in enumerate(o.num):
                    if y:
                        conv[i + j] += x * y
        table = _power_table(self.d)
        acc = [0] * deg
        for k, c in enumerate(conv):
            if c:
                if k < deg:
                    acc[k] += c
                else:
                    for i, t in enumerate(table[k % self.d]):
                        acc[i] += c * t
        return Cyclo(self.d, tuple(acc), self.den * o.den)

    __rmul__ = __mul__

    def conjugate(self):
        table = _power_table(self.d)
        acc = [0] * len(self.num)
        for k, n in enumerate(self.num):
            if n:
                for i, t in enumerate(table[(-k) % self.d]):
                    acc[i] += n * t
        return Cyclo(self.d, tuple(acc), self.den)

    def inverse(self):
        """Multiplicative inverse by solving the multiplication-matrix system over Q."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        k = self.root_exponent()
        if k is not None:
            return Cyclo.root(self.d, -k)
        deg = len(self.num)
        basis = [Cyclo(self.d, tuple(int(i == j) for i in range(deg))) for j in range(deg)]
        cols = [(self * b) for b in basis]
        mat = [[Fraction(cols[j].num[i], cols[j].den) for j in range(deg)] + [Fraction(int(i == 0))]
               for i in range(deg)]
        for c in range(deg):
            piv = next(r for r in range(c, deg) if mat[r][c] != 0)
            mat[c], mat[piv] = mat[piv], mat[c]
            pv = mat[c][c]
            mat[c] = [v / pv for v in mat[c]]
            for r in range(deg):
                if r != c and mat[r][c] != 0:
                    f = mat[r][c]
                    mat[r] = [a - f * b for a, b in zip(mat[r], mat[c])]
        sol = [mat[i][deg] for i in range(deg)]
        den = math.lcm(*(s.denominator for s in sol))
        return Cyclo(self.d, tuple(s.numerator * (den // s.denominator) for s in sol), den)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) / other
        return self * o.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = Cyclo.rational(self.d, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, Cyclo) else other
        if o is None:
            try:
                return complex(self) == complex(other)
            except TypeError:
                return NotImplemented
        return self.d == o.d and self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(Fraction(self.num[0], self.den))
            else:
                self._hash = hash((self.d, self.num, self.den))
        return self._hash

    def __repr__(self):
        parts = []
        for k, n in enumerate(self.num):
            if n:
                parts.append(f"{n}" if k == 0 else f"{n}*w^{k}")
        body = " + ".join(parts) or "0"
        return f"Cyclo[d={self.d}]({body})" + (f"/{self.den}" if self.den != 1 else "")


def _as_exact(value, d):
    """Coerce ints/Fractions to Cyclo; leave floats and complex untouched."""
    if isinstance(value, Cyclo):
        return value
    if isinstance(value, (int, Rational)):
        return Cyclo.rational(d, value)
    return value


def _is_zero(value):
    if isinstance(value, Cyclo):
        return value.is_zero()
    return value == 0


def _to_complex(value):
    return complex(value)


# ---------------------------------------------------------------------------
# single-site operators


class LocalOp:
    """Exact d x d matrix with entries in Q(omega_d)."""

    __slots__ = ("d", "entries", "_columns", "_monomial", "_hash")

    def __init__(self, d, entries):
        d = _check_d(d)
        rows = tuple(tuple(_as_exact(e, d) for e in row) for row in entries)
        if len(rows) != d or any(len(r) != d for r in rows):
            raise ValueError(f"expected a {d}x{d} matrix")
        for row in rows:
            for e in row:
                if not isinstance(e, Cyclo):
                    raise TypeError("LocalOp entries must be exact")
        self.d = d
        self.entries = rows
        self._columns = None
        self._monomial = False
        self._hash = None

    @classmethod
    def from_map(cls, d, mapping):
        """Build from {(row, col): value}."""
        zero = Cyclo.rational(d, 0)
        ent = [[zero] * d for _ in range(d)]
        for (i, j), v in mapping.items():
            ent[i][j] = _as_exact(v, d)
        return cls(d, ent)

    @property
    def columns(self):
        """Per column, the nonzero (row, value) pairs."""
        if self._columns is None:
            self._columns = tuple(
                tuple((i, self.entries[i][j]) for i in range(self.d) if self.entries[i][j])
                for j in range(self.d)
            )
        return self._columns

    @property
    def monomial_form(self):
        """(perm, exponents) if every column holds exactly one power of omega, else None.

        The operator then maps |j> to omega^exponents[j] |perm[j]>.
        """
        if self._monomial is False:
            perm, expo = [], []
            for col in self.columns:
                if len(col) != 1:
                    self._monomial = None
                    break
                k = col[0][1].root_exponent()
                if k is None:
                    self._monomial = None
                    break
                perm.append(col[0][0])
                expo.append(k)
            else:
                self._monomial = (tuple(perm), tuple(expo))
        return self._monomial

    def __matmul__(self, other):
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        d = self.d
        zero = Cyclo.rational(d, 0)
        out = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = zero
                for k in range(d):
                    a = self.entries[i][k]
                    if a:
                        b = other.entries[k][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LocalOp(d, out)

    def __mul__(self, scalar):
        return LocalOp(self.d, [[e * scalar for e in row] for row in self.entries])

    __rmul__ = __mul__

    def __add__(self, other):
        return LocalOp(self.d, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other):
        return self + other * (-1)

    def __pow__(self, n):
        if n < 0:
            if not self.is_unitary():
                raise ValueError("negative powers need a unitary operator")
            return self.dagger() ** (-n)
        out = identity(self.d)
        for _ in range(n):
            out = out @ self
        return out

    def dagger(self):
        d = self.d
        return LocalOp(d, [[self.entries[j][i].conjugate() for j in range(d)] for i in range(d)])

    def is_unitary(self):
        return self @ self.dagger() == identity(self.d)

    def is_zero(self):
        return all(e.is_zero() for row in self.entries for e in row)

    def is_identity(self):
        return self == identity(self.d)

    def first_nonzero(self):
        for row in self.entries:
            for e in row:
                if e:
                    return e
        return None

    def to_numpy(self):
        return np.array([[complex(e) for e in row] for row in self.entries], dtype=complex)

    def apply(self, j):
        """Image of basis vector |j> as {i: value}."""
        return dict(self.columns[j])

    def __eq__(self, other):
        return isinstance(other, LocalOp) and self.d == other.d and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.d, self.entries))
        return self._hash

    def __repr__(self):
        return f"LocalOp(d={self.d}, {[[str(e) for e in r] for r in self.entries]})"


@lru_cache(maxsize=None)
def identity(d):
    d = _check_d(d)
    return LocalOp.from_map(d, {(j, j): 1 for j in range(d)})


@lru_cache(maxsize=None)
def pauli_x(d):
    """Cyclic shift: X|j> = |j+1 mod d>."""
    d = _check_d(d)
    return LocalOp.from_map(d, {((j + 1) % d, j): 1 for j in range(d)})


@lru_cache(maxsize=None)
def pauli_z(d):
    """Clock: Z|j> = omega^j |j>."""
    d = _check_d(d)
    return LocalOp.from_map(d, {(j, j): Cyclo.root(d, j) for j in range(d)})


def generalized_pauli(kind, d):
    kind = str(kind).upper()
    if kind == "X":
        return pauli_x(d)
    if kind == "Z":
        return pauli_z(d)
    raise ValueError(f"kind must be 'X' or 'Z', got {kind!r}")


@lru_cache(maxsize=None)
def conjugation_u(d):
    """u = sum_k |(d-k) mod d><k|, which sends X -> X^dagger and Z -> Z^dagger."""
    d = _check_d(d)
    return LocalOp.from_map(d, {((d - k) % d, k): 1 for k in range(d)})


# ---------------------------------------------------------------------------
# many-body operators


def basis_index(config, d):
    """Site 0 is the most significant digit."""
    idx = 0
    for c in config:
        idx = idx * d + c
    return idx


def basis_config(index, num_sites, d):
    out = [0] * num_sites
    for s in range(num_sites - 1, -1, -1):
        index, out[s] = divmod(index, d)
    return tuple(out)


def _canonical_factor(op):
    """Split op = scale * normalized(op) with the first nonzero entry of normalized(op) equal to 1."""
    lead = op.first_nonzero()
    if lead is None or lead == 1:
        return Cyclo.rational(op.d, 1), op
    return lead, op * lead.inverse()


class SparseOperator:
    """Sum of tensor-product terms on ``num_sites`` qudits of dimension ``d``.

    ``terms`` is a tuple of ``(coeff, factors)`` where ``factors`` is a tuple of
    ``(site, LocalOp)`` pairs sorted by site; sites absent from ``factors``
    carry the identity.
    """

    __slots__ = ("num_sites", "d", "terms")

    def __init__(self, num_sites, d, terms=()):
        self.num_sites = int(num_sites)
        self.d = _check_d(d)
        clean = []
        for coeff, factors in terms:
            if isinstance(factors, dict):
                factors = factors.items()
            factors = tuple(sorted(factors, key=lambda f: f[0]))
            sites = [s for s, _ in factors]
            if len(set(sites)) != len(sites):
                raise ValueError("repeated site within a term")
            for s, op in factors:
                if not 0 <= s < self.num_sites:
                    raise IndexError(f"site {s} outside 0..{self.num_sites - 1}")
                if op.d != self.d:
                    raise ValueError("local dimension mismatch")
            clean.append((_as_exact(coeff, self.d), factors))
        self.terms = tuple(clean)

    # construction helpers ----------------------------------------------
    @classmethod
    def zero(cls, num_sites, d):
        return cls(num_sites, d, ())

    @classmethod
    def identity(cls, num_sites, d, coeff=1):
        return cls(num_sites, d, [(coeff, ())])

    @classmethod
    def product(cls, num_sites, d, factors, coeff=1):
        return cls(num_sites, d, [(coeff, tuple(factors.items()) if isinstance(factors, dict) else factors)])

    def _like(self, terms):
        return SparseOperator(self.num_sites, self.d, terms)

    def _check_compat(self, other):
        if (self.num_sites, self.d) != (other.num_sites, other.d):
            raise ValueError("operators act on different systems")

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, SparseOperator):
            self._check_compat(other)
            return self._like(self.terms + other.terms)
        return self + SparseOperator.identity(self.num_sites, self.d, other)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, SparseOperator):
            return self @ scalar
        scalar = _as_exact(scalar, self.d)
        return self._like([(c * scalar, f) for c, f in self.terms])

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check_compat(other)
        out = []
        for c1, f1 in self.terms:
            for c2, f2 in other.terms:
                merged = dict(f2)
                for s, op in f1:
                    merged[s] = op @ merged[s] if s in merged else op
                out.append((c1 * c2, tuple(merged.items())))
        return self._like(out)

    def __pow__(self, n):
        out = SparseOperator.identity(self.num_sites, self.d)
        for _ in range(n):
            out = out @ self
        return out

    def dagger(self):
        out = []
        for c, f in self.terms:
            cc = c.conjugate() if isinstance(c, Cyclo) else complex(c).conjugate()
            out.append((cc, tuple((s, op.dagger()) for s, op in f)))
        return self._like(out)

    def commutator(self, other):
        return (self @ other) - (other @ self)

    def canonicalize(self):
        """Pull scalars out of factors, drop identities, merge equal factor maps, prune zeros."""
        merged = {}
        order = []
        for c, f in self.terms:
            coeff = c
            key = []
            dead = False
            for s, op in f:
                if op.is_identity():
                    continue
                scale, norm = _canonical_factor(op)
                if norm.first_nonzero() is None:
                    dead = True
                    break
                coeff = coeff * scale
                key.append((s, norm))
            if dead or _is_zero(coeff):
                continue
            key = tuple(key)
            if key in merged:
                merged[key] = merged[key] + coeff
            else:
                merged[key] = coeff
                order.append(key)
        terms = [(merged[k], k) for k in sorted(order, key=_factor_sort_key) if not _is_zero(merged[k])]
        return self._like(terms)

    def is_zero(self):
        return len(self.canonicalize().terms) == 0

    def term_set(self):
        return frozenset(self.canonicalize().terms)

    def equals(self, other):
        """Exact term-set equality after canonicalization."""
        return (self - other).is_zero()

    def is_hermitian(self, atol=1e-12):
        """Exact for exact coefficients; float coefficients may differ by ``atol``."""
        rest = (self - self.dagger()).canonicalize().terms
        return all(not isinstance(c, Cyclo) and abs(complex(c)) <= atol for c, _ in rest)

    # application --------------------------------------------------------
    def apply_basis(self, config):
        """Exact image of a product basis state as {config: coeff}."""
        out = {}
        for coeff, factors in self.terms:
            partial = {tuple(config): coeff}
            for s, op in factors:
                nxt = {}
                for cfg, amp in partial.items():
                    for i, v in op.columns[cfg[s]]:
                        new = cfg[:s] + (i,) + cfg[s + 1:]
                        nxt[new] = nxt.get(new, 0) + amp * v
                partial = nxt
            for cfg, amp in partial.items():
                out[cfg] = out.get(cfg, 0) + amp
        return {k: v for k, v in out.items() if not _is_zero(v)}

    def apply(self, state):
        """Exact image of a state given as {config: coeff}."""
        out = {}
        for cfg, amp in state.items():
            for k, v in self.apply_basis(cfg).items():
                out[k] = out.get(k, 0) + amp * v
        return {k: v for k, v in out.items() if not _is_zero(v)}

    def is_monomial(self):
        return len(self.terms) == 1 and all(op.monomial_form is not None for _, op in self.terms[0][1])

    def monomial_action(self, configs):
        """Vectorized exact action of a single monomial term on many basis states.

        ``configs`` is an integer array (m, num_sites).  Returns the image
        configurations and the omega exponents; the term coefficient is not
        included.
        """
        if not self.is_monomial():
            raise ValueError("operator is not a single monomial term")
        configs = np.array(configs, dtype=np.int64, copy=True)
        expo = np.zeros(len(configs), dtype=np.int64)
        for s, op in self.terms[0][1]:
            perm, ex = op.monomial_form
            col = configs[:, s]
            expo += np.asarray(ex)[col]
            configs[:, s] = np.asarray(perm)[col]
        return configs, expo % self.d

    # numerics -----------------------------------------------------------
    def to_sparse(self, dtype=complex):
        """scipy CSR matrix in the product basis (site 0 most significant)."""
        n, d = self.num_sites, self.d
        dim = d**n
        idx = np.arange(dim, dtype=np.int64)
        digits = np.empty((dim, n), dtype=np.int64)
        rem = idx.copy()
        for s in range(n - 1, -1, -1):
            rem, digits[:, s] = np.divmod(rem, d)
        place = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
        rows, cols, vals = [], [], []
        for coeff, factors in self.terms:
            c = complex(coeff)
            if c == 0:
                continue
            mono = all(op.monomial_form is not None for _, op in factors)
            if mono:
                new = digits.copy()
                phase = np.zeros(dim, dtype=np.int64)
                for s, op in factors:
                    perm, ex = op.monomial_form
                    phase += np.asarray(ex)[digits[:, s]]
                    new[:, s] = np.asarray(perm)[digits[:, s]]
                w = np.exp(2j * np.pi * (phase % d) / d)
                rows.append(new @ place)
                cols.append(idx)
                vals.append(c * w)
            else:
                mat = sp.identity(1, dtype=complex, format="csr")
                fmap = dict(factors)
                for s in range(n):
                    local = fmap[s].to_numpy() if s in fmap else np.eye(d)
                    mat = sp.kron(mat, sp.csr_matrix(local), format="csr")
                coo = mat.tocoo()
                rows.append(coo.row.astype(np.int64))
                cols.append(coo.col.astype(np.int64))
                vals.append(c * coo.data)
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=dtype)
        mat = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )
        mat.sum_duplicates()
        mat.eliminate_zeros()
        if np.dtype(dtype).kind == "f":
            if mat.nnz and np.max(np.abs(mat.data.imag)) > 1e-12:
                raise ValueError("operator has complex matrix elements")
            mat = mat.real.astype(dtype)
        return mat

    def to_dense(self):
        """Dense matrix by explicit Kronecker expansion of every term."""
        n, d = self.num_sites, self.d
        out = np.zeros((d**n, d**n), dtype=complex)
        for coeff, factors in self.terms:
            fmap = dict(factors)
            mat = np.ones((1, 1), dtype=complex)
            for s in range(n):
                mat = np.kron(mat, fmap[s].to_numpy() if s in fmap else np.eye(d))
            out += complex(coeff) * mat
        return out

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"SparseOperator(num_sites={self.num_sites}, d={self.d}, terms={len(self.terms)})"


def _factor_sort_key(key):
    return tuple((s, tuple(tuple((e.num, e.den) for e in row) for row in op.entries)) for s, op in key)


def embed(op, site, num_sites):
    """Single-term operator acting as ``op`` on ``site`` and as identity elsewhere."""
    if not 0 <= site < num_sites:
        raise IndexError(f"site {site} outside 0..{num_sites - 1}")
    return SparseOperator(num_sites, op.d, [(1, ((site, op),))])
