"""Order-by-order solution of the perturbative CUT flow equations.

With ``H(l) = Q + sum_k g^k sum_{|m|=k} F(l; m) T(m)`` and the
quasiparticle-conserving generator ``eta = sum sgn(M(m)) F(l; m) T(m)`` the
flow ``dH/dl = [eta, H]`` becomes, for a sequence ``m`` split into a left
part ``m1`` and right part ``m2``::

    dF(m)/dl = -|M(m)| F(m) + sum_{m = m1 m2} [sgn M(m1) - sgn M(m2)] F(m1) F(m2)

with ``F(0; (n,)) = 1``.  Every ``F`` is a finite sum ``c * l^p * exp(-a l)``,
so the integration is done in closed form with rational arithmetic.  The
effective Hamiltonian keeps the sequences with ``M(m) = 0`` and weight
``C(m) = F(inf; m)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

__all__ = ["CoeffTable", "OrderCapError", "pcut_coefficients", "flow_functions", "expand_commutator"]

MAX_ORDER_CAP = 8


class OrderCapError(ValueError):
    """Requested perturbative order exceeds the configured cap."""


def _sgn(v):
    return (v > 0) - (v < 0)


def _mul(f, g):
    out = {}
    for (p1, a1), c1 in f.items():
        for (p2, a2), c2 in g.items():
            key = (p1 + p2, a1 + a2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _integrate(source, rate):
    """exp(-rate l) * int_0^l exp(rate s) source(s) ds for source = {(p, a): c}."""
    out = {}

    def add(key, val):
        out[key] = out.get(key, 0) + val

    for (p, a), c in source.items():
        b = rate - a
        if b == 0:
            add((p + 1, rate), c / (p + 1))
            continue
        b = Fraction(b)
        # int_0^l s^p e^{bs} ds = sum_i (-1)^i p!/(p-i)! l^{p-i} e^{bl} / b^{i+1} - (-1)^p p!/b^{p+1}
        for i in range(p + 1):
            add((p - i, a), c * (-1) ** i * Fraction(factorial(p), factorial(p - i)) / b ** (i + 1))
        add((0, rate), -c * (-1) ** p * factorial(p) / b ** (p + 1))
    return {k: v for k, v in out.items() if v}


def flow_functions(alphabet, max_order):
    """All F(l; m) for sequences over ``alphabet`` up to length ``max_order``.

    Returns a dict sequence -> {(p, a): coefficient}.
    """
    alphabet = tuple(sorted(alphabet))
    F = {}
    for n in alphabet:
        F[(n,)] = {(0, abs(n)): Fraction(1)}
    for k in range(2, max_order + 1):
        for m in itertools.product(alphabet, repeat=k):
            src = {}
            for j in range(1, k):
                left, right = m[:j], m[j:]
                w = _sgn(sum(left)) - _sgn(sum(right))
                if not w:
                    continue
                fl, fr = F.get(left), F.get(right)
                if not fl or not fr:
                    continue
                for key, val in _mul(fl, fr).items():
                    src[key] = src.get(key, 0) + w * val
            src = {kk: v for kk, v in src.items() if v}
            if src:
                F[m] = _integrate(src, abs(sum(m)))
    return F


@dataclass(frozen=True)
class CoeffTable:
    """Weights C(m) of the quasiparticle-conserving sequences, by order.

    ``weights[k]`` maps sequences of length k with zero total to their exact
    rational weight, in the convention ``H = Q + g * sum_n T_n``.
    """

    alphabet: tuple
    max_order: int
    weights: dict = field(repr=False)

    def order(self, k):
        return self.weights.get(k, {})

    def __getitem__(self, seq):
        return self.weights.get(len(seq), {}).get(tuple(seq), Fraction(0))

    def sequences(self, max_order=None):
        top = self.max_order if max_order is None else min(max_order, self.max_order)
        for k in range(1, top + 1):
            yield from self.weights.get(k, {}).items()

    def signed(self, k, sign):
        """Weights when the physical Hamiltonian is Q + sign * g * sum_n T_n."""
        return {m: c * sign**k for m, c in self.order(k).items()}

    def to_json(self):
        return {
            "alphabet": list(self.alphabet),
            "max_order": self.max_order,
            "weights": {
                str(k): [[list(m), f"{c.numerator}/{c.denominator}"] for m, c in sorted(w.items())]
                for k, w in sorted(self.weights.items())
            },
        }


def pcut_coefficients(max_order, alphabet=(-2, -1, 0, 1, 2), cap=MAX_ORDER_CAP):
    """Exact C(m) for all zero-total sequences up to ``max_order``."""
    if not 1 <= max_order <= cap:
        raise OrderCapError(f"max_order must lie in 1..{cap}, got {max_order}")
    F = flow_functions(alphabet, max_order)
    weights = {}
    for m, f in F.items():
        if sum(m) != 0:
            continue
        c = f.get((0, 0), Fraction(0))
        # the remaining terms decay; a growing term would signal a broken flow
        assert all(a > 0 or p == 0 for (p, a) in f), m
        if c:
            weights.setdefault(len(m), {})[m] = Fraction(c)
    return CoeffTable(tuple(sorted(alphabet)), max_order, weights)


def expand_commutator(expr):
    """Expand a nested commutator of T-indices into {sequence: integer weight}.

    ``expr`` is an int (a single T_n) or a pair ``(A, B)`` meaning [A, B].
    """
    if isinstance(expr, int):
        return {(expr,): 1}
    a, b = (expand_commutator(e) for e in expr)
    out = {}
    for s1, c1 in a.items():
        for s2, c2 in b.items():
            out[s1 + s2] = out.get(s1 + s2, 0) + c1 * c2
            out[s2 + s1] = out.get(s2 + s1, 0) - c1 * c2
    return {k: v for k, v in out.items() if v}
