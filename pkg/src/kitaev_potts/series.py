"""Truncated power series with exact rational coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["RationalSeries", "parse_rational", "format_rational", "load_reference_series"]


def parse_rational(text):
    """Parse "num/den" (or a plain integer string) into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class RationalSeries:
    """sum_k coeffs[k] * var^k, exact.

    ``variable`` is a label (``"x"`` for small coupling, ``"h"`` for large
    coupling); series in different variables do not mix.
    """

    variable: str
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k] if k < len(self.coeffs) else Fraction(0)

    def __len__(self):
        return len(self.coeffs)

    def __call__(self, value):
        """Horner evaluation; exact for Fraction input, float otherwise."""
        acc = Fraction(0) if isinstance(value, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * value + (c if isinstance(acc, Fraction) else float(c))
        return acc

    def truncate(self, order):
        return RationalSeries(self.variable, self.coeffs[: order + 1])

    def derivative(self):
        return RationalSeries(self.variable, [k * c for k, c in enumerate(self.coeffs)][1:] or [0])

    def _check(self, other):
        if isinstance(other, RationalSeries) and other.variable != self.variable:
            raise ValueError(f"cannot combine series in {self.variable} and {other.variable}")

    def __add__(self, other):
        self._check(other)
        if not isinstance(other, RationalSeries):
            other = RationalSeries(self.variable, [other])
        n = max(len(self), len(other))
        return RationalSeries(self.variable, [self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries(self.variable, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RationalSeries):
            self._check(other)
            n = min(len(self), len(other))
            out = [Fraction(0)] * n
            for i in range(n):
                for j in range(n - i):
                    out[i + j] += self[i] * other[j]
            return RationalSeries(self.variable, out)
        return RationalSeries(self.variable, [c * Fraction(other) for c in self.coeffs])

    __rmul__ = __mul__

    def as_floats(self):
        return [float(c) for c in self.coeffs]

    def to_json(self):
        return {"variable": self.variable, "coefficients": [format_rational(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["variable"], [parse_rational(c) for c in obj["coefficients"]])

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c:
                parts.append(f"{c}" if k == 0 else f"({c})*{self.variable}^{k}")
        return " + ".join(parts) or "0"


def load_reference_series(name=None):
    """Printed order-8 series shipped with the package.

    ``name`` is one of ``small_energy``, ``small_gap``, ``large_energy``;
    without it a dict of all three is returned.
    """
    import json
    from importlib import resources

    raw = json.loads(resources.files("kitaev_potts").joinpath("data/reference_series.json").read_text())
    out = {k: RationalSeries.from_json(v) for k, v in raw.items()}
    return out if name is None else out[name]
