"""Series extrapolation and the small/large coupling merge."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz
from scipy.optimize import brentq

from .series import RationalSeries

__all__ = [
    "PadeApproximant",
    "DlogPade",
    "TransitionReport",
    "DefectivePadeError",
    "NoRootError",
    "FiniteDifferenceError",
    "pade",
    "robust_pade",
    "dlog_pade",
    "pade_orders",
    "dlog_pade_gap_closure",
    "bare_series_roots",
    "absolute_energies",
    "feynman_hellmann_derivatives",
    "merge_and_locate_crossing",
]

RESIDUE_FLOOR = 1e-8


class DefectivePadeError(ValueError):
    """The linear Padé system is singular or the result fails to re-expand."""


class NoRootError(ValueError):
    """No physical root/pole/crossing inside the scanned window."""


class FiniteDifferenceError(ValueError):
    pass


def _coeffs(series):
    if isinstance(series, RationalSeries):
        return np.array(series.as_floats())
    return np.asarray(series, dtype=float)


@dataclass
class PadeApproximant:
    """P(x)/Q(x) with ascending float coefficients and Q(0) = 1."""

    numerator: np.ndarray
    denominator: np.ndarray
    L: int
    M: int
    requested: tuple = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.polyval(self.numerator[::-1], x) / np.polyval(self.denominator[::-1], x)

    def taylor(self, order):
        """Re-expansion of P/Q through ``order``."""
        q = np.zeros(order + 1)
        q[: len(self.denominator)] = self.denominator[: order + 1]
        p = np.zeros(order + 1)
        p[: min(len(self.numerator), order + 1)] = self.numerator[: order + 1]
        out = np.zeros(order + 1)
        for k in range(order + 1):
            out[k] = p[k] - np.dot(q[1 : k + 1], out[k - 1 :: -1][:k]) if k else p[0]
        return out

    def derivative(self, x, h=None):
        p, q = np.polynomial.Polynomial(self.numerator), np.polynomial.Polynomial(self.denominator)
        return (p.deriv()(x) * q(x) - p(x) * q.deriv()(x)) / q(x) ** 2

    def second_derivative(self, x):
        p, q = np.polynomial.Polynomial(self.numerator), np.polynomial.Polynomial(self.denominator)
        num = p.deriv() * q - p * q.deriv()
        den = q**2
        return (num.deriv()(x) * den(x) - num(x) * den.deriv()(x)) / den(x) ** 2

    def roots(self):
        return _poly_roots(self.numerator)

    def poles(self):
        return _poly_roots(self.denominator)

    def residue(self, pole):
        p, q = np.polynomial.Polynomial(self.numerator), np.polynomial.Polynomial(self.denominator)
        return p(pole) / q.deriv()(pole)


def _poly_roots(c):
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if len(c) <= 1:
        return np.array([])
    return np.polynomial.polynomial.polyroots(c)


def pade(series, L, M, rtol=1e-10, cond_limit=1e12):
    """[L/M] Padé approximant from a linear solve.

    A singular system is accepted only when its minimum-norm solution still
    reproduces the series through order L + M; otherwise
    :class:`DefectivePadeError` is raised.
    """
    c = _coeffs(series)
    if L < 0 or M < 0:
        raise ValueError("orders must be non-negative")
    if len(c) < L + M + 1:
        raise ValueError(f"series of order {len(c) - 1} is too short for [{L}/{M}]")
    c = c[: L + M + 1]
    b = np.ones(1)
    if M:
        col = np.array([c[k] if k >= 0 else 0.0 for k in range(L, L + M)])
        row = np.array([c[L - j] if L - j >= 0 else 0.0 for j in range(M)])
        A = toeplitz(col, row)
        rhs = -c[L + 1 : L + M + 1]
        cond = np.linalg.cond(A) if A.size else 1.0
        if np.isfinite(cond) and cond < cond_limit:
            sol = np.linalg.solve(A, rhs)
        else:
            sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        b = np.concatenate([[1.0], sol])
    a = np.array([sum(b[j] * c[k - j] for j in range(min(k, M) + 1)) for k in range(L + 1)])
    approx = PadeApproximant(a, b, L, M, (L, M))
    back = approx.taylor(L + M)
    scale = max(1.0, np.max(np.abs(c)))
    if not np.all(np.isfinite(back)) or np.max(np.abs(back - c)) > rtol * scale:
        raise DefectivePadeError(f"[{L}/{M}] does not reproduce the series")
    return approx


def robust_pade(series, L, M, tol=1e-12):
    """SVD-reduced Padé approximant (degree reduction on numerical rank deficiency).

    Returns an approximant whose (L, M) may be smaller than requested; the
    requested pair is kept in ``requested``.
    """
    c = _coeffs(series)
    req = (L, M)
    c = np.concatenate([c[: L + M + 1], np.zeros(max(0, L + M + 1 - len(c)))])
    ts = tol * np.linalg.norm(c)
    if np.linalg.norm(c[: L + 1]) <= ts:
        return PadeApproximant(np.zeros(1), np.ones(1), 0, 0, req)
    Z = toeplitz(c[: L + M + 1], np.concatenate([[c[0]], np.zeros(M)]))
    while True:
        if M == 0:
            b = np.ones(1)
            break
        C = Z[L + 1 : L + M + 1, : M + 1]
        s = np.linalg.svd(C, compute_uv=False)
        rho = int(np.sum(s > ts))
        if rho == M:
            _, _, vh = np.linalg.svd(C)
            b = vh[-1].conj()
            break
        L, M = L - (M - rho), rho
        Z = Z[: L + M + 1, : M + 1]
    a = Z[: L + 1, : M + 1] @ b
    # strip common leading zeros (removable singularity at the origin)
    lam = np.argmax(np.abs(b) > tol)
    b, a = b[lam:], a[lam:]
    if abs(b[0]) <= tol:
        raise DefectivePadeError("denominator vanishes at the origin")
    a, b = a / b[0], b / b[0]
    a = np.trim_zeros(np.where(np.abs(a) > ts, a, 0.0), "b") if np.any(np.abs(a) > ts) else np.zeros(1)
    b = np.trim_zeros(np.where(np.abs(b) > tol, b, 0.0), "b")
    return PadeApproximant(np.real(a), np.real(b), len(a) - 1, len(b) - 1, req)


@dataclass
class DlogPade:
    """Padé approximant of d/dx log f."""

    approximant: PadeApproximant
    f0: float

    @property
    def L(self):
        return self.approximant.L

    @property
    def M(self):
        return self.approximant.M

    def poles(self):
        return self.approximant.poles()

    def residue(self, pole):
        return self.approximant.residue(pole)

    def __call__(self, x):
        """f(x) = f(0) exp(int_0^x dlog), by adaptive quadrature."""
        from scipy.integrate import quad

        val, _ = quad(lambda t: float(self.approximant(t)), 0.0, float(x), limit=200)
        return self.f0 * math.exp(val)


def _dlog_coeffs(c):
    c = np.asarray(c, dtype=float)
    if c[0] == 0:
        raise ValueError("log-derivative needs f(0) != 0")
    n = len(c) - 1
    d = np.array([(k + 1) * c[k + 1] for k in range(n)])
    g = np.zeros(n)
    for k in range(n):
        g[k] = (d[k] - np.dot(c[1 : k + 1], g[k - 1 :: -1][:k])) / c[0] if k else d[0] / c[0]
    return g


def dlog_pade(series, L, M, strict=False):
    """DlogPadé [L/M]: Padé of the logarithmic derivative.

    By default falls back to the SVD-reduced construction when the plain
    system is defective; ``strict=True`` propagates the error instead.
    """
    c = _coeffs(series)
    g = _dlog_coeffs(c)
    try:
        approx = pade(g, L, M)
    except DefectivePadeError:
        if strict:
            raise
        approx = robust_pade(g, L, M)
    return DlogPade(approx, float(c[0]))


def pade_orders(n, min_order=2, max_total=None):
    max_total = n if max_total is None else max_total
    return [(L, M) for L in range(min_order, max_total + 1) for M in range(min_order, max_total + 1) if L + M <= max_total]


@dataclass
class TransitionReport:
    kind: str
    value: float
    domain: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.domain
        if not lo <= self.value <= hi:
            raise NoRootError(f"{self.kind} estimate {self.value} outside {self.domain}")

    def to_json(self):
        return {"kind": self.kind, "value": self.value, "domain": list(self.domain), "metadata": self.metadata}


def _physical_pole(poles, residue, window):
    lo, hi = window
    best = None
    for p in poles:
        if abs(p.imag) > 1e-8 * max(1.0, abs(p.real)) or not lo < p.real <= hi:
            continue
        r = residue(p)
        if abs(r) < RESIDUE_FLOOR:
            continue
        if best is None or p.real < best[0]:
            best = (float(p.real), complex(r).real)
    return best


def bare_series_roots(series, orders=None, window=(0.0, 1.0)):
    """Smallest positive real root of each truncation of the series."""
    c = _coeffs(series)
    orders = range(1, len(c)) if orders is None else orders
    out = {}
    for k in orders:
        roots = [r.real for r in _poly_roots(c[: k + 1]) if abs(r.imag) < 1e-10 and window[0] < r.real <= window[1]]
        out[k] = min(roots) if roots else None
    return out


def dlog_pade_gap_closure(gap, orders=None, window=(0.0, 0.5), min_order=2):
    """Gap closing from DlogPadé poles, with direct Padé roots alongside.

    Returns a TransitionReport whose value is the mean over well-behaved
    approximants (physical pole with positive residue inside ``window``).
    """
    c = _coeffs(gap)
    if c[0] <= 0:
        raise ValueError("gap(0) must be positive")
    n = len(c) - 2  # order of the log-derivative series
    orders = pade_orders(n, min_order) if orders is None else orders
    dlog, direct = {}, {}
    for L, M in orders:
        try:
            dp = dlog_pade(c, L, M, strict=True)
        except (DefectivePadeError, ValueError):
            dlog[(L, M)] = None
        else:
            hit = _physical_pole(dp.poles(), dp.residue, window)
            dlog[(L, M)] = hit if hit and hit[1] > 0 else None
        if L + M <= len(c) - 1:
            try:
                pa = pade(c, L, M)
            except DefectivePadeError:
                direct[(L, M)] = None
            else:
                rts = [r.real for r in pa.roots() if abs(r.imag) < 1e-10 and window[0] < r.real <= window[1]]
                direct[(L, M)] = min(rts) if rts else None
    good = [v[0] for v in dlog.values() if v]
    if not good:
        raise NoRootError("no DlogPadé approximant closes the gap inside the window")
    return TransitionReport(
        "gap-closure",
        float(np.mean(good)),
        window,
        {
            "dlog_pade": {f"{L}/{M}": (None if v is None else {"x_c": v[0], "exponent": v[1]}) for (L, M), v in dlog.items()},
            "pade_roots": {f"{L}/{M}": v for (L, M), v in direct.items()},
            "spread": [float(min(good)), float(max(good))],
            "bare_roots": {str(k): v for k, v in bare_series_roots(c, window=window).items()},
        },
    )


# ---------------------------------------------------------------------------
# absolute energies, derivatives, merge


def _branch_funcs(series, approximant=None):
    """Value, first and second derivative callables of a series or its Padé."""
    if approximant is not None:
        return approximant, approximant.derivative, approximant.second_derivative
    c = _coeffs(series)
    p = np.polynomial.Polynomial(c)
    return p, p.deriv(), p.deriv(2)


def absolute_energies(sc, lc, calib_sc, calib_lc, thetas, sc_approx=None, lc_approx=None, shift=0.0):
    """Per-site energies of both branches at lambda = sin(theta), J = cos(theta)."""
    f_sc = _branch_funcs(sc, sc_approx)[0]
    f_lc = _branch_funcs(lc, lc_approx)[0]
    th = np.asarray(thetas, dtype=float)
    J, lam = np.cos(th), np.sin(th)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = 2 * lam / (9 * J)
        h = J / (2 * lam)
        e_sc = 3 * J * f_sc(x) + float(calib_sc.dropped[0]) * J + float(calib_sc.dropped[1]) * lam
        e_lc = 2 * lam * f_lc(h) + float(calib_lc.dropped[0]) * J + float(calib_lc.dropped[1]) * lam
    return e_sc + shift, e_lc + shift


def _derivs(branch, funcs, J, lam):
    """d/dlambda and d^2/dlambda^2 at fixed J (Feynman-Hellmann)."""
    f, f1, f2 = funcs
    if branch == "sc":
        x = 2 * lam / (9 * J)
        d1 = (2.0 / 3.0) * f1(x)
        d2 = 4.0 / (27.0 * J) * f2(x)
        return d1, d2
    h = J / (2 * lam)
    d1 = 2 * f(h) - 2 * h * f1(h)
    d2 = 2 * h * h * f2(h) / lam
    return d1, d2


def feynman_hellmann_derivatives(sc, lc, calib_sc, calib_lc, thetas, sc_approx=None, lc_approx=None, fd_step=1e-5, fd_tol=1e-6, check=True):
    """Analytic first and second lambda-derivatives of both branches.

    Central finite differences in lambda at fixed J cross-check the analytic
    curves; a disagreement above ``fd_tol`` raises FiniteDifferenceError.
    """
    th = np.asarray(thetas, dtype=float)
    J, lam = np.cos(th), np.sin(th)
    out = {}
    for name, series, approx, calib in (("sc", sc, sc_approx, calib_sc), ("lc", lc, lc_approx, calib_lc)):
        funcs = _branch_funcs(series, approx)
        with np.errstate(divide="ignore", invalid="ignore"):
            d1, d2 = _derivs(name, funcs, J, lam)
        d1 = d1 + float(calib.dropped[1])
        out[name] = (np.asarray(d1, dtype=float), np.asarray(d2, dtype=float))
        if check:
            fd1, fd2 = _finite_differences(name, funcs[0], calib, J, lam, fd_step)
            ok = np.isfinite(fd1) & np.isfinite(out[name][0])
            err1 = np.max(np.abs(fd1[ok] - out[name][0][ok]), initial=0.0)
            if err1 > fd_tol:
                raise FiniteDifferenceError(f"{name} first derivative differs from finite differences by {err1:.2e}")
            out[name + "_fd"] = (fd1, fd2)
    return out


def _energy_at(name, f, calib, J, lam):
    if name == "sc":
        return 3 * J * f(2 * lam / (9 * J)) + float(calib.dropped[1]) * lam + float(calib.dropped[0]) * J
    return 2 * lam * f(J / (2 * lam)) + float(calib.dropped[1]) * lam + float(calib.dropped[0]) * J


def _finite_differences(name, f, calib, J, lam, step):
    with np.errstate(divide="ignore", invalid="ignore"):
        ep = _energy_at(name, f, calib, J, lam + step)
        em = _energy_at(name, f, calib, J, lam - step)
        e0 = _energy_at(name, f, calib, J, lam)
    return (ep - em) / (2 * step), (ep - 2 * e0 + em) / step**2


def merge_and_locate_crossing(sc, lc, calib_sc, calib_lc, thetas=None, sc_approx=None, lc_approx=None, variants=None, shift=0.0):
    """Locate where the small- and large-coupling energies cross.

    The bare series are used by default; ``variants`` maps a label to a pair
    of (sc_approx, lc_approx) Padé approximants reported side by side.
    """
    if thetas is None:
        thetas = np.linspace(0.05, 1.5, 581)
    th = np.asarray(thetas, dtype=float)
    e_sc, e_lc = absolute_energies(sc, lc, calib_sc, calib_lc, th, sc_approx, lc_approx, shift)
    diff = e_sc - e_lc
    ok = np.isfinite(diff)
    idx = [i for i in range(len(th) - 1) if ok[i] and ok[i + 1] and diff[i] <= 0 < diff[i + 1]]
    if not idx:
        raise NoRootError("small- and large-coupling energies do not cross in the window")
    i = idx[0]

    def gapf(t):
        a, b = absolute_energies(sc, lc, calib_sc, calib_lc, [t], sc_approx, lc_approx, shift)
        return float(a[0] - b[0])

    tc = brentq(gapf, th[i], th[i + 1], xtol=1e-12)
    der = feynman_hellmann_derivatives(sc, lc, calib_sc, calib_lc, [tc], sc_approx, lc_approx, check=False)
    d1_sc, d2_sc = der["sc"][0][0], der["sc"][1][0]
    d1_lc, d2_lc = der["lc"][0][0], der["lc"][1][0]
    meta = {
        "method": "bare" if sc_approx is None else f"pade sc[{sc_approx.L}/{sc_approx.M}] lc[{lc_approx.L}/{lc_approx.M}]",
        "grid": [float(th[0]), float(th[-1]), len(th)],
        "energy": float(absolute_energies(sc, lc, calib_sc, calib_lc, [tc], sc_approx, lc_approx, shift)[0][0]),
        "x_c": float(2 * math.sin(tc) / (9 * math.cos(tc))),
        "first_derivative": {"sc": float(d1_sc), "lc": float(d1_lc), "jump": float(d1_lc - d1_sc)},
        "second_derivative": {"sc": float(d2_sc), "lc": float(d2_lc), "jump": float(d2_lc - d2_sc)},
    }
    if variants:
        meta["variants"] = {}
        for label, (sa, la) in variants.items():
            try:
                rep = merge_and_locate_crossing(sc, lc, calib_sc, calib_lc, th, sa, la, shift=shift)
                meta["variants"][label] = rep.value
            except NoRootError:
                meta["variants"][label] = None
    return TransitionReport("crossing", float(tc), (float(th[0]), float(th[-1])), meta)
