"""Product-state variational analysis of the mapped Potts model.

Energy per site of |phi> = sum_i a_i |i> on every site of the square lattice
(coordination 4, two bonds per site)::

    eps = -J (|a0 + a1 + a2|^2 - 1) - 4 lam (|a0|^4 + |a1|^4 + |a2|^4)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .analysis import NoRootError, TransitionReport

__all__ = [
    "MeanFieldState",
    "energy",
    "symmetric_energy",
    "restricted_energy",
    "restricted_minimize",
    "stationary_x",
    "general_minimize",
    "scan_transition",
]


@dataclass(frozen=True)
class MeanFieldState:
    amplitudes: tuple
    energy: float
    theta: float | None = None
    alpha: float | None = None
    branch: str = ""

    @property
    def norm(self):
        return float(sum(abs(a) ** 2 for a in self.amplitudes))


def energy(a, J, lam):
    a = np.asarray(a, dtype=complex)
    a = a / np.linalg.norm(a)
    return float(-J * (abs(a.sum()) ** 2 - 1) - 4 * lam * np.sum(np.abs(a) ** 4))


def symmetric_energy(J, lam):
    """Energy of (|0> + |1> + |2>)/sqrt(3); exact for exact inputs."""
    from fractions import Fraction

    if all(isinstance(v, (int, Fraction)) for v in (J, lam)):
        return -2 * J - Fraction(4, 3) * lam
    return -2 * J - 4 * lam / 3


def restricted_energy(theta, alpha, J, lam):
    """a0 = sin(theta), a1 = a2 = cos(theta) e^{i alpha} / sqrt(2)."""
    s, c = np.sin(theta), np.cos(theta)
    return -J * (c**2 + math.sqrt(2) * np.sin(2 * theta) * np.cos(alpha)) - 4 * lam * (s**4 + 0.5 * c**4)


def stationary_x(theta):
    """x = 2 lam / 9J on the stationary line d eps / d theta = 0 (alpha = 0).

    Solving J (sin 2t - 2 sqrt2 cos 2t) = 2 lam sin 2t (4 sin^2 t - 2 cos^2 t)
    for lam / J.
    """
    t = np.asarray(theta, dtype=float)
    s2 = np.sin(2 * t)
    den = 2 * s2 * (4 * np.sin(t) ** 2 - 2 * np.cos(t) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (s2 - 2 * math.sqrt(2) * np.cos(2 * t)) / den
    return 2 * ratio / 9


def _restricted_state(theta, alpha, J, lam, branch):
    a = (math.sin(theta), math.cos(theta) * complex(math.cos(alpha), math.sin(alpha)) / math.sqrt(2))
    amps = (complex(a[0]), a[1], a[1])
    return MeanFieldState(amps, float(restricted_energy(theta, alpha, J, lam)), float(theta), float(alpha), branch)


def restricted_branches(J, lam, grid=4001):
    """Local minima of the restricted family in theta (alpha in {0, pi}), refined."""
    out = []
    for alpha in (0.0, math.pi):
        th = np.linspace(0.0, math.pi, grid)
        e = restricted_energy(th, alpha, J, lam)
        for k in range(len(th)):
            lo, hi = max(k - 1, 0), min(k + 1, len(th) - 1)
            if e[k] <= e[lo] and e[k] <= e[hi] and (e[k] < e[lo] or e[k] < e[hi]):
                res = minimize_scalar(
                    lambda t: float(restricted_energy(t, alpha, J, lam)),
                    bounds=(th[lo], th[hi]),
                    method="bounded",
                    options={"xatol": 1e-13},
                )
                out.append((float(res.x), alpha, float(res.fun)))
    uniq = []
    for t, a, e in sorted(out, key=lambda r: r[2]):
        if not any(abs(e - u[2]) < 1e-12 and abs(math.cos(t) ** 2 - math.cos(u[0]) ** 2) < 1e-6 for u in uniq):
            uniq.append((t, a, e))
    return uniq


def restricted_minimize(J, lam):
    """Global minimum of the restricted family plus every local branch found.

    The returned state's ``branch`` is ``"symmetric"`` when the minimizer has
    equal weights, otherwise ``"polarized"``.
    """
    branches = restricted_branches(J, lam)
    t, a, _ = branches[0]
    label = "symmetric" if abs(math.sin(t) ** 2 - 1 / 3) < 1e-6 else "polarized"
    best = _restricted_state(t, a, J, lam, label)
    # the symmetric point is always stationary; make sure it is not missed
    sym = float(symmetric_energy(J, lam))
    if sym < best.energy - 1e-15:
        ts = math.asin(1 / math.sqrt(3))
        best = _restricted_state(ts, 0.0, J, lam, "symmetric")
    return best, [_restricted_state(t, a, J, lam, "") for t, a, _ in branches]


def _unpack(p):
    a = np.array([p[0] + 1j * p[1], p[2] + 1j * p[3], p[4] + 1j * p[5]])
    return a / np.linalg.norm(a)


def _energy_and_grad(p, J, lam):
    """Energy of the unnormalized amplitudes and its gradient in the 6 real parameters."""
    v = np.array([p[0] + 1j * p[1], p[2] + 1j * p[3], p[4] + 1j * p[5]])
    n = float(np.sum(np.abs(v) ** 2))
    S = v.sum()
    q = np.abs(v) ** 2
    q4 = float(np.sum(q**2))
    e = -J * (abs(S) ** 2 / n - 1) - 4 * lam * q4 / n**2
    # Wirtinger derivative dE/dv*; the real gradient is twice its real and imaginary parts
    w = -J * (S / n - abs(S) ** 2 * v / n**2) - 4 * lam * (2 * q * v / n**2 - 2 * q4 * v / n**3)
    g = np.empty(6)
    g[0::2], g[1::2] = 2 * w.real, 2 * w.imag
    return float(e), g


def _fix_phase(a):
    k = 0 if abs(a[0]) > 1e-12 else int(np.argmax(np.abs(a)))
    ph = a[k] / abs(a[k])
    return a / ph


def general_minimize(J, lam, restarts=64, seed=0):
    """Multi-start minimization over normalized complex amplitudes."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)

    results = []
    for _ in range(restarts):
        p0 = rng.standard_normal(6)
        res = minimize(_energy_and_grad, p0, args=(J, lam), jac=True, method="BFGS", options={"gtol": 1e-11, "maxiter": 2000})
        a = _fix_phase(_unpack(res.x))
        results.append((round(energy(a, J, lam), 12), tuple(np.round(np.abs(a), 12)), a))
    results.sort(key=lambda r: (r[0], r[1]))
    a = results[0][2]
    e = energy(a, J, lam)
    w = np.sort(np.abs(a) ** 2)
    branch = "symmetric" if np.allclose(w, 1 / 3, atol=1e-6) else "polarized"
    return MeanFieldState(tuple(complex(v) for v in a), e, branch=branch)


def scan_transition(x_grid=None, J=1.0, restarts=64, seed=0, threshold=3.0):
    """Locate the jump of d eps / dx along x = 2 lam / 9J.

    The jump is the grid interval where one-sided differences disagree by
    more than ``threshold`` times the local noise; the location is then
    refined as the crossing of the two competing branches.
    """
    xs = np.linspace(0.0, 0.3, 301) if x_grid is None else np.asarray(x_grid, dtype=float)
    if xs.min() > 0.0 or xs.max() < 0.3:
        raise ValueError("grid must span [0, 0.3]")
    states = [general_minimize(J, 4.5 * J * x, restarts, seed) for x in xs]
    e = np.array([s.energy for s in states])
    d = np.diff(e) / np.diff(xs)
    jumps = np.abs(np.diff(d))
    noise = np.array([np.median(jumps[max(0, i - 5) : i + 6]) for i in range(len(jumps))])
    cand = [i for i in range(len(jumps)) if jumps[i] > threshold * max(noise[i], 1e-12) and jumps[i] > 1e-6]
    if not cand:
        raise NoRootError("no derivative jump in the window")
    i = int(max(cand, key=lambda k: jumps[k]))
    # the kink lies between xs[i] and xs[i + 2]; refine as a branch crossing

    def polarized(x):
        br = restricted_branches(J, 4.5 * J * x)
        pol = [b for b in br if abs(math.sin(b[0]) ** 2 - 1 / 3) > 1e-6]
        return min(b[2] for b in pol) if pol else float("inf")

    def diff(x):
        return polarized(x) - float(symmetric_energy(J, 4.5 * J * x))

    lo, hi = xs[max(i - 1, 0)], xs[min(i + 2, len(xs) - 1)]
    try:
        xc = brentq(diff, lo, hi, xtol=1e-12)
        refined = True
    except ValueError:
        xc = 0.5 * (xs[i] + xs[i + 1])
        refined = False
    jump = float(d[i + 1] - d[i]) if i + 1 < len(d) else float("nan")
    return (
        TransitionReport(
            "derivative-jump",
            float(xc),
            (float(xs[0]), float(xs[-1])),
            {"grid_interval": [float(xs[i]), float(xs[min(i + 2, len(xs) - 1)])], "jump": jump, "refined": refined, "restarts": restarts, "seed": seed},
        ),
        xs,
        e,
        states,
    )
