"""Geometric measure of entanglement of the second-order perturbed ground state.

The state is a sum over configuration classes: every member of a class has
the same excited content (the labels of the spins not in |0>) and the same
amplitude, so overlaps with translation-invariant product states only need
the class counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "ConfigClass",
    "ConfigClassState",
    "ProductAnsatz",
    "build_perturbed_ground_state",
    "overlap",
    "gme_value",
    "maximize_overlap",
    "grid_search_overlap",
    "brute_force_overlap",
    "recount_classes",
    "GMEScan",
    "ed_state_gme",
    "gme_scan",
]

F = Fraction


@dataclass(frozen=True)
class ConfigClass:
    name: str
    count: int
    amplitude: tuple  # polynomial coefficients in x
    content: tuple  # labels of the excited spins

    def amp(self, x):
        return float(sum(float(c) * x**k for k, c in enumerate(self.amplitude)))


def _class_table(n):
    return [
        ConfigClass("vacuum", 1, (F(1), F(0), F(-n, 2)), ()),
        ConfigClass("nn_pair", 4 * n, (F(0), F(1, 2), F(1, 4)), (1, 2)),
        ConfigClass("nnn_diagonal", 8 * n, (F(0), F(0), F(1, 2)), (1, 2)),
        ConfigClass("nnn_straight", 4 * n, (F(0), F(0), F(1, 2)), (1, 2)),
        ConfigClass("corner_222", 4 * n, (F(0), F(0), F(1, 3)), (2, 2, 2)),
        ConfigClass("corner_111", 4 * n, (F(0), F(0), F(1, 3)), (1, 1, 1)),
        ConfigClass("line_222", 2 * n, (F(0), F(0), F(1, 3)), (2, 2, 2)),
        ConfigClass("line_111", 2 * n, (F(0), F(0), F(1, 3)), (1, 1, 1)),
        ConfigClass("double_pair", 8 * n * (2 * n - 7), (F(0), F(0), F(1, 8)), (1, 1, 2, 2)),
    ]


@dataclass(frozen=True)
class ConfigClassState:
    n: int
    x: float
    classes: tuple

    def norm_squared(self):
        """Norm squared before renormalization (classes are treated as orthogonal)."""
        return float(sum(c.count * c.amp(self.x) ** 2 for c in self.classes))

    def norm_squared_series(self):
        """Exact polynomial in x of the pre-normalization norm squared."""
        out = [F(0)] * 5
        for c in self.classes:
            for i, a in enumerate(c.amplitude):
                for j, b in enumerate(c.amplitude):
                    out[i + j] += c.count * a * b
        return out

    def counts(self):
        return {c.name: c.count for c in self.classes}


def build_perturbed_ground_state(x, n):
    """Second-order state on ``n`` sites; requires 2n - 7 > 0."""
    if not isinstance(n, (int, np.integer)) or 2 * n - 7 <= 0:
        raise ValueError(f"n must be an integer with 2n - 7 > 0, got {n!r}")
    if x < 0:
        raise ValueError("x must be non-negative")
    return ConfigClassState(int(n), float(x), tuple(_class_table(int(n))))


@dataclass(frozen=True)
class ProductAnsatz:
    theta: float
    phi: float
    alpha: float
    beta: float

    def components(self):
        """<i|phi> for i = 0, 1, 2."""
        st = math.sin(self.theta)
        return np.array(
            [
                math.cos(self.theta),
                np.exp(-1j * self.alpha) * st * math.sin(self.phi),
                np.exp(-1j * self.beta) * st * math.cos(self.phi),
            ]
        )


def _overlap_from_bra(state, bra):
    """sum_classes count * amp * bra0^(n-k) * prod bra_i, with bra_i = <phi|i>."""
    n = state.n
    total = 0j
    for c in state.classes:
        k = len(c.content)
        term = c.count * c.amp(state.x) * bra[0] ** (n - k)
        for lab in c.content:
            term *= bra[lab]
        total += term
    return total / math.sqrt(state.norm_squared())


def overlap(state, ansatz):
    """<P|Psi> for the normalized state and |P> = |phi>^n."""
    return _overlap_from_bra(state, np.conj(ansatz.components()))


def gme_value(state, ansatz):
    ov = abs(overlap(state, ansatz)) ** 2
    return -math.log2(ov) if ov > 0 else math.inf


def _neg_overlap(p, state):
    return -abs(overlap(state, ProductAnsatz(*p))) ** 2


def maximize_overlap(state, restarts=16, seed=0, start=None):
    """Multi-start local ascent of |<P|Psi>|^2; returns (ansatz, GME)."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = [np.array([0.0, math.pi / 4, 0.0, 0.0])]
    if start is not None:
        starts.append(np.asarray(start, dtype=float))
    while len(starts) < restarts + (start is not None):
        starts.append(rng.uniform([0, 0, 0, 0], [math.pi / 2, math.pi / 2, 2 * math.pi, 2 * math.pi]))
    best = None
    for p0 in starts:
        res = minimize(_neg_overlap, p0, args=(state,), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 8000})
        res = minimize(_neg_overlap, res.x, args=(state,), method="BFGS", options={"gtol": 1e-12})
        key = (round(res.fun, 14), tuple(np.round(res.x, 10)))
        if best is None or key < best[0]:
            best = (key, res)
    ans = ProductAnsatz(*best[1].x)
    ov = -best[1].fun
    return ans, (-math.log2(ov) + 0.0 if ov > 0 else math.inf)


def grid_search_overlap(state, resolution=1e-3, coarse=24, shrink=4.0):
    """Exhaustive grid oracle, refined hierarchically down to ``resolution``.

    A full grid over (theta, phi, alpha, beta) is evaluated, then repeatedly
    re-gridded around the best point with a step reduced by ``shrink`` until
    the step is below ``resolution``.
    """
    lo = np.array([0.0, 0.0, 0.0, 0.0])
    hi = np.array([math.pi / 2, math.pi / 2, 2 * math.pi, 2 * math.pi])
    step = (hi - lo) / coarse
    axes = [np.linspace(lo[i], hi[i], coarse + 1) for i in range(4)]
    best_val, best = -1.0, None
    while True:
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
        vals = _vector_overlap2(state, mesh)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best = float(vals[k]), mesh[k]
        if np.all(step <= resolution):
            break
        step = np.maximum(step / shrink, 0) if np.any(step > resolution) else step
        axes = [np.linspace(best[i] - 2 * step[i], best[i] + 2 * step[i], 9) for i in range(4)]
    return ProductAnsatz(*best), -math.log2(best_val)


def _vector_overlap2(state, mesh):
    t, p, a, b = mesh.T
    st = np.sin(t)
    bra = [np.cos(t) + 0j, np.exp(1j * a) * st * np.sin(p), np.exp(1j * b) * st * np.cos(p)]
    total = np.zeros(len(mesh), dtype=complex)
    for c in state.classes:
        k = len(c.content)
        term = c.count * c.amp(state.x) * bra[0] ** (state.n - k)
        for lab in c.content:
            term = term * bra[lab]
        total += term
    return np.abs(total) ** 2 / state.norm_squared()


def _explicit_configs(state):
    """One explicit configuration per class member on a line of n sites.

    Members are placed at distinct deterministic site tuples; only the
    content matters for overlaps with uniform product states.
    """
    n = state.n
    out = []
    for c in state.classes:
        k = len(c.content)
        if k == 0:
            out.append(((0,) * n, c.amp(state.x)))
            continue
        for m in range(c.count):
            sites = [(m + j * (1 + m % (n - k + 1))) % n for j in range(k)]
            used, fixed = set(), []
            for s in sites:
                while s in used:
                    s = (s + 1) % n
                used.add(s)
                fixed.append(s)
            cfg = [0] * n
            for s, lab in zip(fixed, c.content):
                cfg[s] = lab
            out.append((tuple(cfg), c.amp(state.x)))
    return out


def brute_force_overlap(state, ansatz):
    """Overlap from an explicitly expanded 3^n state vector (small n only)."""
    n = state.n
    if n > 12:
        raise ValueError("brute force limited to n <= 12")
    vec = np.zeros(3**n)
    for cfg, amp in _explicit_configs(state):
        idx = 0
        for c in cfg:
            idx = 3 * idx + c
        vec[idx] += amp
    phi = ansatz.components()
    prod_state = phi
    for _ in range(n - 1):
        prod_state = np.kron(prod_state, phi)
    return np.vdot(prod_state, vec) / math.sqrt(state.norm_squared())


def recount_classes(L):
    """Count class members explicitly on an L x L torus (n = L^2).

    Returns {class: (explicit count, formula count)}.  Members are distinct
    configurations, except for the double-pair class, which counts ordered
    pairs of site-disjoint oriented nearest-neighbour pairs as the formula
    does.
    """
    if L < 5:
        raise ValueError("L >= 5 avoids wrap-around coincidences")
    n = L * L
    sites = list(product(range(L), repeat=2))

    def add(p, d):
        return ((p[0] + d[0]) % L, (p[1] + d[1]) % L)

    def configs(offsets_list, labels):
        seen = set()
        for p in sites:
            for offs in offsets_list:
                cfg = tuple(sorted((add(p, o), lab) for o, lab in zip(offs, labels)))
                seen.add(cfg)
        return seen

    nn = [((0, 0), d) for d in ((1, 0), (-1, 0), (0, 1), (0, -1))]
    diag = [((0, 0), d) for d in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    straight = [((0, 0), d) for d in ((2, 0), (-2, 0), (0, 2), (0, -2))]
    corner = [((0, 0), a, b) for a, b in (((1, 0), (0, 1)), ((0, 1), (-1, 0)), ((-1, 0), (0, -1)), ((0, -1), (1, 0)))]
    line = [((-1, 0), (0, 0), (1, 0)), ((0, -1), (0, 0), (0, 1))]
    counts = {
        "nn_pair": len(configs(nn, (1, 2))),
        "nnn_diagonal": len(configs(diag, (1, 2))),
        "nnn_straight": len(configs(straight, (1, 2))),
        "corner_222": len(configs(corner, (2, 2, 2))),
        "corner_111": len(configs(corner, (1, 1, 1))),
        "line_222": len(configs(line, (2, 2, 2))),
        "line_111": len(configs(line, (1, 1, 1))),
    }
    bonds = [(p, add(p, (1, 0))) for p in sites] + [(p, add(p, (0, 1))) for p in sites]
    disjoint = sum(1 for b1 in bonds for b2 in bonds if b1 != b2 and not set(b1) & set(b2))
    counts["double_pair"] = disjoint * 4
    formula = {c.name: c.count for c in _class_table(n) if c.name != "vacuum"}
    return {k: (counts[k], formula[k]) for k in formula}


@dataclass
class GMEScan:
    xs: np.ndarray
    gme: np.ndarray
    dgme: np.ndarray
    d2gme: np.ndarray
    angles: list
    convexity_change: float | None
    jump_location: float | None
    jump_size: float | None


def gme_scan(x_grid=None, n=25, restarts=8, seed=0):
    """GME along x with finite-difference derivatives.

    The maximizer is continued from the previous grid point in addition to
    the seeded restarts, so branch switches are detected as jumps in the
    optimal angles.  The convexity change is the first sign change of the
    second difference from positive to negative; the jump location is the
    largest jump of the first difference.
    """
    xs = np.linspace(0.0, 0.3, 121) if x_grid is None else np.asarray(x_grid, dtype=float)
    if len(xs) < 3 or xs.min() > 0.0 or xs.max() < 0.3:
        raise ValueError("grid must span [0, 0.3] with at least 3 points")
    vals, angles = [], []
    prev = None
    for x in xs:
        st = build_perturbed_ground_state(float(x), n)
        ans, g = maximize_overlap(st, restarts, seed, start=prev)
        prev = (ans.theta, ans.phi, ans.alpha, ans.beta)
        vals.append(0.0 if x == 0 else g)
        angles.append(prev)
    g = np.array(vals)
    d1 = np.gradient(g, xs)
    d2 = np.gradient(d1, xs)
    conv = None
    for i in range(1, len(xs) - 1):
        if d2[i - 1] > 0 and d2[i] <= 0:
            conv = float(xs[i])
            break
    fd = np.diff(g) / np.diff(xs)
    jumps = np.abs(np.diff(fd))
    if len(jumps):
        k = int(np.argmax(jumps))
        jump_loc, jump_size = float(xs[k + 1]), float(fd[k + 1] - fd[k])
    else:
        jump_loc = jump_size = None
    return GMEScan(xs, g, d1, d2, angles, conv, jump_loc, jump_size)


def _vector_overlap(psi, n, ansatz):
    """<phi|^n psi for a dense vector in the X eigenbasis."""
    bra = np.conj(ansatz.components())
    t = psi.reshape((3,) * n)
    for _ in range(n):
        t = np.tensordot(bra, t, axes=(0, 0))
    return complex(t)


def ed_state_gme(graph, x, restarts=8, seed=0):
    """GME of the exact mapped-cluster ground state in the symmetric family.

    Qualitative cross-check for the second-order class state; the ground
    vector is rotated into the X eigenbasis before overlaps are taken.
    """
    from .ed import ground_state
    from .lattice import build_mapped_hamiltonian

    n = graph.num_sites
    if n > 10:
        raise ValueError("dense ED cross-check limited to 10 sites")
    lam = 4.5 * x
    H = build_mapped_hamiltonian(graph, 1.0 / 3.0, lam / 3.0)
    res = ground_state(H, method="dense")
    omega = np.exp(2j * np.pi / 3)
    U = np.array([[omega ** (-j * k) for k in range(3)] for j in range(3)]) / math.sqrt(3)
    t = np.asarray(res.vector, dtype=complex).reshape((3,) * n)
    for axis in range(n):
        t = np.moveaxis(np.tensordot(U.conj().T, t, axes=(1, axis)), 0, axis)
    psi = t.reshape(-1)
    psi = psi / np.linalg.norm(psi)

    def neg(p):
        return -abs(_vector_overlap(psi, n, ProductAnsatz(*p))) ** 2

    rng = np.random.default_rng(seed)
    starts = [np.zeros(4)] + [rng.uniform(0, [math.pi / 2, math.pi / 2, 2 * math.pi, 2 * math.pi]) for _ in range(restarts - 1)]
    best = min((minimize(neg, p0, method="Nelder-Mead", options={"xatol": 1e-9, "fatol": 1e-14}) for p0 in starts), key=lambda r: r.fun)
    return ProductAnsatz(*best.x), -math.log2(-best.fun)
