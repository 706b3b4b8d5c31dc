import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import check_grad

from kitaev_potts.meanfield import (
    _energy_and_grad,
    energy,
    general_minimize,
    restricted_energy,
    restricted_minimize,
    scan_transition,
    stationary_x,
    symmetric_energy,
)


def test_symmetric_identity_exact():
    assert symmetric_energy(1, Fraction(3, 10)) == Fraction(-2) - Fraction(2, 5)
    for J, lam in ((1.0, 0.0), (1.0, 0.4), (0.3, 2.0)):
        a = np.ones(3) / math.sqrt(3)
        assert energy(a, J, lam) == pytest.approx(-2 * J - 4 * lam / 3, abs=1e-14)


def test_energy_from_two_site_expectation():
    # direct expectation values in the product state, two bonds per site
    rng = np.random.default_rng(3)
    a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    a /= np.linalg.norm(a)
    X = np.roll(np.eye(3), 1, axis=0)
    Z = np.diag(np.exp(2j * np.pi * np.arange(3) / 3))
    J, lam = 0.7, 0.4
    onsite = -J * np.vdot(a, (X + X.conj().T) @ a).real
    bond_op = np.kron(Z, Z.conj().T) + np.kron(Z.conj().T, Z)
    aa = np.kron(a, a)
    # sum_r [(Z Z^dag)^r + h.c.] = 2 + 2 (Z Z^dag + Z^dag Z)
    bond = -(lam / 3) * (2 + 2 * np.vdot(aa, bond_op @ aa).real) * 2
    assert energy(a, J, lam) == pytest.approx(onsite + bond, abs=1e-12)
    # the closed form: -J(|sum a|^2 - 1) - 4 lam sum |a|^4
    assert energy(a, J, lam) == pytest.approx(-J * (abs(a.sum()) ** 2 - 1) - 4 * lam * np.sum(np.abs(a) ** 4), abs=1e-14)
    assert onsite == pytest.approx(-J * (abs(a.sum()) ** 2 - 1), abs=1e-12)
    assert bond == pytest.approx(-4 * lam * np.sum(np.abs(a) ** 4), abs=1e-12)


def test_gradient():
    rng = np.random.default_rng(0)
    for _ in range(5):
        p = rng.standard_normal(6)
        err = check_grad(lambda q: _energy_and_grad(q, 1.0, 0.5)[0], lambda q: _energy_and_grad(q, 1.0, 0.5)[1], p)
        assert err < 1e-5


def test_variational_ordering():
    for x in np.linspace(0, 0.3, 50):
        lam = 4.5 * x
        gen = general_minimize(1.0, lam, restarts=8, seed=1)
        res, _ = restricted_minimize(1.0, lam)
        sym = float(symmetric_energy(1.0, lam))
        assert gen.energy <= res.energy + 1e-9
        assert res.energy <= sym + 1e-12


def test_stationary_line_matches_restricted_minimum():
    for x in (0.15, 0.2, 0.3):
        best, _ = restricted_minimize(1.0, 4.5 * x)
        # (theta, pi) is the same state as (pi - theta, 0)
        theta = best.theta if best.alpha == 0 else math.pi - best.theta
        assert best.branch == "polarized"
        assert stationary_x(theta) == pytest.approx(x, rel=1e-5)


def test_restricted_energy_at_symmetric_point():
    t = math.asin(1 / math.sqrt(3))
    assert restricted_energy(t, 0.0, 1.0, 0.25) == pytest.approx(-2 - 1 / 3, abs=1e-14)


def test_restarts_validated():
    with pytest.raises(ValueError):
        general_minimize(1.0, 0.1, restarts=0)


def test_kink_location():
    rep, xs, e, states = scan_transition(np.linspace(0, 0.3, 61), restarts=16)
    assert abs(rep.value - 0.115) <= 0.005
    assert states[0].branch == "symmetric"
    assert states[-1].branch == "polarized"


def test_grid_must_cover_window():
    with pytest.raises(ValueError):
        scan_transition(np.linspace(0, 0.2, 11))
