"""Seeded generators: determinism and structural guarantees."""

import numpy as np
import pytest

from ncwres.fourier_oracle import nc_invert_neumann
from ncwres.randgen import (
    random_assignment,
    random_poly,
    random_probe_pair,
    random_self_adjoint,
    random_symbol,
    random_theta,
)
from ncwres.serialize import assignment_to_json, poly_to_json, symbol_to_json


def test_same_seed_same_output():
    a = random_poly(4, 123, terms=3)
    b = random_poly(4, 123, terms=3)
    assert poly_to_json(a) == poly_to_json(b)
    s1 = random_symbol(4, 99, degree=-4)
    s2 = random_symbol(4, 99, degree=-4)
    assert symbol_to_json(s1) == symbol_to_json(s2)
    a1 = random_assignment(2, 7)
    a2 = random_assignment(2, 7)
    assert assignment_to_json(a1) == assignment_to_json(a2)


def test_different_seeds_differ():
    assert poly_to_json(random_poly(4, 1, terms=3)) != poly_to_json(
        random_poly(4, 2, terms=3)
    )


def test_random_symbol_is_homogeneous():
    for seed in range(5):
        s = random_symbol(4, seed, degree=-3)
        assert s.degrees() in ([], [-3])


def test_probe_pair_reaches_critical_degree():
    for seed in range(5):
        p, q = random_probe_pair(4, seed)
        assert p.max_degree() + q.max_degree() == -4


def test_theta_modes():
    assert (random_theta(3, 0, "zero").mat == 0).all()
    rat = random_theta(3, 1, "rational").mat
    assert np.allclose(rat * 8, np.round(rat * 8))
    irr = random_theta(3, 2, "irrational")
    assert not (irr.mat == 0).all()
    with pytest.raises(ValueError):
        random_theta(3, 0, "bogus")


def test_assignments_are_self_adjoint_and_invertible():
    for mode in ("zero", "rational", "irrational"):
        asg = random_assignment(3, 42, theta_mode=mode, eps=0.1)
        for el in asg.atoms.values():
            assert el.is_self_adjoint(tol=1e-12)
        res = nc_invert_neumann(asg.atoms["h"], tol=1e-10)
        assert res.tail_bound <= 1e-10


def test_eps_bounds_enforced():
    with pytest.raises(ValueError):
        random_assignment(2, 0, eps=0.3)


def test_self_adjoint_radius_respected():
    el = random_self_adjoint(random_theta(4, 5, "irrational"), 5, modes=6, radius=2)
    assert all(max(abs(i) for i in idx) <= 2 for idx in el.coeffs)
