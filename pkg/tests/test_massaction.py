import random
from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from crnjoin.generators import random_glue_instance
from crnjoin.massaction import (compatibility_class, concentration_name, glue_ode_decomposition,
                                stoichiometric_matrix, steady_state_ideal, system_polynomials)
from crnjoin.net import parse_network
from crnjoin.poly import parse_poly


def test_concentration_names():
    assert concentration_name("X12") == "x12"
    assert concentration_name("A") == "x_A"


def test_system_polynomials_example():
    n = parse_network("A + B -> 3A + C [k]")
    f = system_polynomials(n).by_species()
    assert f["A"] == parse_poly("2*k*x_A*x_B")
    assert f["B"] == parse_poly("-k*x_A*x_B")
    assert f["C"] == parse_poly("k*x_A*x_B")


def test_flow_chain_system():
    n = parse_network("0 -> X1 [u1]; X1 <-> X2 [k21,k12]; X2 -> 0 [k02]")
    f = system_polynomials(n)
    assert f.polys == (parse_poly("u1 - k21*x1 + k12*x2"), parse_poly("k21*x1 - k12*x2 - k02*x2"))
    assert f.ring == ("u1", "k21", "k12", "k02", "x1", "x2")


def test_stoichiometric_rank_and_conservation_match_sympy():
    n = parse_network("S0 + E <-> X [k1,k2]; X -> S1 + E [k3]; S1 + F <-> Y [k4,k5]; Y -> S0 + F [k6]")
    sm = stoichiometric_matrix(n)
    gamma = sympy.Matrix(sm.rows)
    assert sm.rank() == gamma.rank() == 3
    cons = sm.conservation_basis()
    assert len(cons) == len(n.species) - 3
    for w in cons:
        assert all(v == 0 for v in (sympy.Matrix([w]) * gamma))


def test_compatibility_totals():
    n = parse_network("X1 <-> X2 [a,b]")
    cc = compatibility_class(n, [1, 2])
    assert len(cc.orthogonal_basis) == 1 and cc.totals()[0] == 3 * cc.orthogonal_basis[0][0]


def test_steady_state_ideal_drops_dependent_generator():
    n = parse_network("X1 <-> X2 [a,b]; X2 -> X3 [c]")
    assert len(steady_state_ideal(n).generators) == 3
    assert len(steady_state_ideal(n, drop_dependent=True).generators) == 2


def test_glue_decomposition_cases():
    n1 = parse_network("X1 -> X2 [k1]")
    n2 = parse_network("X2 -> X1 [k2]")
    assert glue_ode_decomposition(n1, n2).case == 1
    n1 = parse_network("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]")
    n2 = parse_network("X4 -> X2 [k2]; X2 -> X1 + X2 [k3]")
    assert glue_ode_decomposition(n1, n2).case == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_glued_odes_split_as_sum(seed):
    inst = random_glue_instance(random.Random(seed))
    dec = glue_ode_decomposition(inst.n1, inst.n2)
    assert all(f + g == h for f, g, h in zip(dec.f, dec.g, dec.h))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_conservation_laws_are_invariants(seed):
    inst = random_glue_instance(random.Random(seed))
    n = inst.n1
    sys_ = system_polynomials(n)
    for w in stoichiometric_matrix(n).conservation_basis():
        total = sum((p * Fraction(c) for p, c in zip(sys_.polys, w) if c), parse_poly("0"))
        assert total.is_zero()
