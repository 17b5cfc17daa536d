import json
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from crnjoin.errors import HypothesisError
from crnjoin.generators import random_kappa, random_monomolecular_network
from crnjoin.mss import (classify_state, classify_univariate_root, count_positive_roots, exact_residual,
                         same_state, solve_positive_states,
                         count_positive_roots_univariate, count_roots_in, dedup, isolate_positive_roots,
                         linear_steady_states, monomolecular_mono_check, search_multistationarity,
                         squarefree_decomposition, sturm_sequence, univariate_polynomial, upoly_eval,
                         verify_witness)
from crnjoin.net import parse_network

from conftest import load

F = Fraction
x = sympy.Symbol("x")

coeff = st.integers(-20, 20).map(F)
upolys = st.lists(coeff, min_size=2, max_size=7).filter(lambda p: p[-1] != 0)


def as_sympy(p) -> sympy.Poly:
    return sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in p])), x)


def grid_sign_changes(p, hi: Fraction) -> int:
    """Sign changes of ``p`` on a uniform grid in (0, hi], refined until two passes agree."""
    prev = None
    steps = 64
    while steps <= 1 << 16:
        signs = []
        for k in range(1, steps + 1):
            v = upoly_eval(p, hi * k / steps)
            if v:
                signs.append(v > 0)
        changes = sum(a != b for a, b in zip(signs, signs[1:]))
        if changes == prev:
            return changes
        prev, steps = changes, steps * 4
    return prev


@settings(max_examples=150, deadline=None)
@given(upolys)
def test_sturm_count_matches_sympy(p):
    assert count_roots_in(p, F(0), None) == as_sympy(p).count_roots(0, None) - (1 if p[0] == 0 else 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=4, unique=True), st.integers(1, 5))
def test_sturm_count_matches_grid(roots, scale):
    # simple roots keep the grid oracle honest: each root is a sign change
    p = [F(scale)]
    for r in roots:
        p = [F(0)] + p
        p = [a - F(r, 4) * b for a, b in zip(p, p[1:] + [F(0)])]
    assert count_positive_roots(p).distinct == grid_sign_changes(p, F(11)) == len(roots)


@settings(max_examples=80, deadline=None)
@given(upolys)
def test_isolation_intervals_contain_roots(p):
    assume(any(p[1:]))
    for lo, hi in isolate_positive_roots(squarefree_decomposition(p)[0][0] if squarefree_decomposition(p) else p):
        assert 0 <= lo < hi
        assert hi - lo <= F(1, 10**30)


@settings(max_examples=80, deadline=None)
@given(upolys)
def test_squarefree_decomposition(p):
    parts = squarefree_decomposition(p)
    prod = sympy.Poly(1, x)
    for g, k in parts:
        prod *= as_sympy(g) ** k
    target = as_sympy(p)
    assert sympy.div(target, prod)[1].is_zero and (target.degree() == prod.degree())
    for g, _ in parts:
        assert sympy.gcd(as_sympy(g), as_sympy(g).diff(x)).degree() == 0


def test_multiplicities_reported():
    # (x - 1)^2 (x - 3)
    rc = count_positive_roots([F(-3), F(7), F(-5), F(1)])
    assert rc.distinct == 2
    assert rc.multiplicities == (2, 1)


def test_quadratic_example():
    rc = count_positive_roots([F(2), F(-3), F(1)])
    assert rc.distinct == 2 and not rc.continuum
    lo, hi = rc.intervals[0]
    assert lo <= 1 <= hi


def test_root_at_zero_is_not_positive():
    assert count_positive_roots([F(0), F(-1), F(1)]).distinct == 1


def test_sturm_sequence_ends_in_constant():
    seq = sturm_sequence([F(2), F(-3), F(1)])
    assert len(seq[-1]) == 1


def test_degenerate_rates():
    n = load("degenerate.crn").network
    same = count_positive_roots_univariate(n, {"k1": F(1), "k2": F(1)})
    assert same.continuum
    differ = count_positive_roots_univariate(n, {"k1": F(1), "k2": F(2)})
    assert not differ.continuum and differ.distinct == 0


def test_univariate_polynomial_coefficients():
    n = load("js_pair.crn").network
    p = univariate_polynomial(n, {"k1": F(1), "k2": F(2), "k3": F(3)})
    assert p == [F(0), F(-1), F(2), F(0), F(-3)]


def test_classify_reversible_pair():
    n = parse_network("X1 <-> X2 [k1, k2]")
    flags = classify_state(n, {"k1": F(1), "k2": F(2)}, [F(2), F(1)])
    assert flags.nondegenerate and flags.exp_stable


def test_classify_quadratic_root():
    p = [F(2), F(-3), F(1)]
    rc = count_positive_roots(p)
    flags = classify_univariate_root(p, rc.intervals[0], rc.multiplicities[0])
    assert flags.nondegenerate and flags.exp_stable
    assert not classify_univariate_root(p, rc.intervals[1], 1).exp_stable
    assert not classify_univariate_root(p, rc.intervals[0], 2).nondegenerate


def test_degenerate_states_flagged():
    n = load("degenerate.crn").network
    flags = classify_state(n, {"k1": F(1), "k2": F(1)}, [F(3)])
    assert not flags.nondegenerate


def test_mono_check():
    assert monomolecular_mono_check(parse_network("0 -> X1 [k1]; X1 <-> X2 [k2, k3]; X2 -> 0 [k4]")).kind == "ProvedMono"
    assert monomolecular_mono_check(parse_network("A -> 2A [k]")).kind == "ProvedMono"
    with pytest.raises(HypothesisError):
        monomolecular_mono_check(parse_network("2A -> 3A [k]"))


def test_linear_steady_states():
    n = parse_network("X1 <-> X2 [k1, k2]")
    kind, sol = linear_steady_states(n, {"k1": F(1), "k2": F(3)}, [F(2), F(2)])
    assert kind == "unique" and sol == [F(3), F(1)]
    n = parse_network("A -> 0 [k1]; A -> 2A [k2]")
    assert linear_steady_states(n, {"k1": F(1), "k2": F(1)}, [F(1)])[0] == "infinite"
    # positivity is not imposed: k1 + k2*a = 0 has the single solution a = -1
    n = parse_network("0 -> A [k1]; A -> 2A [k2]")
    assert linear_steady_states(n, {"k1": F(1), "k2": F(1)}, [F(1)]) == ("unique", [F(-1)])
    n = parse_network("0 -> A [k1]")
    assert linear_steady_states(n, {"k1": F(1)}, [F(1)])[0] == "none"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_monomolecular_never_multistationary(seed):
    rng = random.Random(seed)
    n = random_monomolecular_network(rng)
    v = search_multistationarity(n, budget=3, seed=seed)
    if v.witness is not None:
        assert sum(f.nondegenerate for f in v.witness.flags) < 2


def test_pair_witness_replays():
    v = search_multistationarity(load("js_pair.crn").network, budget=2000, seed=0)
    assert v.kind == "MultistationaryWitness"
    assert v.witness.count == 2 and v.witness.exact
    data = json.loads(v.witness.to_json())
    assert verify_witness(data) == (True, [])


def test_tampered_witness_rejected():
    v = search_multistationarity(load("js_pair.crn").network, budget=2000, seed=0)
    data = v.witness.to_dict()
    data["kappa"]["k1"] = str(F(data["kappa"]["k1"]) * 2)
    ok, problems = verify_witness(data)
    assert not ok and any("residual" in p for p in problems)
    data = v.witness.to_dict()
    data["states"] = data["states"][:1]
    assert not verify_witness(data)[0]


def test_search_is_deterministic():
    n = load("decoupled.crn").network
    a = search_multistationarity(n, budget=50, seed=3, target=4)
    b = search_multistationarity(n, budget=50, seed=3, target=4)
    assert a.to_dict() == b.to_dict()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.floats(0.1, 10), min_size=2, max_size=2), max_size=8), st.floats(1e-9, 1e-1))
def test_dedup_never_increases_count(states, distance):
    merged = dedup(states, distance)
    assert len(merged) <= len(states)
    assert len(dedup(merged, distance)) == len(merged)
    assert len(dedup(states, 1e-8)) >= len(dedup(states, max(distance, 1e-8)))


def test_numeric_witness_is_verified():
    v = search_multistationarity(load("decoupled.crn").network, budget=200, seed=0, target=4)
    assert v.kind == "MultistationaryWitness" and v.witness.count >= 4
    assert verify_witness(v.witness.to_dict())[0]
    assert all(f.nondegenerate for f in v.witness.flags)


def _anchor(n, rng):
    from crnjoin.mss import _System
    if _System.build(n).conservation.shape[0]:
        return [float(F(f"{10 ** rng.uniform(-1, 1):.6g}")) for _ in n.species]
    return None


def test_boundary_states_are_not_positive():
    n = parse_network("0 -> X2 [a]; X2 -> 0 [b]; X1 -> 0 [c]")
    kappa = {"a": F(569), "b": F(1, 125), "c": F(1, 200)}
    assert solve_positive_states(n, kappa, None, np.random.default_rng(0)) == []


def test_large_states_are_certified_exactly():
    n = parse_network("0 -> X1 [a]; X1 -> 0 [b]")
    kappa = {"a": F(1000), "b": F(1, 1000)}
    (state,) = solve_positive_states(n, kappa, None, np.random.default_rng(0))
    assert exact_residual(n, kappa, state) <= 1e-10
    assert abs(float(state[0]) - 1e6) < 1e-6


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_numeric_states_match_linear_solution(seed):
    rng = random.Random(seed)
    n = random_monomolecular_network(rng)
    kappa = random_kappa(rng, n)
    x0 = _anchor(n, rng)
    states = solve_positive_states(n, kappa, x0, np.random.default_rng(seed))
    kind, sol = linear_steady_states(n, kappa, [F(v) for v in x0] if x0 else [F(1)] * len(n.species))
    if kind == "none":
        assert states == []
    elif kind == "unique":
        positive = all(v > 0 for v in sol)
        assert len(states) == (1 if positive else 0)
        if positive:
            assert same_state(states[0], sol, 1e-6)
