"""Acceptance criteria at their stated tolerances.

Each test records its outcome under a criterion number; the terminal summary
prints one PASS/FAIL line per criterion (see ``conftest.py``).
"""

import io
import json
import random
import time
from fractions import Fraction

import pytest

from crnjoin.cli import run
from crnjoin.generators import (random_glue_instance, random_leak_free_model, random_monomolecular_network,
                                random_scenario12_join, random_scenario34_join, random_shared_reaction_glue,
                                random_single_species_glue, random_zero_tree)
from crnjoin.groebner import Ideal, ideal_equal
from crnjoin.invariants import (check_glue_sum_decomposition, check_shared_reaction_equality,
                                check_single_species_equality, compare_projections, elimination_ideal)
from crnjoin.lincomp import (GLOBAL, LOCAL, UNIDENTIFIABLE, add_leak, det, global_identifiability,
                             local_identifiability, observability_equations, observability_matrix,
                             tree_walk_matrix)
from crnjoin.massaction import steady_state_ideal
from crnjoin.mss import (count_positive_roots_univariate, monomolecular_mono_check, search_multistationarity,
                         univariate_polynomial)
from crnjoin.net import Complex, OneWayFlowSpec, join_one_way_flow, parse_network, union
from crnjoin.poly import parse_poly

from conftest import ROOT, load, record
from test_lincomp import graph_with_tree

F = Fraction


def cli(*argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], buf)
    return code, buf.getvalue()


def ideal(*gens):
    return Ideal.of([parse_poly(g) for g in gens])


# 1. I/O-equation regression


def test_criterion_1_io_equation():
    t = time.perf_counter()
    code, out = cli("io-eq", ROOT / "models/restriction.crn", "--output", "X1")
    elapsed = time.perf_counter() - t
    expected = "z1'' + (a12 + a21 + a32)*z1' + a21*a32*z1 = u1' + (a12 + a32)*u1"
    ok = code == 0 and out.strip() == expected and elapsed < 1.0
    record(1, "io-eq restriction model", ok, f"{elapsed:.2f}s")
    assert ok, out


# 2. elimination regression


def test_criterion_2_displayed_ideals():
    t = time.perf_counter()
    c1, c2 = parse_network("X1 -> X2 [k1]"), parse_network("X2 -> X1 [k2]")
    r1 = parse_network("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]")
    r2 = parse_network("X4 -> X2 [k2]; X2 -> X1 + X2 [k3]")
    cu, ru = union(c1, c2), union(r1, r2)
    checks = [
        (steady_state_ideal(cu), ideal("-k1*x1 + k2*x2")),
        (steady_state_ideal(c1), ideal("k1*x1")),
        (steady_state_ideal(c2), ideal("k2*x2")),
        (elimination_ideal(cu, ["X1"]), Ideal((), ("k1", "k2", "x2"))),
        (elimination_ideal(c1, ["X1"]), Ideal((), ("k1", "x2"))),
        (elimination_ideal(c2, ["X1"]), ideal("k2*x2")),
        (steady_state_ideal(ru), ideal("k1*x3 + k3*x2", "k2*x4")),
        (steady_state_ideal(r1), ideal("k2*x4", "k1*x3")),
        (steady_state_ideal(r2), ideal("k2*x4", "k3*x2")),
        (elimination_ideal(ru, ["X3"]), ideal("k2*x4")),
        (elimination_ideal(r1, ["X3"]), ideal("k2*x4")),
        (elimination_ideal(r2, ["X3"]), ideal("k2*x4", "k3*x2")),
        (elimination_ideal(ru, ["X4"]), ideal("k1*x3 + k3*x2")),
        (elimination_ideal(r1, ["X4"]), ideal("k1*x3")),
        (elimination_ideal(r2, ["X4"]), ideal("k3*x2")),
    ]
    equal = [ideal_equal(a, b) for a, b in checks]
    elapsed = time.perf_counter() - t
    ok = all(equal) and elapsed < 5.0
    record(2, f"{sum(equal)}/{len(equal)} displayed ideals", ok, f"{elapsed:.2f}s")
    assert ok


# 3. containment property


def test_criterion_3_containment():
    violations = 0
    for seed in range(500):
        inst = random_glue_instance(random.Random(seed))
        r1, r2 = compare_projections(inst.n1, inst.n2, inst.eliminate)
        violations += (not r1.containment_holds) + (not r2.containment_holds)
    record(3, "500 random glue instances", violations == 0, f"{violations} violations")
    assert violations == 0


# 4. monomolecular equality theorems


def test_criterion_4_equality_theorems():
    t = time.perf_counter()
    failures = {"single species": 0, "shared reaction": 0, "unidirectional glue": 0}
    for seed in range(100):
        n1, n2, _, ell = random_single_species_glue(random.Random(seed))
        failures["single species"] += not check_single_species_equality(n1, n2, ell)
        n1, n2, pair, ell = random_shared_reaction_glue(random.Random(seed))
        failures["shared reaction"] += not check_shared_reaction_equality(n1, n2, pair, ell)
        n1, n2, k, ell = random_single_species_glue(random.Random(seed), unidirectional=True)
        failures["unidirectional glue"] += not check_glue_sum_decomposition(n1, n2, k, ell)
    _, strict_c = compare_projections(parse_network("X1 -> X2 [k1]"), parse_network("X2 -> X1 [k2]"), ["X1"])
    _, strict_r = compare_projections(parse_network("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]"),
                                      parse_network("X4 -> X2 [k2]; X2 -> X1 + X2 [k3]"), ["X3"])
    strict = not strict_c.equality_holds and not strict_r.equality_holds
    elapsed = time.perf_counter() - t
    ok = not any(failures.values()) and strict and elapsed < 60
    record(4, "3 x 100 theorem instances, 2 strict counterexamples", ok, f"{failures}, {elapsed:.1f}s")
    assert ok


# 5. identifiability verdicts


def test_criterion_5_identifiability():
    t = time.perf_counter()
    two = global_identifiability(load("two_compartment.crn").model())
    n2 = local_identifiability(load("unidentifiable_n2.crn").model())
    joined = join_one_way_flow(load("join_n1.crn").model(), load("join_n2.crn").model(),
                               OneWayFlowSpec.of(1, {"X2": "X3"}))
    j = global_identifiability(joined)
    elapsed = time.perf_counter() - t
    deficit = n2.evidence["parameters"] - max(n2.evidence["sampled_ranks"])
    ok = (two.kind == GLOBAL and n2.kind == UNIDENTIFIABLE and len(n2.evidence["sampled_ranks"]) == 5
          and deficit >= 1 and j.kind in (LOCAL, GLOBAL) and elapsed < 10)
    record(5, "two-compartment / N2 / scenario-1 join", ok,
           f"{two.kind}, {n2.kind} (deficit {deficit}), {j.kind}, {elapsed:.2f}s")
    assert ok


# 6. theorem instance suites


def test_criterion_6_theorem_suites():
    t = time.perf_counter()
    bad = {"scenario 1/2 joins": 0, "scenario 3/4 joins": 0, "one added leak": 0}
    for seed in range(50):
        inst = random_scenario12_join(random.Random(seed))
        bad["scenario 1/2 joins"] += local_identifiability(inst.joined, seed).kind == UNIDENTIFIABLE
        inst = random_scenario34_join(random.Random(seed))
        bad["scenario 3/4 joins"] += local_identifiability(inst.joined, seed).kind == UNIDENTIFIABLE
        rng = random.Random(seed)
        m = random_leak_free_model(rng)
        leaky = add_leak(m, rng.choice(m.network.species))
        bad["one added leak"] += local_identifiability(leaky, seed).kind == UNIDENTIFIABLE
    elapsed = time.perf_counter() - t
    ok = not any(bad.values()) and elapsed < 300
    record(6, "3 x 50 hypothesis-satisfying instances", ok, f"{bad}, {elapsed:.1f}s")
    assert ok


# 7. walk matrix machinery


def test_criterion_7_walk_matrix():
    zero_dets = mismatches = 0
    for seed in range(100):
        rng = random.Random(seed)
        n = rng.randint(2, 7)
        tree = random_zero_tree(rng, n)
        walk = tree_walk_matrix(n, tree)
        zero_dets += walk.det.is_zero()
        m, extra = graph_with_tree(rng, n, tree)
        b = observability_matrix(m, "X0").matrix
        # zeroing labels is a ring map, so det(B)|_0 = det(B|_0)
        zeroed = [[p.set_zero(extra) for p in row] for row in b]
        mismatches += det(zeroed) != walk.det
        if n <= 4:
            mismatches += det(b).set_zero(extra) != walk.det
    (obs,) = observability_equations(load("two_compartment.crn").model(), "X1")
    obs_ok = obs.render() == "x2 = (x1' + a21*x1 - u1)/a12"
    ok = zero_dets == 0 and mismatches == 0 and obs_ok
    record(7, "100 random 0-trees, substitution identity, observability", ok,
           f"{zero_dets} zero dets, {mismatches} mismatches, {obs.render()}")
    assert ok


# 8. multistationarity counts


def _witness_replays(model: str, target: int, tmp_path) -> tuple[bool, str]:
    path = tmp_path / f"{target}.json"
    code, out = cli("mss", ROOT / "models" / model, "--target-count", target, "--witness-out", path, "--json")
    verdict = json.loads(out)["result"]
    if verdict["verdict"] != "MultistationaryWitness":
        return False, f"{model}: {verdict['verdict']} (max states seen {verdict['details']['max_states_seen']})"
    count = verdict["witness"]["count"]
    code, out = cli("mss", "--verify", path, "--json")
    verified = json.loads(out)["result"]["verified"]
    return count == target and verified, f"{model}: {count} states, verified={verified}"


def test_criterion_8_two_states(tmp_path):
    ok, detail = _witness_replays("js_pair.crn", 2, tmp_path)
    record(8, "2 states for {0<-A, 2A->3A<-4A}", ok, detail)
    assert ok


@pytest.mark.xfail(strict=True, reason="at most 4 positive roots by Descartes' rule of signs; see decisions ledger")
def test_criterion_8_five_states_after_join(tmp_path):
    t = time.perf_counter()
    ok, detail = _witness_replays("js_chain.crn", 5, tmp_path)
    record(8, "5 states for the 4A->5A join", ok, f"{detail}, {time.perf_counter() - t:.1f}s")
    assert ok


def test_criterion_8_descartes_bound(tmp_path):
    # the x^4 coefficient k7 - k3 has either sign; all other signs are fixed
    n = load("js_chain.crn").network
    for k3, k7 in ((1, 2), (2, 1), (1, 1)):
        kappa = {k: F(1) for k in n.labels} | {"k3": F(k3), "k7": F(k7)}
        signs = [c > 0 for c in univariate_polynomial(n, kappa) if c]
        assert sum(a != b for a, b in zip(signs, signs[1:])) <= 4
    # the same two networks glued over 3A do reach five
    ok, detail = _witness_replays("js_glue.crn", 5, tmp_path)
    assert ok, detail


def test_criterion_8_four_states(tmp_path):
    ok, detail = _witness_replays("decoupled.crn", 4, tmp_path)
    record(8, "4 states for the decoupled A->B join", ok, detail)
    assert ok


def test_criterion_8_monomolecular_property():
    t = time.perf_counter()
    rng = random.Random(0)
    bad = draws = 0
    while draws < 10**4:
        n = random_monomolecular_network(rng)
        assert monomolecular_mono_check(n).kind == "ProvedMono"
        v = search_multistationarity(n, budget=1, seed=draws)
        draws += 1
        if v.witness is not None and sum(f.nondegenerate for f in v.witness.flags) >= 2:
            bad += 1
    elapsed = time.perf_counter() - t
    ok = bad == 0 and elapsed < 300
    record(8, "monomolecular property over 10^4 draws", ok, f"{bad} witnesses, {elapsed:.0f}s")
    assert ok


# 9. degenerate example


def test_criterion_9_degenerate():
    n = load("degenerate.crn").network
    same = count_positive_roots_univariate(n, {"k1": F(1), "k2": F(1)})
    differ = count_positive_roots_univariate(n, {"k1": F(1), "k2": F(2)})
    ok = same.continuum and not differ.continuum and differ.distinct == 0
    record(9, "equal rates continuum, unequal rates none", ok,
           f"continuum={same.continuum}, roots={differ.distinct}")
    assert ok
