"""Seeded random instances for the property suites.

Every generator takes a ``random.Random`` and returns objects satisfying the
hypotheses of the statement under test, so suites can loop over seeds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .lincomp import GLOBAL, LOCAL, local_identifiability
from .net import (Complex, GlueKind, Model, Network, OneWayFlowSpec, Reaction, ZERO, classify_glue,
                  default_label, is_strongly_connected, join_one_way_flow)


def _rxn(y: Complex, yp: Complex) -> Reaction:
    # the label depends only on the reaction, so shared reactions agree
    return Reaction(y, yp, default_label(y, yp))


def _species(names) -> list[str]:
    return [f"X{i}" for i in names]


def random_connected_edges(rng: random.Random, species: list[str], extra: float = 0.3) -> set[tuple[str, str]]:
    """Directed edges whose underlying graph is a spanning tree plus random extras."""
    edges: set[tuple[str, str]] = set()
    order = species[:]
    rng.shuffle(order)
    for k in range(1, len(order)):
        a, b = order[k], rng.choice(order[:k])
        edges.add((a, b) if rng.random() < 0.5 else (b, a))
    for a in species:
        for b in species:
            if a != b and rng.random() < extra:
                edges.add((a, b))
    return edges


def strongly_connected_edges(rng: random.Random, species: list[str], extra: float = 0.3) -> set[tuple[str, str]]:
    order = species[:]
    rng.shuffle(order)
    edges = {(order[k], order[(k + 1) % len(order)]) for k in range(len(order))} if len(order) > 1 else set()
    for a in species:
        for b in species:
            if a != b and rng.random() < extra:
                edges.add((a, b))
    return edges


def mono_network(edges, species: list[str]) -> Network:
    rxns = [_rxn(Complex.of(a), Complex.of(b)) for a, b in sorted(edges)]
    return Network.from_reactions(rxns, species)


# gluing instances for elimination ideals


def _complex_pool(species: list[str]) -> list[Complex]:
    pool = [ZERO] + [Complex.of(s) for s in species]
    for i, a in enumerate(species):
        pool.append(Complex.of({a: 2}))
        for b in species[i + 1:]:
            pool.append(Complex.of({a: 1, b: 1}))
    return pool


def _random_reactions(rng: random.Random, pool: list[Complex], count: int) -> list[Reaction]:
    out: dict[tuple[Complex, Complex], Reaction] = {}
    while len(out) < count:
        y, yp = rng.sample(pool, 2)
        out[(y, yp)] = _rxn(y, yp)
    return list(out.values())


@dataclass(frozen=True)
class GlueInstance:
    n1: Network
    n2: Network
    eliminate: tuple[str, ...]
    kind: GlueKind


def random_glue_instance(rng: random.Random, max_species: int = 6) -> GlueInstance:
    """Two small networks glued over complexes or reactions, with species to eliminate."""
    while True:
        total = rng.randint(2, max_species)
        names = _species(range(1, total + 1))
        cut = rng.randint(1, total)
        s1 = names[:cut] + rng.sample(names[cut:], k=min(len(names[cut:]), rng.randint(0, 1)))
        s2 = names[cut - 1:] if cut > 1 else names[:]
        s1, s2 = sorted(set(s1), key=names.index), sorted(set(s2), key=names.index)
        r1 = _random_reactions(rng, _complex_pool(s1), rng.randint(1, 3))
        shared = [r for r in r1 if set(r.species()) <= set(s2)]
        r2 = _random_reactions(rng, _complex_pool(s2), rng.randint(1, 3))
        if shared and rng.random() < 0.5:
            r2.append(rng.choice(shared))
        n1 = Network.from_reactions(r1)
        try:
            n2 = Network.from_reactions({(r.reactant, r.product): r for r in r2}.values())
        except ValueError:
            continue
        kind = classify_glue(n1, n2)
        if kind not in (GlueKind.OVER_COMPLEXES, GlueKind.OVER_REACTIONS):
            continue
        every = sorted(set(n1.species) | set(n2.species), key=names.index)
        elim = tuple(rng.sample(every, rng.randint(1, min(2, len(every)))))
        return GlueInstance(n1, n2, elim, kind)


def random_single_species_glue(rng: random.Random, max_species: int = 6, unidirectional: bool = False):
    """Monomolecular networks sharing exactly one species (optionally one-way through it)."""
    while True:
        total = rng.randint(2, max_species)
        names = _species(range(1, total + 1))
        k = rng.randrange(total)
        glue = names[k]
        rest = [s for s in names if s != glue]
        rng.shuffle(rest)
        cut = rng.randint(0, len(rest))
        s1 = [glue] + rest[:cut]
        s2 = [glue] + rest[cut:]
        if len(s1) < 2 and len(s2) < 2:
            continue
        e1 = random_connected_edges(rng, s1)
        e2 = random_connected_edges(rng, s2)
        if unidirectional:
            e1 = {(a, b) for a, b in e1 if a != glue}
            e2 = {(a, b) for a, b in e2 if b != glue}
        if not e1 or not e2:
            continue
        try:
            n1 = mono_network(e1, [s for s in names if s in s1])
            n2 = mono_network(e2, [s for s in names if s in s2])
        except ValueError:
            continue
        if set(n1.species) != set(s1) or set(n2.species) != set(s2):
            continue
        ell = rng.choice(names)
        return n1, n2, glue, (ell,)


def random_shared_reaction_glue(rng: random.Random, max_species: int = 6):
    """Monomolecular networks glued over ``Xj1 -> Xj2`` (or the reversible pair)."""
    while True:
        total = rng.randint(2, max_species)
        names = _species(range(1, total + 1))
        j1, j2 = rng.sample(names, 2)
        rest = [s for s in names if s not in (j1, j2)]
        rng.shuffle(rest)
        cut = rng.randint(0, len(rest))
        o1, o2 = rest[:cut], rest[cut:]
        shared = {(j1, j2)} | ({(j2, j1)} if rng.random() < 0.5 else set())
        e1 = shared | random_connected_edges(rng, [j1] + o1)
        e2 = shared | random_connected_edges(rng, [j2] + o2)
        n1 = mono_network(e1, [s for s in names if s in {j1, j2, *o1}])
        n2 = mono_network(e2, [s for s in names if s in {j1, j2, *o2}])
        ell = rng.choice(names)
        return n1, n2, (Complex.of(j1), Complex.of(j2)), (ell,)


# compartmental models for identifiability suites


def compartmental_model(rng: random.Random, names: list[str], *, leaks: int, inflows: int,
                        strongly_connected: bool = True) -> Model:
    edges = strongly_connected_edges(rng, names) if strongly_connected else random_connected_edges(rng, names)
    rxns = [Reaction(Complex.of(a), Complex.of(b), f"a{b[1:]}{a[1:]}") for a, b in sorted(edges)]
    for s in rng.sample(names, min(inflows, len(names))):
        rxns.append(Reaction(ZERO, Complex.of(s), f"u{s[1:]}"))
    for s in rng.sample(names, min(leaks, len(names))):
        rxns.append(Reaction(Complex.of(s), ZERO, f"a0{s[1:]}"))
    net = Network.from_reactions(rxns, names)
    outs = tuple(sorted(rng.sample(names, rng.randint(1, min(2, len(names)))), key=names.index))
    return Model(net, outs)


def _identifiable(m: Model, seed: int) -> bool:
    return local_identifiability(m, seed).kind in (LOCAL, GLOBAL)


def identifiable_model(rng: random.Random, names: list[str], *, leaks: int, inflows: int,
                       tries: int = 200) -> Model:
    for _ in range(tries):
        m = compartmental_model(rng, names, leaks=leaks, inflows=inflows)
        if _identifiable(m, 0):
            return m
    raise RuntimeError("no identifiable model found")


@dataclass(frozen=True)
class JoinInstance:
    m1: Model
    m2: Model
    spec: OneWayFlowSpec
    joined: Model


def random_scenario12_join(rng: random.Random, max_each: int = 3) -> JoinInstance:
    """Identifiable, output-connectable operands with inflows, joined via Scenario 1 or 2."""
    scenario = rng.choice((1, 2))
    a = rng.randint(1, max_each)
    b = rng.randint(1, max_each)
    names1 = _species(range(1, a + 1))
    names2 = _species(range(a + 1, a + b + 1))
    m1 = identifiable_model(rng, names1, leaks=1, inflows=1)
    m2 = identifiable_model(rng, names2, leaks=rng.randint(0, 1), inflows=1)
    src = m1.network.outflow_species()[0]
    dst = m2.network.inflow_species()[0] if scenario == 1 else rng.choice(names2)
    spec = OneWayFlowSpec.of(scenario, {src: dst})
    return JoinInstance(m1, m2, spec, join_one_way_flow(m1, m2, spec))


def random_scenario34_join(rng: random.Random, max_each: int = 3) -> JoinInstance:
    """Leak-free strongly connected first operand, joined by one reaction via Scenario 3 or 4."""
    scenario = rng.choice((3, 4))
    a = rng.randint(1, max_each)
    b = rng.randint(1, max_each)
    names1 = _species(range(1, a + 1))
    names2 = _species(range(a + 1, a + b + 1))
    m1 = identifiable_model(rng, names1, leaks=0, inflows=1)
    m2 = identifiable_model(rng, names2, leaks=rng.randint(0, 1), inflows=1)
    src = rng.choice(names1)
    dst = m2.network.inflow_species()[0] if scenario == 4 else rng.choice(names2)
    spec = OneWayFlowSpec.of(scenario, {src: dst})
    return JoinInstance(m1, m2, spec, join_one_way_flow(m1, m2, spec))


def random_leak_free_model(rng: random.Random, max_species: int = 4) -> Model:
    """Strongly connected, leak-free, identifiable model with at least one inflow."""
    names = _species(range(1, rng.randint(1, max_species) + 1))
    m = identifiable_model(rng, names, leaks=0, inflows=rng.randint(1, 2))
    assert is_strongly_connected(m.network)
    return m


# trees and monomolecular kinetics


def random_zero_tree(rng: random.Random, n: int) -> list[tuple[int, int]]:
    """Edges ``child -> parent`` of a random tree directed towards vertex 0."""
    order = list(range(1, n))
    rng.shuffle(order)
    placed = [0]
    edges = []
    for v in order:
        edges.append((v, rng.choice(placed)))
        placed.append(v)
    return edges


def random_monomolecular_network(rng: random.Random, max_species: int = 3) -> Network:
    """Reactant complexes monomolecular or zero; products may be zero too."""
    names = _species(range(1, rng.randint(1, max_species) + 1))
    nodes = [ZERO] + [Complex.of(s) for s in names]
    while True:
        rxns: dict[tuple[Complex, Complex], Reaction] = {}
        for _ in range(rng.randint(1, 2 * len(names) + 2)):
            y, yp = rng.sample(nodes, 2)
            rxns[(y, yp)] = _rxn(y, yp)
        net = Network.from_reactions(rxns.values())
        if net.species:
            return net


def random_kappa(rng: random.Random, n: Network) -> dict[str, Fraction]:
    return {lab: Fraction(f"{10 ** rng.uniform(-3, 3):.6g}") for lab in n.labels}
