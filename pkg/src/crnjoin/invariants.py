"""Steady-state invariants of glued networks.

The projection onto operand ``i`` sends every rate constant and
concentration that does not belong to ``N_i`` to zero.  The functions here
compare projected elimination ideals of a union with the elimination ideals
of its operands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import HypothesisError, NetworkError
from .groebner import Budget, Ideal, eliminate, ideal_contains, ideal_equal, ideal_membership, ideal_sum
from .massaction import concentration_names, steady_state_ideal
from .net import Complex, GlueKind, Network, Reaction, classify_glue, union
from .poly import Poly


@dataclass(frozen=True)
class Projection:
    target: int
    kept_rates: tuple[str, ...]
    kept_species: tuple[str, ...]

    @property
    def kept(self) -> frozenset[str]:
        return frozenset(self.kept_rates) | frozenset(self.kept_species)

    def apply(self, p: Poly) -> Poly:
        return p.set_zero(p.variables() - self.kept)


def projection(n1: Network, n2: Network, target: int) -> Projection:
    n = n1 if target == 1 else n2
    if target not in (1, 2):
        raise ValueError("target must be 1 or 2")
    names = concentration_names(n)
    return Projection(target, tuple(n.labels), tuple(names[s] for s in n.species))


def project_ideal(p: Projection, ideal: Ideal) -> Ideal:
    """Image of ``ideal`` under the projection, generated by projected generators."""
    gens = tuple(p.apply(g) for g in ideal.generators)
    ring = tuple(v for v in ideal.ring if v in p.kept)
    return Ideal(gens, ring)


def _elim_vars(n: Network, species: Iterable[str]) -> list[str]:
    names = concentration_names(n)
    return [names[s] for s in species if s in names]


def elimination_ideal(n: Network, species: Sequence[str], budget: Budget | None = None) -> Ideal:
    """Steady-state ideal with the concentrations of ``species`` eliminated."""
    return eliminate(steady_state_ideal(n), _elim_vars(n, species), budget)


@dataclass(frozen=True)
class ComparisonReport:
    target: int
    eliminated: tuple[str, ...]
    projected: Ideal
    operand: Ideal
    containment_holds: bool
    equality_holds: bool
    witness: Poly | None

    def to_dict(self) -> dict:
        return {
            "operand": self.target,
            "eliminated": list(self.eliminated),
            "projected_union_ideal": self.projected.to_json(),
            "operand_ideal": self.operand.to_json(),
            "containment": self.containment_holds,
            "equality": self.equality_holds,
            "witness": None if self.witness is None else str(self.witness),
        }


def _witness(projected: Ideal, operand: Ideal, budget: Budget | None) -> Poly | None:
    for g in sorted(operand.generators, key=lambda p: p.sort_key()):
        if not ideal_membership(g, projected, budget):
            return g
    return None


def _compare(target: int, proj: Projection, union_elim: Ideal, operand_elim: Ideal,
             eliminated: Sequence[str], budget: Budget | None) -> ComparisonReport:
    projected = project_ideal(proj, union_elim)
    contained = ideal_contains(operand_elim, projected, budget)
    witness = _witness(projected, operand_elim, budget)
    if witness is not None:
        # the witness must lie in the operand ideal and outside the projection
        assert ideal_membership(witness, operand_elim, budget)
    return ComparisonReport(target, tuple(eliminated), projected, operand_elim, contained,
                            contained and witness is None, witness)


def compare_projections(n1: Network, n2: Network, elim_species: Sequence[str],
                        budget: Budget | None = None) -> tuple[ComparisonReport, ComparisonReport]:
    """Compare projected elimination ideals of ``N1 ∪ N2`` with those of each operand."""
    kind = classify_glue(n1, n2)
    if kind not in (GlueKind.OVER_COMPLEXES, GlueKind.OVER_REACTIONS):
        raise HypothesisError(f"networks must be glued over complexes or reactions, got {kind.value}")
    n = union(n1, n2)
    union_elim = elimination_ideal(n, elim_species, budget)
    reports = []
    for target, operand in ((1, n1), (2, n2)):
        op_elim = elimination_ideal(operand, elim_species, budget)
        reports.append(_compare(target, projection(n1, n2, target), union_elim, op_elim, elim_species, budget))
    return reports[0], reports[1]


def _require_plain_monomolecular(*nets: Network) -> None:
    for n in nets:
        if not n.is_monomolecular():
            raise HypothesisError("operands must be monomolecular")
        if n.has_zero_complex():
            raise NetworkError("monomolecular networks here must not involve the zero complex")


@dataclass(frozen=True)
class SumDecompositionReport:
    glue_species: str
    eliminated: tuple[str, ...]
    union_ideal: Ideal
    sum_ideal: Ideal
    equal: bool

    def to_dict(self) -> dict:
        return {
            "glue_species": self.glue_species,
            "eliminated": list(self.eliminated),
            "union_ideal": self.union_ideal.to_json(),
            "sum_of_operand_ideals": self.sum_ideal.to_json(),
            "equal": self.equal,
        }


def unidirectional(n1: Network, n2: Network, glue_species: str) -> bool:
    """Flow through the glue species runs one way between the operands."""
    def roles(n: Network) -> tuple[bool, bool]:
        into = any(glue_species in r.product.species() for r in n.reactions)
        out = any(glue_species in r.reactant.species() for r in n.reactions)
        return into, out

    in1, out1 = roles(n1)
    in2, out2 = roles(n2)
    return (not out1 and not in2) or (not in1 and not out2)


def glue_sum_decomposition(n1: Network, n2: Network, glue_species: str, elim_species: Sequence[str],
                           budget: Budget | None = None) -> SumDecompositionReport:
    _require_plain_monomolecular(n1, n2)
    shared = set(n1.species) & set(n2.species)
    if shared != {glue_species}:
        raise HypothesisError(f"operands must share exactly the species {glue_species}, share {sorted(shared)}")
    if not unidirectional(n1, n2, glue_species):
        raise HypothesisError(f"flow through {glue_species} is not unidirectional")
    n = union(n1, n2)
    lhs = elimination_ideal(n, elim_species, budget)
    rhs = ideal_sum(elimination_ideal(n1, elim_species, budget), elimination_ideal(n2, elim_species, budget))
    rhs = rhs.with_ring(tuple(v for v in lhs.ring) + tuple(v for v in rhs.ring if v not in lhs.ring))
    return SumDecompositionReport(glue_species, tuple(elim_species), lhs, rhs, ideal_equal(lhs, rhs, budget))


def check_glue_sum_decomposition(n1: Network, n2: Network, glue_species: str, elim_species: Sequence[str],
                                 budget: Budget | None = None) -> bool:
    return glue_sum_decomposition(n1, n2, glue_species, elim_species, budget).equal


def check_single_species_equality(n1: Network, n2: Network, elim_species: Sequence[str],
                                  budget: Budget | None = None) -> bool:
    """Equality of projected and operand elimination ideals for a glue over one species."""
    _require_plain_monomolecular(n1, n2)
    shared = set(n1.species) & set(n2.species)
    if len(shared) != 1:
        raise HypothesisError(f"operands must share exactly one species, share {sorted(shared)}")
    r1, r2 = compare_projections(n1, n2, elim_species, budget)
    return r1.equality_holds and r2.equality_holds


def check_shared_reaction_equality(n1: Network, n2: Network, shared_reaction: Reaction | tuple[Complex, Complex],
                                   elim_species: Sequence[str], budget: Budget | None = None) -> bool:
    """Equality for a glue over one reaction ``Xj1 -> Xj2`` (or a reversible pair)."""
    _require_plain_monomolecular(n1, n2)
    pair = shared_reaction.pair if isinstance(shared_reaction, Reaction) else tuple(shared_reaction)
    a, b = pair
    if not (a.is_monomolecular() and b.is_monomolecular()):
        raise HypothesisError("shared reaction must be between two species")
    j1, j2 = a.single_species(), b.single_species()
    allowed = {pair, (b, a)}
    shared = n1.pairs() & n2.pairs()
    if pair not in shared or not shared <= allowed:
        raise HypothesisError("operands must share exactly the given reaction or its reversible pair")
    if set(n1.species) & set(n2.species) != {j1, j2}:
        raise HypothesisError(f"operands must share exactly the species {j1} and {j2}")
    if any(j1 in r.species() for r in n2.reactions if r.pair not in allowed):
        raise HypothesisError(f"{j1} belongs to another reaction of the second network")
    if any(j2 in r.species() for r in n1.reactions if r.pair not in allowed):
        raise HypothesisError(f"{j2} belongs to another reaction of the first network")
    r1, r2 = compare_projections(n1, n2, elim_species, budget)
    return r1.equality_holds and r2.equality_holds


def lemma_projection_holds(n1: Network, n2: Network, budget: Budget | None = None) -> bool:
    """Projecting the union's steady-state ideal recovers each operand's ideal."""
    n = union(n1, n2)
    full = steady_state_ideal(n)
    for target, operand in ((1, n1), (2, n2)):
        projected = project_ideal(projection(n1, n2, target), full)
        if not ideal_equal(projected, steady_state_ideal(operand), budget):
            return False
    return True
