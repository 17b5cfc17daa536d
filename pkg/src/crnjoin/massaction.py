"""Mass-action system polynomials, stoichiometry and the steady-state ideal."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .errors import NetworkError
from .groebner import Ideal
from .net import Network, union
from .poly import Poly

_INDEXED = re.compile(r"^[Xx](\d+)$")


def concentration_name(species: str) -> str:
    """Indeterminate for a species concentration: ``X3 -> x3``, ``A -> x_A``."""
    m = _INDEXED.match(species)
    return f"x{m.group(1)}" if m else f"x_{species}"


def concentration_names(n: Network) -> dict[str, str]:
    names = {s: concentration_name(s) for s in n.species}
    if len(set(names.values())) != len(names):
        raise NetworkError("species names collide after mapping to concentration variables")
    clash = set(names.values()) & set(n.labels)
    if clash:
        raise NetworkError(f"rate labels {sorted(clash)} collide with concentration variables")
    return names


def monomial(n: Network, complex_, names: dict[str, str] | None = None) -> Poly:
    names = names or concentration_names(n)
    return Poly({tuple(sorted((names[s], c) for s, c in complex_.terms)): 1})


@dataclass(frozen=True)
class MassActionSystem:
    network: Network
    species_vars: tuple[str, ...]
    rate_vars: tuple[str, ...]
    polys: tuple[Poly, ...]

    @property
    def ring(self) -> tuple[str, ...]:
        return self.rate_vars + self.species_vars

    def by_species(self) -> dict[str, Poly]:
        return dict(zip(self.network.species, self.polys))

    def to_dict(self) -> dict:
        return {
            "species": list(self.network.species),
            "variables": list(self.species_vars),
            "rates": list(self.rate_vars),
            "system": {s: str(p) for s, p in zip(self.network.species, self.polys)},
        }


def system_polynomials(n: Network) -> MassActionSystem:
    """Right-hand sides ``f_i = sum_r k_r x^{reactant} (product - reactant)_i``."""
    names = concentration_names(n)
    acc: dict[str, Poly] = {s: Poly() for s in n.species}
    for r in n.reactions:
        rate = Poly.var(r.label) * monomial(n, r.reactant, names)
        delta = r.product.coeffs
        for s, c in r.reactant.terms:
            delta[s] = delta.get(s, 0) - c
        for s, d in delta.items():
            if d:
                acc[s] = acc[s] + rate * d
    return MassActionSystem(
        network=n,
        species_vars=tuple(names[s] for s in n.species),
        rate_vars=tuple(n.labels),
        polys=tuple(acc[s] for s in n.species),
    )


@dataclass(frozen=True)
class StoichMatrix:
    network: Network
    columns: tuple[tuple[int, ...], ...]

    @property
    def rows(self) -> list[list[int]]:
        return linalg.transpose(self.columns) if self.columns else [[] for _ in self.network.species]

    def rank(self) -> int:
        return linalg.rank(self.rows) if self.columns else 0

    def conservation_basis(self) -> list[list[Fraction]]:
        """Basis of the orthogonal complement of the stoichiometric subspace."""
        n = len(self.network.species)
        if not self.columns:
            return linalg.nullspace([], n)
        return linalg.nullspace([list(c) for c in self.columns], n)

    def subspace_basis(self) -> list[list[Fraction]]:
        _, pivots = linalg.rref(self.rows) if self.columns else ([], [])
        return [[Fraction(v) for v in self.columns[p]] for p in pivots]


def reaction_vector(n: Network, r) -> tuple[int, ...]:
    prod = r.product.coeffs
    reac = r.reactant.coeffs
    return tuple(prod.get(s, 0) - reac.get(s, 0) for s in n.species)


def stoichiometric_matrix(n: Network) -> StoichMatrix:
    return StoichMatrix(n, tuple(reaction_vector(n, r) for r in n.reactions))


@dataclass(frozen=True)
class CompatClass:
    x0: tuple[Fraction, ...]
    orthogonal_basis: tuple[tuple[Fraction, ...], ...]

    def totals(self) -> tuple[Fraction, ...]:
        return tuple(sum(w * x for w, x in zip(v, self.x0)) for v in self.orthogonal_basis)


def compatibility_class(n: Network, x0) -> CompatClass:
    basis = stoichiometric_matrix(n).conservation_basis()
    return CompatClass(tuple(Fraction(v) for v in x0), tuple(tuple(v) for v in basis))


def _monomolecular_without_zero(n: Network) -> bool:
    return n.is_monomolecular() and not n.has_zero_complex()


def steady_state_ideal(n: Network, drop_dependent: bool = False) -> Ideal:
    """``<f_1, ..., f_n>`` in Q[rates; concentrations].

    With ``drop_dependent`` and a monomolecular network without the zero
    complex, the last nonzero system polynomial is dropped: the system
    polynomials sum to zero, so it is redundant.
    """
    sys_ = system_polynomials(n)
    gens = [p for p in sys_.polys if not p.is_zero()]
    if drop_dependent and _monomolecular_without_zero(n) and gens:
        total = sum(sys_.polys, Poly())
        if not total.is_zero():
            raise AssertionError("system polynomials of a monomolecular network must sum to zero")
        gens = gens[:-1]
    return Ideal(tuple(gens), sys_.ring)


@dataclass(frozen=True)
class GlueDecomposition:
    case: int
    species: tuple[str, ...]
    f: tuple[Poly, ...]
    g: tuple[Poly, ...]
    h: tuple[Poly, ...]


def glue_ode_decomposition(n1: Network, n2: Network) -> GlueDecomposition:
    """Split the union's right-hand side into the parts from each operand.

    Case 1 (no shared reactions): ``h = f + g``.  Case 2: ``h = f + g~`` where
    ``g~`` comes from the reactions of N2 not in N1.
    """
    n = union(n1, n2)
    shared = n1.pairs() & n2.pairs()
    case = 2 if shared else 1
    part2 = Network.from_reactions([r for r in n2.reactions if r.pair not in shared], n2.species)
    h = system_polynomials(n).by_species()
    f = system_polynomials(n1).by_species() if n1.reactions else {}
    g = system_polynomials(part2).by_species() if part2.reactions else {}
    fs = tuple(f.get(s, Poly()) for s in n.species)
    gs = tuple(g.get(s, Poly()) for s in n.species)
    hs = tuple(h[s] for s in n.species)
    for a, b, c in zip(fs, gs, hs):
        if a + b != c:
            raise AssertionError("glued system polynomials do not decompose")
    return GlueDecomposition(case, n.species, fs, gs, hs)
