"""Reaction networks, models, and the union / glue / join operators."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import HypothesisError, NetworkError, ParseError


@dataclass(frozen=True, order=True)
class Complex:
    """Nonnegative-integer combination of species, stored sparsely by name."""

    terms: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        merged: dict[str, int] = {}
        for s, c in self.terms:
            if c <= 0:
                raise NetworkError(f"complex coefficient for {s} must be positive")
            merged[s] = merged.get(s, 0) + c
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))

    @classmethod
    def of(cls, coeffs: Mapping[str, int] | str | None = None) -> "Complex":
        if coeffs is None:
            return ZERO
        if isinstance(coeffs, str):
            return cls(((coeffs, 1),))
        return cls(tuple(coeffs.items()))

    @property
    def coeffs(self) -> dict[str, int]:
        return dict(self.terms)

    def species(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomolecular(self) -> bool:
        return len(self.terms) == 1 and self.terms[0][1] == 1

    def molecularity(self) -> int:
        return sum(c for _, c in self.terms)

    def is_at_most_bimolecular(self) -> bool:
        return self.molecularity() <= 2

    def single_species(self) -> str:
        if not self.is_monomolecular():
            raise NetworkError(f"complex {self} is not monomolecular")
        return self.terms[0][0]

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(s if c == 1 else f"{c}{s}" for s, c in self.terms)


ZERO = Complex()


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    label: str

    def __post_init__(self) -> None:
        if self.reactant == self.product:
            raise NetworkError(f"reactant equals product in reaction {self.reactant} -> {self.product}")
        if not self.label:
            raise NetworkError("reaction label must be nonempty")

    @property
    def pair(self) -> tuple[Complex, Complex]:
        return (self.reactant, self.product)

    def species(self) -> tuple[str, ...]:
        out = list(self.reactant.species())
        out += [s for s in self.product.species() if s not in out]
        return tuple(out)

    def is_inflow(self) -> bool:
        return self.reactant.is_zero()

    def is_outflow(self) -> bool:
        return self.product.is_zero()

    def is_flow(self) -> bool:
        return self.is_inflow() or self.is_outflow()

    def __str__(self) -> str:
        return f"{self.reactant} -> {self.product} [{self.label}]"


def reaction(text: str) -> Reaction:
    """Parse a single ``y -> y' [label]`` reaction."""
    net = parse_network(text)
    if len(net.reactions) != 1:
        raise ParseError("expected exactly one reaction", 1, 1)
    return net.reactions[0]


@dataclass(frozen=True)
class Network:
    """Species, complexes and labelled reactions.

    Species keep first-appearance order; complexes are derived from the
    reactions, so every complex appears in some reaction by construction.
    """

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if len(set(self.species)) != len(self.species):
            raise NetworkError("duplicate species names")
        labels: set[str] = set()
        pairs: set[tuple[Complex, Complex]] = set()
        used: set[str] = set()
        for r in self.reactions:
            if r.label in labels:
                raise NetworkError(f"duplicate rate label {r.label!r}")
            if r.pair in pairs:
                raise NetworkError(f"duplicate reaction {r.reactant} -> {r.product}")
            labels.add(r.label)
            pairs.add(r.pair)
            used.update(r.species())
        missing = used - set(self.species)
        if missing:
            raise NetworkError(f"reactions use undeclared species {sorted(missing)}")
        orphans = set(self.species) - used
        if orphans:
            raise NetworkError(f"species {sorted(orphans)} appear in no complex")

    @classmethod
    def from_reactions(cls, reactions: Iterable[Reaction], species_order: Sequence[str] = ()) -> "Network":
        reactions = tuple(reactions)
        used: list[str] = []
        for r in reactions:
            for s in r.species():
                if s not in used:
                    used.append(s)
        order = [s for s in species_order if s in used]
        order += [s for s in used if s not in order]
        return cls(tuple(order), reactions)

    @property
    def complexes(self) -> tuple[Complex, ...]:
        out: list[Complex] = []
        for r in self.reactions:
            for c in r.pair:
                if c not in out:
                    out.append(c)
        return tuple(out)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.label for r in self.reactions)

    def species_index(self, name: str) -> int:
        try:
            return self.species.index(name)
        except ValueError:
            raise NetworkError(f"unknown species {name!r}") from None

    def find(self, reactant: Complex, product: Complex) -> Reaction | None:
        for r in self.reactions:
            if r.reactant == reactant and r.product == product:
                return r
        return None

    def by_label(self, label: str) -> Reaction:
        for r in self.reactions:
            if r.label == label:
                return r
        raise NetworkError(f"no reaction labelled {label!r}")

    def pairs(self) -> set[tuple[Complex, Complex]]:
        return {r.pair for r in self.reactions}

    def is_monomolecular(self) -> bool:
        return all(c.is_zero() or c.is_monomolecular() for c in self.complexes)

    def has_zero_complex(self) -> bool:
        return ZERO in self.complexes

    def inflow_species(self) -> tuple[str, ...]:
        return tuple(r.product.single_species() for r in self.reactions
                     if r.is_inflow() and r.product.is_monomolecular())

    def outflow_species(self) -> tuple[str, ...]:
        return tuple(r.reactant.single_species() for r in self.reactions
                     if r.is_outflow() and r.reactant.is_monomolecular())

    def to_dsl(self) -> str:
        return "\n".join(str(r) for r in self.reactions) + ("\n" if self.reactions else "")

    def to_dict(self) -> dict:
        return {
            "species": list(self.species),
            "reactions": [
                {"reactant": _complex_json(r.reactant), "product": _complex_json(r.product), "label": r.label}
                for r in self.reactions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def __str__(self) -> str:
        return "{" + ", ".join(str(r) for r in self.reactions) + "}"


def _complex_json(c: Complex) -> dict[str, int]:
    return {s: k for s, k in c.terms}


@dataclass(frozen=True)
class Model:
    """A network with output species; inputs are the inflow species."""

    network: Network
    outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if not self.outputs:
            raise NetworkError("a model needs at least one output")
        unknown = set(self.outputs) - set(self.network.species)
        if unknown:
            raise NetworkError(f"outputs {sorted(unknown)} are not species of the network")
        if len(set(self.outputs)) != len(self.outputs):
            raise NetworkError("duplicate outputs")

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.network.inflow_species()

    @property
    def species(self) -> tuple[str, ...]:
        return self.network.species

    @property
    def reactions(self) -> tuple[Reaction, ...]:
        return self.network.reactions

    def to_dsl(self) -> str:
        return self.network.to_dsl() + f"output {', '.join(self.outputs)}\n"

    def to_dict(self) -> dict:
        d = self.network.to_dict()
        d["inputs"] = list(self.inputs)
        d["outputs"] = list(self.outputs)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# DSL parsing

_TERM = re.compile(r"^(\d*)\s*\*?\s*([A-Za-z_][A-Za-z0-9_]*)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class ParsedFile:
    network: Network
    outputs: tuple[str, ...] = ()

    def model(self) -> Model:
        return Model(self.network, self.outputs)


def _parse_complex(text: str, line: int, col: int) -> Complex:
    t = text.strip()
    if not t:
        raise ParseError("empty complex", line, col)
    if t == "0":
        return ZERO
    coeffs: dict[str, int] = {}
    offset = 0
    for part in text.split("+"):
        stripped = part.strip()
        pcol = col + offset + (len(part) - len(part.lstrip()))
        offset += len(part) + 1
        m = _TERM.match(stripped)
        if not m:
            raise ParseError(f"bad complex term {stripped!r}", line, pcol)
        c = int(m.group(1)) if m.group(1) else 1
        if c < 1:
            raise ParseError(f"coefficient must be at least 1 in {stripped!r}", line, pcol)
        coeffs[m.group(2)] = coeffs.get(m.group(2), 0) + c
    return Complex.of(coeffs)


def _split_statements(text: str) -> list[tuple[str, int, int]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        start = 0
        for piece in body.split(";"):
            if piece.strip():
                lead = len(piece) - len(piece.lstrip())
                out.append((piece.strip(), lineno, start + lead + 1))
            start += len(piece) + 1
    return out


def parse_file(text: str) -> ParsedFile:
    """Parse DSL text into a network plus any declared outputs."""
    reactions: list[Reaction] = []
    outputs: list[str] = []
    labels: set[str] = set()
    for stmt, line, col in _split_statements(text):
        if stmt.startswith("output") and (len(stmt) == 6 or stmt[6] in " \t"):
            names = [s.strip() for s in stmt[6:].split(",")]
            for nm in names:
                if not _NAME.match(nm):
                    raise ParseError(f"bad output name {nm!r}", line, col)
                outputs.append(nm)
            continue
        if "<->" in stmt:
            arrow, rev = "<->", True
        elif "->" in stmt:
            arrow, rev = "->", False
        else:
            raise ParseError(f"expected '->' or '<->' in {stmt!r}", line, col)
        lhs, rhs = stmt.split(arrow, 1)
        if "->" in rhs:
            raise ParseError("one arrow per statement", line, col + len(lhs) + len(arrow) + rhs.index("->"))
        m = re.match(r"^(.*?)\[(.*)\]\s*$", rhs)
        if not m:
            raise ParseError("missing rate label in brackets", line, col + len(stmt))
        prod_text, label_text = m.group(1), m.group(2)
        label_names = [s.strip() for s in label_text.split(",")]
        expected = 2 if rev else 1
        if len(label_names) != expected or not all(_NAME.match(s) for s in label_names):
            raise ParseError(f"expected {expected} rate label(s), got [{label_text}]", line,
                             col + len(lhs) + len(arrow) + len(prod_text) + 1)
        reactant = _parse_complex(lhs, line, col)
        product = _parse_complex(prod_text, line, col + len(lhs) + len(arrow))
        if reactant == product:
            raise ParseError(f"reactant equals product ({reactant})", line, col)
        pairs = [(reactant, product)] + ([(product, reactant)] if rev else [])
        for (a, b), lab in zip(pairs, label_names):
            if lab in labels:
                raise ParseError(f"duplicate rate label {lab!r}", line, col)
            labels.add(lab)
            try:
                reactions.append(Reaction(a, b, lab))
            except NetworkError as exc:
                raise ParseError(str(exc), line, col) from None
    try:
        net = Network.from_reactions(reactions)
    except NetworkError as exc:
        raise ParseError(str(exc), 1, 1) from None
    for o in outputs:
        if o not in net.species:
            raise ParseError(f"output {o!r} is not a species of the network", 1, 1)
    return ParsedFile(net, tuple(outputs))


def parse_network(text: str) -> Network:
    return parse_file(text).network


def parse_model(text: str, outputs: Sequence[str] = ()) -> Model:
    pf = parse_file(text)
    return Model(pf.network, tuple(outputs) if outputs else pf.outputs)


def network_from_dict(d: Mapping) -> Network:
    rs = [Reaction(Complex.of(r["reactant"]), Complex.of(r["product"]), r["label"]) for r in d["reactions"]]
    return Network(tuple(d["species"]), tuple(rs))


# union and gluing


def _merge_species(*orders: Sequence[str]) -> list[str]:
    out: list[str] = []
    for order in orders:
        for s in order:
            if s not in out:
                out.append(s)
    return out


def union(n1: Network, n2: Network) -> Network:
    """Set union; shared reactions must carry the same label."""
    reactions = list(n1.reactions)
    labels = {r.label: r for r in n1.reactions}
    for r in n2.reactions:
        same = n1.find(r.reactant, r.product)
        if same is not None:
            if same.label != r.label:
                raise NetworkError(
                    f"shared reaction {r.reactant} -> {r.product} has labels {same.label!r} and {r.label!r}")
            continue
        if r.label in labels:
            raise NetworkError(f"label {r.label!r} used by two distinct reactions")
        labels[r.label] = r
        reactions.append(r)
    return Network(tuple(_merge_species(n1.species, n2.species)), tuple(reactions))


class GlueKind(str, Enum):
    SPECIES_DISJOINT = "SpeciesDisjoint"
    COMPLEX_DISJOINT = "ComplexDisjoint"
    OVER_COMPLEXES = "OverComplexes"
    OVER_REACTIONS = "OverReactions"


def classify_glue(n1: Network, n2: Network) -> GlueKind:
    if not set(n1.species) & set(n2.species):
        return GlueKind.SPECIES_DISJOINT
    if n1.pairs() & n2.pairs():
        return GlueKind.OVER_REACTIONS
    shared = set(n1.complexes) & set(n2.complexes)
    if shared - {ZERO}:
        return GlueKind.OVER_COMPLEXES
    return GlueKind.COMPLEX_DISJOINT


def fresh_label(taken: Iterable[str], stem: str) -> str:
    taken = set(taken)
    if stem not in taken:
        return stem
    k = 2
    while f"{stem}_{k}" in taken:
        k += 1
    return f"{stem}_{k}"


def default_label(y: Complex, yp: Complex) -> str:
    def tag(c: Complex) -> str:
        return "0" if c.is_zero() else "".join(f"{k if k > 1 else ''}{s}" for s, k in c.terms)
    return f"k_{tag(y)}_{tag(yp)}"


def join_by_new_reaction(n1: Network, n2: Network, y: Complex, yp: Complex, label: str | None = None) -> Network:
    """``N1 ∪ N2 ∪ {y -> y'}`` with ``y`` from N1 and ``y'`` from N2."""
    if y not in n1.complexes:
        raise NetworkError(f"reactant {y} is not a complex of the first network")
    if yp not in n2.complexes:
        raise NetworkError(f"product {yp} is not a complex of the second network")
    if (y, yp) in n1.pairs() | n2.pairs():
        raise NetworkError(f"reaction {y} -> {yp} already present")
    base = union(n1, n2)
    lab = label or fresh_label(base.labels, default_label(y, yp))
    if lab in base.labels:
        raise NetworkError(f"label {lab!r} already used")
    return Network(base.species, base.reactions + (Reaction(y, yp, lab),))


def _drop(n: Network, removed: set[tuple[Complex, Complex]]) -> Network:
    return Network.from_reactions([r for r in n.reactions if r.pair not in removed], n.species)


def join_replacing(n1: Network, n2: Network, removed: Iterable[Reaction | tuple[Complex, Complex]],
                   added: Iterable[Reaction]) -> Network:
    """Remove reactions from the operands, then add bridging reactions from C1 to C2."""
    removed_pairs = {r.pair if isinstance(r, Reaction) else tuple(r) for r in removed}
    existing = n1.pairs() | n2.pairs()
    unknown = removed_pairs - existing
    if unknown:
        a, b = next(iter(unknown))
        raise NetworkError(f"removed reaction {a} -> {b} is not in either network")
    added = list(added)
    for r in added:
        if r.pair in existing:
            raise NetworkError(f"added reaction {r.reactant} -> {r.product} already present")
        if r.reactant not in n1.complexes:
            raise NetworkError(f"added reaction reactant {r.reactant} is not a complex of the first network")
        if r.product not in n2.complexes:
            raise NetworkError(f"added reaction product {r.product} is not a complex of the second network")
    base = union(_drop(n1, removed_pairs), _drop(n2, removed_pairs))
    taken = set(base.labels)
    for r in added:
        if r.label in taken:
            raise NetworkError(f"label {r.label!r} already used")
        taken.add(r.label)
    return Network.from_reactions(base.reactions + tuple(added), _merge_species(n1.species, n2.species))


@dataclass(frozen=True)
class OneWayFlowSpec:
    """Scenario number, the set of bridged N1 species and its map into N2."""

    scenario: int
    phi: tuple[tuple[str, str], ...]
    labels: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.scenario not in (1, 2, 3, 4):
            raise NetworkError(f"scenario must be 1..4, got {self.scenario}")
        object.__setattr__(self, "phi", tuple(dict(self.phi).items()))
        object.__setattr__(self, "labels", tuple(dict(self.labels).items()))
        if not self.phi:
            raise NetworkError("one-way flow needs a nonempty set of bridged species")

    @classmethod
    def of(cls, scenario: int, phi: Mapping[str, str], labels: Mapping[str, str] | None = None) -> "OneWayFlowSpec":
        return cls(scenario, tuple(phi.items()), tuple((labels or {}).items()))


def _leak(n: Network, s: str) -> Reaction | None:
    return n.find(Complex.of(s), ZERO)


def _inflow(n: Network, s: str) -> Reaction | None:
    return n.find(ZERO, Complex.of(s))


def join_one_way_flow(m1: Model, m2: Model, spec: OneWayFlowSpec) -> Model:
    """Join two species-disjoint models by one-way flow (Scenarios 1-4)."""
    n1, n2 = m1.network, m2.network
    if set(n1.species) & set(n2.species):
        raise NetworkError("one-way flow joins need species-disjoint networks")
    phi = dict(spec.phi)
    names = dict(spec.labels)
    for i, j in phi.items():
        if i not in n1.species:
            raise NetworkError(f"{i} is not a species of the first network")
        if j not in n2.species:
            raise NetworkError(f"{j} is not a species of the second network")
    removed: list[Reaction] = []
    added: list[Reaction] = []
    taken = set(n1.labels) | set(n2.labels)
    for i, j in phi.items():
        leak = _leak(n1, i)
        inflow = _inflow(n2, j)
        if spec.scenario in (1, 2) and leak is None:
            raise NetworkError(f"scenario {spec.scenario} needs an outflow {i} -> 0 in the first network")
        if spec.scenario in (1, 4) and inflow is None:
            raise NetworkError(f"scenario {spec.scenario} needs an inflow 0 -> {j} in the second network")
        if spec.scenario in (1, 2):
            removed.append(leak)
        if spec.scenario in (1, 4):
            removed.append(inflow)
        if i in names:
            lab = names[i]
        elif spec.scenario in (1, 2):
            lab = leak.label
        else:
            lab = fresh_label(taken, default_label(Complex.of(i), Complex.of(j)))
        taken.add(lab)
        added.append(Reaction(Complex.of(i), Complex.of(j), lab))
    net = join_replacing(n1, n2, removed, added)
    return Model(net, tuple(_merge_species(m1.outputs, m2.outputs)))


def non_flow_subnetwork(n: Network) -> Network:
    return Network.from_reactions([r for r in n.reactions if not (r.reactant.is_zero() or r.product.is_zero())],
                                  n.species)


def species_digraph(n: Network) -> dict[str, set[str]]:
    """Adjacency of the species graph of a monomolecular network, flows excluded."""
    if not n.is_monomolecular():
        raise NetworkError("species digraph needs a monomolecular network")
    adj: dict[str, set[str]] = {s: set() for s in n.species}
    for r in n.reactions:
        if r.is_flow():
            continue
        adj[r.reactant.single_species()].add(r.product.single_species())
    return adj


def reachable_from(adj: Mapping[str, set[str]], start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def reaching(adj: Mapping[str, set[str]], target: str) -> set[str]:
    """Vertices with a directed path to ``target`` (including itself)."""
    rev: dict[str, set[str]] = {v: set() for v in adj}
    for v, ws in adj.items():
        for w in ws:
            rev.setdefault(w, set()).add(v)
    return reachable_from(rev, target)


def is_strongly_connected(n: Network) -> bool:
    """Strong connectivity of the non-flow species digraph."""
    sub = non_flow_subnetwork(n)
    adj = species_digraph(n)
    verts = list(sub.species)
    if not verts:
        return True
    return reachable_from({v: adj[v] for v in verts}, verts[0]) == set(verts) and \
        reaching({v: adj[v] for v in verts}, verts[0]) == set(verts)


def is_output_connectable(m: Model) -> bool:
    adj = species_digraph(m.network)
    covered: set[str] = set()
    for o in m.outputs:
        covered |= reaching(adj, o)
    return covered == set(m.network.species)


def require(condition: bool, message: str) -> None:
    if not condition:
        raise HypothesisError(message)
