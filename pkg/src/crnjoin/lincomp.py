"""Linear compartmental models: I/O equations, identifiability, observability.

A monomolecular :class:`~crnjoin.net.Model` is read as a compartmental
model: species are compartments, ``Xj -> Xl [a]`` is a flow with parameter
``a`` from ``j`` to ``l``, ``Xl -> 0`` is a leak and ``0 -> Xl [u]`` feeds
input signal ``u`` into ``l``.  Labels of non-inflow reactions are the
parameters.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from . import linalg
from .errors import BudgetExceeded, HypothesisError, InternalCheckError, NetworkError
from .groebner import Budget, Ideal, poly_gcd, divide, zero_dim_solution_count
from .massaction import concentration_name
from .net import Complex, Model, Network, OneWayFlowSpec, Reaction, ZERO, fresh_label, reaching, species_digraph
from .poly import Poly, natural_key

PolyMatrix = list[list[Poly]]
_INDEXED = re.compile(r"^[Xx](\d+)$")


def output_signal(species: str) -> str:
    m = _INDEXED.match(species)
    return f"z{m.group(1)}" if m else f"z_{species}"


def _species_suffix(species: str) -> str:
    m = _INDEXED.match(species)
    return m.group(1) if m else species


# compartmental models


@dataclass(frozen=True)
class CompartmentalModel:
    """Graph form of a linear compartmental model with polynomial edge labels."""

    compartments: tuple[str, ...]
    edges: tuple[tuple[str, str, Poly], ...]
    leaks: tuple[tuple[str, Poly], ...]
    inputs: tuple[tuple[str, str], ...]
    outputs: tuple[str, ...]
    parameters: tuple[str, ...]

    def __post_init__(self) -> None:
        comps = set(self.compartments)
        for src, dst, _ in self.edges:
            if src not in comps or dst not in comps:
                raise NetworkError(f"edge {src}->{dst} leaves the compartment set")
        for o in self.outputs:
            if o not in comps:
                raise NetworkError(f"output {o} is not a compartment")

    @property
    def input_compartments(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.inputs)

    def input_signal(self, compartment: str) -> str | None:
        return dict(self.inputs).get(compartment)

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {c: set() for c in self.compartments}
        for src, dst, _ in self.edges:
            adj[src].add(dst)
        return adj

    def leak_label(self, compartment: str) -> Poly | None:
        return dict(self.leaks).get(compartment)

    def to_dict(self) -> dict:
        return {
            "compartments": list(self.compartments),
            "edges": [{"from": s, "to": d, "label": str(p)} for s, d, p in self.edges],
            "leaks": {c: str(p) for c, p in self.leaks},
            "inputs": {c: u for c, u in self.inputs},
            "outputs": list(self.outputs),
            "parameters": list(self.parameters),
        }


def as_compartmental(m: "Model | CompartmentalModel") -> CompartmentalModel:
    if isinstance(m, CompartmentalModel):
        return m
    net = m.network
    if not net.is_monomolecular():
        raise NetworkError("compartmental models need a monomolecular network")
    edges, leaks, inputs, params = [], [], [], []
    for r in net.reactions:
        if r.is_inflow():
            inputs.append((r.product.single_species(), r.label))
        elif r.is_outflow():
            leaks.append((r.reactant.single_species(), Poly.var(r.label)))
            params.append(r.label)
        else:
            edges.append((r.reactant.single_species(), r.product.single_species(), Poly.var(r.label)))
            params.append(r.label)
    return CompartmentalModel(net.species, tuple(edges), tuple(leaks), tuple(inputs), m.outputs, tuple(params))


AnyModel = Union[Model, CompartmentalModel]


@dataclass(frozen=True)
class CompartmentalMatrix:
    compartments: tuple[str, ...]
    entries: tuple[tuple[Poly, ...], ...]

    def rows(self) -> PolyMatrix:
        return [list(r) for r in self.entries]

    def to_dict(self) -> dict:
        return {"compartments": list(self.compartments), "matrix": [[str(p) for p in r] for r in self.entries]}


def compartmental_matrix(m: AnyModel) -> CompartmentalMatrix:
    """``A[l][j] = a_lj`` for ``j -> l``; diagonal ``-leak_l - sum of outgoing labels``."""
    cm = as_compartmental(m)
    idx = {c: k for k, c in enumerate(cm.compartments)}
    n = len(idx)
    a = [[Poly() for _ in range(n)] for _ in range(n)]
    for src, dst, lab in cm.edges:
        a[idx[dst]][idx[src]] = a[idx[dst]][idx[src]] + lab
        a[idx[src]][idx[src]] = a[idx[src]][idx[src]] - lab
    for c, lab in cm.leaks:
        a[idx[c]][idx[c]] = a[idx[c]][idx[c]] - lab
    return CompartmentalMatrix(cm.compartments, tuple(tuple(r) for r in a))


def output_reachable_subgraph(m: AnyModel, i: str) -> tuple[str, ...]:
    """Compartments with a directed path to output ``i``, in model order."""
    cm = as_compartmental(m)
    if i not in cm.outputs:
        raise NetworkError(f"{i} is not an output")
    reach = reaching(cm.adjacency(), i)
    return tuple(c for c in cm.compartments if c in reach)


def restrict_model(m: AnyModel, vertices: Iterable[str]) -> CompartmentalModel:
    """Induced submodel; edges leaving the vertex set become leak terms."""
    cm = as_compartmental(m)
    keep = set(vertices)
    if not keep & set(cm.outputs):
        raise NetworkError("restriction must contain an output")
    comps = tuple(c for c in cm.compartments if c in keep)
    edges = tuple(e for e in cm.edges if e[0] in keep and e[1] in keep)
    leaks: dict[str, Poly] = {c: p for c, p in cm.leaks if c in keep}
    for src, dst, lab in cm.edges:
        if src in keep and dst not in keep:
            leaks[src] = leaks.get(src, Poly()) + lab
    leak_items = tuple((c, leaks[c]) for c in comps if c in leaks)
    used: set[str] = set()
    for _, _, p in edges:
        used |= p.variables()
    for _, p in leak_items:
        used |= p.variables()
    return CompartmentalModel(
        comps, edges, leak_items,
        tuple((c, u) for c, u in cm.inputs if c in keep),
        tuple(o for o in cm.outputs if o in keep),
        tuple(p for p in cm.parameters if p in used),
    )


# determinants over polynomial rings


def mat_mul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        new = []
        for j in range(cols):
            acc = Poly()
            for k in range(inner):
                if row[k] and b[k][j]:
                    acc = acc + row[k] * b[k][j]
            new.append(acc)
        out.append(new)
    return out


def charpoly_berkowitz(m: Sequence[Sequence[Poly]]) -> list[Poly]:
    """Coefficients ``[1, c1, ..., cn]`` of ``det(lambda I - M)`` (division free)."""
    n = len(m)
    if n == 0:
        return [Poly.const(1)]
    vect = [Poly.const(1), -m[0][0]]
    for r in range(1, n):
        row = [m[r][k] for k in range(r)]
        col = [m[k][r] for k in range(r)]
        sub = [[m[i][j] for j in range(r)] for i in range(r)]
        t = [Poly.const(1), -m[r][r]]
        vec = col
        for _ in range(r):
            t.append(-sum((x * y for x, y in zip(row, vec)), Poly()))
            vec = [sum((sub[i][k] * vec[k] for k in range(r)), Poly()) for i in range(r)]
        new = []
        for i in range(r + 2):
            acc = Poly()
            for j in range(min(i, len(vect) - 1) + 1):
                if i - j < len(t):
                    acc = acc + t[i - j] * vect[j]
            new.append(acc)
        vect = new
    return vect


def det(m: Sequence[Sequence[Poly]]) -> Poly:
    """Laplace expansion along rows, memoized on the set of used columns."""
    n = len(m)
    if n == 0:
        return Poly.const(1)
    # minors[cols] = det of the top |cols| rows restricted to cols
    minors: dict[int, Poly] = {0: Poly.const(1)}
    for r in range(n):
        nxt: dict[int, Poly] = {}
        for cols, minor in minors.items():
            if minor.is_zero():
                continue
            for c in range(n):
                if cols >> c & 1 or m[r][c].is_zero():
                    continue
                # sign from the number of used columns to the right of c
                sign = -1 if bin(cols >> (c + 1)).count("1") % 2 else 1
                term = m[r][c] * minor
                key = cols | 1 << c
                nxt[key] = nxt.get(key, Poly()) + (term if sign > 0 else -term)
        minors = nxt
    return minors.get((1 << n) - 1, Poly())


def faddeev_leverrier(m: Sequence[Sequence[Poly]]) -> tuple[list[Poly], list[PolyMatrix]]:
    """Characteristic coefficients and the matrices ``N_k`` of ``adj(sI - M)``.

    ``det(sI - M) = sum_k c[k] s^(n-k)`` and ``adj(sI - M) = sum_{k<n} s^(n-1-k) N[k]``.
    """
    n = len(m)
    mat = [list(r) for r in m]
    ident = [[Poly.const(int(i == j)) for j in range(n)] for i in range(n)]
    coeffs = [Poly.const(1)]
    ns = [ident]
    cur = ident
    for k in range(1, n + 1):
        am = mat_mul(mat, cur)
        ck = -sum((am[i][i] for i in range(n)), Poly()) / k
        coeffs.append(ck)
        cur = [[am[i][j] + (ck if i == j else Poly()) for j in range(n)] for i in range(n)]
        if k < n:
            ns.append(cur)
    if any(not p.is_zero() for row in cur for p in row):
        raise InternalCheckError("Cayley-Hamilton check failed")
    return coeffs, ns


def adjugate_and_det(m: Sequence[Sequence[Poly]]) -> tuple[PolyMatrix, Poly]:
    n = len(m)
    if n == 0:
        return [], Poly.const(1)
    coeffs, ns = faddeev_leverrier(m)
    sign = -1 if (n - 1) % 2 else 1
    adj = [[p * sign for p in row] for row in ns[n - 1]]
    d = coeffs[n] * (-1 if n % 2 else 1)
    return adj, d


# differential expressions


def _primes(order: int) -> str:
    return "'" * order if order <= 3 else f"^({order})"


@dataclass(frozen=True)
class RatFunc:
    """Quotient of polynomials kept in lowest terms with normalized denominator."""

    num: Poly
    den: Poly

    @classmethod
    def make(cls, num: Poly, den: Poly | None = None) -> "RatFunc":
        den = Poly.const(1) if den is None else den
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            return cls(Poly(), Poly.const(1))
        if not den.is_constant():
            g = poly_gcd(num, den)
            if not g.is_constant():
                num, r1 = divide(num, g)
                den, r2 = divide(den, g)
                if not (r1.is_zero() and r2.is_zero()):
                    raise InternalCheckError("gcd does not divide")
        lead = den.content_normalized()
        mono, coeff = next(den.items())
        scale = coeff / lead.terms[mono]
        return cls(num / scale, lead)

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.den == other.den:
            return RatFunc.make(self.num + other.num, self.den)
        return RatFunc.make(self.num * other.den + other.num * self.den, self.den * other.den)

    def __mul__(self, other: "RatFunc | Poly") -> "RatFunc":
        if isinstance(other, Poly):
            return RatFunc.make(self.num * other, self.den)
        return RatFunc.make(self.num * other.num, self.den * other.den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def equals(self, other: "RatFunc") -> bool:
        return self.num * other.den == other.num * self.den

    def __str__(self) -> str:
        if self.den == Poly.const(1):
            return str(self.num)
        return f"({self.num})/({self.den})"


Signal = tuple[str, int]


def _wrap(p: Poly) -> str:
    s = str(p)
    return f"({s})" if len(p) > 1 else s


def render_terms(terms: Sequence[tuple[Poly, str]]) -> str:
    """Render ``sum coeff*signal`` with signs folded in."""
    parts: list[str] = []
    for coeff, sig in terms:
        if coeff.is_zero():
            continue
        neg = False
        c = coeff
        if len(c) == 1:
            (m, v), = c.items()
            if v < 0:
                neg, c = True, -c
        if c == Poly.const(1):
            body = sig
        elif len(c) == 1 and c.is_constant():
            body = f"{c}*{sig}"
        else:
            body = f"{_wrap(c)}*{sig}"
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts) if parts else "0"


@dataclass(frozen=True)
class LinearExpr:
    """Linear combination of signal derivatives with rational-function coefficients."""

    terms: tuple[tuple[Signal, RatFunc], ...]

    @classmethod
    def from_dict(cls, d: Mapping[Signal, RatFunc], primary: Iterable[str] = ()) -> "LinearExpr":
        prim = list(primary)

        def key(sig: Signal) -> tuple:
            name, order = sig
            return (0 if name in prim else 1, natural_key(name), -order)

        return cls(tuple((s, d[s]) for s in sorted(d, key=key) if not d[s].is_zero()))

    def as_dict(self) -> dict[Signal, RatFunc]:
        return dict(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        dens = {str(r.den) for _, r in self.terms}
        if len(dens) == 1:
            den = self.terms[0][1].den
            body = render_terms([(r.num, f"{n}{_primes(k)}") for (n, k), r in self.terms])
            if den == Poly.const(1):
                return body
            return f"({body})/{_wrap(den)}"
        return render_terms([(Poly.const(1), f"{r}*{n}{_primes(k)}") for (n, k), r in self.terms])


# input-output equations


@dataclass(frozen=True)
class IOEquation:
    """``sum_k lhs[k] z^(k) = sum_j sum_k rhs_j[k] u_j^(k)`` with ``lhs`` monic."""

    output: str
    output_signal: str
    compartments: tuple[str, ...]
    lhs: tuple[Poly, ...]
    rhs: tuple[tuple[str, str, tuple[Poly, ...]], ...]

    def order(self) -> int:
        return len(self.lhs) - 1

    def rhs_for(self, compartment: str) -> tuple[Poly, ...]:
        for c, _, coeffs in self.rhs:
            if c == compartment:
                return coeffs
        raise KeyError(compartment)

    def render(self) -> str:
        left = render_terms([(self.lhs[k], f"{self.output_signal}{_primes(k)}")
                             for k in range(len(self.lhs) - 1, -1, -1)])
        right_terms = []
        for _, sig, coeffs in self.rhs:
            right_terms += [(coeffs[k], f"{sig}{_primes(k)}") for k in range(len(coeffs) - 1, -1, -1)]
        return f"{left} = {render_terms(right_terms)}"

    __str__ = render

    def to_dict(self) -> dict:
        return {
            "output": self.output,
            "output_signal": self.output_signal,
            "subgraph": list(self.compartments),
            "lhs": [str(p) for p in self.lhs],
            "rhs": {sig: [str(p) for p in coeffs] for _, sig, coeffs in self.rhs},
            "text": self.render(),
        }


def _trim(coeffs: list[Poly]) -> tuple[Poly, ...]:
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs.pop()
    return tuple(coeffs)


def io_equation(m: AnyModel, i: str, restrict: bool = True) -> IOEquation:
    """I/O equation ``det(dI - A_H) z_i = sum_j (-1)^(i+j) det((dI - A_H)_ji) u_j``.

    ``H`` is the output-reachable subgraph of ``i``; with ``restrict=False`` the
    whole graph is used instead (a valid but generally longer equation).
    """
    cm = as_compartmental(m)
    verts = output_reachable_subgraph(cm, i) if restrict else cm.compartments
    if i not in cm.outputs:
        raise NetworkError(f"{i} is not an output")
    sub = restrict_model(cm, verts) if restrict else cm
    ins = [c for c in sub.compartments if sub.input_signal(c) is not None]
    reach = reaching(cm.adjacency(), i)
    if not any(c in reach for c in ins):
        raise HypothesisError(f"no input reaches {i}: no input-output equation of this form")
    a = compartmental_matrix(sub)
    pos = {c: k for k, c in enumerate(a.compartments)}
    coeffs, ns = faddeev_leverrier(a.rows())
    n = len(coeffs) - 1
    lhs = tuple(coeffs[n - k] for k in range(n + 1))
    rhs = []
    ii = pos[i]
    for c in ins:
        jj = pos[c]
        poly = [ns[n - 1 - k][ii][jj] for k in range(n)]
        rhs.append((c, sub.input_signal(c), _trim(poly)))
    return IOEquation(i, output_signal(i), sub.compartments, lhs, tuple(rhs))


@dataclass(frozen=True)
class CoefficientMap:
    coords: tuple[Poly, ...]
    params: tuple[str, ...]

    @property
    def T(self) -> int:  # noqa: N802 - conventional name
        return len(self.coords)

    @property
    def r(self) -> int:
        return len(self.params)

    def to_dict(self) -> dict:
        return {"coords": [str(c) for c in self.coords], "params": list(self.params)}


def equation_coefficients(eq: IOEquation) -> list[Poly]:
    out = [eq.lhs[k] for k in range(len(eq.lhs) - 2, -1, -1)]
    for _, _, coeffs in eq.rhs:
        out += [coeffs[k] for k in range(len(coeffs) - 1, -1, -1)]
    return out


def coefficient_map(m: AnyModel, equations: Sequence[IOEquation] | None = None) -> CoefficientMap:
    """Non-constant coefficients of one I/O equation per output, deduplicated."""
    cm = as_compartmental(m)
    if equations is None:
        equations = [io_equation(cm, o) for o in cm.outputs]
    coords: list[Poly] = []
    seen: set[Poly] = set()
    for eq in equations:
        for c in equation_coefficients(eq):
            if c.is_constant() or c in seen:
                continue
            seen.add(c)
            coords.append(c)
    return CoefficientMap(tuple(coords), cm.parameters)


# identifiability


GLOBAL = "GloballyIdentifiable"
LOCAL = "LocallyIdentifiable"
UNIDENTIFIABLE = "Unidentifiable"
INCONCLUSIVE = "Inconclusive"
_RESAMPLES = 5


@dataclass(frozen=True)
class IdentifiabilityVerdict:
    kind: str
    seed: int
    evidence: dict = field(default_factory=dict, compare=False)

    def is_identifiable(self) -> bool:
        return self.kind in (GLOBAL, LOCAL)

    def to_dict(self) -> dict:
        return {"verdict": self.kind, "seed": self.seed, "evidence": self.evidence}


def random_point(params: Sequence[str], rng: random.Random) -> dict[str, Fraction]:
    return {p: Fraction(rng.randint(1, 10**4), 100) for p in params}


def jacobian_rank(cmap: CoefficientMap, point: Mapping[str, Fraction]) -> int:
    if not cmap.coords or not cmap.params:
        return 0
    rows = [[c.diff(p).evaluate(point) for p in cmap.params] for c in cmap.coords]
    return linalg.rank(rows)


def local_identifiability(m: AnyModel, seed: int = 0, cmap: CoefficientMap | None = None) -> IdentifiabilityVerdict:
    """Generic Jacobian rank of the coefficient map at random rational points."""
    cm = as_compartmental(m)
    cmap = cmap or coefficient_map(cm)
    r = cmap.r
    if r == 0:
        return IdentifiabilityVerdict(GLOBAL, seed, {"parameters": 0, "reason": "no parameters"})
    rng = random.Random(seed)
    ranks = []
    for _ in range(_RESAMPLES):
        ranks.append(jacobian_rank(cmap, random_point(cmap.params, rng)))
        if ranks[-1] == r:
            break
    best = max(ranks)
    evidence = {"parameters": r, "coordinates": cmap.T, "jacobian_rank": best, "sampled_ranks": ranks,
                "sampling": "integers 1..10^4 divided by 100"}
    return IdentifiabilityVerdict(LOCAL if best == r else UNIDENTIFIABLE, seed, evidence)


def global_identifiability(m: AnyModel, seed: int = 0, budget: Budget | None = None) -> IdentifiabilityVerdict:
    """Fiber size of the coefficient map at a random point, when locally identifiable."""
    cm = as_compartmental(m)
    cmap = coefficient_map(cm)
    local = local_identifiability(cm, seed, cmap)
    if local.kind != LOCAL:
        return local
    rng = random.Random(seed + 1_000_003)
    star = random_point(cmap.params, rng)
    fiber = Ideal(tuple(c - c.evaluate(star) for c in cmap.coords), cmap.params)
    evidence = dict(local.evidence)
    try:
        count = zero_dim_solution_count(fiber, budget)
    except BudgetExceeded as exc:
        evidence["fiber"] = f"timeout: {exc}"
        return IdentifiabilityVerdict(INCONCLUSIVE, seed, evidence)
    evidence["fiber_count"] = str(count)
    evidence["fiber_point"] = {p: str(v) for p, v in star.items()}
    if count.kind == "finite" and count.count == 1:
        return IdentifiabilityVerdict(GLOBAL, seed, evidence)
    if count.kind == "finite":
        return IdentifiabilityVerdict(LOCAL, seed, evidence)
    return IdentifiabilityVerdict(INCONCLUSIVE, seed, evidence)


def add_leak(m: Model, compartment: str, label: str | None = None) -> Model:
    net = m.network
    if compartment not in net.species:
        raise NetworkError(f"unknown compartment {compartment}")
    if net.find(Complex.of(compartment), ZERO) is not None:
        raise NetworkError(f"{compartment} already has a leak")
    lab = label or fresh_label(net.labels, f"a0{_species_suffix(compartment)}")
    if lab in net.labels:
        raise NetworkError(f"label {lab!r} already used")
    r = Reaction(Complex.of(compartment), ZERO, lab)
    return Model(Network(net.species, net.reactions + (r,)), m.outputs)


# observability


@dataclass(frozen=True)
class ObservabilityMatrix:
    order: tuple[str, ...]
    matrix: PolyMatrix
    a_tilde: PolyMatrix
    a_row: list[Poly]
    b_col: list[Poly]
    a_nn: Poly


def observability_matrix(m: AnyModel, i: str) -> ObservabilityMatrix:
    """Rows ``a, a A~, ..., a A~^(n-2)`` with compartment ``i`` moved last."""
    cm = as_compartmental(m)
    full = compartmental_matrix(cm)
    idx = {c: k for k, c in enumerate(full.compartments)}
    others = [c for c in cm.compartments if c != i]
    a = full.rows()
    at = [[a[idx[r]][idx[c]] for c in others] for r in others]
    row = [a[idx[i]][idx[c]] for c in others]
    col = [a[idx[r]][idx[i]] for r in others]
    rows = []
    cur = row
    for _ in range(len(others)):
        rows.append(cur)
        cur = mat_mul([cur], at)[0] if others else cur
    return ObservabilityMatrix(tuple(others) + (i,), rows, at, row, col, a[idx[i]][idx[i]])


@dataclass(frozen=True)
class ObservabilityEquation:
    species: str
    expr: LinearExpr

    def render(self) -> str:
        return f"{concentration_name(self.species)} = {self.expr}"

    def to_dict(self) -> dict:
        return {"species": self.species, "text": self.render()}


def _vec_dot(u: Sequence[Poly], v: Sequence[Poly]) -> Poly:
    return sum((x * y for x, y in zip(u, v) if x and y), Poly())


def observability_equations(m: AnyModel, i: str, state_signal: str | None = None) -> list[ObservabilityEquation]:
    """Express each other state through ``x_i``, the inputs and their derivatives."""
    cm = as_compartmental(m)
    if i not in cm.compartments:
        raise NetworkError(f"unknown compartment {i}")
    if set(reaching(cm.adjacency(), i)) != set(cm.compartments):
        raise HypothesisError(f"not every compartment has a path to {i}")
    n = len(cm.compartments)
    if n == 1:
        return []
    om = observability_matrix(cm, i)
    others = list(om.order[:-1])
    xi = state_signal or concentration_name(i)
    ui = cm.input_signal(i)
    other_inputs = [(p, cm.input_signal(p)) for p in others if cm.input_signal(p) is not None]
    # powers a A~^m, m = 0..n-2
    powers = om.matrix
    cvec: list[dict[Signal, Poly]] = []
    for k in range(1, n):
        terms: dict[Signal, Poly] = {}

        def add(sig: Signal, p: Poly) -> None:
            if not p.is_zero():
                terms[sig] = terms.get(sig, Poly()) + p

        add((xi, k), Poly.const(1))
        add((xi, k - 1), -om.a_nn)
        if ui is not None:
            add((ui, k - 1), Poly.const(-1))
        for j in range(k - 1):
            mpow = powers[k - 2 - j]
            add((xi, j), -_vec_dot(mpow, om.b_col))
            for p, sig in other_inputs:
                add((sig, j), -mpow[others.index(p)])
        cvec.append(terms)
    adj, d = adjugate_and_det(om.matrix)
    if d.is_zero():
        raise InternalCheckError("observability matrix is singular")
    out = []
    for r, species in enumerate(others):
        acc: dict[Signal, Poly] = {}
        for k in range(n - 1):
            if adj[r][k].is_zero():
                continue
            for sig, p in cvec[k].items():
                acc[sig] = acc.get(sig, Poly()) + adj[r][k] * p
        coeffs = {sig: RatFunc.make(p, d) for sig, p in acc.items() if not p.is_zero()}
        if not any(name == xi for name, _ in coeffs):
            raise InternalCheckError(f"expression for {species} has no {xi} term")
        out.append(ObservabilityEquation(species, LinearExpr.from_dict(coeffs, [xi])))
    return out


# walk matrix of a 0-tree


@dataclass(frozen=True)
class TreeWalkMatrix:
    n: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[tuple[tuple[int, int], str], ...]
    matrix: tuple[tuple[Poly, ...], ...]
    det: Poly


def edge_label(src: int, dst: int, n: int) -> str:
    return f"a{dst}{src}" if n <= 10 else f"a{dst}_{src}"


def _check_zero_tree(n: int, edges: Sequence[tuple[int, int]]) -> dict[int, int]:
    parent: dict[int, int] = {}
    for s, d in edges:
        if not (0 <= s < n and 0 <= d < n) or s == d:
            raise NetworkError(f"bad tree edge {s}->{d}")
        if s in parent:
            raise NetworkError(f"vertex {s} has two outgoing edges; not a 0-tree")
        parent[s] = d
    if 0 in parent:
        raise NetworkError("vertex 0 must have no outgoing edge")
    for v in range(1, n):
        seen = set()
        w = v
        while w != 0:
            if w in seen or w not in parent:
                raise NetworkError(f"vertex {v} has no path to 0")
            seen.add(w)
            w = parent[w]
    return parent


def tree_walk_matrix(n: int, edges: Sequence[tuple[int, int]],
                     labels: Mapping[tuple[int, int], str] | None = None) -> TreeWalkMatrix:
    """Walk-count matrix of the tree with self-loops ``-a_ji`` at each tail ``i``.

    Entry ``(k, j)`` sums label products over walks of length ``k`` from
    ``j`` to ``0``.
    """
    parent = _check_zero_tree(n, edges)
    names = {(s, d): (labels or {}).get((s, d), edge_label(s, d, n)) for s, d in parent.items()}
    step: dict[int, list[tuple[int, Poly]]] = {v: [] for v in range(n)}
    for (s, d), name in names.items():
        step[s].append((d, Poly.var(name)))
        step[s].append((s, -Poly.var(name)))

    def walks(start: int, length: int) -> Poly:
        if length == 0:
            return Poly.const(1) if start == 0 else Poly()
        total = Poly()
        for nxt, lab in step[start]:
            rest = walks(nxt, length - 1)
            if not rest.is_zero():
                total = total + lab * rest
        return total

    mat = tuple(tuple(walks(j, k) for j in range(1, n)) for k in range(1, n))
    d = det([list(r) for r in mat])
    if d.is_zero():
        raise InternalCheckError("walk matrix determinant vanished")
    return TreeWalkMatrix(n, tuple(sorted(parent.items())), tuple(sorted(names.items())), mat, d)


# substituted I/O equations


@dataclass(frozen=True)
class SubstitutedIOEquation:
    output: str
    output_signal: str
    lhs: tuple[Poly, ...]
    rhs: LinearExpr

    def render(self) -> str:
        left = render_terms([(self.lhs[k], f"{self.output_signal}{_primes(k)}")
                             for k in range(len(self.lhs) - 1, -1, -1)])
        right = render_terms([(Poly.const(1), f"{r}*{n}{_primes(k)}") if r.den != Poly.const(1)
                              else (r.num, f"{n}{_primes(k)}") for (n, k), r in self.rhs.terms])
        return f"{left} = {right}"

    __str__ = render

    def to_dict(self) -> dict:
        return {"output": self.output, "lhs": [str(p) for p in self.lhs], "text": self.render()}


def designated_output(m: Model) -> str:
    """First output that every compartment of ``m`` can reach."""
    adj = species_digraph(m.network)
    for o in m.outputs:
        if reaching(adj, o) == set(m.network.species):
            return o
    raise HypothesisError("no output of the earlier model is reachable from every compartment")


def substituted_io_equation(m_prev: Model, n_r: Model, join: OneWayFlowSpec, ell: str) -> SubstitutedIOEquation:
    """I/O equation of ``n_r`` with the replaced inflow written through ``m_prev``'s outputs.

    The inflow ``u_j'`` of ``n_r`` becomes ``k_i0 * g_i`` where ``k_i0`` is
    the rate of the replaced leak ``X_i -> 0`` and ``g_i`` expresses ``x_i``
    via the designated output of ``m_prev``.
    """
    if join.scenario != 1 or len(join.phi) != 1:
        raise HypothesisError("substitution needs a single-reaction scenario 1 join")
    (i, jp), = join.phi
    leak = m_prev.network.find(Complex.of(i), ZERO)
    if leak is None:
        raise HypothesisError(f"{i} has no leak in the earlier model")
    inflow = n_r.network.find(ZERO, Complex.of(jp))
    if inflow is None:
        raise HypothesisError(f"{jp} has no inflow in the later model")
    if ell not in n_r.outputs:
        raise NetworkError(f"{ell} is not an output of the later model")
    adj = species_digraph(n_r.network)
    if not any(c in reaching(adj, ell) for c in n_r.inputs):
        raise HypothesisError(f"no input of the later model reaches {ell}")
    io = io_equation(n_r, ell)
    if jp not in io.compartments:
        raise HypothesisError(f"replaced inflow {jp} does not reach {ell}")
    out_prev = designated_output(m_prev)
    z_prev = output_signal(out_prev)
    if i == out_prev:
        g = {(z_prev, 0): RatFunc.make(Poly.const(1))}
    else:
        eqs = observability_equations(m_prev, out_prev, state_signal=z_prev)
        g = next(e.expr.as_dict() for e in eqs if e.species == i)
    kappa = Poly.var(leak.label)
    rhs: dict[Signal, RatFunc] = {}

    def add(sig: Signal, r: RatFunc) -> None:
        rhs[sig] = rhs[sig] + r if sig in rhs else r

    for comp, sig, coeffs in io.rhs:
        for k, c in enumerate(coeffs):
            if c.is_zero():
                continue
            if comp == jp:
                for (name, q), r in g.items():
                    add((name, q + k), r * (c * kappa))
            else:
                add((sig, k), RatFunc.make(c))
    return SubstitutedIOEquation(ell, io.output_signal, io.lhs, LinearExpr.from_dict(rhs, [z_prev]))
