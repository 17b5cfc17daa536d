"""Groebner bases, elimination and ideal comparisons.

Polynomials are converted to dense exponent vectors over an explicit ring
(a tuple of variable names) and reduced with Buchberger's algorithm using
the Gebauer-Moeller pair criteria and the normal selection strategy.
Computations are capped by a :class:`Budget`; exceeding it raises
:class:`~crnjoin.errors.BudgetExceeded` rather than running forever.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import BudgetExceeded
from .poly import Poly, natural_key

try:  # gmpy2 rationals are several times faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

Exp = tuple[int, ...]
Dense = dict[Exp, object]

ENV_MAX_STEPS = "CRNJOIN_MAX_STEPS"
ENV_MAX_DEGREE = "CRNJOIN_MAX_DEGREE"


@dataclass(frozen=True)
class Budget:
    """Caps on reduction steps and on the total degree of basis elements."""

    max_steps: int = 10**6
    max_degree: int = 60

    @classmethod
    def from_env(cls) -> "Budget":
        steps = os.environ.get(ENV_MAX_STEPS)
        degree = os.environ.get(ENV_MAX_DEGREE)
        return cls(
            max_steps=int(steps) if steps else cls.max_steps,
            max_degree=int(degree) if degree else cls.max_degree,
        )


@dataclass(frozen=True)
class MonomialOrder:
    """``lex``, ``grevlex`` or ``block`` (eliminated block first, grevlex in each)."""

    kind: str
    eliminate: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"unknown monomial order {self.kind!r}")


LEX = MonomialOrder("lex")
GREVLEX = MonomialOrder("grevlex")


def block_elimination(names: Iterable[str]) -> MonomialOrder:
    return MonomialOrder("block", tuple(names))


def _key_function(ring: Sequence[str], order: MonomialOrder) -> Callable[[Exp], tuple]:
    n = len(ring)
    if order.kind == "lex":
        return lambda e: e
    if order.kind == "grevlex":
        rev = list(range(n - 1, -1, -1))
        return lambda e: (sum(e), *[-e[i] for i in rev])
    elim = set(order.eliminate)
    first = [i for i, v in enumerate(ring) if v in elim]
    second = [i for i, v in enumerate(ring) if v not in elim]
    r1 = first[::-1]
    r2 = second[::-1]

    def key(e: Exp) -> tuple:
        return (
            sum(e[i] for i in first),
            *[-e[i] for i in r1],
            sum(e[i] for i in second),
            *[-e[i] for i in r2],
        )

    return key


def sorted_ring(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=natural_key))


# conversion between sparse Poly and dense dictionaries


def to_dense(p: Poly, index: dict[str, int], n: int) -> Dense:
    out: Dense = {}
    for m, c in p.items():
        e = [0] * n
        for v, k in m:
            e[index[v]] = k
        out[tuple(e)] = _Q(c.numerator, c.denominator)
    return out


def from_dense(d: Dense, ring: Sequence[str]) -> Poly:
    terms = {}
    for e, c in d.items():
        m = tuple(sorted((ring[i], k) for i, k in enumerate(e) if k))
        terms[m] = Fraction(int(c.numerator), int(c.denominator))
    return Poly(terms)


class _Engine:
    """Buchberger state for one computation."""

    def __init__(self, ring: Sequence[str], order: MonomialOrder, budget: Budget) -> None:
        self.ring = tuple(ring)
        self.n = len(self.ring)
        self.keyf = _key_function(self.ring, order)
        self.budget = budget
        self.steps = 0
        self._keys: dict[Exp, tuple] = {}

    def key(self, e: Exp) -> tuple:
        k = self._keys.get(e)
        if k is None:
            k = self._keys[e] = self.keyf(e)
        return k

    def lm(self, p: Dense) -> Exp:
        return max(p, key=self.key)

    def monic(self, p: Dense) -> Dense:
        c = p[self.lm(p)]
        if c == 1:
            return p
        inv = 1 / c
        return {e: v * inv for e, v in p.items()}

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget.max_steps:
            raise BudgetExceeded(f"Groebner computation exceeded {self.budget.max_steps} reduction steps")

    def normal_form(self, p: Dense, basis: list[Dense], lms: list[Exp], full: bool = True) -> Dense:
        p = dict(p)
        rem: Dense = {}
        key = self.key
        while p:
            lead = max(p, key=key)
            c = p[lead]
            for g, gm in zip(basis, lms):
                if all(a <= b for a, b in zip(gm, lead)):
                    self.tick()
                    shift = tuple(b - a for a, b in zip(gm, lead))
                    for e, v in g.items():
                        t = tuple(x + y for x, y in zip(e, shift))
                        s = p.get(t, 0) - c * v
                        if s:
                            p[t] = s
                        else:
                            p.pop(t, None)
                    break
            else:
                if not full:
                    rem.update(p)
                    return rem
                rem[lead] = c
                del p[lead]
        return rem

    def spoly(self, f: Dense, fm: Exp, g: Dense, gm: Exp) -> Dense:
        lcm = tuple(max(a, b) for a, b in zip(fm, gm))
        sf = tuple(l - a for l, a in zip(lcm, fm))
        sg = tuple(l - a for l, a in zip(lcm, gm))
        out: Dense = {}
        for e, v in f.items():
            out[tuple(x + y for x, y in zip(e, sf))] = v
        for e, v in g.items():
            t = tuple(x + y for x, y in zip(e, sg))
            s = out.get(t, 0) - v
            if s:
                out[t] = s
            else:
                out.pop(t, None)
        return out

    def check_degree(self, p: Dense) -> None:
        deg = max(sum(e) for e in p)
        if deg > self.budget.max_degree:
            raise BudgetExceeded(f"Groebner basis element of degree {deg} exceeds cap {self.budget.max_degree}")

    def groebner(self, polys: list[Dense]) -> list[Dense]:
        store: list[Dense] = []
        lms: list[Exp] = []
        current: list[int] = []
        pairs: list[tuple[int, int]] = []

        def lcm(i: int, j: int) -> Exp:
            return tuple(max(a, b) for a, b in zip(lms[i], lms[j]))

        def divides(a: Exp, b: Exp) -> bool:
            return all(x <= y for x, y in zip(a, b))

        def coprime(i: int, j: int) -> bool:
            return all(not (a and b) for a, b in zip(lms[i], lms[j]))

        def update(h: int) -> None:
            nonlocal current, pairs
            cand = [(h, g) for g in current]
            kept: list[tuple[int, int]] = []
            for idx, (_, g1) in enumerate(cand):
                l1 = lcm(h, g1)
                if coprime(h, g1):
                    kept.append((h, g1))
                    continue
                others = [p for p in cand[idx + 1:]] + kept
                if not any(divides(lcm(h, g2), l1) for _, g2 in others):
                    kept.append((h, g1))
            new_pairs = [(h, g) for _, g in kept if not coprime(h, g)]
            hm = lms[h]
            survivors = []
            for g1, g2 in pairs:
                l12 = lcm(g1, g2)
                if not divides(hm, l12) or lcm(g1, h) == l12 or lcm(h, g2) == l12:
                    survivors.append((g1, g2))
            pairs = survivors + new_pairs
            current = [g for g in current if not divides(hm, lms[g])] + [h]

        def add(p: Dense) -> None:
            p = self.monic(p)
            self.check_degree(p)
            store.append(p)
            lms.append(self.lm(p))
            update(len(store) - 1)

        for f in polys:
            if not f:
                continue
            h = self.normal_form(f, [store[i] for i in current], [lms[i] for i in current])
            if h:
                add(h)
        while pairs:
            best = min(
                range(len(pairs)),
                key=lambda k: (sum(lcm(*pairs[k])), self.key(lcm(*pairs[k]))),
            )
            i, j = pairs.pop(best)
            s = self.spoly(store[i], lms[i], store[j], lms[j])
            if not s:
                continue
            h = self.normal_form(s, [store[k] for k in current], [lms[k] for k in current])
            if h:
                add(h)
        basis = [store[i] for i in current]
        # interreduce to the reduced basis
        reduced: list[Dense] = []
        bl = [self.lm(g) for g in basis]
        for idx, g in enumerate(basis):
            others = [b for k, b in enumerate(basis) if k != idx]
            om = [m for k, m in enumerate(bl) if k != idx]
            r = self.normal_form(g, others, om)
            reduced.append(self.monic(r))
        reduced.sort(key=lambda g: self.key(self.lm(g)), reverse=True)
        return reduced


@dataclass(frozen=True)
class Ideal:
    """An ideal of Q[ring] given by generators.

    When ``groebner_order`` is set the generators form the reduced Groebner
    basis for that order.
    """

    generators: tuple[Poly, ...]
    ring: tuple[str, ...]
    groebner_order: MonomialOrder | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        gens = tuple(g for g in self.generators if not g.is_zero())
        object.__setattr__(self, "generators", gens)
        extra = set().union(*(g.variables() for g in gens)) - set(self.ring) if gens else set()
        if extra:
            raise ValueError(f"generators use variables outside the ring: {sorted(extra)}")

    @classmethod
    def of(cls, generators: Iterable[Poly], ring: Iterable[str] | None = None) -> "Ideal":
        gens = tuple(generators)
        if ring is None:
            ring = sorted_ring(v for g in gens for v in g.variables())
        return cls(gens, tuple(ring))

    def is_zero(self) -> bool:
        return not self.generators

    def is_unit(self) -> bool:
        return any(g.is_constant() and not g.is_zero() for g in self.generators)

    def with_ring(self, ring: Iterable[str]) -> "Ideal":
        return Ideal(self.generators, tuple(ring))

    def to_json(self) -> list[str]:
        return [str(g) for g in self.generators]

    def __str__(self) -> str:
        return "<" + ", ".join(str(g) for g in self.generators) + ">"


def _budget(budget: Budget | None) -> Budget:
    return budget if budget is not None else Budget.from_env()


def groebner_basis(ideal: Ideal, order: MonomialOrder = GREVLEX, budget: Budget | None = None) -> Ideal:
    """Reduced Groebner basis of ``ideal`` for ``order``."""
    if ideal.groebner_order == order:
        return ideal
    ring = ideal.ring
    eng = _Engine(ring, order, _budget(budget))
    index = {v: i for i, v in enumerate(ring)}
    dense = [to_dense(g, index, len(ring)) for g in ideal.generators]
    basis = eng.groebner(dense)
    return Ideal(tuple(from_dense(b, ring) for b in basis), ring, order)


def buchberger(generators: Sequence[Poly], ring: Sequence[str], order: MonomialOrder = GREVLEX,
               budget: Budget | None = None) -> list[Poly]:
    """Reduced Groebner basis as a list of polynomials."""
    return list(groebner_basis(Ideal(tuple(generators), tuple(ring)), order, budget).generators)


def normal_form(p: Poly, basis: Ideal, budget: Budget | None = None) -> Poly:
    """Remainder of ``p`` modulo ``basis`` (which must carry a Groebner order)."""
    if basis.groebner_order is None:
        raise ValueError("normal_form needs a Groebner basis")
    ring = basis.ring
    missing = p.variables() - set(ring)
    if missing:
        ring = ring + tuple(sorted(missing, key=natural_key))
    eng = _Engine(ring, basis.groebner_order, _budget(budget))
    index = {v: i for i, v in enumerate(ring)}
    n = len(ring)
    gs = [to_dense(g, index, n) for g in basis.generators]
    lms = [eng.lm(g) for g in gs]
    return from_dense(eng.normal_form(to_dense(p, index, n), gs, lms), ring)


def _common_ring(*ideals: Ideal, extra: Iterable[str] = ()) -> tuple[str, ...]:
    seen: list[str] = []
    for I in ideals:
        for v in I.ring:
            if v not in seen:
                seen.append(v)
    for v in extra:
        if v not in seen:
            seen.append(v)
    return tuple(seen)


def ideal_membership(p: Poly, ideal: Ideal, budget: Budget | None = None) -> bool:
    if p.is_zero():
        return True
    ring = _common_ring(ideal, extra=sorted(p.variables(), key=natural_key))
    basis = ideal if ideal.groebner_order is not None and ring == ideal.ring else groebner_basis(
        ideal.with_ring(ring), GREVLEX, budget)
    return normal_form(p, basis, budget).is_zero()


def ideal_contains(big: Ideal, small: Ideal, budget: Budget | None = None) -> bool:
    """True when every generator of ``small`` lies in ``big``."""
    ring = _common_ring(big, small)
    basis = big if big.groebner_order is not None and ring == big.ring else groebner_basis(
        big.with_ring(ring), GREVLEX, budget)
    return all(normal_form(g, basis, budget).is_zero() for g in small.generators)


def ideal_equal(a: Ideal, b: Ideal, budget: Budget | None = None) -> bool:
    return ideal_contains(a, b, budget) and ideal_contains(b, a, budget)


def ideal_sum(a: Ideal, b: Ideal) -> Ideal:
    return Ideal(a.generators + b.generators, _common_ring(a, b))


def eliminate(ideal: Ideal, names: Iterable[str], budget: Budget | None = None) -> Ideal:
    """Elimination ideal ``I ∩ Q[ring minus names]`` as a reduced Groebner basis.

    Uses the block order with the eliminated variables in the first block;
    the surviving elements form the reduced basis for grevlex on the rest.
    """
    names = tuple(v for v in names if v in ideal.ring)
    kept = tuple(v for v in ideal.ring if v not in names)
    if not names:
        return groebner_basis(ideal, GREVLEX, budget)
    gb = groebner_basis(ideal, block_elimination(names), budget)
    drop = set(names)
    gens = tuple(g for g in gb.generators if not (g.variables() & drop))
    return Ideal(gens, kept, GREVLEX)


@dataclass(frozen=True)
class SolutionCount:
    """Outcome of counting complex solutions: ``empty``, ``finite`` or ``infinite``."""

    kind: str
    count: int | None = None

    def __str__(self) -> str:
        return f"Finite({self.count})" if self.kind == "finite" else self.kind.capitalize()


def zero_dim_solution_count(ideal: Ideal, budget: Budget | None = None) -> SolutionCount:
    """Number of complex solutions counted with multiplicity."""
    gb = groebner_basis(ideal, GREVLEX, budget)
    ring = gb.ring
    if gb.is_unit():
        return SolutionCount("empty")
    index = {v: i for i, v in enumerate(ring)}
    n = len(ring)
    eng = _Engine(ring, GREVLEX, _budget(budget))
    lms = [eng.lm(to_dense(g, index, n)) for g in gb.generators]
    bounds = []
    for i in range(n):
        pure = [m[i] for m in lms if m[i] and all(m[k] == 0 for k in range(n) if k != i)]
        if not pure:
            return SolutionCount("infinite")
        bounds.append(min(pure))
    count = 0
    for e in itertools.product(*(range(b) for b in bounds)):
        if not any(all(a <= b for a, b in zip(m, e)) for m in lms):
            count += 1
    return SolutionCount("finite", count)


def divide(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    """Multivariate division of ``f`` by a single ``g``; returns (quotient, remainder)."""
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    ring = sorted_ring(f.variables() | g.variables())
    eng = _Engine(ring, GREVLEX, Budget(max_steps=10**9))
    index = {v: i for i, v in enumerate(ring)}
    n = len(ring)
    p = to_dense(f, index, n)
    gd = to_dense(g, index, n)
    gm = eng.lm(gd)
    gc = gd[gm]
    q: Dense = {}
    rem: Dense = {}
    while p:
        lead = eng.lm(p)
        c = p[lead]
        if all(a <= b for a, b in zip(gm, lead)):
            shift = tuple(b - a for a, b in zip(gm, lead))
            factor = c / gc
            q[shift] = q.get(shift, 0) + factor
            for e, v in gd.items():
                t = tuple(x + y for x, y in zip(e, shift))
                s = p.get(t, 0) - factor * v
                if s:
                    p[t] = s
                else:
                    p.pop(t, None)
        else:
            rem[lead] = c
            del p[lead]
    return from_dense(q, ring), from_dense(rem, ring)


def poly_gcd(f: Poly, g: Poly, budget: Budget | None = None) -> Poly:
    """Greatest common divisor via the intersection ``<f> ∩ <g> = <lcm>``."""
    if f.is_zero():
        return g.content_normalized()
    if g.is_zero():
        return f.content_normalized()
    if f.is_constant() or g.is_constant():
        return Poly.const(1)
    t = "_gcd_t"
    tv = Poly.var(t)
    ring = (t,) + sorted_ring(f.variables() | g.variables())
    inter = eliminate(Ideal((tv * f, (1 - tv) * g), ring), [t], budget)
    if len(inter.generators) != 1:
        raise AssertionError("intersection of principal ideals must be principal")
    lcm = inter.generators[0]
    q, r = divide(f * g, lcm)
    if not r.is_zero():
        raise AssertionError("lcm does not divide f*g")
    return q.content_normalized()
