"""Exact multivariate polynomials over the rationals.

A :class:`Poly` is a sparse map from monomials to :class:`fractions.Fraction`
coefficients.  Monomials are tuples of ``(variable, exponent)`` pairs sorted
by variable name, so polynomials need no ambient ring and can be combined
freely.  Groebner-basis work lives in :mod:`crnjoin.groebner`, which converts
to dense exponent vectors for speed.

The canonical text form looks like ``3/2*k12*x1^2 - x2`` and round-trips
through :func:`parse_poly`.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .errors import ParseError

Monomial = tuple[tuple[str, int], ...]
Number = Union[int, Fraction]
ONE_MONO: Monomial = ()

_NAT_SPLIT = re.compile(r"(\d+)")


def natural_key(name: str) -> tuple:
    """Sort key that orders ``a2`` before ``a10``."""
    parts = _NAT_SPLIT.split(name)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _as_fraction(c: Number) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class Poly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None) -> None:
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = _as_fraction(c)
                if c:
                    clean[m] = c
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> "Poly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls._raw({((name, 1),): Fraction(1)})

    @classmethod
    def const(cls, c: Number) -> "Poly":
        c = _as_fraction(c)
        return cls._raw({ONE_MONO: c} if c else {})

    @staticmethod
    def coerce(x: "Poly | Number") -> "Poly":
        return x if isinstance(x, Poly) else Poly.const(x)

    # container protocol
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == ONE_MONO for m in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get(ONE_MONO, Fraction(0))

    def variables(self) -> set[str]:
        return {v for m in self._terms for v, _ in m}

    def total_degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=-1)

    def degree_in(self, name: str) -> int:
        return max((dict(m).get(name, 0) for m in self._terms), default=-1)

    # arithmetic
    def __add__(self, other: "Poly | Number") -> "Poly":
        other = Poly.coerce(other)
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "Poly | Number") -> "Poly":
        return self + (-Poly.coerce(other))

    def __rsub__(self, other: Number) -> "Poly":
        return Poly.coerce(other) - self

    def __mul__(self, other: "Poly | Number") -> "Poly":
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            if not c:
                return Poly._raw({})
            return Poly._raw({m: v * c for m, v in self._terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Poly":
        c = _as_fraction(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return Poly._raw({m: v / c for m, v in self._terms.items()})

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative exponent")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus and substitution
    def diff(self, name: str) -> "Poly":
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            d = dict(m)
            e = d.get(name, 0)
            if not e:
                continue
            if e == 1:
                del d[name]
            else:
                d[name] = e - 1
            nm = tuple(sorted(d.items()))
            out[nm] = out.get(nm, 0) + c * e
        return Poly(out)

    def subs(self, mapping: Mapping[str, "Poly | Number"]) -> "Poly":
        """Substitute polynomials or numbers for variables."""
        if not mapping:
            return self
        powers: dict[tuple[str, int], Poly] = {}
        result = Poly()
        for m, c in self._terms.items():
            kept: list[tuple[str, int]] = []
            factor = Poly.const(c)
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = Poly.coerce(mapping[v]) ** e
                    factor = factor * powers[key]
                    if factor.is_zero():
                        break
                else:
                    kept.append((v, e))
            if factor.is_zero():
                continue
            result = result + factor * Poly._raw({tuple(kept): Fraction(1)})
        return result

    def set_zero(self, names: Iterable[str]) -> "Poly":
        """Drop every term that involves one of ``names``."""
        names = set(names)
        return Poly._raw(
            {m: c for m, c in self._terms.items() if not any(v in names for v, _ in m)}
        )

    def evaluate(self, values: Mapping[str, Number]) -> Fraction:
        total = Fraction(0)
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                t *= _as_fraction(values[v]) ** e
            total += t
        return total

    def evaluate_float(self, values: Mapping[str, float]) -> float:
        total = 0.0
        for m, c in self._terms.items():
            t = float(c)
            for v, e in m:
                t *= values[v] ** e
            total += t
        return total

    def coefficients_in(self, name: str) -> dict[int, "Poly"]:
        """View as a univariate polynomial in ``name``; maps power to coefficient."""
        out: dict[int, dict[Monomial, Fraction]] = {}
        for m, c in self._terms.items():
            e = 0
            rest = []
            for v, k in m:
                if v == name:
                    e = k
                else:
                    rest.append((v, k))
            out.setdefault(e, {})[tuple(rest)] = c
        return {e: Poly._raw(t) for e, t in out.items()}

    def content_normalized(self) -> "Poly":
        """Scale so the first term in display order has coefficient 1."""
        if not self._terms:
            return self
        lead = self._terms[sorted_monomials(self._terms)[0]]
        return self / lead

    def sort_key(self) -> tuple:
        """Order used for picking 'smallest' elements: degree, then term count."""
        return (self.total_degree(), len(self._terms), str(self))

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"Poly({render(self)!r})"


def _mono_display_key(m: Monomial) -> tuple:
    return (-mono_degree(m), tuple((natural_key(v), -e) for v, e in m))


def sorted_monomials(terms: Iterable[Monomial]) -> list[Monomial]:
    """Canonical display order: graded, then lexicographic by natural names."""
    return sorted(terms, key=_mono_display_key)


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_monomial(m: Monomial) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def render(p: Poly) -> str:
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for i, m in enumerate(sorted_monomials(p._terms)):
        c = p._terms[m]
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = _fmt_coeff(a)
        elif a == 1:
            body = render_monomial(m)
        else:
            body = f"{_fmt_coeff(a)}*{render_monomial(m)}"
        if i == 0:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


class _PolyParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        text_len = len(text)
        while pos < text_len:
            if text[pos:].strip() == "":
                break
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r} in polynomial", 1, pos + 1)
            if mt.group(1):
                self.tokens.append(("num", mt.group(1), mt.start(1)))
            elif mt.group(2):
                self.tokens.append(("name", mt.group(2), mt.start(2)))
            else:
                op = mt.group(3)
                self.tokens.append(("op", "^" if op == "**" else op, mt.start(3)))
            pos = mt.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of polynomial", 1, len(self.text) + 1)
        self.i += 1
        return tok

    def parse(self) -> Poly:
        if not self.tokens:
            raise ParseError("empty polynomial", 1, 1)
        p = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok[1]!r}", 1, tok[2] + 1)
        return p

    def expr(self) -> Poly:
        tok = self.peek()
        sign = 1
        if tok and tok[0] == "op" and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        p = self.term() * sign
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.take()
                t = self.term()
                p = p + t if tok[1] == "+" else p - t
            else:
                return p

    def term(self) -> Poly:
        p = self.power()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "*":
                self.take()
                p = p * self.power()
            elif tok and tok[0] == "op" and tok[1] == "/":
                self.take()
                d = self.power()
                if not d.is_constant() or d.is_zero():
                    raise ParseError("division only by nonzero constants", 1, tok[2] + 1)
                p = p / d.constant_value()
            else:
                return p

    def power(self) -> Poly:
        base = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.take()
            e = self.take()
            if e[0] != "num":
                raise ParseError("exponent must be a nonnegative integer", 1, e[2] + 1)
            return base ** int(e[1])
        return base

    def atom(self) -> Poly:
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Poly.const(int(val))
        if kind == "name":
            return Poly.var(val)
        if val == "(":
            p = self.expr()
            close = self.take()
            if close[1] != ")":
                raise ParseError("expected ')'", 1, close[2] + 1)
            return p
        if val == "-":
            return -self.power()
        raise ParseError(f"unexpected token {val!r}", 1, pos + 1)


def parse_poly(text: str) -> Poly:
    """Parse the canonical text form (and general ``+ - * / ^ ()`` expressions)."""
    return _PolyParser(text).parse()


def var(name: str) -> Poly:
    return Poly.var(name)


def const(c: Number) -> Poly:
    return Poly.const(c)
