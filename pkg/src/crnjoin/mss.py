"""Counting positive steady states at desk scale.

Single-species networks are handled exactly with Sturm sequences.  Networks
with two or three species are solved numerically by damped Newton from
many positive starts, working in logarithmic coordinates so iterates stay
positive.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import HypothesisError, NetworkError
from .massaction import stoichiometric_matrix, system_polynomials
from .net import Network, parse_network

UPoly = list[Fraction]  # coefficients, lowest degree first

RESIDUAL_GATE = 1e-10
DEDUP_DISTANCE = 1e-8
N_STARTS = 200
ZERO_EIG = 1e-8
STALL_LIMIT = 15
LOG_BOUND = 40.0


# univariate polynomials


def _trim(p: Sequence[Fraction]) -> UPoly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def upoly_eval(p: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def upoly_deriv(p: Sequence[Fraction]) -> UPoly:
    return _trim([k * p[k] for k in range(1, len(p))])


def upoly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[UPoly, UPoly]:
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / b[-1]
        q[shift] = f
        for k, c in enumerate(b):
            r[k + shift] -= f * c
        r = _trim(r)
    return _trim(q), r


def upoly_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> UPoly:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, upoly_divmod(a, b)[1]
    if not a:
        return a
    return [c / a[-1] for c in a]


def sturm_sequence(p: Sequence[Fraction]) -> list[UPoly]:
    seq = [_trim(p), upoly_deriv(p)]
    while seq[-1]:
        r = upoly_divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        # positive rescaling keeps every sign and curbs coefficient growth
        scale = abs(r[-1])
        seq.append([-c / scale for c in r])
    return [s for s in seq if s]


def _sign_at(p: UPoly, x: Fraction | None) -> int:
    """Sign at ``x``; ``None`` means +infinity."""
    v = p[-1] if x is None else upoly_eval(p, x)
    return (v > 0) - (v < 0)


def _variations(seq: list[UPoly], x: Fraction | None) -> int:
    signs = [s for s in (_sign_at(p, x) for p in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_in(p: Sequence[Fraction], lo: Fraction, hi: Fraction | None) -> int:
    """Distinct real roots in ``(lo, hi]`` (``hi=None`` for infinity)."""
    seq = sturm_sequence(p)
    return _variations(seq, lo) - _variations(seq, hi)


def positive_root_bound(p: Sequence[Fraction]) -> Fraction:
    p = _trim(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def squarefree_decomposition(p: Sequence[Fraction]) -> list[tuple[UPoly, int]]:
    """Yun's algorithm: ``p = c * prod g_k^k`` with squarefree, coprime ``g_k``."""
    p = _trim(p)
    out: list[tuple[UPoly, int]] = []
    if len(p) <= 1:
        return out
    dp = upoly_deriv(p)
    a = upoly_gcd(p, dp)
    b = upoly_divmod(p, a)[0]
    c = upoly_divmod(dp, a)[0]
    d = [x - y for x, y in _zip_pad(c, upoly_deriv(b))]
    k = 1
    while len(_trim(b)) > 1:
        a = upoly_gcd(b, d)
        if len(a) > 1:
            out.append((a, k))
        b = upoly_divmod(b, a)[0]
        c = upoly_divmod(d, a)[0]
        d = [x - y for x, y in _zip_pad(c, upoly_deriv(b))]
        k += 1
    return out


def _zip_pad(a: Sequence[Fraction], b: Sequence[Fraction]):
    n = max(len(a), len(b))
    return zip(list(a) + [Fraction(0)] * (n - len(a)), list(b) + [Fraction(0)] * (n - len(b)))


def isolate_positive_roots(p: Sequence[Fraction], width: Fraction = Fraction(1, 10**30)) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals ``(lo, hi]`` each containing one positive root of squarefree ``p``."""
    p = _trim(p)
    if len(p) <= 1:
        return []
    hi = positive_root_bound(p)
    seq = sturm_sequence(p)
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(Fraction(0), hi)]
    while stack:
        lo, up = stack.pop()
        k = _variations(seq, lo) - _variations(seq, up)
        if k == 0:
            continue
        if k == 1 and up - lo <= width:
            out.append((lo, up))
            continue
        mid = (lo + up) / 2
        stack.append((mid, up))
        stack.append((lo, mid))
    return sorted(out)


@dataclass(frozen=True)
class RootCount:
    """Positive roots of a univariate polynomial; ``continuum`` for the zero polynomial."""

    distinct: int
    multiplicities: tuple[int, ...]
    intervals: tuple[tuple[Fraction, Fraction], ...]
    continuum: bool = False

    def to_dict(self) -> dict:
        return {
            "continuum": self.continuum,
            "distinct_positive_roots": self.distinct,
            "multiplicities": list(self.multiplicities),
            "roots": [str((lo + hi) / 2) for lo, hi in self.intervals],
        }


def count_positive_roots(p: Sequence[Fraction], width: Fraction = Fraction(1, 10**30)) -> RootCount:
    p = _trim(p)
    if not p:
        return RootCount(0, (), (), continuum=True)
    while p and p[0] == 0:  # the root at 0 is not positive
        p = p[1:]
    found: list[tuple[tuple[Fraction, Fraction], int]] = []
    for g, k in squarefree_decomposition(p):
        for iv in isolate_positive_roots(g, width):
            found.append((iv, k))
    found.sort()
    total = count_roots_in(p, Fraction(0), None) if len(p) > 1 else 0
    if total != len(found):
        raise AssertionError("root isolation disagrees with the Sturm count")
    return RootCount(len(found), tuple(k for _, k in found), tuple(iv for iv, _ in found))


def univariate_polynomial(n: Network, kappa: Mapping[str, Fraction]) -> UPoly:
    """Coefficients of the single-species right-hand side at rates ``kappa``."""
    if len(n.species) != 1:
        raise NetworkError("univariate analysis needs a single-species network")
    (s,) = n.species
    coeffs: dict[int, Fraction] = {}
    for r in n.reactions:
        y = r.reactant.coeffs.get(s, 0)
        delta = r.product.coeffs.get(s, 0) - y
        coeffs[y] = coeffs.get(y, Fraction(0)) + Fraction(kappa[r.label]) * delta
    deg = max(coeffs, default=0)
    return _trim([coeffs.get(k, Fraction(0)) for k in range(deg + 1)])


def count_positive_roots_univariate(n: Network, kappa: Mapping[str, Fraction]) -> RootCount:
    return count_positive_roots(univariate_polynomial(n, kappa))


# numeric system


@dataclass(frozen=True)
class _System:
    network: Network
    gamma: np.ndarray  # species x reactions
    reactant: np.ndarray  # reactions x species
    rows: list[int]  # independent rows of gamma
    conservation: np.ndarray  # basis of the orthogonal complement, as rows
    conservation_exact: list[list[Fraction]]
    subspace: np.ndarray  # basis of the stoichiometric subspace, as columns

    @classmethod
    def build(cls, n: Network) -> "_System":
        sm = stoichiometric_matrix(n)
        rows = sm.rows
        gamma = np.array(rows, dtype=float).reshape(len(n.species), len(n.reactions))
        reac = np.array([[r.reactant.coeffs.get(s, 0) for s in n.species] for r in n.reactions], dtype=float)
        reac = reac.reshape(len(n.reactions), len(n.species))
        indep = linalg.independent_rows(rows) if n.reactions else []
        cons = sm.conservation_basis()
        sub = sm.subspace_basis()
        sub_arr = np.array([[float(v) for v in col] for col in sub]).T if sub else np.zeros((len(n.species), 0))
        cons_arr = np.array([[float(v) for v in row] for row in cons]) if cons else np.zeros((0, len(n.species)))
        return cls(n, gamma, reac, indep, cons_arr, cons, sub_arr)

    @property
    def sigma(self) -> int:
        return len(self.rows)


def _rates(kappa: np.ndarray, reac: np.ndarray, x: np.ndarray) -> np.ndarray:
    # x: (batch, n) -> (batch, r)
    return kappa[None, :] * np.prod(x[:, None, :] ** reac[None, :, :], axis=2)


def _residual_F(sys_: _System, kappa: np.ndarray, x: np.ndarray, totals: np.ndarray) -> np.ndarray:
    f = _rates(kappa, sys_.reactant, x) @ sys_.gamma.T
    parts = [f[:, sys_.rows]]
    if sys_.conservation.shape[0]:
        parts.append(x @ sys_.conservation.T - totals[None, :])
    return np.concatenate(parts, axis=1)


def _jac_log(sys_: _System, kappa: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Jacobian of the square system with respect to ``log x``."""
    rates = _rates(kappa, sys_.reactant, x)  # (b, r)
    g = sys_.gamma[sys_.rows, :]  # (sigma, r)
    top = np.einsum("sr,br,rn->bsn", g, rates, sys_.reactant)
    if sys_.conservation.shape[0]:
        bottom = sys_.conservation[None, :, :] * x[:, None, :]
        return np.concatenate([top, bottom], axis=1)
    return top


def _newton_step(J: np.ndarray, F: np.ndarray) -> np.ndarray:
    # the system is square; singular batches fall back to least squares
    try:
        step = np.linalg.solve(J, F[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        step = np.einsum("bij,bj->bi", np.linalg.pinv(J), F)
    return np.nan_to_num(step, nan=0.0, posinf=0.0, neginf=0.0)


def _newton(sys_: _System, kappa: np.ndarray, starts: np.ndarray, totals: np.ndarray,
            iterations: int = 80) -> np.ndarray:
    y = np.log(starts)
    active = np.ones(len(y), dtype=bool)
    best = np.full(len(y), np.inf)
    stall = np.zeros(len(y), dtype=int)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(iterations):
            idx = np.flatnonzero(active)
            if not idx.size:
                break
            x = np.exp(y[idx])
            F = _residual_F(sys_, kappa, x, totals)
            # rows whose residual stops improving are abandoned
            res = np.max(np.abs(F), axis=1)
            better = res < 0.99 * best[idx]
            best[idx] = np.where(better, res, best[idx])
            stall[idx] = np.where(better, 0, stall[idx] + 1)
            active[idx[stall[idx] >= STALL_LIMIT]] = False
            J = _jac_log(sys_, kappa, x)
            step = _newton_step(J, F)
            norm = np.max(np.abs(step), axis=1, keepdims=True)
            step = np.where(norm > 2.0, step * (2.0 / np.maximum(norm, 1e-300)), step)
            y[idx] = np.clip(y[idx] - step, -LOG_BOUND, LOG_BOUND)
            # converged rows and rows pinned at the bound stop iterating
            done = (norm[:, 0] < 1e-13) | np.any(np.abs(y[idx]) >= LOG_BOUND, axis=1)
            active[idx[done]] = False
        # rows that ran to the bound chase a boundary or infinite state, not a positive one
        escaped = np.any(np.abs(y) >= LOG_BOUND, axis=1)
        y[escaped] = np.nan
        # polish in linear coordinates
        x = np.exp(y)
        keep = np.flatnonzero(~escaped)
        xs = x[keep]
        for _ in range(6):
            if not len(xs):
                break
            F = _residual_F(sys_, kappa, xs, totals)
            J = _jac_log(sys_, kappa, xs) / xs[:, None, :]
            step = _newton_step(J, F)
            cand = xs - step
            xs = np.where(cand > 0, cand, xs)
        x[keep] = xs
    return x


@lru_cache(maxsize=256)
def _mass_action(n: Network):
    return system_polynomials(n)


def exact_residual(n: Network, kappa: Mapping[str, Fraction], x: Sequence) -> float:
    """Max absolute right-hand side evaluated exactly at the rational image of ``x``."""
    sys_ = _mass_action(n)
    point = {v: Fraction(xi) for v, xi in zip(sys_.species_vars, x)}
    point.update({k: Fraction(v) for k, v in kappa.items()})
    return max((abs(float(p.evaluate(point))) for p in sys_.polys), default=0.0)


SINGULAR = "singular"
NONPOSITIVE = "nonpositive"


def refine_exact(n: Network, kappa: Mapping[str, Fraction], x: Sequence, x0: Sequence | None,
                 steps: int = 3) -> list[Fraction] | str:
    """Newton steps in exact arithmetic on the square system (independent rows plus class).

    Returns the refined rational state, ``SINGULAR`` when the exact Jacobian is
    singular (a degenerate point) or ``NONPOSITIVE`` when a step leaves the
    positive orthant, which exposes boundary states that look positive in floats.
    """
    sys_ = _System.build(n)
    ma = _mass_action(n)
    vars_ = ma.species_vars
    rows = [ma.polys[i] for i in sys_.rows]
    cons = sys_.conservation_exact if x0 is not None else []
    totals = [sum(Fraction(wi) * Fraction(v) for wi, v in zip(w, x0)) for w in cons]
    kap = {k: Fraction(v) for k, v in kappa.items()}
    jac = [[p.diff(v) for v in vars_] for p in rows]
    cur = [Fraction(v) for v in x]
    for k in range(steps):
        point = dict(zip(vars_, cur)) | kap
        f = [p.evaluate(point) for p in rows] + [sum(wi * v for wi, v in zip(w, cur)) - tot
                                                 for w, tot in zip(cons, totals)]
        if k and all(v == 0 for v in f):
            break
        j = [[d.evaluate(point) for d in r] for r in jac] + [list(map(Fraction, w)) for w in cons]
        step = linalg.solve(j, f) if len(j) == len(cur) else None
        if step is None:
            return SINGULAR
        cur = [a - b for a, b in zip(cur, step)]
        if any(v <= 0 for v in cur):
            return NONPOSITIVE
        if k and exact_residual(n, kappa, cur) <= RESIDUAL_GATE * 1e-3:
            break
    return cur


def same_state(a: Sequence, b: Sequence, distance: float = DEDUP_DISTANCE) -> bool:
    """Closer than ``distance`` relative to the larger norm (absolute below norm 1)."""
    fa, fb = [float(v) for v in a], [float(v) for v in b]
    scale = max(1.0, math.hypot(*fa), math.hypot(*fb))
    return math.dist(fa, fb) <= distance * scale


def dedup_states(states: Sequence[Sequence]) -> list:
    """Like :func:`dedup` but keeps the original (possibly exact) entries."""
    out: list = []
    for s in sorted(states, key=lambda s: [float(v) for v in s]):
        if not any(same_state(s, t) for t in out):
            out.append(list(s))
    return out


def dedup(states: Sequence[Sequence[float]], distance: float = DEDUP_DISTANCE) -> list[list[float]]:
    out: list[list[float]] = []
    for s in sorted((list(map(float, s)) for s in states)):
        if not any(same_state(s, t, distance) for t in out):
            out.append(s)
    return out


def solve_positive_states(n: Network, kappa: Mapping[str, Fraction], x0: Sequence[float] | None,
                          rng: np.random.Generator, starts: int = N_STARTS) -> list[list[float]]:
    """Positive steady states in the class of ``x0`` found by multi-start Newton."""
    sys_ = _System.build(n)
    k = np.array([float(kappa[lab]) for lab in n.labels])
    totals = (sys_.conservation @ np.array(x0, dtype=float)) if sys_.conservation.shape[0] else np.zeros(0)
    pts = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=(starts, len(n.species))))
    x = _newton(sys_, k, pts, totals)
    # a margin inside the Newton bound keeps near-boundary points out
    lo, hi = np.exp(-LOG_BOUND + 2), np.exp(LOG_BOUND - 2)
    ok = np.all(np.isfinite(x), axis=1) & np.all(x > lo, axis=1) & np.all(x < hi, axis=1)
    with np.errstate(over="ignore", invalid="ignore"):
        safe = np.where(ok[:, None], x, 1.0)
        size = np.maximum(1.0, _rates(k, sys_.reactant, safe) @ np.abs(sys_.gamma.T))
        res = np.max(np.abs(_residual_F(sys_, k, safe, totals))[:, :len(sys_.rows)] / size[:, sys_.rows], axis=1)
    cand = x[ok & (res <= 1e-8)]
    states = []
    for s in dedup(cand.tolist()):
        passes = exact_residual(n, kappa, s) <= RESIDUAL_GATE and _in_class(sys_, s, x0)
        refined = refine_exact(n, kappa, s, x0)
        if refined == NONPOSITIVE:
            continue
        if not passes:
            if refined == SINGULAR or exact_residual(n, kappa, refined) > RESIDUAL_GATE \
                    or not _in_class(sys_, refined, x0):
                continue
            s = refined
        states.append(s)
    return dedup_states(states)


def _in_class(sys_: _System, x: Sequence[float], x0: Sequence[float] | None) -> bool:
    if not sys_.conservation_exact or x0 is None:
        return True
    return all(class_gap(w, x, x0) <= RESIDUAL_GATE for w in sys_.conservation_exact)


def class_gap(w: Sequence, x: Sequence, ref: Sequence) -> float:
    """Exact conservation-law mismatch between ``x`` and ``ref``."""
    diff = sum(Fraction(wi) * (Fraction(a) - Fraction(b)) for wi, a, b in zip(w, x, ref))
    return float(abs(diff))


# classification


@dataclass(frozen=True)
class StateFlags:
    nondegenerate: bool
    exp_stable: bool
    gap: float | None = None

    def to_dict(self) -> dict:
        d = {"nondegenerate": self.nondegenerate, "exp_stable": self.exp_stable}
        if self.gap is not None:
            d["singular_value_gap"] = self.gap
        return d


def _jacobian_exact(n: Network, kappa: Mapping[str, Fraction], x: Sequence[Fraction]) -> list[list[Fraction]]:
    sys_ = _mass_action(n)
    point = {v: Fraction(xi) for v, xi in zip(sys_.species_vars, x)}
    point.update({k: Fraction(v) for k, v in kappa.items()})
    return [[p.diff(v).evaluate(point) for v in sys_.species_vars] for p in sys_.polys]


def classify_state(n: Network, kappa: Mapping[str, Fraction], x_star: Sequence) -> StateFlags:
    """Nondegeneracy on the stoichiometric subspace and exponential stability."""
    if exact_residual(n, kappa, x_star) > RESIDUAL_GATE:
        raise NetworkError("point fails the steady-state residual gate")
    sm = stoichiometric_matrix(n)
    basis = sm.subspace_basis()
    sigma = len(basis)
    jac = _jacobian_exact(n, kappa, x_star)
    exact = all(isinstance(v, (int, Fraction)) for v in x_star) and exact_residual(n, kappa, x_star) == 0
    jf = np.array([[float(v) for v in row] for row in jac])
    eig = np.linalg.eigvals(jf) if jf.size else np.zeros(0)
    order = np.argsort(np.abs(eig))
    near_zero = eig[order[: len(eig) - sigma]]
    rest = eig[order[len(eig) - sigma:]]
    stable_by_eig = bool(np.all(np.abs(near_zero) <= ZERO_EIG) and np.all(rest.real < 0))
    if sigma == 0:
        return StateFlags(True, True)
    cols = linalg.transpose(basis)
    restricted = [[sum(jac[i][k] * cols[k][j] for k in range(len(cols))) for j in range(sigma)]
                  for i in range(len(jac))]
    if exact:
        nondeg = linalg.rank(restricted) == sigma
        return StateFlags(nondeg, nondeg and stable_by_eig)
    sv = np.linalg.svd(np.array([[float(v) for v in row] for row in restricted]), compute_uv=False)
    scale = max(float(sv[0]), 1.0)
    smallest = float(sv[sigma - 1]) if len(sv) >= sigma else 0.0
    nondeg = smallest > ZERO_EIG * scale
    return StateFlags(nondeg, nondeg and stable_by_eig, gap=smallest / scale)


def classify_univariate_root(p: UPoly, interval: tuple[Fraction, Fraction], multiplicity: int) -> StateFlags:
    """Exact flags for a root of ``f``: simple roots are nondegenerate; stable iff ``f'(x*) < 0``."""
    if multiplicity > 1:
        return StateFlags(False, False)
    lo, hi = interval
    # f changes sign across a simple root, and f' has the sign of f just right of it;
    # bisection can land exactly on the root, so fall back to the other side
    right = upoly_eval(p, hi)
    if right:
        return StateFlags(True, right < 0)
    left = upoly_eval(p, lo)
    if left:
        return StateFlags(True, left > 0)
    return StateFlags(True, upoly_eval(upoly_deriv(p), (lo + hi) / 2) < 0)


# witnesses and search


@dataclass(frozen=True)
class Witness:
    network: Network
    kappa: tuple[tuple[str, Fraction], ...]
    states: tuple[tuple, ...]
    anchor: tuple | None
    flags: tuple[StateFlags, ...]
    exact: bool
    sample_index: int
    seed: int

    @property
    def count(self) -> int:
        return len(self.states)

    def kappa_dict(self) -> dict[str, Fraction]:
        return dict(self.kappa)

    def to_dict(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else repr(float(v))
        return {
            "network": self.network.to_dsl(),
            "kappa": {k: str(v) for k, v in self.kappa},
            "states": [[enc(v) for v in s] for s in self.states],
            "anchor": None if self.anchor is None else [enc(v) for v in self.anchor],
            "flags": [f.to_dict() for f in self.flags],
            "exact": self.exact,
            "evidence": "exact Sturm count" if self.exact else "numeric evidence (multi-start Newton)",
            "count": self.count,
            "seed": self.seed,
            "sample_index": self.sample_index,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class MssVerdict:
    kind: str  # MultistationaryWitness | NoWitnessFound | ProvedMono
    witness: Witness | None = None
    budget: int | None = None
    reason: str = ""
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d: dict = {"verdict": self.kind}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.budget is not None:
            d["budget"] = self.budget
        if self.reason:
            d["reason"] = self.reason
        if self.details:
            d["details"] = self.details
        return d


def _parse_value(v) -> Fraction:
    if isinstance(v, str) and "/" not in v and ("e" in v.lower() or "." in v):
        return Fraction(float(v))
    return Fraction(v)


def verify_witness(data: Mapping) -> tuple[bool, list[str]]:
    """Replay a witness: residuals, class membership, distinctness and count."""
    problems: list[str] = []
    n = parse_network(data["network"])
    kappa = {k: Fraction(v) for k, v in data["kappa"].items()}
    if set(kappa) != set(n.labels) or any(v <= 0 for v in kappa.values()):
        problems.append("rate constants must be positive and cover every reaction")
        return False, problems
    states = [[_parse_value(v) for v in s] for s in data["states"]]
    anchor = None if data.get("anchor") is None else [_parse_value(v) for v in data["anchor"]]
    for s in states:
        if any(v <= 0 for v in s):
            problems.append(f"state {s} is not positive")
        res = exact_residual(n, kappa, s)
        if res > RESIDUAL_GATE:
            problems.append(f"residual {res:.3e} exceeds {RESIDUAL_GATE}")
    cons = stoichiometric_matrix(n).conservation_basis()
    ref = anchor if anchor is not None else (states[0] if states else None)
    for s in states:
        for w in cons:
            if class_gap(w, s, ref) > RESIDUAL_GATE:
                problems.append("states are not in one compatibility class")
    for a_idx in range(len(states)):
        for b_idx in range(a_idx + 1, len(states)):
            if same_state(states[a_idx], states[b_idx]):
                problems.append("states are not distinct")
    if len(states) < 2:
        problems.append("fewer than two states")
    if "count" in data and data["count"] != len(states):
        problems.append("recorded count does not match the states")
    return not problems, problems


def _sample_kappa(n: Network, rng: random.Random) -> dict[str, Fraction]:
    out = {}
    for lab in n.labels:
        v = 10 ** rng.uniform(-3, 3)
        out[lab] = Fraction(f"{v:.6g}")
    return out


def search_multistationarity(n: Network, budget: int = 2000, seed: int = 0, target: int = 2) -> MssVerdict:
    """Sample rate constants until a class with at least ``target`` positive states appears."""
    if len(n.species) > 3:
        raise NetworkError("search is limited to networks with at most three species")
    target = max(target, 2)
    rng = random.Random(seed)
    nprng = np.random.default_rng(seed)
    best = 0
    for idx in range(budget):
        kappa = _sample_kappa(n, rng)
        if len(n.species) == 1:
            poly = univariate_polynomial(n, kappa)
            if not poly:
                continue
            # cheap Sturm count first; isolate only promising samples
            stripped = poly[next(k for k, c in enumerate(poly) if c):]
            quick = count_roots_in(stripped, Fraction(0), None) if len(stripped) > 1 else 0
            best = max(best, quick)
            if quick < target:
                continue
            rc = count_positive_roots(poly)
            if rc.continuum:
                continue
            best = max(best, rc.distinct)
            if rc.distinct >= target:
                states = tuple(((lo + hi) / 2,) for lo, hi in rc.intervals)
                flags = tuple(classify_univariate_root(poly, iv, k) for iv, k in zip(rc.intervals, rc.multiplicities))
                w = Witness(n, tuple(kappa.items()), states, None, flags, True, idx, seed)
                ok, problems = verify_witness(w.to_dict())
                if not ok:
                    raise AssertionError(f"witness failed verification: {problems}")
                return MssVerdict("MultistationaryWitness", w, budget)
            continue
        sys_ = _System.build(n)
        x0 = None
        if sys_.conservation.shape[0]:
            x0 = [float(Fraction(f"{10 ** rng.uniform(-1, 1):.6g}")) for _ in n.species]
        states = solve_positive_states(n, kappa, x0, nprng)
        best = max(best, len(states))
        if len(states) >= target:
            flags = tuple(classify_state(n, kappa, s) for s in states)
            w = Witness(n, tuple(kappa.items()), tuple(tuple(s) for s in states),
                        None if x0 is None else tuple(x0), flags, False, idx, seed)
            ok, problems = verify_witness(w.to_dict())
            if not ok:
                raise AssertionError(f"witness failed verification: {problems}")
            return MssVerdict("MultistationaryWitness", w, budget)
    return MssVerdict("NoWitnessFound", None, budget, details={"max_states_seen": best, "seed": seed})


def monomolecular_mono_check(n: Network) -> MssVerdict:
    """Structural verdict when every reactant complex is monomolecular or zero."""
    bad = [r for r in n.reactions if not (r.reactant.is_zero() or r.reactant.is_monomolecular())]
    if bad:
        raise HypothesisError(f"reactant {bad[0].reactant} is neither monomolecular nor zero")
    return MssVerdict(
        "ProvedMono",
        reason="every reactant complex is monomolecular or zero, so the steady-state equations are linear: "
               "each compatibility class holds 0, 1 or infinitely many steady states, "
               "and never two nondegenerate ones",
    )


def linear_steady_states(n: Network, kappa: Mapping[str, Fraction], x0: Sequence[Fraction]) -> tuple[str, list[Fraction] | None]:
    """Solve the linear steady-state system in the class of ``x0`` exactly.

    Returns ``("none" | "unique" | "infinite", solution)``; positivity is not imposed.
    """
    monomolecular_mono_check(n)
    sys_ = _mass_action(n)
    vars_ = sys_.species_vars
    point = {k: Fraction(v) for k, v in kappa.items()}
    rows, rhs = [], []
    for p in sys_.polys:
        q = p.subs(point)
        rows.append([q.diff(v).constant_value() for v in vars_])
        rhs.append(-q.subs({v: 0 for v in vars_}).constant_value())
    for w in stoichiometric_matrix(n).conservation_basis():
        rows.append(list(w))
        rhs.append(sum(wi * Fraction(xi) for wi, xi in zip(w, x0)))
    sol = linalg.solve(rows, rhs)
    if sol is None:
        return "none", None
    if linalg.rank(rows) < len(vars_):
        return "infinite", sol
    return "unique", sol
