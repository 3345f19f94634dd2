"""Iterated residues along line forests, forest Fourier transforms and the convolution product."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

from ..core.cache import cached
from ..core.config import settings
from ..core.errors import ArityMismatchError, TruncationInstabilityError
from .exact_algebra import (
    DiagRat,
    MPoly,
    VarId,
    VarKind,
    format_scalar_terms,
    mono_str,
)
from .graph_core import LineForest

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]


def residue(f: DiagRat, i: int, j: int) -> DiagRat:
    """Res_{z_j} dz_i f: the variable z_i is eliminated"""
    f._check_pair(i, j)
    labels = f.labels - {i}
    g, order = f.strip_pole(i, j)
    if f.is_zero() or order <= 0:
        return DiagRat.zero(labels, f.kind)
    ell = order - 1
    for _ in range(ell):
        g = g.diff(i)
    return g.substitute_equal(i, j) / factorial(ell)


def residue_moments(f: DiagRat, i: int, j: int) -> List[DiagRat]:
    """[Res_{z_j} dz_i f*(z_i - z_j)^m for m = 0 .. order-1], sharing the derivatives of the regular part"""
    f._check_pair(i, j)
    g, order = f.strip_pole(i, j)
    if f.is_zero() or order <= 0:
        return []
    derivatives = [g]
    for _ in range(order - 1):
        derivatives.append(derivatives[-1].diff(i))
    values = [d.substitute_equal(i, j) / factorial(k) for k, d in enumerate(derivatives)]
    return [values[order - 1 - m] for m in range(order)]


def _check_forest(f: DiagRat, forest: LineForest):
    if f.kind != VarKind.Z or f.labels != frozenset(range(1, forest.n + 1)):
        raise ArityMismatchError(f"forest on {forest.n} vertices does not match labels {sorted(f.labels)}")


def _w_labels(forest: LineForest) -> range:
    return range(1, forest.p + 1)


def _to_w(h: DiagRat, forest: LineForest) -> DiagRat:
    return h.relabel({line[-1]: ell for ell, line in enumerate(forest.lines, start=1)}, VarKind.W)


def line_residue(f: DiagRat, line: Sequence[int]) -> DiagRat:
    """Res along i1 -> i2 -> ... -> ik; only z_{ik} of the line survives"""
    h = f
    for a, b in zip(line, line[1:]):
        h = residue(h, a, b)
        if h.is_zero():
            break
    return h


@cached("gamma_residue")
def gamma_residue(f: DiagRat, forest: LineForest) -> DiagRat:
    """Residue along every line of the forest, last line first; line l lands on w_l"""
    _check_forest(f, forest)
    h = f
    for line in reversed(forest.lines):
        h = line_residue(h, line)
        if h.is_zero():
            return DiagRat.zero(_w_labels(forest), VarKind.W)
    return _to_w(h, forest)


class PolyOverDiagRat:
    """Polynomial in lambda_1..lambda_n with DiagRat coefficients in w_1..w_p (plain exponents)"""

    __slots__ = ("n", "p", "terms")

    def __init__(self, n: int, p: int, terms: Mapping[Exponents, DiagRat] = None):
        self.n = n
        self.p = p
        clean: Dict[Exponents, DiagRat] = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != n:
                raise ArityMismatchError(f"exponent vector {exps} is not of length {n}")
            if not coeff.is_zero():
                clean[tuple(exps)] = coeff
        self.terms = clean

    def _zero_coeff(self) -> DiagRat:
        return DiagRat.zero(range(1, self.p + 1), VarKind.W)

    def coefficient(self, exps: Exponents) -> DiagRat:
        return self.terms.get(tuple(exps), self._zero_coeff())

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "PolyOverDiagRat"):
        if (self.n, self.p) != (other.n, other.p):
            raise ArityMismatchError("transforms over different arities")

    def __add__(self, other: "PolyOverDiagRat") -> "PolyOverDiagRat":
        self._check(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms[exps] + coeff if exps in terms else coeff
        return PolyOverDiagRat(self.n, self.p, terms)

    def __neg__(self) -> "PolyOverDiagRat":
        return PolyOverDiagRat(self.n, self.p, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "PolyOverDiagRat") -> "PolyOverDiagRat":
        return self + (-other)

    def map_coefficients(self, fn) -> "PolyOverDiagRat":
        return PolyOverDiagRat(self.n, self.p, {e: fn(c) for e, c in self.terms.items()})

    def mul_lambda(self, i: int) -> "PolyOverDiagRat":
        return PolyOverDiagRat(self.n, self.p, {_bump(e, i - 1, 1): c for e, c in self.terms.items()})

    def diff_lambda(self, i: int) -> "PolyOverDiagRat":
        terms = {}
        for exps, coeff in self.terms.items():
            if exps[i - 1]:
                terms[_bump(exps, i - 1, -1)] = coeff.scale(exps[i - 1])
        return PolyOverDiagRat(self.n, self.p, terms)

    def mul_w(self, ell: int) -> "PolyOverDiagRat":
        w = DiagRat.variable(ell, range(1, self.p + 1), VarKind.W)
        return self.map_coefficients(lambda c: c * w)

    def diff_w(self, ell: int) -> "PolyOverDiagRat":
        return self.map_coefficients(lambda c: c.diff(ell))

    def is_constant_in_w(self) -> bool:
        return all(c.is_constant() for c in self.terms.values())

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, PolyOverDiagRat):
            return NotImplemented
        return (self.n, self.p, self.terms) == (other.n, other.p, other.terms)

    def __str__(self) -> str:
        items = []
        for exps, coeff in sorted(self.terms.items(), key=lambda item: (-sum(item[0]), item[0])):
            mono = mono_str(tuple((VarId(VarKind.LAMBDA, k + 1), e) for k, e in enumerate(exps) if e))
            if coeff.is_constant():
                items.append((mono, coeff.constant_value()))
            else:
                items.append((f"[{coeff}]" + (f"*{mono}" if mono else ""), Fraction(1)))
        return format_scalar_terms(items)

    def __repr__(self) -> str:
        return f"PolyOverDiagRat({self})"


def _bump(exps: Exponents, k: int, delta: int) -> Exponents:
    return exps[:k] + (exps[k] + delta,) + exps[k + 1:]


_POWER_CACHE: Dict[Tuple[Tuple[int, ...], int, int], List[Tuple[Exponents, Fraction]]] = {}


def _sum_power(vertices: Tuple[int, ...], m: int, n: int) -> List[Tuple[Exponents, Fraction]]:
    """(lambda_{v1} + ... + lambda_{vk})^m / m! expanded over length-n exponent vectors"""
    key = (vertices, m, n)
    if key not in _POWER_CACHE:
        total = MPoly.zero()
        for v in vertices:
            total = total + MPoly.var(VarId(VarKind.LAMBDA, v))
        expansion = []
        for mono, coeff in (total ** m).terms.items():
            exps = [0] * n
            for var, e in mono:
                exps[var.index - 1] = e
            expansion.append((tuple(exps), coeff / factorial(m)))
        _POWER_CACHE[key] = expansion
    return _POWER_CACHE[key]


@cached("fourier")
def fourier(f: DiagRat, forest: LineForest) -> PolyOverDiagRat:
    """Forest residue of f times the forest exponential exp(-sum z_{i_a i_k} lambda_{i_a})"""
    _check_forest(f, forest)
    n = forest.n
    state: Dict[Exponents, DiagRat] = {(0,) * n: f}
    for line in reversed(forest.lines):
        for step, (a, b) in enumerate(zip(line, line[1:])):
            # exp(-(z_a - z_b) * mu) with mu the lambda-sum of the line up to a
            prefix = line[: step + 1]
            new_state: Dict[Exponents, DiagRat] = {}
            for exps, h in state.items():
                moments = residue_moments(h, a, b)
                if settings.CHECK_TRUNCATION and moments:
                    _check_exponential_truncation(h, a, b, moments)
                for m, value in enumerate(moments):
                    if value.is_zero():
                        continue
                    sign = -1 if m % 2 else 1
                    for shift, coeff in _sum_power(prefix, m, n):
                        key = tuple(x + y for x, y in zip(exps, shift))
                        term = value.scale(sign * coeff)
                        new_state[key] = new_state[key] + term if key in new_state else term
            state = {e: c for e, c in new_state.items() if not c.is_zero()}
            if not state:
                return PolyOverDiagRat(n, forest.p)
    return PolyOverDiagRat(n, forest.p, {e: _to_w(c, forest) for e, c in state.items()})


def _check_exponential_truncation(h: DiagRat, a: int, b: int, moments: Sequence[DiagRat]):
    """Each moment again through ``residue``, one order past the truncation, which must vanish"""
    order = len(moments)
    for m in range(order + 1):
        direct = residue(h * DiagRat.diagonal(a, b, m, h.labels, h.kind), a, b)
        stable = direct.is_zero() if m == order else direct == moments[m]
        if not stable:
            logger.error(f"Exponential truncation at order {order} unstable for {h} on ({a},{b}): "
                         f"moment {m} is {direct}")
            raise TruncationInstabilityError(f"order {order} truncation of the forest exponential is not stable")


@dataclass(frozen=True)
class LaurentExpansion:
    """Truncated expansion of a DiagRat in the region |w_1| > ... > |w_p|.

    ``terms`` holds every monomial whose exponents are all at most ``caps``.
    """

    p: int
    caps: Tuple[int, ...]
    bounds: Tuple[int, ...]
    terms: Dict[Exponents, Fraction]

    def coefficient(self, exps: Exponents) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def __str__(self) -> str:
        items = sorted(self.terms.items(), key=lambda item: tuple(-e for e in item[0]))
        return format_scalar_terms(
            ("*".join(f"w{k + 1}^{e}" if e != 1 else f"w{k + 1}" for k, e in enumerate(exps) if e), c)
            for exps, c in items
        )


def _series_bounds(F: DiagRat, caps: Sequence[int]) -> Tuple[int, ...]:
    p = len(caps)
    bounds = [0] * p
    for v in range(p, 0, -1):
        outgoing = sum(k + bounds[j - 1] for (i, j), k in F.poles.items() if i == v)
        bounds[v - 1] = max(0, caps[v - 1] + outgoing)
    return tuple(bounds)


def _expand(F: DiagRat, caps: Sequence[int], bounds: Sequence[int]) -> Dict[Exponents, Fraction]:
    p = len(caps)
    factors = sorted(F.poles.items())
    ranges = [range(bounds[j - 1] + 1) for (i, j), _ in factors]
    terms: Dict[Exponents, Fraction] = {}
    for mono, coeff in F.numerator.terms.items():
        base = [0] * p
        for var, e in mono:
            base[var.index - 1] += e
        for ms in itertools.product(*ranges):
            exps = list(base)
            value = coeff
            for ((i, j), k), m in zip(factors, ms):
                exps[i - 1] -= k + m
                exps[j - 1] += m
                value *= comb(k - 1 + m, m)
            if all(e <= cap for e, cap in zip(exps, caps)):
                key = tuple(exps)
                total = terms.get(key, 0) + value
                if total:
                    terms[key] = total
                else:
                    terms.pop(key, None)
    return terms


@cached("iota_expand")
def iota_expand(F: DiagRat, degree_caps: Tuple[int, ...]) -> LaurentExpansion:
    """Geometric-series expansion, exact on every monomial with exponents <= degree_caps"""
    caps = tuple(degree_caps)
    p = len(caps)
    if F.labels != frozenset(range(1, p + 1)):
        raise ArityMismatchError(f"{p} degree caps for labels {sorted(F.labels)}")
    bounds = _series_bounds(F, caps)
    terms = _expand(F, caps, bounds)
    if settings.CHECK_TRUNCATION:
        doubled = tuple(2 * b + 1 for b in bounds)
        if _expand(F, caps, doubled) != terms:
            logger.error(f"Expansion of {F} changed when truncation grew from {bounds} to {doubled}")
            raise TruncationInstabilityError(f"expansion of {F} is not stable at bounds {bounds}")
    return LaurentExpansion(p, caps, bounds, terms)


LambdaPoly = Mapping[Exponents, Any]


def poly_to_exponent_map(poly: MPoly, p: int, kind: VarKind = VarKind.BIGLAMBDA) -> Dict[Exponents, Fraction]:
    terms: Dict[Exponents, Fraction] = {}
    for mono, coeff in poly.terms.items():
        exps = [0] * p
        for var, e in mono:
            if var.kind != kind or not 1 <= var.index <= p:
                raise ArityMismatchError(f"variable {var} outside {VarKind(kind).name.lower()}_1..{p}")
            exps[var.index - 1] = e
        terms[tuple(exps)] = coeff
    return terms


def exponent_map_to_poly(terms: Mapping[Exponents, Fraction], kind: VarKind = VarKind.BIGLAMBDA) -> MPoly:
    return MPoly({tuple((VarId(kind, k + 1), e) for k, e in enumerate(exps) if e): c for exps, c in terms.items()})


def convolve(F: DiagRat, Q: Union[MPoly, LambdaPoly]) -> Union[MPoly, Dict[Exponents, Any]]:
    """F * Q: substitute w_l = -d/dLambda_l in the expansion of F and apply it to Q.

    Q is an MPoly in Lambda_1..Lambda_p or a map {exponents: coefficient} whose coefficients
    only need addition and scalar multiplication; the coefficients are never acted on.
    """
    p = len(F.labels)
    if isinstance(Q, MPoly):
        result = convolve(F, poly_to_exponent_map(Q, p))
        return exponent_map_to_poly(result)
    if not Q:
        return {}
    for b in Q:
        if len(b) != p:
            raise ArityMismatchError(f"exponent vector {b} does not match {p} w-variables")
    caps = tuple(max(b[ell] for b in Q) for ell in range(p))
    expansion = iota_expand(F, caps)
    result: Dict[Exponents, Any] = {}
    for b, q in Q.items():
        for a, c in expansion.terms.items():
            if any(x > y for x, y in zip(a, b)):
                continue
            target = tuple(y - x for x, y in zip(a, b))
            factor = c if sum(a) % 2 == 0 else -c
            for x, y in zip(b, target):
                factor = factor * factorial(x) / factorial(y)
            term = q * Fraction(factor)
            result[target] = result[target] + term if target in result else term
    return {k: v for k, v in result.items() if v}
