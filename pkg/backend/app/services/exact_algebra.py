"""Exact coefficient arithmetic, sparse polynomials and diagonal-localized rational functions.

``DiagRat`` is the algebra of polynomials in z_1..z_n with the differences z_i - z_j
inverted. Values are kept as a single numerator over a product of diagonal powers and are
always normalized: no listed factor (z_i - z_j) divides the numerator.
"""

import logging
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, Iterator, Mapping, NamedTuple, Optional, Tuple, Union

from ..core.errors import ArityMismatchError, IndexOutOfRangeError, PoleOnDiagonalError, UndefinedOrderError

logger = logging.getLogger(__name__)

Scalar = Fraction


class VarKind(IntEnum):
    Z = 0
    LAMBDA = 1
    W = 2
    BIGLAMBDA = 3
    X = 4
    D = 5


VAR_PREFIX = {
    VarKind.Z: "z",
    VarKind.LAMBDA: "l",
    VarKind.W: "w",
    VarKind.BIGLAMBDA: "L",
    VarKind.X: "x",
    VarKind.D: "d",
}


class VarId(NamedTuple):
    kind: VarKind
    index: int = 0

    def __str__(self) -> str:
        if self.kind == VarKind.D:
            return "d"
        return f"{VAR_PREFIX[self.kind]}{self.index}"


Monomial = Tuple[Tuple[VarId, int], ...]
ONE_MONOMIAL: Monomial = ()


def as_scalar(value: Any) -> Fraction:
    """Coerce ints, strings and fractions to an exact Scalar"""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for var, exp in b:
        merged[var] = merged.get(var, 0) + exp
    return tuple(sorted(merged.items()))


def mono_degree(mono: Monomial) -> int:
    return sum(exp for _, exp in mono)


def mono_str(mono: Monomial) -> str:
    return "*".join(str(var) if exp == 1 else f"{var}^{exp}" for var, exp in mono)


def format_scalar_terms(items: Iterable[Tuple[str, Fraction]]) -> str:
    """Join (body, coefficient) pairs into a signed sum; empty bodies print the bare coefficient"""
    parts = []
    for body, coeff in items:
        sign = "-" if coeff < 0 else "+"
        size = abs(coeff)
        if not body:
            text = str(size)
        elif size == 1:
            text = body
        else:
            text = f"{size}*{body}"
        if not parts:
            parts.append(f"-{text}" if sign == "-" else text)
        else:
            parts.append(f" {sign} {text}")
    return "".join(parts) if parts else "0"


class MPoly:
    """Sparse multivariate polynomial with Scalar coefficients"""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Any]] = None):
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = as_scalar(coeff)
                if coeff:
                    mono = tuple(sorted((v, e) for v, e in mono if e))
                    total = clean.get(mono, 0) + coeff
                    if total:
                        clean[mono] = total
                    else:
                        clean.pop(mono, None)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "MPoly":
        poly = cls.__new__(cls)
        poly.terms = terms
        poly._hash = None
        return poly

    @classmethod
    def const(cls, value: Any) -> "MPoly":
        value = as_scalar(value)
        return cls._raw({ONE_MONOMIAL: value} if value else {})

    @classmethod
    def var(cls, var: VarId, exp: int = 1) -> "MPoly":
        return cls._raw({((var, exp),) if exp else ONE_MONOMIAL: Fraction(1)})

    @classmethod
    def zero(cls) -> "MPoly":
        return cls._raw({})

    @classmethod
    def one(cls) -> "MPoly":
        return cls.const(1)

    # Queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not mono for mono in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(ONE_MONOMIAL, Fraction(0))

    def variables(self) -> FrozenSet[VarId]:
        return frozenset(v for mono in self.terms for v, _ in mono)

    def degree(self, var: Optional[VarId] = None) -> int:
        """Total degree, or the degree in ``var``; -1 for the zero polynomial"""
        if not self.terms:
            return -1
        if var is None:
            return max(mono_degree(mono) for mono in self.terms)
        return max(dict(mono).get(var, 0) for mono in self.terms)

    def coefficients_in(self, var: VarId) -> Dict[int, "MPoly"]:
        """Split into {exponent of var: coefficient polynomial}"""
        buckets: Dict[int, Dict[Monomial, Fraction]] = {}
        for mono, coeff in self.terms.items():
            exp = 0
            rest = []
            for v, e in mono:
                if v == var:
                    exp = e
                else:
                    rest.append((v, e))
            buckets.setdefault(exp, {})[tuple(rest)] = coeff
        return {exp: MPoly._raw(terms) for exp, terms in buckets.items()}

    # Arithmetic

    def _coerce(self, other: Any) -> Optional["MPoly"]:
        if isinstance(other, MPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.const(other)
        return None

    def __add__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        result = dict(self.terms)
        for mono, coeff in other.terms.items():
            total = result.get(mono, 0) + coeff
            if total:
                result[mono] = total
            else:
                result.pop(mono, None)
        return MPoly._raw(result)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly._raw({mono: -coeff for mono, coeff in self.terms.items()})

    def __sub__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, value: Any) -> "MPoly":
        value = as_scalar(value)
        if not value:
            return MPoly.zero()
        return MPoly._raw({mono: coeff * value for mono, coeff in self.terms.items()})

    def __mul__(self, other: Any) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MPoly):
            return NotImplemented
        result: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = mono_mul(m1, m2)
                total = result.get(mono, 0) + c1 * c2
                if total:
                    result[mono] = total
                else:
                    result.pop(mono, None)
        return MPoly._raw(result)

    __rmul__ = __mul__

    def __pow__(self, exp: int) -> "MPoly":
        if exp < 0:
            raise ValueError("MPoly powers must be non-negative")
        result = MPoly.one()
        base = self
        while exp:
            if exp & 1:
                result = result * base
            exp >>= 1
            if exp:
                base = base * base
        return result

    def diff(self, var: VarId, times: int = 1) -> "MPoly":
        result = self
        for _ in range(times):
            terms: Dict[Monomial, Fraction] = {}
            for mono, coeff in result.terms.items():
                exps = dict(mono)
                exp = exps.get(var, 0)
                if not exp:
                    continue
                if exp == 1:
                    del exps[var]
                else:
                    exps[var] = exp - 1
                key = tuple(sorted(exps.items()))
                terms[key] = terms.get(key, 0) + coeff * exp
            result = MPoly(terms)
        return result

    def rename(self, mapping: Mapping[VarId, VarId]) -> "MPoly":
        """Simultaneous variable renaming; colliding variables multiply"""
        terms: Dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            exps: Dict[VarId, int] = {}
            for v, e in mono:
                target = mapping.get(v, v)
                exps[target] = exps.get(target, 0) + e
            key = tuple(sorted(exps.items()))
            terms[key] = terms.get(key, 0) + coeff
        return MPoly(terms)

    def substitute(self, values: Mapping[VarId, "MPoly"]) -> "MPoly":
        """Replace each variable in ``values`` by a polynomial"""
        result = MPoly.zero()
        powers: Dict[Tuple[VarId, int], MPoly] = {}
        for mono, coeff in self.terms.items():
            kept = []
            term = MPoly.const(coeff)
            for v, e in mono:
                if v in values:
                    key = (v, e)
                    if key not in powers:
                        powers[key] = values[v] ** e
                    term = term * powers[key]
                else:
                    kept.append((v, e))
            if kept:
                term = term * MPoly._raw({tuple(kept): Fraction(1)})
            result = result + term
        return result

    # Comparison and display

    def __eq__(self, other: Any) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def sorted_terms(self) -> Iterator[Tuple[Monomial, Fraction]]:
        """Graded order: higher total degree first, then lexicographic on (kind, index)"""
        return iter(sorted(self.terms.items(), key=lambda item: (-mono_degree(item[0]), item[0])))

    def __str__(self) -> str:
        return format_scalar_terms((mono_str(mono), coeff) for mono, coeff in self.sorted_terms())

    def __repr__(self) -> str:
        return f"MPoly({self})"


@lru_cache(maxsize=4096)
def diagonal_power(kind: VarKind, i: int, j: int, exp: int) -> MPoly:
    """(v_i - v_j)^exp as a polynomial"""
    return (MPoly.var(VarId(kind, i)) - MPoly.var(VarId(kind, j))) ** exp


def divide_by_diagonal(poly: MPoly, vi: VarId, vj: VarId) -> Optional[MPoly]:
    """Exact quotient poly / (vi - vj), or None when the division leaves a remainder"""
    if poly.is_zero():
        return poly
    coeffs = poly.coefficients_in(vi)
    top = max(coeffs)
    if top == 0:
        return None
    shift = MPoly.var(vj)
    quotient: Dict[int, MPoly] = {}
    carry = coeffs[top]
    for exp in range(top, 0, -1):
        quotient[exp - 1] = carry
        carry = coeffs.get(exp - 1, MPoly.zero()) + shift * carry
    if not carry.is_zero():
        return None
    result = MPoly.zero()
    for exp, coeff in quotient.items():
        result = result + coeff * MPoly.var(vi, exp)
    return result


PoleKey = Tuple[int, int]
Labels = Union[int, Iterable[int]]


def _as_labels(labels: Labels) -> FrozenSet[int]:
    if isinstance(labels, int):
        return frozenset(range(1, labels + 1))
    return frozenset(labels)


class DiagRat:
    """Normalized fraction numerator / prod (v_i - v_j)^d over the live labels.

    ``kind`` selects the variable family (z for inputs, w after residues).
    """

    __slots__ = ("numerator", "poles", "labels", "kind", "_hash")

    def __init__(
        self,
        numerator: Union[MPoly, int, Fraction],
        poles: Optional[Mapping[PoleKey, int]] = None,
        labels: Labels = 0,
        kind: VarKind = VarKind.Z,
    ):
        if not isinstance(numerator, MPoly):
            numerator = MPoly.const(numerator)
        label_set = _as_labels(labels)
        for var in numerator.variables():
            if var.kind != kind or var.index not in label_set:
                raise IndexOutOfRangeError(f"variable {var} is not a live label")
        clean: Dict[PoleKey, int] = {}
        sign = 1
        for (i, j), d in (poles or {}).items():
            if i == j:
                raise PoleOnDiagonalError(f"tadpole factor ({i},{i})")
            if i not in label_set or j not in label_set:
                raise IndexOutOfRangeError(f"pole ({i},{j}) outside live labels")
            if d < 0:
                raise ValueError("pole orders must be non-negative")
            if i > j:
                i, j = j, i
                if d % 2:
                    sign = -sign
            if d:
                clean[(i, j)] = clean.get((i, j), 0) + d
        self._assign(*_normalize(numerator * sign, clean, kind), label_set, kind)

    def _assign(self, numerator: MPoly, poles: Dict[PoleKey, int], labels: FrozenSet[int], kind: VarKind):
        self.numerator = numerator
        self.poles = poles
        self.labels = labels
        self.kind = kind
        self._hash = None

    @classmethod
    def _build(cls, numerator: MPoly, poles: Dict[PoleKey, int], labels: FrozenSet[int], kind: VarKind,
               normalized: bool = False) -> "DiagRat":
        obj = cls.__new__(cls)
        if normalized:
            poles = {k: d for k, d in poles.items() if d} if not numerator.is_zero() else {}
        else:
            numerator, poles = _normalize(numerator, poles, kind)
        obj._assign(numerator, poles, labels, kind)
        return obj

    # Constructors

    @classmethod
    def zero(cls, labels: Labels, kind: VarKind = VarKind.Z) -> "DiagRat":
        return cls._build(MPoly.zero(), {}, _as_labels(labels), kind, normalized=True)

    @classmethod
    def constant(cls, value: Any, labels: Labels, kind: VarKind = VarKind.Z) -> "DiagRat":
        return cls._build(MPoly.const(value), {}, _as_labels(labels), kind, normalized=True)

    @classmethod
    def from_poly(cls, poly: MPoly, labels: Labels, kind: VarKind = VarKind.Z) -> "DiagRat":
        return cls(poly, {}, labels, kind)

    @classmethod
    def variable(cls, i: int, labels: Labels, kind: VarKind = VarKind.Z) -> "DiagRat":
        return cls(MPoly.var(VarId(kind, i)), {}, labels, kind)

    @classmethod
    def diagonal(cls, i: int, j: int, exp: int, labels: Labels, kind: VarKind = VarKind.Z) -> "DiagRat":
        """(v_i - v_j)^exp for any integer exponent"""
        if i == j:
            raise PoleOnDiagonalError(f"z{i} - z{i} is zero")
        if exp >= 0:
            return cls(diagonal_power(kind, i, j, exp), {}, labels, kind)
        return cls(MPoly.one(), {(i, j): -exp}, labels, kind)

    # Queries

    @property
    def n(self) -> int:
        """Arity: the number of live labels"""
        return len(self.labels)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def is_polynomial(self) -> bool:
        return not self.poles

    def is_constant(self) -> bool:
        return not self.poles and self.numerator.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self.numerator.constant_term()

    def divisor_count(self) -> int:
        return len(self.poles)

    def var(self, i: int) -> VarId:
        return VarId(self.kind, i)

    def _check_label(self, i: int):
        if i not in self.labels:
            raise IndexOutOfRangeError(f"{VAR_PREFIX[self.kind]}{i} is not a live label of {self}")

    def _check_pair(self, i: int, j: int):
        self._check_label(i)
        self._check_label(j)
        if i == j:
            raise IndexOutOfRangeError(f"diagonal ({i},{j}) needs two distinct labels")

    def _check_compatible(self, other: "DiagRat"):
        if self.labels != other.labels or self.kind != other.kind:
            raise ArityMismatchError(
                f"operands live on different variable sets: {sorted(self.labels)} vs {sorted(other.labels)}"
            )

    def pole_order(self, i: int, j: int) -> int:
        """Order of the pole along v_i = v_j; negative values count zeros"""
        self._check_pair(i, j)
        if self.is_zero():
            raise UndefinedOrderError("pole order of the zero function is undefined")
        key = (min(i, j), max(i, j))
        if key in self.poles:
            return self.poles[key]
        mult = 0
        num = self.numerator
        vi, vj = self.var(key[0]), self.var(key[1])
        while True:
            num = divide_by_diagonal(num, vi, vj)
            if num is None:
                return -mult
            mult += 1

    def is_translation_invariant(self) -> bool:
        total = DiagRat.zero(self.labels, self.kind)
        for i in sorted(self.labels):
            total = total + self.diff(i)
        return total.is_zero()

    # Ring operations

    def _coerce(self, other: Any) -> Optional["DiagRat"]:
        if isinstance(other, DiagRat):
            self._check_compatible(other)
            return other
        if isinstance(other, (int, Fraction)):
            return DiagRat.constant(other, self.labels, self.kind)
        if isinstance(other, MPoly):
            return DiagRat(other, {}, self.labels, self.kind)
        return None

    def __add__(self, other: Any) -> "DiagRat":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        keys = set(self.poles) | set(other.poles)
        common = {k: max(self.poles.get(k, 0), other.poles.get(k, 0)) for k in keys}
        num = self._lift(common) + other._lift(common)
        return DiagRat._build(num, common, self.labels, self.kind)

    __radd__ = __add__

    def _lift(self, common: Mapping[PoleKey, int]) -> MPoly:
        num = self.numerator
        for (i, j), d in common.items():
            extra = d - self.poles.get((i, j), 0)
            if extra:
                num = num * diagonal_power(self.kind, i, j, extra)
        return num

    def __neg__(self) -> "DiagRat":
        return DiagRat._build(-self.numerator, dict(self.poles), self.labels, self.kind, normalized=True)

    def __sub__(self, other: Any) -> "DiagRat":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> "DiagRat":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, value: Any) -> "DiagRat":
        value = as_scalar(value)
        return DiagRat._build(self.numerator.scale(value), dict(self.poles), self.labels, self.kind, normalized=True)

    def __mul__(self, other: Any) -> "DiagRat":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        poles = dict(self.poles)
        for k, d in other.poles.items():
            poles[k] = poles.get(k, 0) + d
        return DiagRat._build(self.numerator * other.numerator, poles, self.labels, self.kind)

    __rmul__ = __mul__

    def __truediv__(self, value: Any) -> "DiagRat":
        return self.scale(1 / as_scalar(value))

    def __pow__(self, exp: int) -> "DiagRat":
        if exp < 0:
            raise ValueError("use DiagRat.diagonal for negative powers")
        result = DiagRat.constant(1, self.labels, self.kind)
        for _ in range(exp):
            result = result * self
        return result

    def diff(self, i: int) -> "DiagRat":
        """Partial derivative in v_i by the quotient rule"""
        self._check_label(i)
        var = self.var(i)
        result = DiagRat._build(self.numerator.diff(var), dict(self.poles), self.labels, self.kind)
        for (a, b), d in self.poles.items():
            if i not in (a, b):
                continue
            sign = 1 if a == i else -1
            raised = dict(self.poles)
            raised[(a, b)] = d + 1
            term = DiagRat._build(self.numerator.scale(-sign * d), raised, self.labels, self.kind, normalized=True)
            result = result + term
        return result

    def strip_pole(self, i: int, j: int) -> Tuple["DiagRat", int]:
        """Return (g, order) with self = (v_i - v_j)^(-order) * g and g regular on the diagonal"""
        self._check_pair(i, j)
        key = (min(i, j), max(i, j))
        order = self.poles.get(key, 0)
        if not order:
            return self, 0
        poles = dict(self.poles)
        del poles[key]
        num = self.numerator
        if i > j and order % 2:
            num = -num
        return DiagRat._build(num, poles, self.labels, self.kind, normalized=True), order

    def substitute_equal(self, i: int, j: int) -> "DiagRat":
        """Set v_i = v_j; label i disappears from the live set"""
        self._check_pair(i, j)
        if (min(i, j), max(i, j)) in self.poles:
            raise PoleOnDiagonalError(f"{self} has a pole on {VAR_PREFIX[self.kind]}{i} = {VAR_PREFIX[self.kind]}{j}")
        return self._remap({i: j}, self.labels - {i}, self.kind)

    def relabel(self, mapping: Mapping[int, int], kind: Optional[VarKind] = None) -> "DiagRat":
        """Injective renaming of every live label, optionally moving to another variable family"""
        missing = self.labels - set(mapping)
        if missing:
            raise IndexOutOfRangeError(f"labels {sorted(missing)} have no target")
        targets = [mapping[a] for a in self.labels]
        if len(set(targets)) != len(targets):
            raise ArityMismatchError("relabel mapping must be injective")
        return self._remap(mapping, frozenset(targets), kind if kind is not None else self.kind)

    def _remap(self, mapping: Mapping[int, int], labels: FrozenSet[int], kind: VarKind) -> "DiagRat":
        var_map = {self.var(a): VarId(kind, mapping.get(a, a)) for a in self.labels}
        num = self.numerator.rename(var_map)
        poles: Dict[PoleKey, int] = {}
        for (a, b), d in self.poles.items():
            a2, b2 = mapping.get(a, a), mapping.get(b, b)
            if a2 == b2:
                raise PoleOnDiagonalError(f"pole ({a},{b}) collapses under substitution")
            if a2 > b2:
                a2, b2 = b2, a2
                if d % 2:
                    num = -num
            poles[(a2, b2)] = poles.get((a2, b2), 0) + d
        return DiagRat._build(num, poles, labels, kind)

    # Comparison and display

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, (int, Fraction)):
            return not self.poles and self.numerator == other
        if not isinstance(other, DiagRat):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.kind == other.kind
            and self.numerator == other.numerator
            and self.poles == other.poles
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.labels, self.kind, self.numerator, frozenset(self.poles.items())))
        return self._hash

    def __str__(self) -> str:
        if not self.poles:
            return str(self.numerator)
        prefix = VAR_PREFIX[self.kind]
        factors = "*".join(f"({prefix}{i}-{prefix}{j})^-{d}" for (i, j), d in sorted(self.poles.items()))
        if self.numerator == 1:
            return factors
        if self.numerator == -1:
            return f"-{factors}"
        return f"({self.numerator})*{factors}"

    def __repr__(self) -> str:
        return f"DiagRat[{','.join(map(str, sorted(self.labels)))}]({self})"


def _normalize(num: MPoly, poles: Dict[PoleKey, int], kind: VarKind) -> Tuple[MPoly, Dict[PoleKey, int]]:
    if num.is_zero():
        return num, {}
    result: Dict[PoleKey, int] = {}
    for (i, j), d in sorted(poles.items()):
        vi, vj = VarId(kind, i), VarId(kind, j)
        while d > 0:
            quotient = divide_by_diagonal(num, vi, vj)
            if quotient is None:
                break
            num = quotient
            d -= 1
        if d:
            result[(i, j)] = d
    return num, result


class SparseVector:
    """Finite rational combination of hashable, orderable basis keys"""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Union[Mapping[Any, Any], Iterable[Tuple[Any, Any]]]] = None):
        self.terms = self._clean(terms)
        self._hash = None

    @staticmethod
    def _clean(terms) -> Dict[Any, Fraction]:
        clean: Dict[Any, Fraction] = {}
        if not terms:
            return clean
        pairs = terms.items() if hasattr(terms, "items") else terms
        for key, coeff in pairs:
            coeff = as_scalar(coeff)
            if coeff:
                total = clean.get(key, 0) + coeff
                if total:
                    clean[key] = total
                else:
                    clean.pop(key, None)
        return clean

    def _like(self, terms: Dict[Any, Fraction]) -> "SparseVector":
        obj = type(self).__new__(type(self))
        for slot in _all_slots(type(self)):
            if slot not in ("terms", "_hash"):
                setattr(obj, slot, getattr(self, slot))
        obj.terms = terms
        obj._hash = None
        return obj

    def _check_compatible(self, other: "SparseVector"):
        if type(self) is not type(other):
            raise ArityMismatchError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def __add__(self, other: "SparseVector") -> "SparseVector":
        if not isinstance(other, SparseVector):
            return NotImplemented
        self._check_compatible(other)
        result = dict(self.terms)
        for key, coeff in other.terms.items():
            total = result.get(key, 0) + coeff
            if total:
                result[key] = total
            else:
                result.pop(key, None)
        return self._like(result)

    def __neg__(self) -> "SparseVector":
        return self._like({key: -coeff for key, coeff in self.terms.items()})

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self + (-other)

    def __mul__(self, value: Any) -> "SparseVector":
        if not isinstance(value, (int, Fraction)):
            return NotImplemented
        value = as_scalar(value)
        if not value:
            return self._like({})
        return self._like({key: coeff * value for key, coeff in self.terms.items()})

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_items())

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, key: Any) -> Fraction:
        return self.terms.get(key, Fraction(0))

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda item: item[0])

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if type(self) is not type(other):
            return NotImplemented
        return self._identity() == other._identity() and self.terms == other.terms

    def _identity(self) -> Tuple:
        return ()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((type(self).__name__, self._identity(), frozenset(self.terms.items())))
        return self._hash

    def _format_key(self, key: Any) -> str:
        return str(key)

    def __str__(self) -> str:
        return format_scalar_terms((self._format_key(key), coeff) for key, coeff in self.sorted_items())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


def _all_slots(cls) -> Iterator[str]:
    for klass in cls.__mro__:
        for slot in getattr(klass, "__slots__", ()):
            yield slot
