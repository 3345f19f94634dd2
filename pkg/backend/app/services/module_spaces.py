"""The graded free F[d]-module V, tensor powers, normal forms in V[lambda]/<d + sum lambda>
and classical operations stored on line forests.

Elements of V are sums c * d^a g over generators g. Polynomial values carry their variable
family (lambda_1..lambda_n in the chiral world, Lambda_1..Lambda_p in the classical one) and
keep the d-power inside the coefficient.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import ArityMismatchError, FormatError, IndexOutOfRangeError
from ..models.schemas import ValidationReport, Violation, ViolationKind
from .exact_algebra import VAR_PREFIX, DiagRat, MPoly, SparseVector, VarId, VarKind, as_scalar, mono_str
from .graph_core import DiGraph, LineForest, all_line_forests, decompose_to_lines

logger = logging.getLogger(__name__)

GENERATOR_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
RESERVED_NAME = re.compile(r"^(d|[lLzwx]\d+)$")

VKey = Tuple[str, int]
TensorKey = Tuple[VKey, ...]
Exponents = Tuple[int, ...]
PolyKey = Tuple[Exponents, str, int]


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    odd: bool = False

    def __str__(self) -> str:
        return f"{self.name}:{self.degree}" + (":odd" if self.odd else "")


class FreeDModule:
    """Free F[d]-module on graded generators; d preserves degree"""

    def __init__(self, generators: Sequence[Generator]):
        seen = set()
        for gen in generators:
            if not GENERATOR_NAME.match(gen.name) or RESERVED_NAME.match(gen.name):
                raise FormatError(f"invalid generator name '{gen.name}'")
            if gen.name in seen:
                raise FormatError(f"duplicate generator '{gen.name}'")
            if gen.degree < 0:
                raise FormatError(f"generator '{gen.name}' has negative degree")
            seen.add(gen.name)
        self.generators: Tuple[Generator, ...] = tuple(generators)
        self._by_name = {gen.name: gen for gen in self.generators}

    @property
    def names(self) -> List[str]:
        return [gen.name for gen in self.generators]

    @property
    def rank(self) -> int:
        return len(self.generators)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def degree_of(self, name: str) -> int:
        if name not in self._by_name:
            raise FormatError(f"unknown generator '{name}'")
        return self._by_name[name].degree

    def names_of_degree(self, degree: int) -> List[str]:
        return [gen.name for gen in self.generators if gen.degree == degree]

    def tensor_degree(self, key: TensorKey) -> int:
        return sum(self.degree_of(name) for name, _ in key)

    def element(self, name: str, d_power: int = 0, coeff=1) -> "VElem":
        self.degree_of(name)
        return VElem({(name, d_power): coeff})

    def tensor_basis(self, n: int, d_cap: int = 0) -> List[TensorKey]:
        slots = [(name, a) for name in self.names for a in range(d_cap + 1)]
        return [tuple(key) for key in itertools.product(slots, repeat=n)]

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeDModule) and self.generators == other.generators

    def __hash__(self) -> int:
        return hash(self.generators)

    def __str__(self) -> str:
        return format_module(self)

    def __repr__(self) -> str:
        return f"FreeDModule({' '.join(map(str, self.generators))})"


def parse_module(text: str) -> FreeDModule:
    """Parse ``module a:0 b:1:odd`` (the leading keyword is optional)"""
    tokens = text.split()
    if tokens and tokens[0] == "module":
        tokens = tokens[1:]
    if not tokens:
        raise FormatError("module needs at least one generator")
    generators = []
    for token in tokens:
        parts = token.split(":")
        if len(parts) not in (2, 3) or not re.fullmatch(r"\d+", parts[1]):
            raise FormatError(f"bad generator entry '{token}', expected name:degree[:odd]")
        if len(parts) == 3 and parts[2] != "odd":
            raise FormatError(f"bad parity flag in '{token}'")
        generators.append(Generator(parts[0], int(parts[1]), len(parts) == 3))
    return FreeDModule(generators)


def format_module(module: FreeDModule) -> str:
    return "module " + " ".join(str(gen) for gen in module.generators)


def _vkey_str(key: VKey) -> str:
    name, a = key
    if a == 0:
        return name
    return f"d*{name}" if a == 1 else f"d^{a}*{name}"


class VElem(SparseVector):
    """Element sum c * d^a g of the free module"""

    __slots__ = ()

    @classmethod
    def generator(cls, name: str, d_power: int = 0, coeff=1) -> "VElem":
        return cls({(name, d_power): coeff})

    def apply_d(self, times: int = 1) -> "VElem":
        return self._like({(name, a + times): c for (name, a), c in self.terms.items()})

    def names(self) -> List[str]:
        return sorted({name for name, _ in self.terms})

    def _format_key(self, key: VKey) -> str:
        return _vkey_str(key)


def bump_key(key: TensorKey, i: int, delta: int) -> TensorKey:
    name, a = key[i - 1]
    return key[: i - 1] + ((name, a + delta),) + key[i:]


class TensorElem(SparseVector):
    """Element of V^{(x)n}; basis keys are n-tuples of (generator, d-power)"""

    __slots__ = ("n",)

    def __init__(self, n: int, terms=None):
        super().__init__(terms)
        self.n = n
        for key in self.terms:
            if len(key) != n:
                raise ArityMismatchError(f"tensor key {key} is not of length {n}")

    @classmethod
    def basis(cls, key: TensorKey) -> "TensorElem":
        return cls(len(key), {tuple(key): 1})

    @classmethod
    def tensor(cls, *factors: VElem) -> "TensorElem":
        terms: Dict[TensorKey, Fraction] = {(): Fraction(1)}
        for factor in factors:
            grown: Dict[TensorKey, Fraction] = {}
            for key, c in terms.items():
                for vkey, d in factor.terms.items():
                    grown[key + (vkey,)] = grown.get(key + (vkey,), 0) + c * d
            terms = grown
        return cls(len(factors), terms)

    def _identity(self) -> Tuple:
        return (self.n,)

    def _check_compatible(self, other: SparseVector):
        super()._check_compatible(other)
        if other.n != self.n:
            raise ArityMismatchError(f"tensors of arity {self.n} and {other.n}")

    def partial(self, i: int, times: int = 1) -> "TensorElem":
        """d_i: raise the d-power of the i-th factor"""
        if not 1 <= i <= self.n:
            raise IndexOutOfRangeError(f"no tensor factor {i} in arity {self.n}")
        return self._like({bump_key(key, i, times): c for key, c in self.terms.items()})

    def partials(self, exps: Sequence[int]) -> "TensorElem":
        result = self
        for i, e in enumerate(exps, start=1):
            if e:
                result = result.partial(i, e)
        return result

    def _format_key(self, key: TensorKey) -> str:
        return " @ ".join(_vkey_str(slot) for slot in key) if key else "1"


def apply_poly_partials(P: MPoly, v: TensorElem) -> TensorElem:
    """P(x_1..x_n) with x_i acting as d_i"""
    result = TensorElem(v.n)
    for mono, coeff in P.terms.items():
        exps = [0] * v.n
        for var, e in mono:
            if var.kind != VarKind.X or not 1 <= var.index <= v.n:
                raise IndexOutOfRangeError(f"{var} does not act on a tensor of arity {v.n}")
            exps[var.index - 1] = e
        result = result + v.partials(exps) * coeff
    return result


@lru_cache(maxsize=1024)
def _linear(kind: VarKind, index: int) -> MPoly:
    return MPoly.var(VarId(kind, index))


D_SYMBOL = MPoly.var(VarId(VarKind.D))


class VPoly(SparseVector):
    """Polynomial over V in one variable family; keys are (exponents, generator, d-power)"""

    __slots__ = ("nvars", "kind")

    def __init__(self, nvars: int, kind: VarKind = VarKind.LAMBDA, terms=None):
        super().__init__(terms)
        self.nvars = nvars
        self.kind = VarKind(kind)
        for exps, _, _ in self.terms:
            if len(exps) != nvars:
                raise ArityMismatchError(f"exponent vector {exps} is not of length {nvars}")

    @classmethod
    def zero(cls, nvars: int, kind: VarKind = VarKind.LAMBDA) -> "VPoly":
        return cls(nvars, kind)

    @classmethod
    def from_velem(cls, v: VElem, nvars: int, kind: VarKind = VarKind.LAMBDA,
                   exps: Optional[Exponents] = None) -> "VPoly":
        exps = tuple(exps) if exps is not None else (0,) * nvars
        return cls(nvars, kind, {(exps, name, a): c for (name, a), c in v.terms.items()})

    @classmethod
    def from_coefficients(cls, coefficients: Mapping[Exponents, VElem], nvars: int,
                          kind: VarKind = VarKind.LAMBDA) -> "VPoly":
        terms: Dict[PolyKey, Fraction] = {}
        for exps, v in coefficients.items():
            for (name, a), c in v.terms.items():
                key = (tuple(exps), name, a)
                terms[key] = terms.get(key, 0) + c
        return cls(nvars, kind, terms)

    def coefficients(self) -> Dict[Exponents, VElem]:
        buckets: Dict[Exponents, Dict[VKey, Fraction]] = {}
        for (exps, name, a), c in self.terms.items():
            buckets.setdefault(exps, {})[(name, a)] = c
        return {exps: VElem(terms) for exps, terms in buckets.items()}

    def raw(self) -> "VPoly":
        return VPoly(self.nvars, self.kind, self.terms)

    def _identity(self) -> Tuple:
        return (self.nvars, int(self.kind))

    def _check_compatible(self, other: SparseVector):
        if not isinstance(other, VPoly) or other._identity() != self._identity():
            raise ArityMismatchError(f"cannot combine {self!r} with {other!r}")

    def _new(self, terms) -> "VPoly":
        return VPoly(self.nvars, self.kind, terms)

    def mul_var(self, k: int, times: int = 1) -> "VPoly":
        self._check_var(k)
        return self._new({(_bump_exps(exps, k, times), name, a): c for (exps, name, a), c in self.terms.items()})

    def diff_var(self, k: int) -> "VPoly":
        self._check_var(k)
        terms = {}
        for (exps, name, a), c in self.terms.items():
            if exps[k - 1]:
                terms[(_bump_exps(exps, k, -1), name, a)] = c * exps[k - 1]
        return self._new(terms)

    def mul_monomial(self, exps: Exponents, coeff=1) -> "VPoly":
        coeff = as_scalar(coeff)
        return self._new({
            (tuple(x + y for x, y in zip(e, exps)), name, a): c * coeff for (e, name, a), c in self.terms.items()
        })

    def apply_d(self, times: int = 1) -> "VPoly":
        return self._new({(exps, name, a + times): c for (exps, name, a), c in self.terms.items()})

    def degree_in(self, k: int) -> int:
        self._check_var(k)
        return max((exps[k - 1] for exps, _, _ in self.terms), default=-1)

    def generator_names(self) -> List[str]:
        return sorted({name for _, name, _ in self.terms})

    def _check_var(self, k: int):
        if not 1 <= k <= self.nvars:
            raise IndexOutOfRangeError(f"{VAR_PREFIX[self.kind]}{k} outside 1..{self.nvars}")

    def substitute_linear(self, images: Sequence[MPoly], nvars: int, kind: VarKind) -> "VPoly":
        """Replace variable k by images[k-1], a polynomial in the target family and the d symbol"""
        powers: Dict[Tuple[int, int], MPoly] = {}
        terms: Dict[PolyKey, Fraction] = {}
        for (exps, name, a), coeff in self.terms.items():
            image = MPoly.one()
            for k, e in enumerate(exps):
                if e:
                    if (k, e) not in powers:
                        powers[(k, e)] = images[k] ** e
                    image = image * powers[(k, e)]
            for mono, c in image.terms.items():
                target = [0] * nvars
                extra = 0
                for var, e in mono:
                    if var.kind == VarKind.D:
                        extra += e
                    else:
                        target[var.index - 1] += e
                key = (tuple(target), name, a + extra)
                terms[key] = terms.get(key, 0) + coeff * c
        return VPoly(nvars, kind, terms)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda item: (-sum(item[0][0]), item[0]))

    def _format_key(self, key: PolyKey) -> str:
        exps, name, a = key
        parts = []
        mono = mono_str(tuple((VarId(self.kind, k + 1), e) for k, e in enumerate(exps) if e))
        if mono:
            parts.append(mono)
        parts.append(_vkey_str((name, a)))
        return "*".join(parts)


def _bump_exps(exps: Exponents, k: int, delta: int) -> Exponents:
    return exps[: k - 1] + (exps[k - 1] + delta,) + exps[k:]


class QuotElem(VPoly):
    """Normal form in V[x_1..x_n]/<d + x_1 + ... + x_n>: the variable ``eliminate`` never occurs"""

    __slots__ = ("eliminate",)

    def __init__(self, nvars: int, kind: VarKind = VarKind.LAMBDA, terms=None, eliminate: int = 0):
        super().__init__(nvars, kind, terms)
        self.eliminate = eliminate

    def _identity(self) -> Tuple:
        return (self.nvars, int(self.kind), self.eliminate)


def zero_quot(nvars: int, kind: VarKind = VarKind.LAMBDA) -> QuotElem:
    return QuotElem(nvars, kind, {}, nvars)


@lru_cache(maxsize=256)
def _elimination_images(nvars: int, kind: VarKind, eliminate: int) -> Tuple[MPoly, ...]:
    images = [_linear(kind, j) for j in range(1, nvars + 1)]
    relation = -D_SYMBOL
    for j in range(1, nvars + 1):
        if j != eliminate:
            relation = relation - _linear(kind, j)
    images[eliminate - 1] = relation
    return tuple(images)


def canonicalize(raw: VPoly, eliminate: Optional[int] = None) -> QuotElem:
    """Normal form modulo d + sum of the variables, eliminating the last one unless told otherwise.

    With no variables this is V/dV: every term with a positive d-power vanishes.
    """
    n = raw.nvars
    if n == 0:
        return QuotElem(0, raw.kind, {key: c for key, c in raw.terms.items() if key[2] == 0}, 0)
    k = n if eliminate is None else eliminate
    if not 1 <= k <= n:
        raise IndexOutOfRangeError(f"cannot eliminate variable {k} of {n}")
    if isinstance(raw, QuotElem) and raw.eliminate == k:
        return raw
    if all(exps[k - 1] == 0 for exps, _, _ in raw.terms):
        return QuotElem(n, raw.kind, raw.terms, k)
    reduced = raw.substitute_linear(_elimination_images(n, raw.kind, k), n, raw.kind)
    return QuotElem(n, raw.kind, reduced.terms, k)


def mul_lambda(q: QuotElem, i: int) -> QuotElem:
    return canonicalize(q.mul_var(i), q.eliminate or None)


def lambda_difference(q: QuotElem, i: int, j: int) -> QuotElem:
    """(d/dlambda_j - d/dlambda_i) q, applied to the normal form and renormalized"""
    return canonicalize(q.diff_var(j) - q.diff_var(i), q.eliminate or None)


def lambdas_to_lambda(value: VPoly, forest: LineForest) -> VPoly:
    """Substitute Lambda_l = sum of lambda_a over the vertices a of line l"""
    if value.kind != VarKind.BIGLAMBDA or value.nvars != forest.p:
        raise ArityMismatchError(f"value {value!r} does not live on the lines of [{forest}]")
    images = []
    for line in forest.lines:
        total = MPoly.zero()
        for a in line:
            total = total + _linear(VarKind.LAMBDA, a)
        images.append(total)
    return value.substitute_linear(images, forest.n, VarKind.LAMBDA)


def lambda_to_lambdas(value: VPoly, forest: LineForest) -> QuotElem:
    """Left inverse of lambdas_to_lambda on classes: each line keeps the lambda of its first vertex"""
    if value.kind != VarKind.LAMBDA or value.nvars != forest.n:
        raise ArityMismatchError(f"value {value!r} is not a lambda polynomial in {forest.n} variables")
    images = [MPoly.zero()] * forest.n
    for ell, line in enumerate(forest.lines, start=1):
        images[line[0] - 1] = _linear(VarKind.BIGLAMBDA, ell)
    return canonicalize(value.substitute_linear(images, forest.p, VarKind.BIGLAMBDA))


def reduced_keys(module: FreeDModule, forest: LineForest, d_cap: int) -> List[TensorKey]:
    """Tensor basis with no d on the last vertex of any line and d-powers up to d_cap elsewhere"""
    last = set(forest.last_vertices)
    powers = [range(1) if i in last else range(d_cap + 1) for i in range(1, forest.n + 1)]
    keys = []
    for names in itertools.product(module.names, repeat=forest.n):
        for dpowers in itertools.product(*powers):
            keys.append(tuple(zip(names, dpowers)))
    return keys


def is_reduced(key: TensorKey, forest: LineForest) -> bool:
    return all(key[i - 1][1] == 0 for i in forest.last_vertices)


class ClassicalOp:
    """Classical operation of degree r stored on line forests.

    ``table[forest][key]`` is a representative in V[Lambda_1..Lambda_p]. Missing reduced keys are
    zero; other tensors follow d_last = -Lambda_l - (sum of the remaining d's of line l).
    """

    def __init__(self, module: FreeDModule, n: int, degree: int,
                 table: Optional[Mapping[LineForest, Mapping[TensorKey, VPoly]]] = None):
        self.module = module
        self.n = n
        self.degree = degree
        clean: Dict[LineForest, Dict[TensorKey, VPoly]] = {}
        for forest, entries in (table or {}).items():
            if forest.n != n:
                raise ArityMismatchError(f"forest [{forest}] does not have {n} vertices")
            kept = {}
            for key, value in entries.items():
                key = tuple(tuple(slot) for slot in key)
                if len(key) != n:
                    raise ArityMismatchError(f"tensor key {key} is not of arity {n}")
                for name, _ in key:
                    module.degree_of(name)
                if value.kind != VarKind.BIGLAMBDA or value.nvars != forest.p:
                    raise ArityMismatchError(f"value on [{forest}] must be a polynomial in L1..L{forest.p}")
                if value:
                    kept[key] = value.raw()
            if kept:
                clean[forest] = kept
        self.table = clean
        self._memo: Dict[Tuple[LineForest, TensorKey], VPoly] = {}

    @property
    def forests(self) -> List[LineForest]:
        return sorted(self.table)

    def stored(self, forest: LineForest) -> Dict[TensorKey, VPoly]:
        return dict(self.table.get(forest, {}))

    def max_d_power(self) -> int:
        return max((a for entries in self.table.values() for key in entries for _, a in key), default=0)

    def value(self, forest: LineForest, key: TensorKey) -> VPoly:
        """Representative of Y^forest on a basis tensor"""
        memo_key = (forest, key)
        if memo_key not in self._memo:
            self._memo[memo_key] = self._reduce(forest, key)
        return self._memo[memo_key]

    def _reduce(self, forest: LineForest, key: TensorKey) -> VPoly:
        stored = self.table.get(forest, {}).get(key)
        if stored is not None:
            return stored
        pending = [ell for ell, line in enumerate(forest.lines, start=1) if key[line[-1] - 1][1] > 0]
        if not pending:
            return VPoly.zero(forest.p, VarKind.BIGLAMBDA)
        # the highest line first, so explicit entries on lower lines are read back as stored
        ell = pending[-1]
        line = forest.lines[ell - 1]
        base = bump_key(key, line[-1], -1)
        result = -self.value(forest, base).mul_var(ell)
        for a in line[:-1]:
            result = result - self.value(forest, bump_key(base, a, 1))
        return result

    def evaluate_forest(self, forest: LineForest, v: TensorElem) -> VPoly:
        if v.n != self.n or forest.n != self.n:
            raise ArityMismatchError(f"arity {self.n} operation applied to arity {v.n} tensor")
        total = VPoly.zero(forest.p, VarKind.BIGLAMBDA)
        for key, c in v.terms.items():
            total = total + self.value(forest, key) * c
        return total

    def canonical_value(self, forest: LineForest, key: TensorKey) -> QuotElem:
        return canonicalize(self.value(forest, key))

    def restricted(self, forests: Iterable[LineForest]) -> "ClassicalOp":
        keep = set(forests)
        return ClassicalOp(self.module, self.n, self.degree, {f: e for f, e in self.table.items() if f in keep})

    def replaced(self, forest: LineForest, key: TensorKey, value: VPoly) -> "ClassicalOp":
        table = {f: dict(e) for f, e in self.table.items()}
        table.setdefault(forest, {})[key] = value
        return ClassicalOp(self.module, self.n, self.degree, table)

    def is_zero(self) -> bool:
        return all(not self.canonical_value(f, k) for f, entries in self.table.items() for k in entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassicalOp):
            return NotImplemented
        if (self.module, self.n, self.degree) != (other.module, other.n, other.degree):
            return False
        for forest in set(self.table) | set(other.table):
            keys = set(self.table.get(forest, {})) | set(other.table.get(forest, {}))
            for key in keys:
                if self.canonical_value(forest, key) != other.canonical_value(forest, key):
                    return False
        return True

    __hash__ = None

    def __repr__(self) -> str:
        entries = sum(len(e) for e in self.table.values())
        return f"ClassicalOp(n={self.n}, r={self.degree}, forests={len(self.table)}, entries={entries})"

    def __str__(self) -> str:
        return format_classical_table(self)


def evaluate_forest(Y: ClassicalOp, forest: LineForest, v: TensorElem) -> VPoly:
    return Y.evaluate_forest(forest, v)


def eval_classical(Y: ClassicalOp, g: DiGraph, v: TensorElem) -> QuotElem:
    """Y on any graph: extend linearly along the line decomposition, then pass to the lambda world"""
    if g.n != Y.n:
        raise ArityMismatchError(f"graph on {g.n} vertices for an arity {Y.n} operation")
    total = VPoly.zero(Y.n, VarKind.LAMBDA)
    for forest, coeff in decompose_to_lines(g).terms.items():
        total = total + lambdas_to_lambda(Y.evaluate_forest(forest, v), forest) * coeff
    return canonicalize(total)


def validate_classical(Y: ClassicalOp) -> ValidationReport:
    """Audit explicit entries for Y((d_G + Lambda_G) u) = 0 and for the grading"""
    report = ValidationReport(degree_r=Y.degree)
    for forest, entries in sorted(Y.table.items()):
        tested = set(entries)
        for key in entries:
            for line in forest.lines:
                if key[line[-1] - 1][1] > 0:
                    tested.add(bump_key(key, line[-1], -1))
        for key in sorted(tested):
            report.tensors_checked += 1
            for ell, line in enumerate(forest.lines, start=1):
                residual = Y.value(forest, key).mul_var(ell)
                for a in line:
                    residual = residual + Y.value(forest, bump_key(key, a, 1))
                residual = canonicalize(residual)
                if residual:
                    report.violations.append(Violation(
                        kind=ViolationKind.SESQUILINEARITY, forest=str(forest),
                        tensor=tensor_str(key), line=ell, residual=str(residual),
                    ))
        for key, value in sorted(entries.items()):
            target = forest.edge_count + Y.module.tensor_degree(key) - Y.degree
            wrong = [name for name in value.generator_names() if Y.module.degree_of(name) != target]
            if wrong:
                report.violations.append(Violation(
                    kind=ViolationKind.GRADING, forest=str(forest), tensor=tensor_str(key),
                    residual=f"generators {','.join(wrong)} outside degree {target}",
                ))
    if report.violations:
        logger.warning(f"Classical operation of degree {Y.degree}: {len(report.violations)} violations")
    return report


def tensor_str(key: TensorKey) -> str:
    return TensorElem(len(key))._format_key(key)


def lambda_monomials(nvars: int, max_degree: int) -> List[Exponents]:
    return [exps for exps in itertools.product(range(max_degree + 1), repeat=nvars) if sum(exps) <= max_degree]


def random_classical_op(module: FreeDModule, n: int, r: int, rng: Optional[np.random.Generator] = None,
                        d_cap: int = settings.TABLE_D_CAP, lambda_degree: int = settings.TABLE_LAMBDA_DEGREE,
                        density: float = 0.5) -> ClassicalOp:
    """Random table on reduced keys whose values sit in the degree the grading prescribes"""
    rng = rng if rng is not None else np.random.default_rng(settings.DEFAULT_SEED)
    table: Dict[LineForest, Dict[TensorKey, VPoly]] = {}
    for forest in all_line_forests(n):
        monomials = lambda_monomials(forest.p, lambda_degree)
        entries = {}
        for key in reduced_keys(module, forest, d_cap):
            outputs = module.names_of_degree(forest.edge_count + module.tensor_degree(key) - r)
            if not outputs or rng.random() >= density:
                continue
            terms: Dict[PolyKey, Fraction] = {}
            for _ in range(int(rng.integers(1, 3))):
                exps = monomials[int(rng.integers(len(monomials)))]
                name = outputs[int(rng.integers(len(outputs)))]
                term = (exps, name, int(rng.integers(0, 2)))
                terms[term] = terms.get(term, 0) + (int(rng.integers(-3, 4)) or 1)
            value = VPoly(forest.p, VarKind.BIGLAMBDA, terms)
            if value:
                entries[key] = value
        if entries:
            table[forest] = entries
    return ClassicalOp(module, n, r, table)


_RATIONAL = re.compile(r"^\d+(/\d+)?$")
_BIG_LAMBDA = re.compile(r"^L(\d+)(?:\^(\d+))?$")
_D_POWER = re.compile(r"^d(?:\^(\d+))?$")


def parse_velem_key(text: str, module: FreeDModule) -> VKey:
    factors = [part.strip() for part in text.split("*")]
    power = 0
    if len(factors) == 2:
        match = _D_POWER.match(factors[0])
        if not match:
            raise FormatError(f"bad tensor factor '{text}'")
        power = int(match.group(1) or 1)
        factors = factors[1:]
    if len(factors) != 1 or factors[0] not in module:
        raise FormatError(f"bad tensor factor '{text}'")
    return factors[0], power


def parse_tensor_key(text: str, n: int, module: FreeDModule) -> TensorKey:
    text = text.strip()
    if n == 0:
        if text != "1":
            raise FormatError(f"arity 0 tensors are written '1', got '{text}'")
        return ()
    key = tuple(parse_velem_key(part, module) for part in text.split("@"))
    if len(key) != n:
        raise FormatError(f"tensor '{text}' has {len(key)} factors, expected {n}")
    return key


def parse_vpoly(text: str, module: FreeDModule, nvars: int, kind: VarKind = VarKind.BIGLAMBDA) -> VPoly:
    """Parse sums of terms like ``-2*L1^2*d^3*a`` (L stands for the variable family)"""
    compact = re.sub(r"\s+", "", text)
    if compact in ("", "0"):
        return VPoly.zero(nvars, kind)
    if compact[0] not in "+-":
        compact = "+" + compact
    var_pattern = re.compile(rf"^{VAR_PREFIX[kind]}(\d+)(?:\^(\d+))?$")
    terms: Dict[PolyKey, Fraction] = {}
    for sign, body in re.findall(r"([+-])([^+-]+)", compact):
        coeff = Fraction(-1 if sign == "-" else 1)
        exps = [0] * nvars
        power = 0
        name = None
        for factor in body.split("*"):
            if _RATIONAL.match(factor):
                coeff *= Fraction(factor)
                continue
            match = var_pattern.match(factor)
            if match:
                index = int(match.group(1))
                if not 1 <= index <= nvars:
                    raise FormatError(f"variable {factor} outside 1..{nvars}")
                exps[index - 1] += int(match.group(2) or 1)
                continue
            match = _D_POWER.match(factor)
            if match:
                power += int(match.group(1) or 1)
                continue
            if factor in module and name is None:
                name = factor
                continue
            raise FormatError(f"unexpected factor '{factor}' in '{text}'")
        if name is None:
            raise FormatError(f"term '{body}' names no generator")
        key = (tuple(exps), name, power)
        terms[key] = terms.get(key, 0) + coeff
    return VPoly(nvars, kind, terms)


def parse_classical_table(text: str, module: Optional[FreeDModule] = None) -> ClassicalOp:
    """Table text: header lines ``module``, ``arity``, ``degree`` then ``forest : tensor = value`` lines"""
    n = None
    degree = 0
    table: Dict[LineForest, Dict[TensorKey, VPoly]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)
        if head[0] == "module":
            module = parse_module(line)
        elif head[0] == "arity" and len(head) == 2:
            n = int(head[1])
        elif head[0] == "degree" and len(head) == 2:
            degree = int(head[1])
        else:
            if module is None or n is None:
                raise FormatError(f"line {lineno}: 'module' and 'arity' must come before table entries")
            try:
                forest_text, rest = line.split(":", 1)
                tensor_text, value_text = rest.split("=", 1)
            except ValueError:
                raise FormatError(f"line {lineno}: expected 'forest : tensor = value'")
            forest = LineForest.parse(forest_text.strip())
            if forest.n != n:
                raise FormatError(f"line {lineno}: forest [{forest}] does not cover {n} vertices")
            key = parse_tensor_key(tensor_text, n, module)
            value = parse_vpoly(value_text, module, forest.p)
            entries = table.setdefault(forest, {})
            entries[key] = entries[key] + value if key in entries else value
    if module is None or n is None:
        raise FormatError("table needs 'module' and 'arity' headers")
    return ClassicalOp(module, n, degree, table)


def format_classical_table(Y: ClassicalOp) -> str:
    lines = [format_module(Y.module), f"arity {Y.n}", f"degree {Y.degree}"]
    for forest, entries in sorted(Y.table.items()):
        for key, value in sorted(entries.items()):
            lines.append(f"{forest} : {tensor_str(key)} = {value}")
    return "\n".join(lines) + "\n"


BasisEvaluator = Callable[[TensorKey, DiagRat], QuotElem]


class ChiralOp:
    """Chiral operation X(v (x) f) with values in V[lambda]/<d + sum lambda>, given on basis tensors"""

    def __init__(self, module: FreeDModule, n: int, evaluator: BasisEvaluator, label: str = "chiral"):
        self.module = module
        self.n = n
        self.evaluator = evaluator
        self.label = label

    def __call__(self, v: TensorElem, f: DiagRat) -> QuotElem:
        if v.n != self.n:
            raise ArityMismatchError(f"arity {self.n} operation applied to arity {v.n} tensor")
        if f.kind != VarKind.Z or f.labels != frozenset(range(1, self.n + 1)):
            raise ArityMismatchError(f"function {f!r} does not live on z1..z{self.n}")
        total = zero_quot(self.n)
        for key, c in v.terms.items():
            total = total + self.evaluator(key, f) * c
        return total

    def __repr__(self) -> str:
        return f"ChiralOp({self.label}, n={self.n})"
