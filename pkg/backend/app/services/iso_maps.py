"""Maps between chiral and classical operations and the identities that certify them.

``inverse_map`` builds a chiral operation from a classical table through forest Fourier
transforms and the convolution product; ``forward_map`` reads a classical table back off the
values on p_forest inputs. The check functions return reports instead of raising.
"""

import itertools
import logging
import time
from fractions import Fraction
from math import comb, factorial, prod
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import InconsistentResidueError, ProjectionError, UnvalidatedOperationError
from ..models.schemas import Counterexample, FiltrationCase, FiltrationWitness, VerificationReport
from .exact_algebra import DiagRat, VarKind
from .graph_core import LineForest, all_line_forests, p_gamma
from .module_spaces import (
    ChiralOp,
    ClassicalOp,
    FreeDModule,
    QuotElem,
    TensorElem,
    TensorKey,
    VPoly,
    bump_key,
    canonicalize,
    lambda_difference,
    lambda_monomials,
    lambda_to_lambdas,
    lambdas_to_lambda,
    mul_lambda,
    reduced_keys,
    tensor_str,
    validate_classical,
)
from .residue_fourier import convolve, fourier, residue

logger = logging.getLogger(__name__)

Input = Tuple[TensorKey, DiagRat]


def _shift_key(key: TensorKey, exps: Sequence[int]) -> TensorKey:
    for i, e in enumerate(exps, start=1):
        if e:
            key = bump_key(key, i, e)
    return key


def _multi_factorial(exps: Sequence[int]) -> int:
    return prod(factorial(e) for e in exps)


def _forest_term(Y: ClassicalOp, forest: LineForest, key: TensorKey, f: DiagRat) -> VPoly:
    """Contribution sum_{a+b=c} lambda^(a) F_c * Y^forest(d^(b) v) of one forest"""
    total = VPoly.zero(Y.n, VarKind.LAMBDA)
    for c, coeff in fourier(f, forest).terms.items():
        divided = coeff.scale(_multi_factorial(c))
        for b in itertools.product(*(range(e + 1) for e in c)):
            value = Y.value(forest, _shift_key(key, b))
            if not value:
                continue
            convolved = convolve(divided, value.coefficients())
            if not convolved:
                continue
            a = tuple(x - y for x, y in zip(c, b))
            poly = VPoly.from_coefficients(convolved, forest.p, VarKind.BIGLAMBDA)
            weight = Fraction(1, _multi_factorial(a) * _multi_factorial(b))
            total = total + lambdas_to_lambda(poly, forest).mul_monomial(a, weight)
    return total


def inverse_map(Y: ClassicalOp, prune: bool = True) -> ChiralOp:
    """Chiral operation whose associated graded is Y.

    With ``prune`` forests with more edges than f has divisors are skipped; their transforms vanish.
    """
    report = validate_classical(Y)
    if not report.ok:
        first = report.violations[0]
        raise UnvalidatedOperationError(
            f"classical operation fails validation on [{first.forest}] {first.tensor}: {first.residual}"
        )
    forests = Y.forests

    def evaluate(key: TensorKey, f: DiagRat) -> QuotElem:
        total = VPoly.zero(Y.n, VarKind.LAMBDA)
        for forest in forests:
            if prune and forest.edge_count > f.divisor_count():
                continue
            total = total + _forest_term(Y, forest, key, f)
        return canonicalize(total)

    return ChiralOp(Y.module, Y.n, evaluate, label="inverse")


def project_degree(value: QuotElem, module: FreeDModule, degree: int) -> QuotElem:
    """Component of generator degree ``degree``; anything above it is an error"""
    above = sorted({name for _, name, _ in value.terms if module.degree_of(name) > degree})
    if above:
        raise ProjectionError(f"components {','.join(above)} above degree {degree} in {value}")
    return value._like({k: c for k, c in value.terms.items() if module.degree_of(k[1]) == degree})


def forward_map(X: ChiralOp, r: int, d_cap: int = settings.TABLE_D_CAP) -> ClassicalOp:
    """Y^forest(v) = degree s+t-r part of X(v (x) p_forest), read in the Lambdas of the forest"""
    module = X.module
    table: Dict[LineForest, Dict[TensorKey, VPoly]] = {}
    for forest in all_line_forests(X.n):
        f = p_gamma(forest.to_graph())
        entries = {}
        for key in reduced_keys(module, forest, d_cap):
            target = forest.edge_count + module.tensor_degree(key) - r
            projected = project_degree(X(TensorElem.basis(key), f), module, target)
            if projected:
                entries[key] = lambda_to_lambdas(projected, forest).raw()
        if entries:
            table[forest] = entries
    return ClassicalOp(module, X.n, r, table)


def _diagonal_monomials(n: int, max_degree: int) -> List[DiagRat]:
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    monomials = []
    for degree in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(pairs, degree):
            q = DiagRat.constant(1, n)
            for i, j in combo:
                q = q * DiagRat.diagonal(i, j, 1, n)
            monomials.append(q)
    return monomials


def spanning_inputs(n: int, q_degree: int = 2, max_power: int = 3) -> List[DiagRat]:
    """q * p_forest over line forests and difference monomials q, plus the powers z_ij^m"""
    inputs: Dict[str, DiagRat] = {}
    monomials = _diagonal_monomials(n, q_degree)
    for forest in all_line_forests(n):
        base = p_gamma(forest.to_graph())
        for q in monomials:
            f = base * q
            inputs.setdefault(repr(f), f)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for m in range(-max_power, max_power + 1):
                f = DiagRat.diagonal(i, j, m, n)
                inputs.setdefault(repr(f), f)
    return list(inputs.values())


def sample_inputs(module: FreeDModule, n: int, rng: np.random.Generator, count: int,
                  d_cap: int = 1) -> List[Input]:
    keys = module.tensor_basis(n, d_cap)
    functions = spanning_inputs(n)
    total = len(keys) * len(functions)
    picks = rng.choice(total, size=min(count, total), replace=False)
    return [(keys[int(k) // len(functions)], functions[int(k) % len(functions)]) for k in sorted(picks)]



def input_family(module: FreeDModule, n: int, rng: Optional[np.random.Generator] = None,
                 cap: Optional[int] = None, d_cap: int = 1) -> Tuple[List[Input], int, bool]:
    """Every basis tensor against every spanning input, or a seeded sample of ``cap`` of them.

    Returns the inputs, the size of the whole family and whether it was sampled.
    """
    cap = settings.SPANNING_INPUT_CAP if cap is None else cap
    keys = module.tensor_basis(n, d_cap)
    functions = spanning_inputs(n)
    size = len(keys) * len(functions)
    if size <= cap:
        return [(key, f) for key in keys for f in functions], size, False
    logger.info(f"Spanning family for n={n} has {size} inputs, sampling {cap}")
    rng = rng if rng is not None else np.random.default_rng(settings.DEFAULT_SEED)
    return sample_inputs(module, n, rng, cap, d_cap), size, True


def _describe(key: TensorKey, f: DiagRat) -> str:
    return f"v={tensor_str(key)} f={f}"


def _report(name: str, n: int, r: Optional[int], started: float, total: int,
            failures: List[Counterexample], details: Optional[Dict[str, Any]] = None) -> VerificationReport:
    return VerificationReport(
        suite=name, n=n, degree_r=r, cases_total=total, cases_failed=len(failures),
        first_counterexample=failures[0] if failures else None,
        elapsed_ms=(time.perf_counter() - started) * 1000, details=details,
    )


def _family_details(size: int, sampled: bool, cap: Optional[int]) -> Dict[str, Any]:
    return {"family_size": size, "sampled": sampled,
            "cap": settings.SPANNING_INPUT_CAP if cap is None else cap}


def sesquilinearity_cases(X: ChiralOp, rng: np.random.Generator, cap: Optional[int] = None):
    """(kind, key, f, i, j) cases for both identities over the spanning family.

    Every index and pair is checked on the whole family; a sampled family gets one random index
    and one random pair per input.
    """
    inputs, size, sampled = input_family(X.module, X.n, rng, cap)
    pairs = list(itertools.combinations(range(1, X.n + 1), 2))
    cases = []
    for key, f in inputs:
        if not sampled:
            cases.extend(("d", key, f, i, 0) for i in range(1, X.n + 1))
            cases.extend(("z", key, f, i, j) for i, j in pairs)
            continue
        if X.n >= 1:
            cases.append(("d", key, f, int(rng.integers(1, X.n + 1)), 0))
        if pairs:
            i, j = pairs[int(rng.integers(len(pairs)))]
            cases.append(("z", key, f, i, j))
    return cases, size, sampled


def check_sesquilinearity(X: ChiralOp, cases=None, rng: Optional[np.random.Generator] = None,
                          cap: Optional[int] = None) -> VerificationReport:
    """X(v (x) d_i f) = X((d_i + lambda_i) v (x) f) and X(v (x) z_ij f) = (d/dlambda_j - d/dlambda_i) X(v (x) f)"""
    started = time.perf_counter()
    details = None
    if cases is None:
        rng = rng if rng is not None else np.random.default_rng(settings.DEFAULT_SEED)
        cases, size, sampled = sesquilinearity_cases(X, rng, cap)
        details = _family_details(size, sampled, cap)
    failures: List[Counterexample] = []
    for kind, key, f, i, j in cases:
        v = TensorElem.basis(key)
        if kind == "d":
            got = X(v, f.diff(i))
            expected = X(v.partial(i), f) + mul_lambda(X(v, f), i)
            label = f"d/dz{i}: {_describe(key, f)}"
        else:
            got = X(v, f * DiagRat.diagonal(i, j, 1, X.n))
            expected = lambda_difference(X(v, f), i, j)
            label = f"z{i}{j}*f: {_describe(key, f)}"
        if got != expected:
            logger.warning(f"Sesquilinearity fails for {label}")
            failures.append(Counterexample(input=label, expected=str(expected), got=str(got)))
    return _report("sesquilinearity", X.n, None, started, len(cases), failures, details)


def _random_perturbation(Y: ClassicalOp, rng: np.random.Generator, forest: LineForest,
                         names: Sequence[str]) -> VPoly:
    """(d + Lambda_1 + ... + Lambda_p) Q for a random Q over the given generators"""
    monomials = lambda_monomials(forest.p, 2)
    terms = {}
    for _ in range(int(rng.integers(1, 3))):
        term = (monomials[int(rng.integers(len(monomials)))], names[int(rng.integers(len(names)))],
                int(rng.integers(0, 2)))
        terms[term] = terms.get(term, 0) + (int(rng.integers(-2, 3)) or 1)
    Q = VPoly(forest.p, VarKind.BIGLAMBDA, terms)
    result = Q.apply_d()
    for ell in range(1, forest.p + 1):
        result = result + Q.mul_var(ell)
    return result


def check_well_definedness(Y: ClassicalOp, rng: Optional[np.random.Generator] = None, perturbations: int = 3,
                           cap: Optional[int] = None,
                           perturbation: Optional[Tuple[LineForest, TensorKey, VPoly]] = None) -> VerificationReport:
    """inverse_map must not see the choice of representative of a table value"""
    started = time.perf_counter()
    rng = rng if rng is not None else np.random.default_rng(settings.DEFAULT_SEED)
    X = inverse_map(Y)
    candidates = []
    for forest in all_line_forests(Y.n):
        for key in reduced_keys(Y.module, forest, Y.max_d_power()):
            names = Y.module.names_of_degree(forest.edge_count + Y.module.tensor_degree(key) - Y.degree)
            if names:
                candidates.append((forest, key, names))
    if perturbation is not None:
        plans = [perturbation]
    else:
        plans = []
        for _ in range(perturbations if candidates else 0):
            forest, key, names = candidates[int(rng.integers(len(candidates)))]
            plans.append((forest, key, _random_perturbation(Y, rng, forest, names)))
    family, size, sampled = input_family(Y.module, Y.n, rng, cap)
    failures: List[Counterexample] = []
    total = 0
    for forest, key, delta in plans:
        X2 = inverse_map(Y.replaced(forest, key, Y.value(forest, key) + delta))
        inputs = [(key, p_gamma(forest.to_graph()))] + family
        for k, f in inputs:
            total += 1
            v = TensorElem.basis(k)
            expected, got = X(v, f), X2(v, f)
            if expected != got:
                label = f"[{forest}] {tensor_str(key)} + ({delta}); {_describe(k, f)}"
                logger.warning(f"Representative dependence: {label}")
                failures.append(Counterexample(input=label, expected=str(expected), got=str(got)))
    return _report("well-definedness", Y.n, Y.degree, started, total, failures, _family_details(size, sampled, cap))


def output_degree(value: QuotElem, module: FreeDModule) -> int:
    return max((module.degree_of(name) for _, name, _ in value.terms), default=-1)


def check_filtration(X: ChiralOp, r: int, inputs: Optional[Sequence[Input]] = None,
                     rng: Optional[np.random.Generator] = None,
                     cap: Optional[int] = None) -> FiltrationWitness:
    """Inputs of level s (generator degree plus divisor count) must land in degrees <= s - r.

    A zero output lies in every level, negative ones included.
    """
    witness = FiltrationWitness(degree_r=r)
    if inputs is None:
        inputs, witness.family_size, witness.sampled = input_family(X.module, X.n, rng, cap)
    else:
        witness.family_size = len(inputs)
    for key, f in inputs:
        level = X.module.tensor_degree(key) + f.divisor_count()
        value = X(TensorElem.basis(key), f)
        observed = output_degree(value, X.module)
        case = FiltrationCase(level=level, input=_describe(key, f), bound=level - r, observed=observed,
                              ok=not value.terms or observed <= level - r)
        if not case.ok:
            logger.warning(f"Filtration violated: {case.input} reaches degree {observed} > {level - r}")
        witness.cases.append(case)
    return witness


def _divided_shift(P: VPoly, m: int) -> VPoly:
    """lambda^(j) -> lambda^(j-m) on the first variable, zero below degree zero"""
    terms = {}
    for (exps, name, a), c in P.terms.items():
        j = exps[0]
        if j - m < 0:
            continue
        terms[((j - m,) + exps[1:], name, a)] = c * Fraction(factorial(j), factorial(j - m))
    return VPoly(P.nvars, P.kind, terms)


def two_point_oracle(Y: ClassicalOp, key: TensorKey, m: int) -> QuotElem:
    """Closed form of X(v1 (x) v2 (x) z12^m) in two variables"""
    edgeless = LineForest(2, ((1,), (2,)))
    line = LineForest(2, ((1, 2),))
    P = canonicalize(lambdas_to_lambda(Y.value(edgeless, key), edgeless))
    total = _divided_shift(P, m) * (-1 if m % 2 else 1)
    if m <= -1:
        k = -m - 1
        sign = 1 if (m + 1) % 2 == 0 else -1
        for a in range(k + 1):
            b = k - a
            value = lambdas_to_lambda(Y.value(line, bump_key(key, 1, b)), line)
            total = total + value.mul_monomial((a, 0), Fraction(sign, factorial(a) * factorial(b)))
    return canonicalize(total)


def single_line_oracle(Y: ClassicalOp, key: TensorKey, f: DiagRat) -> QuotElem:
    """Direct iterated residue along 1->2->3 with the exponential expanded in z13 and z23"""
    line = LineForest(3, ((1, 2, 3),))
    bound = sum(f.poles.values())
    total = VPoly.zero(3, VarKind.LAMBDA)
    for a in range(bound + 1):
        for b in range(bound + 1 - a):
            g = f * DiagRat.diagonal(1, 3, a, 3) * DiagRat.diagonal(2, 3, b, 3)
            value = residue(residue(g, 1, 2), 2, 3)
            if value.is_zero():
                continue
            if not value.is_constant():
                raise InconsistentResidueError(f"line residue of {g} is not constant: {value}")
            weight = value.constant_value() * (-1) ** (a + b) / (factorial(a) * factorial(b))
            for i in range(a + 1):
                for j in range(b + 1):
                    shifted = _shift_key(key, (a - i, b - j, 0))
                    lifted = lambdas_to_lambda(Y.value(line, shifted), line)
                    total = total + lifted.mul_monomial((i, j, 0), weight * comb(a, i) * comb(b, j))
    return canonicalize(total)


def edgeless_oracle(Y: ClassicalOp, key: TensorKey, f: DiagRat) -> QuotElem:
    """f(w_1..w_n) * Y^edgeless(v) for a table supported on the edgeless forest"""
    edgeless = LineForest(Y.n, tuple((i,) for i in range(1, Y.n + 1)))
    F = f.relabel({i: i for i in f.labels}, VarKind.W)
    convolved = convolve(F, Y.value(edgeless, key).coefficients())
    poly = VPoly.from_coefficients(convolved, Y.n, VarKind.BIGLAMBDA)
    return canonicalize(lambdas_to_lambda(poly, edgeless))


def corrupted(X: ChiralOp) -> ChiralOp:
    """Doubles the output on inputs with a pole; a negative control for the checks"""

    def evaluate(key: TensorKey, f: DiagRat) -> QuotElem:
        value = X.evaluator(key, f)
        return value * 2 if f.divisor_count() else value

    return ChiralOp(X.module, X.n, evaluate, label=f"corrupted {X.label}")


def oracle_operation(module: FreeDModule, n: int, oracle: Callable[[TensorKey, DiagRat], QuotElem]) -> ChiralOp:
    return ChiralOp(module, n, oracle, label="oracle")
