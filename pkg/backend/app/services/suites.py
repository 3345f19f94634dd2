"""Seeded verification suites.

Each suite expands into independent ``Case`` objects whose check functions live at module level so
they can run in worker processes. Results are grouped by check and aggregated in sorted key order,
so reports do not depend on the number of workers.
"""

import concurrent.futures
import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from math import factorial
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..core.cache import cache_manager
from ..core.config import settings
from ..core.errors import OperadError, UnknownSuiteError
from ..models.schemas import Counterexample, OutputFormat, SuiteName, VerificationReport
from .exact_algebra import DiagRat, MPoly, VarId, VarKind
from .graph_core import (
    DiGraph,
    LineCombo,
    LineForest,
    all_line_forests,
    apply_perm,
    compose_perms,
    decompose_to_lines,
    enumerate_graphs,
    has_cycle,
    p_gamma,
    quotient_dimension,
    rewrite_to_lines,
    simple_cycles,
)
from .iso_maps import (
    check_filtration,
    check_sesquilinearity,
    check_well_definedness,
    edgeless_oracle,
    forward_map,
    inverse_map,
    sample_inputs,
    single_line_oracle,
    two_point_oracle,
)
from .lie_check import all_bracket_words, bracket_to_line, classical_dimension, connected_forests, line_to_bracket
from .module_spaces import ClassicalOp, FreeDModule, TensorElem, parse_module, random_classical_op, tensor_str
from .residue_fourier import PolyOverDiagRat, convolve, fourier, gamma_residue

logger = logging.getLogger(__name__)

ROUNDTRIP_MODULE = "module a:0 b:1"


class Outcome(NamedTuple):
    counterexample: Optional[Counterexample] = None
    value: Any = None


@dataclass(frozen=True)
class Case:
    group: str
    key: Tuple
    check: Callable[..., Outcome]
    args: Tuple = field(default=())


class CaseResult(NamedTuple):
    group: str
    key: Tuple
    outcome: Outcome
    elapsed_ms: float


class SuiteRun(NamedTuple):
    exit_code: int
    reports: List[VerificationReport]
    output: str


def _mismatch(label: str, expected: Any, got: Any) -> Outcome:
    return Outcome(Counterexample(input=label, expected=str(expected), got=str(got)))


def _compare(label: str, expected: Any, got: Any) -> Outcome:
    return Outcome() if expected == got else _mismatch(label, expected, got)


def _run_case(case: Case) -> CaseResult:
    started = time.perf_counter()
    try:
        outcome = case.check(*case.args)
    except OperadError as e:
        logger.error(f"{case.group} {case.key}: {type(e).__name__}: {e}")
        outcome = _mismatch(f"{case.group} {case.key}", "no error", f"{type(e).__name__}: {e}")
    return CaseResult(case.group, case.key, outcome, (time.perf_counter() - started) * 1000)


def _execute(suite: str, n: int, cases: List[Case]) -> List[VerificationReport]:
    """Run cases (in a process pool when WORKERS > 1) and build one report per group"""
    if settings.WORKERS > 1 and len(cases) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=settings.WORKERS) as executor:
            futures = [executor.submit(_run_case, case) for case in cases]
            results = [future.result() for future in concurrent.futures.as_completed(futures)]
    else:
        results = [_run_case(case) for case in cases]

    groups: Dict[str, List[CaseResult]] = {}
    for result in results:
        groups.setdefault(result.group, []).append(result)
    reports = []
    for group in dict.fromkeys(case.group for case in cases):
        ordered = sorted(groups[group], key=lambda r: r.key)
        failures = [r.outcome.counterexample for r in ordered if r.outcome.counterexample is not None]
        values = [r.outcome.value for r in ordered if r.outcome.value is not None]
        report = VerificationReport(
            suite=f"{suite}/{group}",
            n=n,
            cases_total=len(ordered),
            cases_failed=len(failures),
            first_counterexample=failures[0] if failures else None,
            elapsed_ms=sum(r.elapsed_ms for r in ordered),
            details={"values": values} if values else None,
        )
        if failures:
            logger.warning(f"{report.suite}: {len(failures)}/{len(ordered)} cases failed")
        else:
            logger.info(f"{report.suite}: {len(ordered)} cases passed")
        reports.append(report)
    return reports


def _seeds(rng: np.random.Generator, count: int) -> List[int]:
    return [int(s) for s in rng.integers(0, 2**31 - 1, size=count)]


# Random inputs

def _random_term(n: int, rng: np.random.Generator, max_pole: int = 2, z_factor: bool = False) -> DiagRat:
    """c * prod z_ij^e over random pairs, optionally times a power of one z_k"""
    f = DiagRat.constant(int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1), n)
    for i, j in itertools.combinations(range(1, n + 1), 2):
        if rng.random() < 0.6:
            e = int(rng.integers(-max_pole, 2))
            if e:
                f = f * DiagRat.diagonal(i, j, e, n)
    if z_factor:
        e = int(rng.integers(0, 3))
        if e:
            f = f * DiagRat.variable(int(rng.integers(1, n + 1)), n) ** e
    return f


def _random_function(n: int, rng: np.random.Generator, z_factor: bool = False) -> DiagRat:
    f = DiagRat.zero(n)
    for _ in range(int(rng.integers(1, 3))):
        f = f + _random_term(n, rng, z_factor=z_factor)
    return f


def _random_forest(n: int, rng: np.random.Generator) -> LineForest:
    forests = all_line_forests(n)
    return forests[int(rng.integers(len(forests)))]


def _random_cyclic_graph(n: int, rng: np.random.Generator) -> DiGraph:
    k = int(rng.integers(2, n + 1))
    cycle = [int(v) for v in rng.permutation(np.arange(1, n + 1))[:k]]
    edges = set(zip(cycle, cycle[1:] + cycle[:1]))
    for i, j in itertools.permutations(range(1, n + 1), 2):
        if (i, j) not in edges and (j, i) not in edges and rng.random() < 0.25:
            edges.add((i, j))
    return DiGraph(n, tuple(edges))


def _random_w_monomial(p: int, rng: np.random.Generator) -> DiagRat:
    labels = range(1, p + 1)
    F = DiagRat.constant(int(rng.integers(1, 4)), labels, VarKind.W)
    for ell in labels:
        e = int(rng.integers(0, 2))
        if e:
            F = F * DiagRat.variable(ell, labels, VarKind.W) ** e
    for i, j in itertools.combinations(labels, 2):
        e = int(rng.integers(-2, 2))
        if e:
            F = F * DiagRat.diagonal(i, j, e, labels, VarKind.W)
    return F


def _random_lambda_monomial(p: int, rng: np.random.Generator) -> MPoly:
    Q = MPoly.const(int(rng.integers(1, 4)))
    for ell in range(1, p + 1):
        Q = Q * MPoly.var(VarId(VarKind.BIGLAMBDA, ell), int(rng.integers(0, 4)))
    return Q


def _lam(ell: int) -> MPoly:
    return MPoly.var(VarId(VarKind.BIGLAMBDA, ell))


# line-basis

def check_basis_dimension(n: int) -> Outcome:
    expected = factorial(n)
    got = (quotient_dimension(n), len(all_line_forests(n)))
    if got != (expected, expected):
        return _mismatch(f"n={n}: (quotient dimension, line forests)", (expected, expected), got)
    return Outcome(value=got[0])


def check_decompose_matches_rewrite(g: DiGraph) -> Outcome:
    return _compare(f"decompose vs rewrite of {g}", rewrite_to_lines(g), decompose_to_lines(g))


def check_delta(forest: LineForest) -> Outcome:
    return _compare(f"decompose [{forest}]", LineCombo(forest.n, {forest: 1}), decompose_to_lines(forest.to_graph()))


def check_cycle_relations(g: DiGraph) -> Outcome:
    zero = LineCombo(g.n)
    if decompose_to_lines(g) != zero:
        return _mismatch(f"decompose {g}", zero, decompose_to_lines(g))
    for cycle in simple_cycles(g):
        total = zero
        for edge in cycle:
            total = total + decompose_to_lines(g.without_edge(edge))
        if total != zero:
            return _mismatch(f"sum over cycle {cycle} of {g}", zero, total)
    return Outcome()


def check_group_action(sigma: Tuple[int, ...], tau: Tuple[int, ...], g: DiGraph) -> Outcome:
    return _compare(
        f"sigma={sigma} tau={tau} on {g}",
        apply_perm(sigma, apply_perm(tau, g)),
        apply_perm(compose_perms(sigma, tau), g),
    )


def line_basis_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    cases = []
    for n in range(1, min(n_max, 4) + 1):
        cases.append(Case("dimension", (n,), check_basis_dimension, (n,)))
        for k, g in enumerate(enumerate_graphs(n)):
            cases.append(Case("decompose-vs-rewrite", (n, k), check_decompose_matches_rewrite, (g,)))
            if has_cycle(g) and (n <= 3 or rng.random() < 0.05):
                cases.append(Case("cycle-relations", (n, k), check_cycle_relations, (g,)))
    for n in range(1, min(n_max, 5) + 1):
        for k, forest in enumerate(all_line_forests(n)):
            cases.append(Case("delta", (n, k), check_delta, (forest,)))
    for k in range(20):
        n = int(rng.integers(2, max(2, min(n_max, 5)) + 1))
        sigma = tuple(int(v) for v in rng.permutation(np.arange(1, n + 1)))
        tau = tuple(int(v) for v in rng.permutation(np.arange(1, n + 1)))
        cases.append(Case("group-action", (k,), check_group_action, (sigma, tau, _random_cyclic_graph(n, rng))))
    return cases


# fourier-delta

def check_fourier_delta(forest: LineForest) -> Outcome:
    n, p = forest.n, forest.p
    one = PolyOverDiagRat(n, p, {(0,) * n: DiagRat.constant(1, range(1, p + 1), VarKind.W)})
    zero = PolyOverDiagRat(n, p)
    for other in all_line_forests(n):
        if other.edge_count != forest.edge_count:
            continue
        got = fourier(p_gamma(other.to_graph()), forest)
        expected = one if other == forest else zero
        if got != expected:
            return _mismatch(f"F^[{forest}](p_[{other}])", expected, got)
    return Outcome()


def fourier_delta_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    return [
        Case("delta", (n, k), check_fourier_delta, (forest,))
        for n in range(1, min(n_max, 5) + 1)
        for k, forest in enumerate(all_line_forests(n))
    ]


# residue-lemmas

def check_translation_invariance(f: DiagRat, forest: LineForest) -> Outcome:
    value = gamma_residue(f, forest)
    if not value.is_translation_invariant():
        return _mismatch(f"Res[{forest}] of {f}", "translation invariant", value)
    return Outcome()


def check_divisor_drop(f: DiagRat, forest: LineForest) -> Outcome:
    value = gamma_residue(f, forest)
    bound = f.divisor_count() - forest.edge_count
    if value.is_zero():
        return Outcome()
    if bound < 0:
        return _mismatch(f"Res[{forest}] of {f}", 0, value)
    if value.divisor_count() > bound:
        return _mismatch(f"Res[{forest}] of {f}", f"at most {bound} divisors", value)
    return Outcome()


def check_residue_derivative(f: DiagRat, forest: LineForest, i: int) -> Outcome:
    got = gamma_residue(f.diff(i), forest)
    line = forest.line_index()[i]
    if forest.lines[line - 1][-1] == i:
        expected = gamma_residue(f, forest).diff(line)
    else:
        expected = DiagRat.zero(range(1, forest.p + 1), VarKind.W)
    return _compare(f"Res[{forest}](d/dz{i} {f})", expected, got)


def check_residue_multiplication(f: DiagRat, forest: LineForest, ell: int) -> Outcome:
    i = forest.lines[ell - 1][-1]
    got = gamma_residue(f * DiagRat.variable(i, forest.n), forest)
    expected = gamma_residue(f, forest) * DiagRat.variable(ell, range(1, forest.p + 1), VarKind.W)
    return _compare(f"Res[{forest}](z{i} * {f})", expected, got)


def check_cycle_cancellation(g: DiGraph, cycle: List[Tuple[int, int]]) -> Outcome:
    total = DiagRat.zero(g.n)
    for edge in cycle:
        total = total + p_gamma(g.without_edge(edge))
    return _compare(f"sum over cycle {cycle} of p_({g} minus e)", 0, total)


def check_fourier_vanishing(f: DiagRat, forest: LineForest) -> Outcome:
    value = fourier(f, forest)
    return Outcome() if value.is_zero() else _mismatch(f"F^[{forest}]({f})", 0, value)


def check_fourier_derivative(f: DiagRat, forest: LineForest, i: int) -> Outcome:
    base = fourier(f, forest)
    line = forest.line_index()[i]
    vertices = forest.lines[line - 1]
    if vertices[-1] == i:
        expected = base.diff_w(line)
        for a in vertices[:-1]:
            expected = expected - base.mul_lambda(a)
    else:
        expected = base.mul_lambda(i)
    return _compare(f"F^[{forest}](d/dz{i} {f})", expected, fourier(f.diff(i), forest))


def check_fourier_multiplication(f: DiagRat, forest: LineForest, i: int) -> Outcome:
    base = fourier(f, forest)
    expected = base.mul_w(forest.line_index()[i]) - base.diff_lambda(i)
    return _compare(f"F^[{forest}](z{i} * {f})", expected, fourier(f * DiagRat.variable(i, forest.n), forest))


def check_full_line_constant(f: DiagRat, forest: LineForest) -> Outcome:
    value = fourier(f, forest)
    if not value.is_constant_in_w():
        return _mismatch(f"F^[{forest}]({f})", "constant in w", value)
    return Outcome()


def residue_lemma_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    cases = []
    top = max(2, min(n_max, 4))
    for k in range(settings.RESIDUE_SAMPLES):
        n = int(rng.integers(2, top + 1))
        forest = _random_forest(n, rng)
        i = int(rng.integers(1, n + 1))
        cases.append(Case("translation-invariance", (k,), check_translation_invariance,
                          (_random_function(n, rng), forest)))
        cases.append(Case("divisor-drop", (k,), check_divisor_drop, (_random_term(n, rng), forest)))
        cases.append(Case("residue-derivative", (k,), check_residue_derivative,
                          (_random_function(n, rng, z_factor=True), forest, i)))
        cases.append(Case("residue-multiplication", (k,), check_residue_multiplication,
                          (_random_function(n, rng, z_factor=True), forest, int(rng.integers(1, forest.p + 1)))))
        g = _random_cyclic_graph(n, rng)
        cycles = simple_cycles(g)
        cases.append(Case("cycle-cancellation", (k,), check_cycle_cancellation,
                          (g, cycles[int(rng.integers(len(cycles)))])))
        term = _random_term(n, rng)
        if term.divisor_count() < forest.edge_count:
            cases.append(Case("fourier-vanishing", (k,), check_fourier_vanishing, (term, forest)))
        cases.append(Case("fourier-derivative", (k,), check_fourier_derivative,
                          (_random_function(n, rng, z_factor=True), forest, i)))
        cases.append(Case("fourier-multiplication", (k,), check_fourier_multiplication,
                          (_random_function(n, rng, z_factor=True), forest, i)))
        full_line = LineForest(n, (tuple(range(1, n + 1)),))
        cases.append(Case("full-line-constant", (k,), check_full_line_constant,
                          (_random_function(n, rng), full_line)))
    return cases


# convolution

def check_w_multiplication(F: DiagRat, Q: MPoly, ell: int) -> Outcome:
    w = DiagRat.variable(ell, F.labels, VarKind.W)
    expected = -convolve(F, Q).diff(VarId(VarKind.BIGLAMBDA, ell))
    return _compare(f"(w{ell} * {F}) * ({Q})", expected, convolve(w * F, Q))


def check_lambda_commutator(F: DiagRat, Q: MPoly, ell: int) -> Outcome:
    got = _lam(ell) * convolve(F, Q) - convolve(F, _lam(ell) * Q)
    return _compare(f"L{ell} commutator of {F} on ({Q})", convolve(F.diff(ell), Q), got)


def check_non_action() -> Outcome:
    labels = (1, 2)
    diagonal = DiagRat.diagonal(1, 2, 1, labels, VarKind.W)
    inverse = DiagRat.diagonal(1, 2, -1, labels, VarKind.W)
    one = MPoly.one()
    nested = convolve(inverse, convolve(diagonal, one))
    direct = convolve(inverse * diagonal, one)
    if nested != 0 or direct != 1:
        return _mismatch("1/(w1-w2) * ((w1-w2) * 1) against ((w1-w2)/(w1-w2)) * 1", (0, 1), (nested, direct))
    return Outcome()


def check_derivative_asymmetry(a1: int, b2: int) -> Outcome:
    """F = (w1-w2)^a1, Q = L2^b2: -d/dL1 (F * Q) is nonzero while F * (d/dL1 Q) = 0"""
    F = DiagRat.diagonal(1, 2, a1, (1, 2), VarKind.W)
    Q = _lam(2) ** b2
    lhs = -convolve(F, Q).diff(VarId(VarKind.BIGLAMBDA, 1))
    rhs = convolve(F, Q.diff(VarId(VarKind.BIGLAMBDA, 1)))
    if lhs.is_zero() or not rhs.is_zero():
        return _mismatch(f"F={F}, Q={Q}", "nonzero against 0", f"{lhs} against {rhs}")
    return Outcome()


def convolution_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    cases = [Case("non-action", (0,), check_non_action)]
    top = max(1, min(n_max, 3))
    for k in range(settings.CONVOLUTION_SAMPLES):
        p = int(rng.integers(1, top + 1))
        F, Q = _random_w_monomial(p, rng), _random_lambda_monomial(p, rng)
        ell = int(rng.integers(1, p + 1))
        cases.append(Case("w-multiplication", (k,), check_w_multiplication, (F, Q, ell)))
        cases.append(Case("lambda-commutator", (k,), check_lambda_commutator, (F, Q, ell)))
    for a1 in (-1, -2, -3):
        for b2 in (0, 1, 2):
            cases.append(Case("derivative-asymmetry", (a1, b2), check_derivative_asymmetry, (a1, b2)))
    return cases


# roundtrip

def _input_label(key, f) -> str:
    return f"v={tensor_str(key)} f={f}"


def check_roundtrip_sesquilinearity(Y: ClassicalOp, seed: int) -> Outcome:
    report = check_sesquilinearity(inverse_map(Y), rng=np.random.default_rng(seed))
    return Outcome(report.first_counterexample)


def check_roundtrip_well_definedness(Y: ClassicalOp, seed: int) -> Outcome:
    report = check_well_definedness(Y, rng=np.random.default_rng(seed))
    return Outcome(report.first_counterexample)


def check_roundtrip_filtration(Y: ClassicalOp, seed: int) -> Outcome:
    witness = check_filtration(inverse_map(Y), Y.degree, rng=np.random.default_rng(seed))
    if witness.ok:
        return Outcome()
    case = witness.violations[0]
    return _mismatch(case.input, f"degree <= {case.bound}", f"degree {case.observed}")


def check_forward_inverse(Y: ClassicalOp, seed: int) -> Outcome:
    return _compare(f"forward(inverse(Y)) for {Y!r}", Y, forward_map(inverse_map(Y), Y.degree))


def check_pruning(Y: ClassicalOp, seed: int) -> Outcome:
    pruned, full = inverse_map(Y), inverse_map(Y, prune=False)
    for key, f in sample_inputs(Y.module, Y.n, np.random.default_rng(seed), settings.SESQUILINEARITY_CASES):
        v = TensorElem.basis(key)
        expected, got = full(v, f), pruned(v, f)
        if expected != got:
            return _mismatch(_input_label(key, f), expected, got)
    return Outcome()


def check_single_line(Y: ClassicalOp, seed: int) -> Outcome:
    line = LineForest(3, ((1, 2, 3),))
    restricted = Y.restricted([line])
    X = inverse_map(restricted)
    for key, f in sample_inputs(Y.module, 3, np.random.default_rng(seed), settings.SESQUILINEARITY_CASES):
        expected, got = single_line_oracle(restricted, key, f), X(TensorElem.basis(key), f)
        if expected != got:
            return _mismatch(_input_label(key, f), expected, got)
    return Outcome()


ROUNDTRIP_CHECKS = {
    "sesquilinearity": check_roundtrip_sesquilinearity,
    "well-definedness": check_roundtrip_well_definedness,
    "filtration": check_roundtrip_filtration,
    "forward-inverse": check_forward_inverse,
    "pruning": check_pruning,
}


def roundtrip_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    module = parse_module(ROUNDTRIP_MODULE)
    arities = [n for n in (1, 2, 3) if n <= n_max][-2:] or [1]
    cases = []
    for k in range(settings.ROUNDTRIP_OPERATIONS):
        n, r = arities[k % len(arities)], k % 3
        op_seed, case_seed = _seeds(rng, 2)
        Y = random_classical_op(module, n, r, rng=np.random.default_rng(op_seed))
        for group, check in ROUNDTRIP_CHECKS.items():
            cases.append(Case(group, (k,), check, (Y, case_seed)))
        if n == 3:
            cases.append(Case("single-line", (k,), check_single_line, (Y, case_seed)))
    return cases


# n2-closed-form

def check_two_point_closed_form(Y: ClassicalOp, m: int) -> Outcome:
    X = inverse_map(Y)
    f = DiagRat.diagonal(1, 2, m, 2)
    for key in Y.module.tensor_basis(2, settings.TABLE_D_CAP):
        expected, got = two_point_oracle(Y, key, m), X(TensorElem.basis(key), f)
        if expected != got:
            return _mismatch(f"m={m} {_input_label(key, f)}", expected, got)
    return Outcome()


def check_edgeless_support(Y: ClassicalOp, seed: int) -> Outcome:
    edgeless = LineForest(Y.n, tuple((i,) for i in range(1, Y.n + 1)))
    restricted = Y.restricted([edgeless])
    X = inverse_map(restricted)
    for key, f in sample_inputs(Y.module, Y.n, np.random.default_rng(seed), settings.SESQUILINEARITY_CASES):
        expected, got = edgeless_oracle(restricted, key, f), X(TensorElem.basis(key), f)
        if expected != got:
            return _mismatch(_input_label(key, f), expected, got)
    return Outcome()


def closed_form_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    module = parse_module(ROUNDTRIP_MODULE)
    cases = []
    for r in range(3):
        op_seed, case_seed = _seeds(rng, 2)
        Y = random_classical_op(module, 2, r, rng=np.random.default_rng(op_seed))
        for m in range(-3, 4):
            cases.append(Case("two-point", (r, m), check_two_point_closed_form, (Y, m)))
        for n in range(1, min(max(n_max, 2), 3) + 1):
            Yn = Y if n == 2 else random_classical_op(module, n, r, rng=np.random.default_rng(op_seed + n))
            cases.append(Case("edgeless", (r, n), check_edgeless_support, (Yn, case_seed)))
    return cases


# lie-dim

def check_lie_dimension(n: int) -> Outcome:
    expected = factorial(n - 1)
    got = classical_dimension(n)
    if got != expected:
        return _mismatch(f"classical dimension n={n}", expected, got)
    count = len(connected_forests(n))
    if count != expected:
        return _mismatch(f"connected forests n={n}", expected, count)
    return Outcome(value=got)


def check_bracket_bijection(n: int) -> Outcome:
    words = all_bracket_words(n)
    for word in words:
        back = line_to_bracket(bracket_to_line(word))
        if back != word:
            return _mismatch(f"{word}", word, back)
    for forest in connected_forests(n):
        back = bracket_to_line(line_to_bracket(forest))
        if back != forest:
            return _mismatch(f"[{forest}]", forest, back)
    if len(words) != factorial(n - 1):
        return _mismatch(f"bracket words n={n}", factorial(n - 1), len(words))
    return Outcome()


def lie_dim_cases(n_max: int, rng: np.random.Generator) -> List[Case]:
    cases = [Case("dimension", (n,), check_lie_dimension, (n,)) for n in range(1, min(n_max, 5) + 1)]
    cases += [Case("bijection", (n,), check_bracket_bijection, (n,)) for n in range(1, max(n_max, 6) + 1)]
    return cases


SUITES: Dict[str, Callable[[int, np.random.Generator], List[Case]]] = {
    SuiteName.LINE_BASIS.value: line_basis_cases,
    SuiteName.FOURIER_DELTA.value: fourier_delta_cases,
    SuiteName.RESIDUE_LEMMAS.value: residue_lemma_cases,
    SuiteName.CONVOLUTION.value: convolution_cases,
    SuiteName.ROUNDTRIP.value: roundtrip_cases,
    SuiteName.N2_CLOSED_FORM.value: closed_form_cases,
    SuiteName.LIE_DIM.value: lie_dim_cases,
}


def _details_key(report: VerificationReport) -> Optional[str]:
    if report.suite == "lie-dim/dimension":
        return "dims"
    if report.suite == "line-basis/dimension":
        return "dimensions"
    return None


def render(reports: List[VerificationReport], seed: int, fmt: OutputFormat) -> str:
    if OutputFormat(fmt) == OutputFormat.JSON:
        return json.dumps(
            {
                "seed": seed,
                "passed": all(r.passed for r in reports),
                "reports": [r.to_json_dict() for r in reports],
            },
            indent=2,
        )
    lines = [f"seed: {seed}"] + [r.to_text() for r in reports]
    failed = sum(r.cases_failed for r in reports)
    total = sum(r.cases_total for r in reports)
    lines.append(f"{'PASS' if failed == 0 else 'FAIL'}: {total - failed}/{total} cases")
    return "\n".join(lines)


def run_suite(name: str, n_max: int, seed: Optional[int] = None,
              fmt: OutputFormat = OutputFormat.JSON) -> SuiteRun:
    """Run a suite (or ``all``) and return the exit code, reports and rendered output"""
    name = name.value if isinstance(name, SuiteName) else name
    if name != SuiteName.ALL.value and name not in SUITES:
        raise UnknownSuiteError(f"unknown suite '{name}'; choose from {', '.join(list(SUITES) + ['all'])}")
    if n_max < 1:
        raise ValueError("n must be at least 1")
    seed = settings.DEFAULT_SEED if seed is None else seed
    logger.info(f"Running suite {name} up to n={n_max} with seed {seed}")

    names = list(SUITES) if name == SuiteName.ALL.value else [name]
    reports: List[VerificationReport] = []
    for suite in names:
        rng = np.random.default_rng(seed)
        cases = SUITES[suite](n_max, rng)
        logger.info(f"Suite {suite}: {len(cases)} cases, {settings.WORKERS} worker(s)")
        for report in _execute(suite, n_max, cases):
            key = _details_key(report)
            if key and report.details:
                report.details = {key: report.details["values"]}
            reports.append(report)

    logger.info(f"Cache stats: {cache_manager.get_stats()}")
    exit_code = 0 if all(r.passed for r in reports) else 1
    return SuiteRun(exit_code, reports, render(reports, seed, fmt))
