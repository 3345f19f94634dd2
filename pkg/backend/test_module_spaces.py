import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ArityMismatchError, FormatError, IndexOutOfRangeError
from app.models.schemas import ViolationKind
from app.services.exact_algebra import MPoly, VarId, VarKind
from app.services.graph_core import DiGraph, LineForest, all_line_forests
from app.services.module_spaces import (
    ClassicalOp,
    TensorElem,
    VElem,
    VPoly,
    apply_poly_partials,
    canonicalize,
    eval_classical,
    format_classical_table,
    format_module,
    lambda_difference,
    lambda_to_lambdas,
    lambdas_to_lambda,
    mul_lambda,
    parse_classical_table,
    parse_module,
    parse_vpoly,
    random_classical_op,
    reduced_keys,
    validate_classical,
)

LAMBDA = VarKind.LAMBDA
BIG = VarKind.BIGLAMBDA

TWO_POINT_TABLE = """
module a:0 b:1
arity 2
degree 0
1 | 2 : a @ a = a
1 | 2 : a @ b = L1*b
1>2 : a @ a = b + L1*d*b
"""


def lam(module, text, n):
    return parse_vpoly(text, module, n, LAMBDA)


# Modules and tensors

def test_module_text_round_trip():
    """Test the module header format"""
    module = parse_module("module a:0 b:1:odd")
    assert module.names == ["a", "b"]
    assert module.degree_of("b") == 1
    assert format_module(module) == "module a:0 b:1:odd"
    assert parse_module("a:0 b:1:odd") == module


@pytest.mark.parametrize("text", ["module", "module a", "module a:x", "module a:0 a:1", "module l1:0",
                                  "module d:0", "module a:0:even"])
def test_module_rejects(text):
    """Test malformed or reserved generator specs"""
    with pytest.raises(FormatError):
        parse_module(text)


def test_tensor_partials(module):
    """Test d_i on tensors and polynomial partials"""
    v = TensorElem.tensor(VElem.generator("a"), VElem.generator("b"))
    assert str(v.partial(1)) == "d*a @ b"
    x1, x2 = MPoly.var(VarId(VarKind.X, 1)), MPoly.var(VarId(VarKind.X, 2))
    assert apply_poly_partials(MPoly.one(), v) == v
    assert apply_poly_partials(x1, v) == v.partial(1)
    assert str(apply_poly_partials(x1 * x2 ** 2, v)) == "d*a @ d^2*b"
    with pytest.raises(IndexOutOfRangeError):
        apply_poly_partials(MPoly.var(VarId(VarKind.X, 3)), v)
    with pytest.raises(IndexOutOfRangeError):
        v.partial(3)


# Normal forms in V[lambda] / <d + sum lambda>

def test_canonicalize_examples(module):
    """Test elimination of the last lambda"""
    assert str(canonicalize(lam(module, "l2*a", 2))) == "-l1*a - d*a"
    assert canonicalize(lam(module, "d*a + l1*a + l2*a", 2)) == 0
    assert str(canonicalize(lam(module, "l1*l2*a", 2))) == "-l1^2*a - l1*d*a"


def test_canonicalize_arity_zero_is_quotient_by_d(module):
    """Test that with no variables only d-free terms survive"""
    raw = VPoly(0, LAMBDA, {((), "a", 0): 2, ((), "b", 1): 1, ((), "a", 3): 5})
    assert str(canonicalize(raw)) == "2*a"


def test_canonicalize_other_elimination(module):
    """Test elimination of a chosen variable"""
    value = canonicalize(lam(module, "l1*a", 2), eliminate=1)
    assert value.eliminate == 1
    assert str(value) == "-l2*a - d*a"
    with pytest.raises(IndexOutOfRangeError):
        canonicalize(lam(module, "a", 2), eliminate=3)


@st.composite
def vpolys(draw, nvars=3):
    terms = {}
    for _ in range(draw(st.integers(0, 4))):
        exps = tuple(draw(st.integers(0, 2)) for _ in range(nvars))
        key = (exps, draw(st.sampled_from(["a", "b"])), draw(st.integers(0, 2)))
        terms[key] = terms.get(key, 0) + draw(st.integers(-3, 3))
    return VPoly(nvars, LAMBDA, terms)


@given(vpolys())
def test_canonicalize_is_idempotent(raw):
    """Test canonicalize(canonicalize(q)) = canonicalize(q)"""
    once = canonicalize(raw)
    assert canonicalize(once.raw()) == once
    assert all(exps[2] == 0 for exps, _, _ in once.terms)


@given(vpolys())
def test_relation_multiples_vanish(raw):
    """Test canonicalize((d + l1 + l2 + l3) Q) = 0"""
    total = raw.apply_d()
    for k in (1, 2, 3):
        total = total + raw.mul_var(k)
    assert canonicalize(total) == 0


def test_mul_lambda_and_lambda_difference(module):
    """Test lambda multiplication and the lambda-derivative difference on classes"""
    q = canonicalize(lam(module, "l1*a", 2))
    assert str(mul_lambda(q, 2)) == "-l1^2*a - l1*d*a"
    assert str(lambda_difference(q, 1, 2)) == "-a"
    raw = lam(module, "l2*a", 2)
    canonical = canonicalize(raw)
    assert lambda_difference(canonical, 1, 2) == canonicalize(raw.diff_var(2) - raw.diff_var(1))


def test_lambda_conversions(module):
    """Test Lambda to lambda substitution and its left inverse on classes"""
    gamma = LineForest.parse("1>2 | 3")
    value = parse_vpoly("L1*a + L2^2*b", module, 2)
    lifted = lambdas_to_lambda(value, gamma)
    assert lifted == lam(module, "l1*a + l2*a + l3^2*b", 3)
    assert lambda_to_lambdas(lifted, gamma) == canonicalize(value)
    with pytest.raises(ArityMismatchError):
        lambdas_to_lambda(value, LineForest.parse("1>2>3"))


# Classical operations

def test_table_round_trip(module):
    """Test parse and format of classical tables"""
    Y = parse_classical_table(TWO_POINT_TABLE)
    assert Y.n == 2 and Y.degree == 0
    assert [str(f) for f in Y.forests] == ["1 | 2", "1>2"]
    assert parse_classical_table(format_classical_table(Y)) == Y
    assert format_classical_table(parse_classical_table(format_classical_table(Y))) == format_classical_table(Y)


@pytest.mark.parametrize("text", [
    "arity 1\n1 : a = a\n",
    "module a:0\narity 2\n1 : a = a\n",
    "module a:0\narity 1\n1 : c = a\n",
    "module a:0\narity 1\n1 : a = a + z1\n",
    "module a:0\narity 1\n1 a = a\n",
])
def test_table_rejects(text):
    """Test malformed table text"""
    with pytest.raises(FormatError):
        parse_classical_table(text)


def test_value_on_non_reduced_keys(module):
    """Test d at a last vertex is rewritten through the line relation"""
    Y = parse_classical_table("module a:0 b:1\narity 1\ndegree 0\n1 : a = a\n")
    forest = LineForest.parse("1")
    assert str(Y.value(forest, (("a", 1),))) == "-L1*a"
    assert str(Y.value(forest, (("a", 2),))) == "L1^2*a"
    line = LineForest.parse("1>2")
    Y2 = parse_classical_table(TWO_POINT_TABLE)
    # d on vertex 2 is -Lambda_1 minus d on vertex 1
    expected = -Y2.value(line, (("a", 0), ("a", 0))).mul_var(1) - Y2.value(line, (("a", 1), ("a", 0)))
    assert Y2.value(line, (("a", 0), ("a", 1))) == expected


def test_eval_classical_orientation_and_cycles(module):
    """Test values on reversed edges and on cyclic graphs"""
    Y = parse_classical_table(TWO_POINT_TABLE)
    v = TensorElem.basis((("a", 0), ("a", 0)))
    forward = eval_classical(Y, DiGraph(2, ((1, 2),)), v)
    assert forward
    assert eval_classical(Y, DiGraph(2, ((2, 1),)), v) == forward * -1
    assert eval_classical(Y, DiGraph(2, ((1, 2), (2, 1))), v) == 0


def test_eval_classical_cycle_sum_vanishes(module, rng):
    """Test that graph values add to zero around a marked cycle"""
    Y = random_classical_op(module, 3, 1, rng=rng)
    g = DiGraph(3, ((1, 2), (2, 3), (3, 1)))
    for key in module.tensor_basis(3):
        v = TensorElem.basis(key)
        total = eval_classical(Y, g.without_edge((1, 2)), v)
        total = total + eval_classical(Y, g.without_edge((2, 3)), v) + eval_classical(Y, g.without_edge((3, 1)), v)
        assert total == 0


def test_eval_classical_lands_in_predicted_degree(module, rng):
    """Test the grading s + t - r of forest values"""
    r = 1
    Y = random_classical_op(module, 2, r, rng=rng)
    for forest in all_line_forests(2):
        for key in reduced_keys(module, forest, 1):
            value = eval_classical(Y, forest.to_graph(), TensorElem.basis(key))
            target = forest.edge_count + module.tensor_degree(key) - r
            assert all(module.degree_of(name) == target for _, name, _ in value.terms)


def test_validate_accepts_valid_tables(module, rng):
    """Test validation of the zero operation, n = 1 maps and random tables"""
    assert validate_classical(ClassicalOp(module, 2, 0)).ok
    assert validate_classical(parse_classical_table("module a:0 b:1\narity 1\ndegree 0\n1 : b = 2*d*b\n")).ok
    for r in range(3):
        assert validate_classical(random_classical_op(module, 2, r, rng=rng)).ok


def test_validate_reports_single_violation(module):
    """Test that one inconsistent explicit entry gives exactly one violation"""
    Y = parse_classical_table("module a:0 b:1\narity 1\ndegree 0\n1 : a = a\n1 : d*a = 5*a\n")
    report = validate_classical(Y)
    assert len(report.violations) == 1
    violation = report.violations[0]
    assert violation.kind == ViolationKind.SESQUILINEARITY
    assert (violation.forest, violation.tensor, violation.line) == ("1", "a", 1)


def test_validate_reports_grading(module):
    """Test that values in the wrong degree are reported"""
    Y = parse_classical_table("module a:0 b:1\narity 1\ndegree 0\n1 : a = b\n")
    kinds = [v.kind for v in validate_classical(Y).violations]
    assert kinds == [ViolationKind.GRADING]


def test_classical_op_checks_arity(module):
    """Test that table entries must match the arity"""
    with pytest.raises(ArityMismatchError):
        ClassicalOp(module, 2, 0, {LineForest.parse("1>2>3"): {}})
    with pytest.raises(ArityMismatchError):
        ClassicalOp(module, 1, 0, {LineForest.parse("1"): {(("a", 0),): VPoly(1, LAMBDA, {((0,), "a", 0): 1})}})
