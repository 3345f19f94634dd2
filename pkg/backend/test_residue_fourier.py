import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import ArityMismatchError, TruncationInstabilityError
from app.services.exact_algebra import DiagRat, MPoly, VarId, VarKind
from app.services.graph_core import LineForest, all_line_forests, p_gamma
from app.services.residue_fourier import (
    PolyOverDiagRat,
    convolve,
    fourier,
    gamma_residue,
    iota_expand,
    line_residue,
    residue,
    residue_moments,
)

W = VarKind.W


def zz(i, j, exp=1, n=3):
    return DiagRat.diagonal(i, j, exp, n)


def ww(i, j, exp=1, p=2):
    return DiagRat.diagonal(i, j, exp, p, W)


def L(ell, exp=1):
    return MPoly.var(VarId(VarKind.BIGLAMBDA, ell), exp)


@st.composite
def functions(draw, n=3):
    total = DiagRat.zero(n)
    for _ in range(draw(st.integers(1, 2))):
        term = DiagRat.constant(draw(st.integers(1, 3)), n)
        for i, j in itertools.combinations(range(1, n + 1), 2):
            e = draw(st.integers(-2, 1))
            if e:
                term = term * zz(i, j, e, n)
        k = draw(st.integers(0, n))
        if k:
            term = term * DiagRat.variable(k, n)
        total = total + term
    return total


forests3 = st.sampled_from(all_line_forests(3))


# Single residues

def test_residue_examples():
    """Test Res_{z_j} dz_i on the documented inputs"""
    assert residue(zz(1, 2, -1, n=2), 1, 2) == 1
    assert residue(zz(1, 2, 2, n=2), 1, 2).is_zero()
    value = residue(zz(1, 2, -2) * zz(1, 3, -1), 1, 2)
    assert value == -DiagRat.diagonal(2, 3, -2, (2, 3))
    assert value.labels == frozenset({2, 3})


def test_residue_moments_match_direct_residues():
    """Test that shared-derivative moments equal residues of f * z_ij^m"""
    f = zz(1, 2, -3) * zz(1, 3, -1) * DiagRat.variable(1, 3)
    moments = residue_moments(f, 1, 2)
    assert len(moments) == 3
    for m, value in enumerate(moments):
        assert value == residue(f * zz(1, 2, m), 1, 2)


def test_line_residue_keeps_last_vertex():
    """Test residues along one line"""
    value = line_residue(zz(1, 2, -1) * zz(2, 3, -1), [1, 2, 3])
    assert value == DiagRat.constant(1, (3,))


# Forest residues

def test_gamma_residue_edgeless_is_substitution():
    """Test that the edgeless forest renames z_i to w_i"""
    f = zz(1, 2, -1) * DiagRat.variable(3, 3)
    assert gamma_residue(f, LineForest.parse("1 | 2 | 3")) == f.relabel({1: 1, 2: 2, 3: 3}, W)


def test_gamma_residue_delta():
    """Test Res along one forest of p for another forest with as many edges"""
    gamma, other = LineForest.parse("1>2 | 3"), LineForest.parse("1>3 | 2")
    assert gamma_residue(p_gamma(other.to_graph()), gamma).is_zero()
    assert gamma_residue(p_gamma(gamma.to_graph()), gamma) == DiagRat.constant(1, 2, W)


def test_gamma_residue_of_p_gamma_times_q():
    """Test Res(p_forest q) = q with each vertex replaced by the w of its line"""
    gamma = LineForest.parse("1>2 | 3")
    q = DiagRat.variable(1, 3) + DiagRat.variable(3, 3) * 2
    expected = DiagRat.variable(1, 2, W) + DiagRat.variable(2, 2, W) * 2
    assert gamma_residue(p_gamma(gamma.to_graph()) * q, gamma) == expected


def test_gamma_residue_rejects_wrong_arity():
    """Test that the forest must cover the live labels"""
    with pytest.raises(ArityMismatchError):
        gamma_residue(zz(1, 2, -1, n=2), LineForest.parse("1>2>3"))


@given(functions(), forests3, st.integers(1, 3))
def test_residue_of_derivative(f, forest, i):
    """Test Res(d_i f) = d_w Res(f) at last vertices and zero elsewhere"""
    ell = forest.line_index()[i]
    if forest.lines[ell - 1][-1] == i:
        expected = gamma_residue(f, forest).diff(ell)
    else:
        expected = DiagRat.zero(forest.p, W)
    assert gamma_residue(f.diff(i), forest) == expected


@given(functions(), forests3)
def test_residue_of_multiplication_by_last_vertex(f, forest):
    """Test Res(z_i f) = w_l Res(f) for the last vertex i of line l"""
    for ell, line in enumerate(forest.lines, start=1):
        got = gamma_residue(f * DiagRat.variable(line[-1], 3), forest)
        assert got == gamma_residue(f, forest) * DiagRat.variable(ell, forest.p, W)


@given(functions(), forests3)
def test_residue_preserves_translation_invariance(f, forest):
    """Test that residues of translation-invariant functions stay invariant"""
    differences = DiagRat.zero(3)
    for (i, j), d in f.poles.items():
        differences = differences + zz(i, j, -d)
    assert gamma_residue(differences, forest).is_translation_invariant()


# Fourier transform

def test_fourier_examples():
    """Test transforms along the two-vertex line"""
    line = LineForest.parse("1>2")
    assert str(fourier(zz(1, 2, -1, n=2), line)) == "1"
    assert str(fourier(zz(1, 2, -2, n=2), line)) == "-l1"
    assert fourier(zz(1, 2, 1, n=2), line).is_zero()


def test_fourier_detects_short_exponential(monkeypatch):
    """Test that dropping the top moment of the exponential is reported"""
    import app.services.residue_fourier as residue_fourier

    monkeypatch.setattr(residue_fourier.settings, "CHECK_TRUNCATION", True)
    monkeypatch.setattr(residue_fourier, "residue_moments", lambda h, a, b: residue_moments(h, a, b)[:-1])
    with pytest.raises(TruncationInstabilityError):
        fourier(zz(1, 2, -2, n=2), LineForest.parse("1>2"))


def test_fourier_edgeless_is_substitution():
    """Test that the edgeless transform has a single lambda-free term"""
    f = zz(1, 3, -2) * DiagRat.variable(2, 3)
    value = fourier(f, LineForest.parse("1 | 2 | 3"))
    assert list(value.terms) == [(0, 0, 0)]
    assert value.coefficient((0, 0, 0)) == f.relabel({1: 1, 2: 2, 3: 3}, W)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fourier_delta(n):
    """Test F^forest(p_other) = delta for forests with equal edge counts"""
    forests = all_line_forests(n)
    for gamma in forests:
        for other in forests:
            if other.edge_count != gamma.edge_count:
                continue
            value = fourier(p_gamma(other.to_graph()), gamma)
            if other == gamma:
                one = DiagRat.constant(1, gamma.p, W)
                assert value == PolyOverDiagRat(n, gamma.p, {(0,) * n: one})
            else:
                assert value.is_zero()


def test_fourier_vanishes_below_edge_count():
    """Test that too few divisors give a zero transform"""
    assert fourier(zz(1, 2, -3) * DiagRat.variable(1, 3), LineForest.parse("1>2>3")).is_zero()


def test_fourier_full_line_is_constant_in_w():
    """Test that translation-invariant input on the full line gives constant coefficients"""
    f = zz(1, 2, -2) * zz(2, 3, -1) + zz(1, 3, -3) * zz(1, 2)
    assert fourier(f, LineForest.parse("1>2>3")).is_constant_in_w()


@given(functions(), forests3, st.integers(1, 3))
def test_fourier_of_derivative(f, forest, i):
    """Test F(d_i f) against lambda_i F and the last-vertex rule"""
    base = fourier(f, forest)
    ell = forest.line_index()[i]
    line = forest.lines[ell - 1]
    if line[-1] == i:
        expected = base.diff_w(ell)
        for a in line[:-1]:
            expected = expected - base.mul_lambda(a)
    else:
        expected = base.mul_lambda(i)
    assert fourier(f.diff(i), forest) == expected


@given(functions(), forests3, st.integers(1, 3))
def test_fourier_of_multiplication(f, forest, i):
    """Test F(z_i f) = (w_l - d/dlambda_i) F(f)"""
    base = fourier(f, forest)
    expected = base.mul_w(forest.line_index()[i]) - base.diff_lambda(i)
    assert fourier(f * DiagRat.variable(i, 3), forest) == expected


# Expansion and convolution

def test_iota_expand_geometric_series():
    """Test the expansion of 1/(w1 - w2) and its square"""
    assert iota_expand(ww(1, 2, -1), (0, 2)).terms == {(-1, 0): 1, (-2, 1): 1, (-3, 2): 1}
    assert iota_expand(ww(1, 2, -2), (0, 2)).terms == {(-2, 0): 1, (-3, 1): 2, (-4, 2): 3}


def test_iota_expand_polynomial_is_itself():
    """Test that polynomials expand to their own monomials"""
    F = DiagRat.variable(1, 2, W) * DiagRat.variable(2, 2, W) + DiagRat.variable(2, 2, W) * 2
    assert iota_expand(F, (1, 1)).terms == {(1, 1): 1, (0, 1): 2}


def test_iota_expand_checks_caps():
    """Test that one cap per w-variable is required"""
    with pytest.raises(ArityMismatchError):
        iota_expand(ww(1, 2, -1), (1,))


def test_convolve_examples():
    """Test the convolution product on the documented inputs"""
    Q = L(1, 2) * L(2) + 3
    assert convolve(DiagRat.constant(1, 2, W), Q) == Q
    expected = L(1, 2) * L(2) * Fraction(-1, 2) + L(1, 3) * Fraction(-1, 6)
    assert convolve(ww(1, 2, -1), L(1) * L(2)) == expected
    assert str(convolve(ww(1, 2, -1), L(1) * L(2))) == "-1/2*L1^2*L2 - 1/6*L1^3"


def test_convolve_exponent_map_coefficients():
    """Test convolution over an abstract coefficient space"""
    result = convolve(ww(1, 2, -1), {(1, 1): Fraction(1)})
    assert result == {(2, 1): Fraction(-1, 2), (3, 0): Fraction(-1, 6)}


def test_convolution_is_not_an_action():
    """Test 1/(w1-w2) * ((w1-w2) * 1) = 0 while ((w1-w2)/(w1-w2)) * 1 = 1"""
    one = MPoly.one()
    assert convolve(ww(1, 2, -1), convolve(ww(1, 2), one)) == 0
    assert convolve(ww(1, 2, -1) * ww(1, 2), one) == 1


@st.composite
def w_monomials(draw, p=2):
    F = DiagRat.constant(draw(st.integers(1, 3)), p, W)
    for ell in range(1, p + 1):
        F = F * DiagRat.variable(ell, p, W) ** draw(st.integers(0, 1))
    return F * ww(1, 2, draw(st.integers(-3, 1)), p)


lambda_monomials = st.builds(lambda c, a, b: L(1, a) * L(2, b) * c, st.integers(1, 3), st.integers(0, 3),
                             st.integers(0, 3))


@given(w_monomials(), lambda_monomials, st.integers(1, 2))
def test_w_multiplication_is_minus_lambda_derivative(F, Q, ell):
    """Test (w_l F) * Q = -d/dLambda_l (F * Q)"""
    w = DiagRat.variable(ell, 2, W)
    assert convolve(w * F, Q) == -convolve(F, Q).diff(VarId(VarKind.BIGLAMBDA, ell))


@given(w_monomials(), lambda_monomials, st.integers(1, 2))
def test_lambda_commutator_is_w_derivative(F, Q, ell):
    """Test Lambda_l (F * Q) - F * (Lambda_l Q) = (d/dw_l F) * Q"""
    assert L(ell) * convolve(F, Q) - convolve(F, L(ell) * Q) == convolve(F.diff(ell), Q)


@pytest.mark.parametrize("a1,b2", [(-1, 0), (-2, 1), (-3, 2)])
def test_derivative_does_not_pass_through_convolution(a1, b2):
    """Test a witness where -d/dLambda_1 (F * Q) differs from F * (d/dLambda_1 Q)"""
    F, Q = ww(1, 2, a1), L(2, b2)
    assert not (-convolve(F, Q).diff(VarId(VarKind.BIGLAMBDA, 1))).is_zero()
    assert convolve(F, Q.diff(VarId(VarKind.BIGLAMBDA, 1))).is_zero()
