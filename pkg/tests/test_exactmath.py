from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compshift.exactmath import (
    Polynomial,
    RationalMatrix,
    SingularMatrixError,
    format_polynomial,
    format_rational,
    matrix_det,
    matrix_rank,
    matrix_solve,
    parse_rational,
    poly_interpolate,
    rational_arith,
)
from compshift.misometry import build_A

from oracles import a_matrix_determinant, cofactor_det, gauss_rank, lagrange_eval

fractions = st.builds(Fraction, st.integers(-99, 99), st.integers(1, 30))
small_ints = st.integers(-6, 6)


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("text,value", [
    ("3/4", Fraction(3, 4)),
    ("-6/8", Fraction(-3, 4)),
    ("+2", Fraction(2)),
    ("0/5", Fraction(0)),
    (" 7/1 ", Fraction(7)),
])
def test_parse_rational_accepts(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["0.5", "1e3", "1/0", "a/b", "", "1/-2", "1//2"])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_parse_rational_refuses_non_strings():
    with pytest.raises(TypeError):
        parse_rational(0.5)


@given(fractions)
def test_rational_round_trip(x):
    assert parse_rational(format_rational(x)) == x


def test_rational_arith():
    a, b = Fraction(1, 3), Fraction(1, 6)
    assert rational_arith(a, b, "add") == Fraction(1, 2)
    assert rational_arith(a, b, "sub") == Fraction(1, 6)
    assert rational_arith(a, b, "mul") == Fraction(1, 18)
    assert rational_arith(a, b, "div") == 2
    with pytest.raises(ZeroDivisionError):
        rational_arith(a, 0, "div")
    with pytest.raises(ValueError):
        rational_arith(a, b, "pow")


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


def test_polynomial_basics():
    p = Polynomial([1, Fraction(4, 7), 0, 0])
    assert p.coeffs == (1, Fraction(4, 7))
    assert p.degree == 1
    assert Polynomial().degree == -1
    assert str(p) == "4/7 x + 1"
    assert format_polynomial(Polynomial([0, -1, 3])) == "3 x^2 - x"
    assert str(Polynomial()) == "0"
    assert (p * p)(7) == p(7) ** 2
    assert (p - p).is_zero()


@given(st.lists(fractions, max_size=6), fractions, st.integers(-5, 5))
def test_shift_matches_evaluation(cs, x, k):
    p = Polynomial(cs)
    assert p.shift(k)(x) == p(x + k)


@given(st.lists(fractions, min_size=1, max_size=7), st.integers(0, 2))
@settings(max_examples=60)
def test_interpolation_round_trip(cs, extra):
    p = Polynomial(cs)
    pts = [(Fraction(x), p(x)) for x in range(-2, len(cs) - 2 + extra)]
    assert poly_interpolate(pts) == p


@given(st.lists(st.tuples(st.integers(-20, 20), fractions), min_size=1, max_size=6,
                unique_by=lambda t: t[0]), fractions)
@settings(max_examples=60)
def test_interpolation_matches_lagrange(points, x):
    pts = [(Fraction(a), y) for a, y in points]
    p = poly_interpolate(pts)
    assert p.degree <= len(pts) - 1
    assert p(x) == lagrange_eval(pts, x)


def test_interpolation_rejects_duplicate_abscissae():
    with pytest.raises(ValueError):
        poly_interpolate([(1, 2), (1, 3)])


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(small_ints.map(Fraction), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@given(matrices)
@settings(max_examples=80)
def test_rank_matches_plain_elimination(rows):
    assert matrix_rank(RationalMatrix.from_rows(rows)) == gauss_rank(rows)


@given(matrices, st.data())
@settings(max_examples=80)
def test_rank_invariant_under_row_operations(rows, data):
    r0 = matrix_rank(RationalMatrix.from_rows(rows))
    m = [list(r) for r in rows]
    for _ in range(data.draw(st.integers(1, 6))):
        kind = data.draw(st.sampled_from(["swap", "scale", "add"]))
        i = data.draw(st.integers(0, len(m) - 1))
        j = data.draw(st.integers(0, len(m) - 1))
        if kind == "swap":
            m[i], m[j] = m[j], m[i]
        elif kind == "scale":
            f = data.draw(st.builds(Fraction, st.integers(1, 9) | st.integers(-9, -1), st.integers(1, 9)))
            m[i] = [f * x for x in m[i]]
        elif i != j:
            f = data.draw(fractions)
            m[i] = [a + f * b for a, b in zip(m[i], m[j])]
    assert matrix_rank(RationalMatrix.from_rows(m)) == r0


square = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(fractions, min_size=n, max_size=n), min_size=n, max_size=n)
)


@given(square)
@settings(max_examples=60)
def test_det_matches_cofactor_expansion(rows):
    assert matrix_det(RationalMatrix.from_rows(rows)) == cofactor_det(rows)


@given(square, st.data())
@settings(max_examples=60)
def test_solve_round_trip(rows, data):
    M = RationalMatrix.from_rows(rows)
    rhs = data.draw(st.lists(fractions, min_size=M.rows, max_size=M.rows))
    if cofactor_det(rows) == 0:
        with pytest.raises(SingularMatrixError):
            matrix_solve(M, rhs)
    else:
        assert M.matvec(matrix_solve(M, rhs)) == rhs


def test_stacking_and_shapes():
    A = RationalMatrix.from_rows([[1, 2], [3, 4]])
    B = A.hstack(RationalMatrix.column([5, 6]))
    assert (B.rows, B.cols) == (2, 3)
    C = B.vstack(RationalMatrix.from_rows([[0, 0, 1]]))
    assert matrix_det(C) == matrix_det(A)
    assert matrix_rank(RationalMatrix.zeros(3, 2)) == 0
    assert matrix_det(RationalMatrix.identity(4)) == 1
    with pytest.raises(ValueError):
        RationalMatrix(2, 2, (Fraction(1),))


# ---------------------------------------------------------------------------
# the A matrix of the rank criterion
# ---------------------------------------------------------------------------


def test_A_examples():
    k = 5
    assert build_A(3, k).to_rows() == [[2 * k, 0, 0], [k * k, k, 0], [0, 0, 1]]
    assert build_A(2, 3).to_rows() == [[3, 0], [0, 1]]


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("kappa", range(1, 6))
def test_A_determinant(m, kappa):
    A = build_A(m, kappa)
    expected = a_matrix_determinant(m, kappa)
    assert matrix_det(A) == expected == math.factorial(m - 1) * kappa ** (m - 1)
    if m <= 5:
        assert cofactor_det(A.to_rows()) == expected
