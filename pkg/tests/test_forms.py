import pytest

from jethelm.expr import ONE, ZERO, parse, t, x, y
from jethelm.forms import (
    DegreeError,
    KForm,
    Tensor11,
    VectorField,
    VectorValued2Form,
    a_star,
    d_A,
    dt,
    exterior_d,
    fn_bracket_t11,
    interior_t11,
    interior_vf,
    lie_form,
    lie_t11,
    nijenhuis,
    verdict,
    vv1_wedge_dt,
    wedge,
)
from jethelm.fuzz import random_form, random_tensor, random_vector_field, rng_for
from jethelm.semispray import Semispray, vertical_endomorphism

# coordinate order is (t, x1..xn, y1..yn)


def dx(n, i):
    return KForm.basis(n, i)


def dy(n, i):
    return KForm.basis(n, n + i)


def delta_x(n, i):
    return dx(n, i) - dt(n) * y(i)


def is_zero_obj(obj):
    return verdict(obj).is_zero


def test_exterior_d_examples():
    n = 1
    w = dy(n, 1) * x(1)
    assert exterior_d(w) == wedge(dx(n, 1), dy(n, 1))
    assert exterior_d(KForm.function(n, t())) == dt(n)
    assert exterior_d(delta_x(n, 1)) == wedge(dt(n), dy(n, 1))


def test_d_squared_vanishes():
    rng = rng_for(3, "dd")
    for n in (1, 2):
        for k in (0, 1):
            assert is_zero_obj(exterior_d(exterior_d(random_form(rng, n, k, degree=2))))


def test_interior_examples():
    n = 1
    S = Semispray.parse(["x1*y1 - t"], n).vector_field
    assert interior_vf(S, dt(n)).scalar == ONE
    assert interior_vf(S, delta_x(n, 1)).scalar == ZERO
    dy1 = VectorField.basis(n, 2)
    assert interior_vf(dy1, wedge(dx(n, 1), dy(n, 1))) == -dx(n, 1)


def test_interior_twice_vanishes():
    rng = rng_for(4, "ii")
    X = random_vector_field(rng, 2)
    w = random_form(rng, 2, 2)
    assert is_zero_obj(interior_vf(X, interior_vf(X, w)))


def test_interior_t11_examples():
    n = 2
    J = vertical_endomorphism(n)
    assert interior_t11(J, dt(n)) == KForm(n, 1)
    assert interior_t11(J, dy(n, 1)) == delta_x(n, 1)
    w = random_form(rng_for(0, "id"), n, 2)
    assert interior_t11(Tensor11.identity(n), w) == w * 2
    assert interior_t11(J, KForm.function(n, x(1))) == KForm(n, 0)


def test_d_J_examples():
    n = 1
    J = vertical_endomorphism(n)
    assert d_A(J, KForm.function(n, y(1))) == delta_x(n, 1)
    assert d_A(J, KForm.function(n, t())) == KForm(n, 1)
    assert d_A(J, KForm.function(n, parse("exp(t)*x1^3", n))) == KForm(n, 1)


def test_d_identity_is_d():
    rng = rng_for(1, "did")
    for k in (0, 1, 2):
        w = random_form(rng, 2, k)
        assert d_A(Tensor11.identity(2), w) == exterior_d(w)


def test_degree_overflow():
    n = 2
    w = wedge(wedge(wedge(dt(n), dx(n, 1)), dy(n, 1)), dy(n, 2))
    with pytest.raises(DegreeError):
        exterior_d(w)


def test_lie_form_examples():
    n = 2
    G = [parse("x1*y2", n), parse("y1^2 - t", n)]
    S = Semispray(n, G)
    X = S.vector_field
    assert lie_form(X, dt(n)) == KForm(n, 1)
    f = parse("sin(x1)*y2", n)
    assert lie_form(X, KForm.function(n, f)).scalar == X(f)
    # L_S δx^i = -N^i_j δx^j + δy^i
    from jethelm.semispray import adapted_frame, connection_coeffs

    fr = adapted_frame(S)
    N = connection_coeffs(S).N
    for i in (1, 2):
        want = fr.dy(i) - fr.dx(1) * N[i - 1][0] - fr.dx(2) * N[i - 1][1]
        assert is_zero_obj(lie_form(X, fr.dx(i)) - want)


def test_cartan_formula_and_commutation_with_d():
    rng = rng_for(5, "cartan")
    X = random_vector_field(rng, 2)
    w = random_form(rng, 2, 1)
    assert is_zero_obj(lie_form(X, w) - interior_vf(X, exterior_d(w)) - exterior_d(interior_vf(X, w)))
    assert is_zero_obj(exterior_d(lie_form(X, w)) - lie_form(X, exterior_d(w)))


def test_lie_t11_identity_vanishes():
    X = random_vector_field(rng_for(2, "lid"), 2)
    assert is_zero_obj(lie_t11(X, Tensor11.identity(2)))


def test_lie_t11_definition():
    rng = rng_for(7, "lt")
    X, Y = random_vector_field(rng, 1), random_vector_field(rng, 1)
    A = random_tensor(rng, 1)
    from jethelm.forms import bracket

    assert is_zero_obj(lie_t11(X, A)(Y) - (bracket(X, A(Y)) - A(bracket(X, Y))))


def test_fn_bracket_examples():
    for n in (1, 2):
        J = vertical_endomorphism(n)
        assert is_zero_obj(nijenhuis(J) + vv1_wedge_dt(J))
        assert is_zero_obj(fn_bracket_t11(Tensor11.identity(n), Tensor11.identity(n)))


def test_fn_bracket_symmetric_and_antisymmetric_in_arguments():
    rng = rng_for(8, "fn")
    A, B = random_tensor(rng, 1), random_tensor(rng, 1)
    X, Y = random_vector_field(rng, 1), random_vector_field(rng, 1)
    K = fn_bracket_t11(A, B)
    assert is_zero_obj(K - fn_bracket_t11(B, A))
    assert is_zero_obj(K(X, Y) + K(Y, X))


def test_vv1_wedge_dt_examples():
    n = 1
    J = vertical_endomorphism(n)
    K = vv1_wedge_dt(J)
    # ∂y ⊗ δx∧dt
    want = VectorValued2Form(n, [KForm(n, 2), KForm(n, 2), wedge(delta_x(n, 1), dt(n))])
    assert is_zero_obj(K - want)
    assert is_zero_obj(vv1_wedge_dt(Tensor11.zero(n)))


def test_vertical_endomorphism_structure():
    for n in (1, 2, 3):
        J = vertical_endomorphism(n)
        assert is_zero_obj(J @ J)


def test_a_star_examples():
    n = 1
    J = vertical_endomorphism(n)
    theta = dt(n) * parse("x1^2*y1", n) + delta_x(n, 1) * parse("exp(t)", n)
    assert is_zero_obj(a_star(J, theta))
    w = random_form(rng_for(9, "id"), 2, 2)
    assert a_star(Tensor11.identity(2), w) == w
    assert is_zero_obj(a_star(J, wedge(dy(n, 1), dx(n, 1))))


def test_com4_and_com1_on_random_inputs():
    rng = rng_for(10, "com")
    n = 2
    A, B = random_tensor(rng, n), random_tensor(rng, n)
    w = random_form(rng, n, 2)
    lhs = interior_t11(A, interior_t11(B, w)) - interior_t11(B, interior_t11(A, w))
    assert is_zero_obj(lhs - interior_t11(B @ A, w) + interior_t11(A @ B, w))
    w1 = random_form(rng, n, 1)
    from jethelm.forms import interior_vv2

    r = interior_t11(A, d_A(B, w1)) - d_A(B, interior_t11(A, w1)) - d_A(B @ A, w1) + interior_vv2(fn_bracket_t11(A, B), w1)
    assert is_zero_obj(r)


def test_djdt_sign():
    # d_{J∧dt} ω = (-1)^k d_J ω ∧ dt
    n = 2
    J = vertical_endomorphism(n)
    K = vv1_wedge_dt(J)
    rng = rng_for(11, "djdt")
    for k in (1, 2):
        w = random_form(rng, n, k)
        lhs = d_A(K, w)
        rhs = wedge(d_A(J, w), dt(n))
        sign = 1 if k % 2 == 0 else -1
        assert is_zero_obj(lhs - rhs * sign)
        assert not is_zero_obj(lhs + rhs * sign)


def test_d_NJ_is_d_J_squared():
    n = 2
    J = vertical_endomorphism(n)
    rng = rng_for(12, "nj")
    for k in (0, 1):
        w = random_form(rng, n, k)
        assert is_zero_obj(d_A(nijenhuis(J), w) - d_A(J, d_A(J, w)))


def test_random_polynomials_respect_coefficient_bound():
    from fractions import Fraction

    from jethelm.expr.core import polynomial_degree
    from jethelm.expr import coords
    from jethelm.fuzz import random_polynomial

    for seed in range(200):
        e = random_polynomial(rng_for(seed, "bound"), 3, 2, 3)
        for _, c, deg in polynomial_degree(e, list(coords(3))):
            assert abs(Fraction(c)) <= 3 and deg <= 2
