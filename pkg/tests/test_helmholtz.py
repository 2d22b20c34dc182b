from fractions import Fraction

import numpy as np
import pytest

from jethelm.expr import ONE, ZERO, NonZero, ProvenZero, exp, parse, t, x, y
from jethelm.forms import KForm, d_A, exterior_d, interior_vf, lie_form, verdict, wedge
from jethelm.fuzz import random_semibasic, random_semispray_coeffs, rng_for
from jethelm.helmholtz import (
    CONSERVATIVE,
    FAIL,
    POINCARE_CARTAN,
    DegenerateRequestError,
    Lagrangian,
    SemiBasicOneForm,
    SingularMetricError,
    check,
    derived_two_forms,
    dual_symmetry,
    euler_lagrange_semispray,
    extract_lagrangian,
    helmholtz_quantities,
    lie_S_d_theta,
    nondegenerate,
    nondegeneracy_two_form,
    numeric_semispray,
    poincare_cartan,
    two_form_d_theta,
)
from jethelm.semispray import Semispray, projectors, vertical_endomorphism


def zero(obj, n=None):
    return verdict(obj, n=n).is_zero


def damped_S(gamma, omega2):
    return Semispray(1, [gamma * y(1) + Fraction(omega2, 2) * x(1)])


def damped_L(gamma, omega2):
    return exp(2 * gamma * t()) * (y(1) ** 2 - omega2 * x(1) ** 2) / 2


def test_poincare_cartan_examples():
    th = poincare_cartan(Lagrangian(y(1) ** 2 / 2, 1))
    assert th.theta0 == y(1) ** 2 / 2 and th.theta == (y(1),)
    th = poincare_cartan(Lagrangian(damped_L(1, 1), 1))
    assert th.theta0 == damped_L(1, 1) and th.theta == (exp(2 * t()) * y(1),)
    th = poincare_cartan(Lagrangian(parse("7/3", 1), 1))
    assert th.theta == (ZERO,)


def test_poincare_cartan_is_d_J_closed():
    n = 2
    L = Lagrangian(parse("exp(t)*y1^2*y2 + x1*sin(y2) - x2^3", n), n)
    th = poincare_cartan(L)
    q = helmholtz_quantities(Semispray.free_particle(n), th)
    assert all(a == ZERO for a in q.a)
    J = vertical_endomorphism(n)
    assert zero(wedge(d_A(J, th.coordinate_form()), KForm.basis(n, 0)))


def test_quantities_examples():
    q = helmholtz_quantities(Semispray.free_particle(1), SemiBasicOneForm(y(1) ** 2 / 2, [y(1)]))
    assert (q.a[0], q.b[0], q.g[0][0]) == (ZERO, ZERO, ONE)
    q = helmholtz_quantities(damped_S(1, 1), SemiBasicOneForm(damped_L(1, 1), [exp(2 * t()) * y(1)]))
    assert q.a[0] == ZERO and q.b[0] == ZERO and q.g[0][0] == exp(2 * t())
    q = helmholtz_quantities(Semispray.free_particle(1), SemiBasicOneForm(y(1) ** 2 / 2 + y(1), [y(1)]))
    assert (q.a[0], q.b[0], q.g[0][0]) == (ONE, ZERO, ONE)


def test_two_form_examples():
    S = Semispray.free_particle(1)
    assert two_form_d_theta(S, SemiBasicOneForm(ONE, [ZERO])) == KForm(1, 2)
    d = two_form_d_theta(S, SemiBasicOneForm(y(1) ** 2 / 2, [y(1)]))
    # a = b = 0 and N = 0, so dθ = g δy∧δx = dy∧δx
    dx1, dy1 = KForm.basis(1, 1), KForm.basis(1, 2)
    assert zero(d - wedge(dy1, dx1 - KForm.basis(1, 0) * y(1)))
    assert zero(lie_S_d_theta(S, SemiBasicOneForm(ZERO, [ZERO])))
    # a = 1 adds a δy∧dt term
    d = two_form_d_theta(S, SemiBasicOneForm(y(1) ** 2 / 2 + y(1), [y(1)]))
    assert zero(d - wedge(dy1, dx1 - KForm.basis(1, 0) * y(1)) - wedge(dy1, KForm.basis(1, 0)))


def test_lie_S_d_theta_examples():
    S = damped_S(1, 1)
    assert zero(lie_S_d_theta(S, SemiBasicOneForm(damped_L(1, 1), [exp(2 * t()) * y(1)])))
    S2 = Semispray.free_particle(2)
    w = lie_S_d_theta(S2, SemiBasicOneForm(ZERO, [y(2), ZERO]))
    assert not zero(w)


def test_cross_checks_on_random_pairs():
    for seed in range(4):
        rng = rng_for(seed, "hx")
        n = 1 + seed % 3
        S = Semispray(n, random_semispray_coeffs(rng, n))
        th0, th = random_semibasic(rng, n)
        theta = SemiBasicOneForm(th0, th)
        for name, (local, generic) in derived_two_forms(S, theta).items():
            assert zero(local - generic, n=n), name


def test_check_free_particle_poincare_cartan():
    r = check(Semispray.free_particle(1), poincare_cartan(Lagrangian(y(1) ** 2 / 2, 1)))
    assert r.classification == POINCARE_CARTAN and r.route == "dJ-closed"
    assert r.lagrangian.expr == y(1) ** 2 / 2
    assert r.first_integral.expr == ZERO
    assert r.evidence == "symbolic"


def test_check_asymmetric_fails_h1():
    n = 2
    r = check(Semispray.free_particle(n), SemiBasicOneForm(ZERO, [y(2), ZERO]))
    assert r.classification == FAIL
    assert r.witness["condition"] == "H1"
    assert r.witness["component"] == "g_12 - g_21"
    assert isinstance(r.conditions["H1"].verdict, NonZero)


def test_check_conservative_free_particle():
    S = Semispray.free_particle(1)
    r = check(S, SemiBasicOneForm(y(1) ** 2 / 2 + y(1), [y(1)]))
    assert r.classification == CONSERVATIVE and r.route == "dJ-open"
    assert r.lagrangian.expr == y(1) ** 2 / 2
    assert r.first_integral.expr == y(1)
    assert isinstance(r.first_integral.verdict, ProvenZero)
    ds = r.dual_symmetry
    assert ds.omega_dx == (ZERO,) and ds.omega_dy == (-ONE,)
    for v in (ds.b_plus_nabla_a, ds.nabla_b_minus_aR, ds.jacobi, ds.lie_invariance, ds.adjoint_check):
        assert isinstance(v, ProvenZero)


def test_check_harmonic_conservative():
    S = Semispray.parse(["x1/2"], 1)
    r = check(S, SemiBasicOneForm(y(1) ** 2, [y(1)]))
    assert r.classification == CONSERVATIVE
    assert r.lagrangian.expr == (y(1) ** 2 - x(1) ** 2) / 2
    assert r.first_integral.expr == (y(1) ** 2 + x(1) ** 2) / 2
    ds = r.dual_symmetry
    assert ds.omega_dy == (-y(1),)
    assert isinstance(ds.jacobi, ProvenZero)


def test_equivalence_class_law():
    S = Semispray.parse(["x1/2"], 1)
    theta = SemiBasicOneForm(y(1) ** 2, [y(1)])
    r = check(S, theta)
    thL = poincare_cartan(r.lagrangian.lagrangian)
    f = r.first_integral.expr
    assert theta.theta0 - thL.theta0 - f == ZERO
    assert all(a - b == ZERO for a, b in zip(theta.theta, thL.theta))


def test_dual_symmetry_degenerate_request():
    with pytest.raises(DegenerateRequestError):
        dual_symmetry(Semispray.free_particle(1), SemiBasicOneForm(y(1) ** 2 / 2, [y(1)]))


@pytest.mark.parametrize("gamma", [Fraction(1, 2), 1, 2])
@pytest.mark.parametrize("omega2", [1, 2])
def test_damped_family(gamma, omega2):
    S = damped_S(gamma, omega2)
    th = poincare_cartan(Lagrangian(damped_L(gamma, omega2), 1))
    r = check(S, th)
    assert r.classification == POINCARE_CARTAN
    assert r.lagrangian.expr == damped_L(gamma, omega2)


def test_extract_lagrangian_examples():
    S = Semispray.free_particle(1)
    assert extract_lagrangian(S, SemiBasicOneForm(y(1) ** 2 / 2 + y(1), [y(1)])).expr == y(1) ** 2 / 2
    assert extract_lagrangian(S, SemiBasicOneForm(ZERO, [ZERO])).expr == ZERO


def test_extract_lagrangian_numeric_fallback():
    # non-polynomial fiber part forces quadrature
    S = Semispray.free_particle(1)
    theta = SemiBasicOneForm(y(1) * parse("sin(y1)", 1) + parse("cos(y1)", 1) + y(1), [parse("sin(y1)", 1)])
    L = extract_lagrangian(S, theta)
    assert not L.symbolic and L.expr is None
    for yv in (0.3, -1.2, 1.7):
        assert abs(L(0.0, [0.0], [yv]) - (1 - np.cos(yv))) < 1e-12
    r = check(S, theta)
    assert r.classification == CONSERVATIVE and r.first_integral.verdict.is_zero


def test_nondegeneracy_examples():
    n = 1
    nd = nondegenerate(Semispray.free_particle(n), poincare_cartan(Lagrangian(y(1) ** 2 / 2, n)))
    assert nd.det == ONE and nd.nondegenerate
    nd = nondegenerate(Semispray.free_particle(n), SemiBasicOneForm(parse("3", n), [ZERO]))
    assert not nd.nondegenerate
    nd = nondegenerate(damped_S(1, 1), poincare_cartan(Lagrangian(damped_L(1, 1), n)))
    assert nd.det == exp(2 * t()) and isinstance(nd.verdict, NonZero)


def test_nondegeneracy_two_form_has_no_dt_part():
    S = Semispray.parse(["x1*y1"], 1)
    w = nondegeneracy_two_form(S, SemiBasicOneForm(parse("x1*y1^2", 1), [parse("t*y1", 1)]))
    assert zero(interior_vf(S.vector_field, w))


def test_constant_theta_fails_on_det_g():
    r = check(Semispray.free_particle(1), SemiBasicOneForm(parse("3", 1), [ZERO]))
    assert r.classification == FAIL and r.witness["component"] == "det g"


def test_euler_lagrange_examples():
    assert euler_lagrange_semispray(Lagrangian(y(1) ** 2 / 2, 1)).G == (ZERO,)
    for gamma, omega2 in ((Fraction(1, 2), 1), (2, 2)):
        S = euler_lagrange_semispray(Lagrangian(damped_L(gamma, omega2), 1))
        assert 2 * S.G[0] == 2 * gamma * y(1) + omega2 * x(1)
    n = 2
    V = parse("x1^2*x2 + x2^4", n)
    S = euler_lagrange_semispray(Lagrangian((y(1) ** 2 + y(2) ** 2) / 2 - V, n))
    from jethelm.expr import diff

    assert S.G == tuple(diff(V, x(i)) / 2 for i in (1, 2))


def test_euler_lagrange_singular():
    with pytest.raises(SingularMetricError):
        euler_lagrange_semispray(Lagrangian(y(1), 1))


def test_euler_lagrange_rejects_large_n():
    n = 5
    L = Lagrangian(sum((y(i) ** 2 for i in range(1, n + 1)), ZERO) / 2, n)
    with pytest.raises(ValueError, match="numeric-only"):
        euler_lagrange_semispray(L)


def test_numeric_semispray_matches_symbolic():
    n = 2
    L = Lagrangian(parse("y1^2 + y1*y2 + y2^2 + x1*y2 - t*x2^2", n), n)
    S = euler_lagrange_semispray(L)
    G = numeric_semispray(L)
    from jethelm.expr import lambdify

    f = lambdify(list(S.G), n)
    for p in ((0.1, [0.2, -0.3], [1.0, 0.5]), (1.3, [-1.0, 0.7], [-0.2, 0.9])):
        assert np.allclose(G(*p), f(*p), atol=1e-12)


def test_d_J_closed_theta_has_closed_lie_derivative():
    # L_S θ - d i_S θ - i_S d_h θ = 0 and i_S dθ - i_S d_h θ = 0 and i_S d_v θ = 0
    n = 2
    rng = rng_for(4, "djclosed")
    S = Semispray(n, random_semispray_coeffs(rng, n))
    L = Lagrangian(parse("y1^2 + x2*y1*y2 + t*y2^2", n), n)
    th = poincare_cartan(L)
    w = th.coordinate_form()
    X = S.vector_field
    h, v, _ = projectors(S)
    dh = d_A(h, w)
    assert zero(lie_form(X, w) - exterior_d(interior_vf(X, w)) - interior_vf(X, dh))
    assert zero(interior_vf(X, exterior_d(w)) - interior_vf(X, dh))
    assert zero(interior_vf(X, d_A(v, w)))
