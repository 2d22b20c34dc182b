"""Identity suite for a semispray: every structural relation between J, h, v,
Γ, F, Φ, Ψ, R and ∇, plus the commutation formulas of the derivation calculus
applied to random forms. Each identity is a residual that must vanish.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from .expr import ONE, ZERO, ZeroVerdict, diff, weakest
from .expr import y as _y
from .forms import (
    KForm,
    Tensor11,
    VectorField,
    a_star,
    bracket,
    d_A,
    dt,
    exterior_d,
    fn_bracket_t11,
    interior_t11,
    interior_vf,
    interior_vf_vv2,
    interior_vv2,
    lie_form,
    lie_t11,
    nijenhuis,
    verdict,
    vv1_wedge_dt,
    wedge,
)
from .fuzz import random_form, random_polynomial, random_tensor, random_vector_field, rng_for
from .semispray import (
    Semispray,
    adapted_frame,
    connection_coeffs,
    curvature,
    curvature_intrinsic,
    horizontal_local,
    jacobi_endomorphism,
    jacobi_intrinsic,
    jacobi_tensor,
    nabla_form,
    nabla_tensor,
    nabla_vector,
    projectors,
    psi,
    psi_intrinsic,
    tensor_F,
    tensor_F_intrinsic,
    vertical_endomorphism,
)


@dataclass
class IdentityResult:
    name: str
    verdict: ZeroVerdict

    @property
    def passed(self) -> bool:
        return self.verdict.is_zero

    def as_dict(self) -> dict:
        return {"identity": self.name, "passed": self.passed, **self.verdict.as_dict()}


def _semibasic(rng, n: int) -> KForm:
    """Random ``θ_0 dt + θ_i δx^i`` in coordinates."""
    th0 = random_polynomial(rng, n, 2, 3)
    th = [random_polynomial(rng, n, 2, 2) for _ in range(n)]
    c0 = th0
    for i, c in enumerate(th):
        c0 = c0 - c * _y(i + 1)
    return KForm.one_form(n, [c0] + th + [ZERO] * n)


def geometry_residuals(S: Semispray) -> List[Tuple[str, Callable[[], object]]]:
    """Residuals that involve only the semispray."""
    n = S.n
    X = S.vector_field
    Id = Tensor11.identity(n)
    J = vertical_endomorphism(n)
    h, v, Gamma = projectors(S)
    F = tensor_F(S)
    Phi = jacobi_tensor(S)
    Psi = psi(S)
    fr = adapted_frame(S)
    cd = curvature(S)
    Rvv = cd.vector_valued(S)
    N = connection_coeffs(S).N
    R = jacobi_endomorphism(S).R
    d0 = dt(n)

    def r_deriv():
        out = []
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    out.append(diff(R[k][j], _y(i + 1)) - diff(R[k][i], _y(j + 1)) - 3 * cd.Rk[k][i][j])
        return out

    def frame_brackets():
        out = []
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                br = bracket(fr.hor(i), fr.hor(j))
                want = VectorField(n, [ZERO] * (n + 1) + [cd.Rk[k][i - 1][j - 1] for k in range(n)])
                out.append(br - want)
                br = bracket(fr.hor(i), fr.vert(j))
                want = VectorField(n, [ZERO] * (n + 1) + [diff(N[k][i - 1], _y(j)) for k in range(n)])
                out.append(br - want)
        return out

    def lie_tables():
        out = [bracket(X, X), lie_form(X, d0)]
        for i in range(1, n + 1):
            want = VectorField(n, [ZERO] * (2 * n + 1))
            for j in range(1, n + 1):
                want = want + fr.hor(j) * N[j - 1][i - 1] + fr.vert(j) * R[j - 1][i - 1]
            out.append(bracket(X, fr.hor(i)) - want)
            want = -fr.hor(i)
            for j in range(1, n + 1):
                want = want + fr.vert(j) * N[j - 1][i - 1]
            out.append(bracket(X, fr.vert(i)) - want)
            want = fr.dy(i)
            for j in range(1, n + 1):
                want = want - fr.dx(j) * N[i - 1][j - 1]
            out.append(lie_form(X, fr.dx(i)) - want)
            want = KForm(n, 1)
            for j in range(1, n + 1):
                want = want - fr.dx(j) * R[i - 1][j - 1] - fr.dy(j) * N[i - 1][j - 1]
            out.append(lie_form(X, fr.dy(i)) - want)
        return out

    def nabla_frame():
        out = [nabla_vector(S, X), nabla_form(S, d0)]
        for i in range(1, n + 1):
            want_h = VectorField(n, [ZERO] * (2 * n + 1))
            want_v = VectorField(n, [ZERO] * (2 * n + 1))
            want_dx = KForm(n, 1)
            want_dy = KForm(n, 1)
            for j in range(1, n + 1):
                want_h = want_h + fr.hor(j) * N[j - 1][i - 1]
                want_v = want_v + fr.vert(j) * N[j - 1][i - 1]
                want_dx = want_dx - fr.dx(j) * N[i - 1][j - 1]
                want_dy = want_dy - fr.dy(j) * N[i - 1][j - 1]
            out += [
                nabla_vector(S, fr.hor(i)) - want_h,
                nabla_vector(S, fr.vert(i)) - want_v,
                nabla_form(S, fr.dx(i)) - want_dx,
                nabla_form(S, fr.dy(i)) - want_dy,
            ]
        return out

    LS = lambda A: lie_t11(X, A)  # noqa: E731
    return [
        ("cobasis dual to frame", fr.pairing),
        ("J^2 = 0", lambda: J @ J),
        ("N_J = -J^dt", lambda: nijenhuis(J) + vv1_wedge_dt(J)),
        ("J(S) = 0, dt(S) = 1", lambda: [J(X), interior_vf(X, d0).scalar - ONE]),
        ("h local = (Id - L_S J + S(x)dt)/2", lambda: h - horizontal_local(S)),
        ("h^2 = h, v^2 = v, Gamma^2 = Id", lambda: [h @ h - h, v @ v - v, Gamma @ Gamma - Id]),
        ("h(S) = S", lambda: h(X) - X),
        ("F local = h o L_S h - J", lambda: F - tensor_F_intrinsic(S)),
        ("F^3 + F = 0", lambda: F @ F @ F + F),
        ("L_S J local", lambda: LS(J) - fr.tensor_from_adapted(_diag_LSJ(n))),
        ("Phi local = v o L_S h", lambda: Phi - jacobi_intrinsic(S)),
        ("Phi = L_S h - F - J", lambda: Phi - (LS(h) - F - J)),
        ("Phi^2 = 0", lambda: Phi @ Phi),
        ("R local = [h,h]/2", lambda: Rvv - curvature_intrinsic(S)),
        ("Phi = i_S R", lambda: Phi - interior_vf_vv2(X, Rvv)),
        ("[J,h] = 0", lambda: fn_bracket_t11(J, h)),
        ("[J,Phi] = 3R + Phi^dt", lambda: fn_bracket_t11(J, Phi) - Rvv * 3 - vv1_wedge_dt(Phi)),
        ("dR^k_j/dy^i - dR^k_i/dy^j = 3R^k_ij", r_deriv),
        ("Psi local = h o L_S h + v o L_S v", lambda: Psi - psi_intrinsic(S)),
        ("Psi = F + J - Phi", lambda: Psi - (F + J - Phi)),
        ("Psi = Gamma o L_S h", lambda: Psi - Gamma @ LS(h)),
        (
            "A o Psi - Psi o A = L_S A (A = h, v, J, F)",
            lambda: [A @ Psi - Psi @ A - LS(A) for A in (h, v, J, F)],
        ),
        ("nabla h = nabla v = nabla J = nabla F = 0", lambda: [nabla_tensor(S, A) for A in (h, v, J, F)]),
        ("frame brackets", frame_brackets),
        ("L_S on frame and cobasis", lie_tables),
        ("nabla on frame and cobasis, nabla S = nabla dt = 0", nabla_frame),
    ]


def _diag_LSJ(n: int):
    """Adapted matrix of ``-δ/δx^i ⊗ δx^i + ∂/∂y^i ⊗ δy^i``."""
    d = 2 * n + 1
    M = [[ZERO] * d for _ in range(d)]
    for i in range(1, n + 1):
        M[i][i] = -ONE
        M[n + i][n + i] = ONE
    return M


def calculus_residuals(S: Semispray, seed: int = 0) -> List[Tuple[str, Callable[[], object]]]:
    """Commutation formulas and ∇ rules applied to random inputs."""
    n = S.n
    X0 = S.vector_field
    rng = rng_for(seed, "calculus", n, str(S))
    A = random_tensor(rng, n)
    B = random_tensor(rng, n)
    Xr = random_vector_field(rng, n)
    w = {k: random_form(rng, n, k) for k in (0, 1, 2)}
    J = vertical_endomorphism(n)
    h, v, _ = projectors(S)
    F = tensor_F(S)
    Psi = psi(S)
    th = _semibasic(rng, n)
    Xs = S.vector_field

    def com1():
        AB = fn_bracket_t11(A, B)
        return [
            interior_t11(A, d_A(B, w[k])) - d_A(B, interior_t11(A, w[k])) - d_A(B @ A, w[k]) + interior_vv2(AB, w[k])
            for k in (1, 2)
        ]

    def com2():
        LA = lie_t11(Xr, A)
        return [
            lie_form(Xr, interior_t11(A, w[k])) - interior_t11(A, lie_form(Xr, w[k])) - interior_t11(LA, w[k])
            for k in (1, 2)
        ]

    def com3():
        LA = lie_t11(Xr, A)
        return [
            interior_vf(Xr, d_A(A, w[k])) + d_A(A, interior_vf(Xr, w[k])) - lie_form(A(Xr), w[k]) + interior_t11(LA, w[k])
            for k in (1, 2)
        ]

    def com4():
        return [
            interior_t11(A, interior_t11(B, w[k]))
            - interior_t11(B, interior_t11(A, w[k]))
            - interior_t11(B @ A, w[k])
            + interior_t11(A @ B, w[k])
            for k in (1, 2)
        ]

    def d_nabla():
        return [
            exterior_d(nabla_form(S, w[k])) - nabla_form(S, exterior_d(w[k])) - d_A(Psi, w[k]) for k in (0, 1)
        ]

    def nabla_iA():
        out = []
        for T in (h, v, J, F):
            out.append(
                nabla_form(S, interior_t11(T, w[1]))
                - interior_t11(T, nabla_form(S, w[1]))
                - interior_t11(nabla_tensor(S, T), w[1])
            )
        return out

    def nabla_theta():
        iS = interior_vf(Xs, th)
        return nabla_form(S, th) - d_A(h, iS) - interior_vf(Xs, d_A(h, th))

    def isdht():
        return interior_vf(Xs, d_A(h, th)) - interior_t11(h, interior_vf(Xs, exterior_d(th)))

    def dNJ():
        NJ = nijenhuis(J)
        return [d_A(NJ, w[k]) - d_A(J, d_A(J, w[k])) for k in (0, 1)]

    def djdt():
        K = vv1_wedge_dt(J)
        out = []
        for k in (1, 2):
            if k + 2 > 2 * n + 1:
                continue
            sign = 1 if k % 2 == 0 else -1
            out.append(d_A(K, w[k]) - wedge(d_A(J, w[k]), dt(n)) * sign)
        return out

    def omegadt():
        out = []
        for k in (1, 2):
            om = wedge(w[k - 1], dt(n)) if k > 1 else dt(n) * w[0].scalar
            sign = 1 if k % 2 == 1 else -1
            out.append(om - wedge(interior_vf(X0, om), dt(n)) * sign)
        return out

    return [
        ("com1: i_A d_B - d_B i_A = d_(B o A) - i_[A,B]", com1),
        ("com2: L_X i_A - i_A L_X = i_[X,A]", com2),
        ("com3: i_X d_A + d_A i_X = L_AX - i_[X,A]", com3),
        ("com4: i_A i_B - i_B i_A = i_(B o A) - i_(A o B)", com4),
        ("d d = 0", lambda: [exterior_d(exterior_d(w[k])) for k in (0, 1)]),
        ("d_Id = d", lambda: [d_A(Tensor11.identity(n), w[k]) - exterior_d(w[k]) for k in (0, 1)]),
        ("d_(N_J) = d_J d_J", dNJ),
        ("d_(J^dt) w = (-1)^k d_J w ^ dt", djdt),
        ("w ^ dt = 0  =>  w = (-1)^(k+1) i_S w ^ dt", omegadt),
        ("d nabla - nabla d = d_Psi", d_nabla),
        ("nabla i_A - i_A nabla = i_(nabla A)", nabla_iA),
        ("nabla theta = d_h i_S theta + i_S d_h theta", nabla_theta),
        ("i_S d_h theta = i_h i_S d theta", isdht),
        ("J* theta = 0 for semi-basic theta", lambda: a_star(J, th)),
    ]


def run_identities(S: Semispray, seed: int = 0) -> List[IdentityResult]:
    out = []
    for name, fn in geometry_residuals(S) + calculus_residuals(S, seed):
        out.append(IdentityResult(name, verdict(fn(), n=S.n)))
    return out


def summarize(results: List[IdentityResult]) -> Dict[str, object]:
    overall = weakest(r.verdict for r in results)
    return {
        "passed": all(r.passed for r in results),
        "evidence": overall.kind,
        "identities": [r.as_dict() for r in results],
    }


__all__ = ["IdentityResult", "geometry_residuals", "calculus_residuals", "run_identities", "summarize"]
