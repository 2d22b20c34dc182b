"""Geometry induced by a semispray ``S = ∂t + y^i ∂x^i - 2 G^i ∂y^i``.

Connection coefficients, the adapted frame ``{S, δ/δx^i, ∂/∂y^i}`` with its
dual cobasis ``{dt, δx^i, δy^i}``, the projectors, the tensors F, Φ, Ψ, the
curvature and the dynamical covariant derivative ∇.

Objects that live on J¹π are returned in the coordinate frame so that the
generic calculus in :mod:`jethelm.forms` applies to them directly. All frame
conversions go through :class:`AdaptedFrame`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Sequence, Tuple

from .expr import ONE, ZERO, Expr, as_expr, diff, parse, x, y
from .forms import (
    KForm,
    Tensor11,
    VectorField,
    VectorValued2Form,
    a_star,
    bracket,
    fn_bracket_t11,
    interior_t11,
    lie_form,
    lie_t11,
    wedge,
)


@dataclass(frozen=True)
class Semispray:
    """Semispray coefficients ``G^i(t, x, y)`` for ``x'' + 2 G(t, x, x') = 0``."""

    n: int
    G: Tuple[Expr, ...]

    def __init__(self, n: int, G: Sequence):
        if n < 1:
            raise ValueError("dimension n must be at least 1")
        if len(G) != n:
            raise ValueError(f"expected {n} coefficients G^i, got {len(G)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "G", tuple(as_expr(g) for g in G))

    @classmethod
    def parse(cls, G: Sequence[str], n: int) -> "Semispray":
        return cls(n, [parse(g, n) for g in G])

    @classmethod
    def free_particle(cls, n: int) -> "Semispray":
        return cls(n, [ZERO] * n)

    @cached_property
    def vector_field(self) -> VectorField:
        n = self.n
        return VectorField(n, [ONE] + [y(i) for i in range(1, n + 1)] + [-2 * g for g in self.G])

    def __call__(self, f) -> Expr:
        """``S(f)``."""
        return self.vector_field(as_expr(f))

    def __repr__(self):
        return f"Semispray(n={self.n}, G=[{', '.join(str(g) for g in self.G)}])"


# ---------------------------------------------------------------------------
# connection and frame


@dataclass(frozen=True)
class ConnectionData:
    N: Tuple[Tuple[Expr, ...], ...]  # N[i][j] = N^{i+1}_{j+1}
    N0: Tuple[Expr, ...]


@lru_cache(maxsize=256)
def connection_coeffs(S: Semispray) -> ConnectionData:
    n = S.n
    N = tuple(tuple(diff(S.G[i], y(j + 1)) for j in range(n)) for i in range(n))
    N0 = []
    for i in range(n):
        e = 2 * S.G[i]
        for j in range(n):
            e = e - N[i][j] * y(j + 1)
        N0.append(e)
    return ConnectionData(N, tuple(N0))


def delta_x(S: Semispray, f: Expr, j: int) -> Expr:
    """``δf/δx^j = ∂f/∂x^j - N^m_j ∂f/∂y^m`` (``j`` is 1-based)."""
    N = connection_coeffs(S).N
    out = diff(f, x(j))
    for m in range(S.n):
        if N[m][j - 1]:
            out = out - N[m][j - 1] * diff(f, y(m + 1))
    return out


def _matmul(A, B):
    rows = []
    for r in A:
        row = []
        for c in zip(*B):
            s = ZERO
            for a, b in zip(r, c):
                if a and b:
                    s = s + a * b
            row.append(s)
        rows.append(row)
    return rows


class AdaptedFrame:
    """The frame ``E = (S, δ/δx^i, ∂/∂y^i)`` and cobasis ``e = (dt, δx^i, δy^i)``.

    ``P`` has the frame fields as columns (coordinate components) and ``Q``
    has the cobasis forms as rows, so ``Q P = Id`` and a tensor with adapted
    matrix ``M`` has coordinate matrix ``P M Q``.
    """

    def __init__(self, S: Semispray):
        n = S.n
        d = 2 * n + 1
        conn = connection_coeffs(S)
        self.n = n
        self.semispray = S
        frame = [S.vector_field]
        for i in range(n):
            c = [ZERO] * d
            c[1 + i] = ONE
            for j in range(n):
                c[n + 1 + j] = -conn.N[j][i]
            frame.append(VectorField(n, c))
        for i in range(n):
            frame.append(VectorField.basis(n, n + 1 + i))
        co = [KForm.basis(n, 0)]
        for i in range(n):
            c = [ZERO] * d
            c[0] = -y(i + 1)
            c[1 + i] = ONE
            co.append(KForm.one_form(n, c))
        for i in range(n):
            c = [ZERO] * d
            c[0] = conn.N0[i]
            for j in range(n):
                c[1 + j] = conn.N[i][j]
            c[n + 1 + i] = ONE
            co.append(KForm.one_form(n, c))
        self.frame: List[VectorField] = frame
        self.cobasis: List[KForm] = co
        self.P = [[frame[b].comps[a] for b in range(d)] for a in range(d)]
        self.Q = [[co[a].coeff(b) for b in range(d)] for a in range(d)]

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    # named pieces, 1-based like the coordinates
    def hor(self, i: int) -> VectorField:
        return self.frame[i]

    def vert(self, i: int) -> VectorField:
        return self.frame[self.n + i]

    def dx(self, i: int) -> KForm:
        return self.cobasis[i]

    def dy(self, i: int) -> KForm:
        return self.cobasis[self.n + i]

    def pairing(self) -> Tensor11:
        """``e^a(E_b) - δ^a_b`` as a matrix; zero when the cobasis is dual."""
        QP = _matmul(self.Q, self.P)
        d = self.dim
        return Tensor11(self.n, [[QP[a][b] - (ONE if a == b else ZERO) for b in range(d)] for a in range(d)])

    # conversions
    def tensor_from_adapted(self, M: Sequence[Sequence]) -> Tensor11:
        M = [[as_expr(v) for v in r] for r in M]
        return Tensor11(self.n, _matmul(_matmul(self.P, M), self.Q))

    def tensor_to_adapted(self, A: Tensor11) -> List[List[Expr]]:
        return _matmul(_matmul(self.Q, A.m), self.P)

    def vector_from_adapted(self, comps: Sequence) -> VectorField:
        out = VectorField(self.n, [ZERO] * self.dim)
        for c, E in zip(comps, self.frame):
            c = as_expr(c)
            if c:
                out = out + E * c
        return out

    def vector_to_adapted(self, X: VectorField) -> List[Expr]:
        return [_pair(w, X) for w in self.cobasis]

    def form_from_adapted(self, k: int, comps: Dict[Tuple[int, ...], Expr]) -> KForm:
        """``sum_I c_I e^{I_1} ∧ .. ∧ e^{I_k}`` (indices need not be sorted)."""
        out = KForm(self.n, k)
        for idx, c in comps.items():
            c = as_expr(c)
            if not c:
                continue
            if k == 0:
                out = out + KForm.function(self.n, c)
                continue
            w = self.cobasis[idx[0]]
            for a in idx[1:]:
                w = wedge(w, self.cobasis[a])
            out = out + w * c
        return out

    def form_to_adapted(self, w: KForm) -> Dict[Tuple[int, ...], Expr]:
        """Components ``w(E_I)`` on increasing adapted multi-indices."""
        if w.degree == 0:
            return {(): w.scalar} if w.scalar else {}
        return dict(a_star(Tensor11(self.n, self.P), w).comps)

    def adapted_one_form(self, comps: Sequence) -> KForm:
        return self.form_from_adapted(1, {(a,): c for a, c in enumerate(comps)})


def _pair(w: KForm, X: VectorField) -> Expr:
    s = ZERO
    for b, c in enumerate(X.comps):
        f = w.coeff(b)
        if f and c:
            s = s + f * c
    return s


@lru_cache(maxsize=256)
def adapted_frame(S: Semispray) -> AdaptedFrame:
    return AdaptedFrame(S)


def _adapted_matrix(n: int, entries) -> List[List[Expr]]:
    d = 2 * n + 1
    M = [[ZERO] * d for _ in range(d)]
    for (a, b), v in entries:
        M[a][b] = M[a][b] + as_expr(v)
    return M


# ---------------------------------------------------------------------------
# tensors


def vertical_endomorphism(n: int) -> Tensor11:
    """``J = ∂/∂y^i ⊗ δx^i``."""
    d = 2 * n + 1
    m = [[ZERO] * d for _ in range(d)]
    for i in range(1, n + 1):
        m[n + i][0] = -y(i)
        m[n + i][i] = ONE
    return Tensor11(n, m)


@lru_cache(maxsize=256)
def projectors(S: Semispray) -> Tuple[Tensor11, Tensor11, Tensor11]:
    """``(h, v, Γ)`` from ``h = ½(Id - L_S J + S ⊗ dt)``."""
    n = S.n
    Id = Tensor11.identity(n)
    J = vertical_endomorphism(n)
    h = (Id - lie_t11(S.vector_field, J) + Tensor11.outer(S.vector_field, KForm.basis(n, 0))) * (ONE / 2)
    v = Id - h
    return h, v, h * 2 - Id


def horizontal_local(S: Semispray) -> Tensor11:
    """``h = S ⊗ dt + δ/δx^i ⊗ δx^i`` assembled in the adapted frame."""
    n = S.n
    F = adapted_frame(S)
    return F.tensor_from_adapted(_adapted_matrix(n, [((a, a), ONE) for a in range(n + 1)]))


@lru_cache(maxsize=256)
def tensor_F(S: Semispray) -> Tensor11:
    """``F = δ/δx^i ⊗ δy^i - ∂/∂y^i ⊗ δx^i``."""
    n = S.n
    ent = [((i, n + i), ONE) for i in range(1, n + 1)] + [((n + i, i), -ONE) for i in range(1, n + 1)]
    return adapted_frame(S).tensor_from_adapted(_adapted_matrix(n, ent))


def tensor_F_intrinsic(S: Semispray) -> Tensor11:
    """``F = h ∘ L_S h - J``."""
    h = projectors(S)[0]
    return h @ lie_t11(S.vector_field, h) - vertical_endomorphism(S.n)


@dataclass(frozen=True)
class JacobiEndomorphism:
    R: Tuple[Tuple[Expr, ...], ...]  # R[i][j] = R^{i+1}_{j+1}

    def tensor(self, S: Semispray) -> Tensor11:
        """``Φ = R^j_i ∂/∂y^j ⊗ δx^i``."""
        n = S.n
        ent = [((n + 1 + j, 1 + i), self.R[j][i]) for i in range(n) for j in range(n)]
        return adapted_frame(S).tensor_from_adapted(_adapted_matrix(n, ent))


@lru_cache(maxsize=256)
def jacobi_endomorphism(S: Semispray) -> JacobiEndomorphism:
    """``R^i_j = 2 ∂G^i/∂x^j - N^i_k N^k_j - S(N^i_j)``."""
    n = S.n
    N = connection_coeffs(S).N
    R = []
    for i in range(n):
        row = []
        for j in range(n):
            e = 2 * diff(S.G[i], x(j + 1)) - S(N[i][j])
            for k in range(n):
                if N[i][k] and N[k][j]:
                    e = e - N[i][k] * N[k][j]
            row.append(e)
        R.append(tuple(row))
    return JacobiEndomorphism(tuple(R))


def jacobi_tensor(S: Semispray) -> Tensor11:
    return jacobi_endomorphism(S).tensor(S)


def jacobi_intrinsic(S: Semispray) -> Tensor11:
    """``Φ = v ∘ L_S h``."""
    h, v, _ = projectors(S)
    return v @ lie_t11(S.vector_field, h)


@dataclass(frozen=True)
class CurvatureData:
    Rk: Tuple[Tuple[Tuple[Expr, ...], ...], ...]  # Rk[k][i][j] = R^{k+1}_{i+1 j+1}
    R: Tuple[Tuple[Expr, ...], ...]  # Jacobi components, shared

    def vector_valued(self, S: Semispray) -> VectorValued2Form:
        """``R = ½ R^k_ij ∂y^k ⊗ δx^i ∧ δx^j + R^j_i ∂y^j ⊗ dt ∧ δx^i``."""
        n = S.n
        F = adapted_frame(S)
        comps = [KForm(n, 2) for _ in range(2 * n + 1)]
        for k in range(n):
            ad: Dict[Tuple[int, ...], Expr] = {}
            for i in range(n):
                if self.R[k][i]:
                    ad[(0, 1 + i)] = self.R[k][i]
                for j in range(i + 1, n):
                    if self.Rk[k][i][j]:
                        ad[(1 + i, 1 + j)] = self.Rk[k][i][j]
            w = F.form_from_adapted(2, ad)
            # the output direction ∂y^k is already a coordinate direction
            comps[n + 1 + k] = w
        return VectorValued2Form(n, comps)


@lru_cache(maxsize=256)
def curvature(S: Semispray) -> CurvatureData:
    """``R^k_ij = δN^k_i/δx^j - δN^k_j/δx^i``."""
    n = S.n
    N = connection_coeffs(S).N
    Rk = []
    for k in range(n):
        rows = []
        for i in range(n):
            rows.append(
                tuple(
                    delta_x(S, N[k][i], j + 1) - delta_x(S, N[k][j], i + 1) if i != j else ZERO
                    for j in range(n)
                )
            )
        Rk.append(tuple(rows))
    return CurvatureData(tuple(Rk), jacobi_endomorphism(S).R)


def curvature_intrinsic(S: Semispray) -> VectorValued2Form:
    """``R = ½[h, h]``."""
    h = projectors(S)[0]
    return fn_bracket_t11(h, h) * (ONE / 2)


@lru_cache(maxsize=256)
def psi(S: Semispray) -> Tensor11:
    """``Ψ = δ/δx^i ⊗ δy^i - R^j_i ∂/∂y^j ⊗ δx^i``."""
    n = S.n
    R = jacobi_endomorphism(S).R
    ent = [((i, n + i), ONE) for i in range(1, n + 1)]
    ent += [((n + 1 + j, 1 + i), -R[j][i]) for i in range(n) for j in range(n)]
    return adapted_frame(S).tensor_from_adapted(_adapted_matrix(n, ent))


def psi_intrinsic(S: Semispray) -> Tensor11:
    """``Ψ = h ∘ L_S h + v ∘ L_S v``."""
    h, v, _ = projectors(S)
    X = S.vector_field
    return h @ lie_t11(X, h) + v @ lie_t11(X, v)


# ---------------------------------------------------------------------------
# dynamical covariant derivative

_SIGNATURES = {"", "u", "l", "uu", "ul", "lu", "ll"}


class SignatureError(ValueError):
    pass


def nabla(S: Semispray, T, signature: str = ""):
    """∇ on adapted-frame components with variance ``signature``.

    ``"u"`` marks an upper (vector) index, ``"l"`` a lower (covector) index;
    ``T`` is an Expr, a length-n list, or an n×n nested list accordingly.
    Upper indices contribute ``+N^i_k T^k``, lower ones ``-N^k_j T_k``.
    """
    if signature not in _SIGNATURES:
        raise SignatureError(f"unsupported variance signature {signature!r}")
    n = S.n
    N = connection_coeffs(S).N
    if signature == "":
        return S(T)
    if len(signature) == 1:
        T = [as_expr(c) for c in T]
        if len(T) != n:
            raise SignatureError(f"expected {n} components")
        out = []
        for i in range(n):
            e = S(T[i])
            for k in range(n):
                if signature == "u" and N[i][k] and T[k]:
                    e = e + N[i][k] * T[k]
                elif signature == "l" and N[k][i] and T[k]:
                    e = e - N[k][i] * T[k]
            out.append(e)
        return out
    T = [[as_expr(c) for c in r] for r in T]
    if len(T) != n or any(len(r) != n for r in T):
        raise SignatureError(f"expected {n}x{n} components")
    s0, s1 = signature
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            e = S(T[i][j])
            for k in range(n):
                a = N[i][k] if s0 == "u" else N[k][i]
                if a and T[k][j]:
                    e = e + a * T[k][j] if s0 == "u" else e - a * T[k][j]
                b = N[j][k] if s1 == "u" else N[k][j]
                if b and T[i][k]:
                    e = e + b * T[i][k] if s1 == "u" else e - b * T[i][k]
            row.append(e)
        out.append(row)
    return out


def nabla_form(S: Semispray, w: KForm) -> KForm:
    """``∇ = L_S - i_Ψ`` on forms."""
    return lie_form(S.vector_field, w) - interior_t11(psi(S), w)


def nabla_vector(S: Semispray, X: VectorField) -> VectorField:
    """``∇X = [S, X] + Ψ X``."""
    return bracket(S.vector_field, X) + psi(S)(X)


def nabla_tensor(S: Semispray, A: Tensor11) -> Tensor11:
    """``∇A = L_S A + Ψ ∘ A - A ∘ Ψ``."""
    P = psi(S)
    return lie_t11(S.vector_field, A) + P @ A - A @ P


__all__ = [
    "Semispray",
    "ConnectionData",
    "AdaptedFrame",
    "JacobiEndomorphism",
    "CurvatureData",
    "SignatureError",
    "connection_coeffs",
    "delta_x",
    "adapted_frame",
    "vertical_endomorphism",
    "projectors",
    "horizontal_local",
    "tensor_F",
    "tensor_F_intrinsic",
    "jacobi_endomorphism",
    "jacobi_tensor",
    "jacobi_intrinsic",
    "curvature",
    "curvature_intrinsic",
    "psi",
    "psi_intrinsic",
    "nabla",
    "nabla_form",
    "nabla_vector",
    "nabla_tensor",
]
