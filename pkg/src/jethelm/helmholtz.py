"""Inverse-problem checks for a semispray and a candidate semi-basic 1-form.

Given ``θ = θ_0 dt + θ_i δx^i`` the local quantities are

    a_i  = ∂θ_0/∂y^i - θ_i          b_i = δθ_0/δx^i - ∇θ_i
    b_ij = δθ_i/δx^j - δθ_j/δx^i    g_ij = ∂θ_i/∂y^j

and every closedness condition on ``L_S θ`` reduces to vanishing of
combinations of these. Each local 2-form assembly here has a generic
counterpart in :mod:`jethelm.forms`; the two are compared by ``is_zero``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .expr import (
    ONE,
    ZERO,
    EvaluationError,
    Expr,
    NonZero,
    ProvenZero,
    ZeroVerdict,
    as_expr,
    coords,
    diff,
    is_zero,
    lambdify,
    parse,
    substitute,
    weakest,
)
from .expr import x as _x
from .expr import y as _y
from .expr.core import Var, polynomial_degree
from .forms import KForm, d_A, exterior_d, interior_t11, interior_vf, lie_form, verdict, wedge
from .semispray import (
    Semispray,
    adapted_frame,
    delta_x,
    jacobi_endomorphism,
    jacobi_tensor,
    nabla,
    nabla_form,
    projectors,
    vertical_endomorphism,
)

MAX_SYMBOLIC_N = 4
GAUSS_ORDER = 16


class OracleMismatchError(AssertionError):
    """A local assembly disagreed with the generic calculus (internal bug)."""


class SingularMetricError(ValueError):
    def __init__(self, message: str, det: Expr, verdict: Optional[ZeroVerdict] = None):
        super().__init__(message)
        self.det = det
        self.verdict = verdict


class DegenerateRequestError(ValueError):
    pass


class HomotopyDomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class SemiBasicOneForm:
    """``θ = θ_0 dt + θ_i δx^i``."""

    theta0: Expr
    theta: Tuple[Expr, ...]

    def __init__(self, theta0, theta: Sequence):
        object.__setattr__(self, "theta0", as_expr(theta0))
        object.__setattr__(self, "theta", tuple(as_expr(c) for c in theta))

    @property
    def n(self) -> int:
        return len(self.theta)

    @classmethod
    def parse(cls, theta0: str, theta: Sequence[str], n: int) -> "SemiBasicOneForm":
        if len(theta) != n:
            raise ValueError(f"theta needs {n} components, got {len(theta)}")
        return cls(parse(theta0, n), [parse(c, n) for c in theta])

    def coordinate_form(self) -> KForm:
        """``(θ_0 - θ_i y^i) dt + θ_i dx^i``."""
        n = self.n
        c0 = self.theta0
        for i, th in enumerate(self.theta):
            c0 = c0 - th * _y(i + 1)
        return KForm.one_form(n, [c0] + list(self.theta) + [ZERO] * n)

    def __add__(self, other: "SemiBasicOneForm") -> "SemiBasicOneForm":
        return SemiBasicOneForm(self.theta0 + other.theta0, [a + b for a, b in zip(self.theta, other.theta)])

    def __sub__(self, other: "SemiBasicOneForm") -> "SemiBasicOneForm":
        return SemiBasicOneForm(self.theta0 - other.theta0, [a - b for a, b in zip(self.theta, other.theta)])


@dataclass(frozen=True)
class Lagrangian:
    L: Expr
    n: int

    def __init__(self, L, n: int):
        object.__setattr__(self, "L", as_expr(L))
        object.__setattr__(self, "n", n)

    @classmethod
    def parse(cls, text: str, n: int) -> "Lagrangian":
        return cls(parse(text, n), n)

    @cached_property
    def g(self) -> Tuple[Tuple[Expr, ...], ...]:
        """``g_ij = ∂²L/∂y^i∂y^j``."""
        n = self.n
        first = [diff(self.L, _y(i + 1)) for i in range(n)]
        return tuple(tuple(diff(first[i], _y(j + 1)) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class HelmholtzQuantities:
    a: Tuple[Expr, ...]
    b: Tuple[Expr, ...]
    bij: Tuple[Tuple[Expr, ...], ...]
    g: Tuple[Tuple[Expr, ...], ...]
    nabla_theta: Tuple[Expr, ...]


def helmholtz_quantities(S: Semispray, theta: SemiBasicOneForm) -> HelmholtzQuantities:
    n = _check_dims(S, theta)
    th0, th = theta.theta0, theta.theta
    nth = nabla(S, list(th), "l")
    a = tuple(diff(th0, _y(i + 1)) - th[i] for i in range(n))
    b = tuple(delta_x(S, th0, i + 1) - nth[i] for i in range(n))
    dth = [[delta_x(S, th[i], j + 1) for j in range(n)] for i in range(n)]
    bij = tuple(tuple(dth[i][j] - dth[j][i] for j in range(n)) for i in range(n))
    g = tuple(tuple(diff(th[i], _y(j + 1)) for j in range(n)) for i in range(n))
    return HelmholtzQuantities(a, b, bij, g, tuple(nth))


def _check_dims(S: Semispray, theta: SemiBasicOneForm) -> int:
    if theta.n != S.n:
        raise ValueError(f"dimension mismatch: semispray n={S.n}, form n={theta.n}")
    return S.n


# ---------------------------------------------------------------------------
# local 2-form assemblies (adapted cobasis index: 0=dt, i=δx^i, n+i=δy^i)


class _Acc:
    """Collects ``coef e^a ∧ e^b`` terms for a 2-form in the adapted cobasis."""

    def __init__(self, n: int):
        self.n = n
        self.terms: Dict[Tuple[int, int], Expr] = {}

    def add(self, a: int, b: int, coef):
        coef = as_expr(coef)
        if not coef or a == b:
            return
        if a > b:
            a, b, coef = b, a, -coef
        prev = self.terms.get((a, b))
        self.terms[(a, b)] = coef if prev is None else prev + coef

    def form(self, S: Semispray) -> KForm:
        return adapted_frame(S).form_from_adapted(2, self.terms)

    def coefficients(self) -> Dict[Tuple[int, int], Expr]:
        return {k: v for k, v in self.terms.items() if v}


def _half_sum(acc: _Acc, n: int, off_j: int, off_i: int, c):
    """``½ c_ij e^{off_j+j} ∧ e^{off_i+i}`` summed over all i, j."""
    for i in range(n):
        for j in range(n):
            acc.add(off_j + 1 + j, off_i + 1 + i, c(i, j) * Fraction(1, 2))


def _full_sum(acc: _Acc, n: int, off_j: int, off_i: int, c):
    for i in range(n):
        for j in range(n):
            acc.add(off_j + 1 + j, off_i + 1 + i, c(i, j))


def d_theta_local(S: Semispray, q: HelmholtzQuantities) -> _Acc:
    """``b_i δx^i∧dt + a_i δy^i∧dt + ½ b_ij δx^j∧δx^i + g_ij δy^j∧δx^i``."""
    n = S.n
    acc = _Acc(n)
    for i in range(n):
        acc.add(1 + i, 0, q.b[i])
        acc.add(n + 1 + i, 0, q.a[i])
    _half_sum(acc, n, 0, 0, lambda i, j: q.bij[i][j])
    _full_sum(acc, n, n, 0, lambda i, j: q.g[i][j])
    return acc


@dataclass(frozen=True)
class CovariantQuantities:
    """∇ of the local quantities and their contractions with the Jacobi endomorphism."""

    na: Tuple[Expr, ...]
    nb: Tuple[Expr, ...]
    nbij: Tuple[Tuple[Expr, ...], ...]
    ng: Tuple[Tuple[Expr, ...], ...]
    gR: Tuple[Tuple[Expr, ...], ...]  # g_ik R^k_j
    aR: Tuple[Expr, ...]  # a_j R^j_i


def covariant_quantities(S: Semispray, q: HelmholtzQuantities) -> CovariantQuantities:
    n = S.n
    R = jacobi_endomorphism(S).R
    gR = []
    for i in range(n):
        row = []
        for j in range(n):
            s = ZERO
            for k in range(n):
                if q.g[i][k] and R[k][j]:
                    s = s + q.g[i][k] * R[k][j]
            row.append(s)
        gR.append(tuple(row))
    aR = []
    for i in range(n):
        s = ZERO
        for j in range(n):
            if q.a[j] and R[j][i]:
                s = s + q.a[j] * R[j][i]
        aR.append(s)
    return CovariantQuantities(
        tuple(nabla(S, list(q.a), "l")),
        tuple(nabla(S, list(q.b), "l")),
        tuple(tuple(r) for r in nabla(S, [list(r) for r in q.bij], "ll")),
        tuple(tuple(r) for r in nabla(S, [list(r) for r in q.g], "ll")),
        tuple(gR),
        tuple(aR),
    )


def lie_S_d_theta_local(S: Semispray, q: HelmholtzQuantities, c: CovariantQuantities) -> _Acc:
    """``L_S dθ`` in the adapted cobasis.

    ``(∇b_i - a_j R^j_i) δx^i∧dt + (b_i + ∇a_i) δy^i∧dt
    + ½(∇b_ij - g_ik R^k_j + g_jk R^k_i) δx^j∧δx^i
    + (∇g_ij + b_ij) δy^j∧δx^i + ½(g_ij - g_ji) δy^j∧δy^i``
    """
    n = S.n
    acc = _Acc(n)
    for i in range(n):
        acc.add(1 + i, 0, c.nb[i] - c.aR[i])
        acc.add(n + 1 + i, 0, q.b[i] + c.na[i])
    _half_sum(acc, n, 0, 0, lambda i, j: c.nbij[i][j] - c.gR[i][j] + c.gR[j][i])
    _full_sum(acc, n, n, 0, lambda i, j: c.ng[i][j] + q.bij[i][j])
    _half_sum(acc, n, n, n, lambda i, j: q.g[i][j] - q.g[j][i])
    return acc


def d_J_theta_local(S: Semispray, q: HelmholtzQuantities) -> _Acc:
    n = S.n
    acc = _Acc(n)
    for i in range(n):
        acc.add(1 + i, 0, q.a[i])
    _half_sum(acc, n, 0, 0, lambda i, j: q.g[i][j] - q.g[j][i])
    return acc


def d_h_theta_local(S: Semispray, q: HelmholtzQuantities) -> _Acc:
    n = S.n
    acc = _Acc(n)
    for i in range(n):
        acc.add(1 + i, 0, q.b[i])
    _half_sum(acc, n, 0, 0, lambda i, j: q.bij[i][j])
    return acc


def d_Phi_theta_local(S: Semispray, q: HelmholtzQuantities, c: CovariantQuantities) -> _Acc:
    n = S.n
    acc = _Acc(n)
    for i in range(n):
        acc.add(1 + i, 0, c.aR[i])
    _half_sum(acc, n, 0, 0, lambda i, j: c.gR[i][j] - c.gR[j][i])
    return acc


def nabla_d_theta_local(S: Semispray, q: HelmholtzQuantities, c: CovariantQuantities) -> _Acc:
    n = S.n
    acc = _Acc(n)
    for i in range(n):
        acc.add(1 + i, 0, c.nb[i])
        acc.add(n + 1 + i, 0, c.na[i])
    _half_sum(acc, n, 0, 0, lambda i, j: c.nbij[i][j])
    _full_sum(acc, n, n, 0, lambda i, j: c.ng[i][j])
    return acc


def _cross_check(local: KForm, generic: KForm, what: str, n: int) -> ZeroVerdict:
    v = verdict(local - generic, n=n)
    if not v.is_zero:
        raise OracleMismatchError(f"{what}: local assembly disagrees with generic calculus ({v!r})")
    return v


def two_form_d_theta(S: Semispray, theta: SemiBasicOneForm, *, cross_check: bool = True) -> KForm:
    """``dθ`` assembled from the local quantities (coordinate-frame result)."""
    q = helmholtz_quantities(S, theta)
    local = d_theta_local(S, q).form(S)
    if cross_check:
        _cross_check(local, exterior_d(theta.coordinate_form()), "dθ", S.n)
    return local


def lie_S_d_theta(S: Semispray, theta: SemiBasicOneForm, *, cross_check: bool = True) -> KForm:
    """``L_S dθ`` assembled from ∇ and the Jacobi endomorphism."""
    q = helmholtz_quantities(S, theta)
    c = covariant_quantities(S, q)
    local = lie_S_d_theta_local(S, q, c).form(S)
    if cross_check:
        _cross_check(local, lie_S_d_theta_generic(S, theta), "L_S dθ", S.n)
    return local


def lie_S_d_theta_generic(S: Semispray, theta: SemiBasicOneForm) -> KForm:
    return lie_form(S.vector_field, exterior_d(theta.coordinate_form()))


def derived_two_forms(S: Semispray, theta: SemiBasicOneForm) -> Dict[str, Tuple[KForm, KForm]]:
    """``{name: (local, generic)}`` for ``d_Jθ``, ``d_hθ``, ``d_Φθ`` and ``∇dθ``."""
    q = helmholtz_quantities(S, theta)
    c = covariant_quantities(S, q)
    w = theta.coordinate_form()
    h = projectors(S)[0]
    return {
        "d_J theta": (d_J_theta_local(S, q).form(S), d_A(vertical_endomorphism(S.n), w)),
        "d_h theta": (d_h_theta_local(S, q).form(S), d_A(h, w)),
        "d_Phi theta": (d_Phi_theta_local(S, q, c).form(S), d_A(jacobi_tensor(S), w)),
        "nabla d theta": (nabla_d_theta_local(S, q, c).form(S), nabla_form(S, exterior_d(w))),
    }


# ---------------------------------------------------------------------------
# conditions and report


@dataclass
class Condition:
    """A named family of expressions that must all vanish."""

    name: str
    description: str
    components: List[Tuple[str, Expr]]
    verdicts: List[ZeroVerdict] = field(default_factory=list)

    def evaluate(self, n: int) -> "Condition":
        self.verdicts = [is_zero(e, n=n) for _, e in self.components]
        return self

    @property
    def verdict(self) -> ZeroVerdict:
        return weakest(self.verdicts)

    @property
    def passed(self) -> bool:
        return self.verdict.is_zero

    @property
    def failing(self) -> Optional[Tuple[str, Expr, NonZero]]:
        for (label, e), v in zip(self.components, self.verdicts):
            if not v.is_zero:
                return label, e, v
        return None

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "description": self.description,
            "passed": self.passed,
            "evidence": self.verdict.kind,
        }
        bad = self.failing
        if bad is not None:
            label, e, v = bad
            out["failing_component"] = label
            out["expression"] = str(e)
            out["witness"] = v.as_dict()
        return out


def _idx(*ks) -> str:
    return "".join(str(k + 1) for k in ks)


def helmholtz_conditions(S: Semispray, q: HelmholtzQuantities, c: CovariantQuantities) -> Dict[str, Condition]:
    n = S.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    allij = [(i, j) for i in range(n) for j in range(n)]
    conds = {
        "dJ": Condition(
            "dJ", "a_i = 0 (theta is d_J-closed)", [(f"a_{_idx(i)}", q.a[i]) for i in range(n)]
        ),
        "H1": Condition(
            "H1", "g_ij - g_ji = 0", [(f"g_{_idx(i, j)} - g_{_idx(j, i)}", q.g[i][j] - q.g[j][i]) for i, j in pairs]
        ),
        "H2": Condition("H2", "b_ij = 0", [(f"b_{_idx(i, j)}", q.bij[i][j]) for i, j in pairs]),
        "H3": Condition(
            "H3",
            "g_ik R^k_j - g_jk R^k_i = 0",
            [(f"g_{_idx(i)}k R^k_{_idx(j)} - g_{_idx(j)}k R^k_{_idx(i)}", c.gR[i][j] - c.gR[j][i]) for i, j in pairs],
        ),
        "H4": Condition(
            "H4",
            "nabla g_ij = 0 and nabla b_ij - g_ik R^k_j + g_jk R^k_i = 0",
            [(f"nabla g_{_idx(i, j)}", c.ng[i][j]) for i, j in allij]
            + [
                (f"nabla b_{_idx(i, j)} - g_{_idx(i)}k R^k_{_idx(j)} + g_{_idx(j)}k R^k_{_idx(i)}",
                 c.nbij[i][j] - c.gR[i][j] + c.gR[j][i])
                for i, j in pairs
            ],
        ),
        "DS": Condition(
            "DS",
            "b_i + nabla a_i = 0 and nabla b_i - a_j R^j_i = 0",
            [(f"b_{_idx(i)} + nabla a_{_idx(i)}", q.b[i] + c.na[i]) for i in range(n)]
            + [(f"nabla b_{_idx(i)} - a_j R^j_{_idx(i)}", c.nb[i] - c.aR[i]) for i in range(n)],
        ),
        "dh": Condition(
            "dh",
            "b_i = 0 and b_ij = 0 (theta is d_h-closed)",
            [(f"b_{_idx(i)}", q.b[i]) for i in range(n)] + [(f"b_{_idx(i, j)}", q.bij[i][j]) for i, j in pairs],
        ),
    }
    for cond in conds.values():
        cond.evaluate(n)
    return conds


POINCARE_CARTAN = "PoincareCartan"
CONSERVATIVE = "ConservativeWithSymmetry"
FAIL = "Fail"

CLOSED_ROUTE_REQUIRED = ("H1", "dh")
OPEN_ROUTE_REQUIRED = ("H1", "H2", "H3", "H4", "DS")


@dataclass
class Nondegeneracy:
    det: Expr
    verdict: ZeroVerdict

    @property
    def nondegenerate(self) -> bool:
        return not self.verdict.is_zero

    def as_dict(self) -> dict:
        return {
            "det_g": str(self.det),
            "det_g_zero_test": self.verdict.as_dict(),
            "rank_2n": self.nondegenerate,
        }


def determinant(m: Sequence[Sequence[Expr]]) -> Expr:
    """Leibniz expansion; fine for the small n used here."""
    n = len(m)
    if n == 0:
        return ONE
    total = ZERO
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        term = ONE
        for i, p in enumerate(perm):
            f = m[i][p]
            if not f:
                term = ZERO
                break
            term = term * f
        if term:
            total = total + term if sign > 0 else total - term
    return total


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def adjugate(m: Sequence[Sequence[Expr]]) -> List[List[Expr]]:
    n = len(m)
    if n == 1:
        return [[ONE]]
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = determinant(minor)
            out[j][i] = cof if (i + j) % 2 == 0 else -cof
    return out


def nondegenerate(S: Semispray, theta: SemiBasicOneForm) -> Nondegeneracy:
    """Rank-2n test of ``dθ + i_S dθ ∧ dt``, which reduces to ``det g ≠ 0``."""
    q = helmholtz_quantities(S, theta)
    det = determinant(q.g)
    return Nondegeneracy(det, is_zero(det, n=S.n))


def nondegeneracy_two_form(S: Semispray, theta: SemiBasicOneForm) -> KForm:
    """``dθ + i_S dθ ∧ dt`` computed generically."""
    d = exterior_d(theta.coordinate_form())
    return d + wedge(interior_vf(S.vector_field, d), KForm.basis(S.n, 0))


# ---------------------------------------------------------------------------
# Lagrangian extraction


def poincare_cartan(L: Lagrangian, S: Optional[Semispray] = None) -> SemiBasicOneForm:
    """``θ_L = L dt + d_J L``: ``θ_0 = L``, ``θ_i = ∂L/∂y^i``."""
    return SemiBasicOneForm(L.L, [diff(L.L, _y(i + 1)) for i in range(L.n)])


@dataclass
class ExtractedLagrangian:
    """Either a symbolic Lagrangian or a quadrature evaluator for one."""

    n: int
    expr: Optional[Expr]
    evaluator: Callable[[float, Sequence[float], Sequence[float]], float]
    symbolic: bool
    method: str

    @property
    def lagrangian(self) -> Optional[Lagrangian]:
        return Lagrangian(self.expr, self.n) if self.expr is not None else None

    def __call__(self, t: float, x: Sequence[float], y: Sequence[float]) -> float:
        return self.evaluator(t, x, y)

    def as_dict(self) -> dict:
        return {"symbolic": self.symbolic, "method": self.method, "L": str(self.expr) if self.symbolic else None}


def _leg_integral(coef: Expr, scaled: Sequence[Var], fixed_zero: Sequence[Var]) -> Optional[Expr]:
    """``∫_0^1 coef(.., s·v, ..) ds`` with ``fixed_zero`` set to 0; None if not polynomial."""
    if fixed_zero:
        coef = substitute(coef, {v: ZERO for v in fixed_zero})
    terms = polynomial_degree(coef, scaled)
    if terms is None:
        return None
    out = ZERO
    for mono, c, d in terms:
        out = out + Expr({mono: c * Fraction(1, d + 1)})
    return out


def _potential_symbolic(w: KForm) -> Optional[Expr]:
    """Potential of a closed 1-form along (0,0,0)→(t,0,0)→(t,x,0)→(t,x,y)."""
    n = w.n
    vs = coords(n)
    tv, xs, ys = vs[0], vs[1 : n + 1], vs[n + 1 :]
    L = ZERO
    leg = _leg_integral(w.coeff(0), [tv], list(xs) + list(ys))
    if leg is None:
        return None
    L = L + leg * Expr.atom(tv)
    for i, xv in enumerate(xs):
        leg = _leg_integral(w.coeff(1 + i), list(xs), list(ys))
        if leg is None:
            return None
        L = L + leg * Expr.atom(xv)
    for i, yv in enumerate(ys):
        leg = _leg_integral(w.coeff(n + 1 + i), list(ys), [])
        if leg is None:
            return None
        L = L + leg * Expr.atom(yv)
    return L


def _potential_numeric(w: KForm) -> Callable:
    n = w.n
    f = lambdify([w.coeff(a) for a in range(2 * n + 1)], n)
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    s_nodes = 0.5 * (nodes + 1.0)
    s_weights = 0.5 * weights

    def evaluate(t, x, y):
        x = [float(v) for v in x]
        y = [float(v) for v in y]
        zero = [0.0] * n
        total = 0.0
        try:
            for s, wgt in zip(s_nodes, s_weights):
                c = f(s * t, zero, zero)
                total += wgt * c[0] * t
                c = f(t, [s * v for v in x], zero)
                total += wgt * sum(c[1 + i] * x[i] for i in range(n))
                c = f(t, x, [s * v for v in y])
                total += wgt * sum(c[n + 1 + i] * y[i] for i in range(n))
        except (EvaluationError, ArithmeticError, ValueError) as exc:
            raise HomotopyDomainError(f"integrand not defined on the integration path at t={t}, x={x}, y={y}: {exc}")
        return total

    return evaluate


def extract_lagrangian(S: Semispray, theta: SemiBasicOneForm, *, d_j_closed: Optional[bool] = None) -> ExtractedLagrangian:
    """Lagrangian whose Poincaré–Cartan form is equivalent to ``θ``.

    For d_J-closed ``θ`` this is ``θ_0``. Otherwise ``L_S θ = dL`` and ``L`` is
    the potential of ``L_S θ`` normalized by ``L(0, 0, 0) = 0``; its fiber part
    is ``∫_0^1 θ_i(t, x, s y) y^i ds``.
    """
    n = _check_dims(S, theta)
    if d_j_closed is None:
        q = helmholtz_quantities(S, theta)
        d_j_closed = weakest(is_zero(a, n=n) for a in q.a).is_zero
    if d_j_closed:
        f = lambdify([theta.theta0], n)
        return ExtractedLagrangian(n, theta.theta0, lambda t, x, y: f(t, x, y)[0], True, "i_S theta")
    w = lie_form(S.vector_field, theta.coordinate_form())
    L = _potential_symbolic(w)
    if L is not None:
        f = lambdify([L], n)
        return ExtractedLagrangian(n, L, lambda t, x, y: f(t, x, y)[0], True, "potential of L_S theta")
    ev = _potential_numeric(w)
    _probe_homotopy(ev, n)
    return ExtractedLagrangian(n, None, ev, False, f"Gauss-Legendre order {GAUSS_ORDER}")


def _probe_homotopy(ev: Callable, n: int, probes: int = 8, seed: int = 0):
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        p = rng.uniform(-2, 2, 2 * n + 1)
        ev(p[0], p[1 : n + 1], p[n + 1 :])


@dataclass
class FirstIntegral:
    expr: Optional[Expr]
    evaluator: Callable
    S_of_f: Expr
    verdict: ZeroVerdict

    def as_dict(self) -> dict:
        return {
            "f": str(self.expr) if self.expr is not None else None,
            "S(f)": str(self.S_of_f),
            "S(f)_zero_test": self.verdict.as_dict(),
        }


def first_integral(S: Semispray, theta: SemiBasicOneForm, L: ExtractedLagrangian) -> FirstIntegral:
    """``f = i_S θ - L`` with the verdict of ``S(f) = 0``."""
    n = S.n
    if L.symbolic:
        f = theta.theta0 - L.expr
        Sf = S(f)
        fl = lambdify([f], n)
        return FirstIntegral(f, lambda t, x, y: fl(t, x, y)[0], Sf, is_zero(Sf, n=n))
    # S(L) = (L_S θ)(S) because dL = L_S θ
    w = lie_form(S.vector_field, theta.coordinate_form())
    Sf = S(theta.theta0) - interior_vf(S.vector_field, w).scalar
    th0 = lambdify([theta.theta0], n)
    return FirstIntegral(None, lambda t, x, y: th0(t, x, y)[0] - L(t, x, y), Sf, is_zero(Sf, n=n))


@dataclass
class DualSymmetry:
    """``ω = i_S dθ = -b_i δx^i - a_i δy^i`` and its adjoint ``α = -i_Γ ω``."""

    omega_dx: Tuple[Expr, ...]  # -b_i
    omega_dy: Tuple[Expr, ...]  # -a_i
    alpha_dx: Tuple[Expr, ...]
    alpha_dy: Tuple[Expr, ...]
    b_plus_nabla_a: ZeroVerdict
    nabla_b_minus_aR: ZeroVerdict
    jacobi: ZeroVerdict
    lie_invariance: ZeroVerdict
    adjoint_check: ZeroVerdict

    @property
    def passed(self) -> bool:
        return all(v.is_zero for v in (self.b_plus_nabla_a, self.nabla_b_minus_aR, self.jacobi, self.lie_invariance))

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "omega": {"delta_x": [str(e) for e in self.omega_dx], "delta_y": [str(e) for e in self.omega_dy]},
            "adjoint": {"delta_x": [str(e) for e in self.alpha_dx], "delta_y": [str(e) for e in self.alpha_dy]},
            "b_i + nabla a_i": self.b_plus_nabla_a.as_dict(),
            "nabla b_i - a_j R^j_i": self.nabla_b_minus_aR.as_dict(),
            "jacobi nabla^2 a_i + a_j R^j_i": self.jacobi.as_dict(),
            "L_S omega": self.lie_invariance.as_dict(),
            "adjoint = -i_Gamma omega": self.adjoint_check.as_dict(),
        }


def dual_symmetry(S: Semispray, theta: SemiBasicOneForm, q: Optional[HelmholtzQuantities] = None) -> DualSymmetry:
    n = _check_dims(S, theta)
    q = q or helmholtz_quantities(S, theta)
    if all(v.is_zero for v in (is_zero(a, n=n) for a in q.a)):
        raise DegenerateRequestError("all a_i vanish: theta is d_J-closed and i_S dθ carries no symmetry")
    c = covariant_quantities(S, q)
    R = jacobi_endomorphism(S).R
    n2a = nabla(S, list(c.na), "l")
    jac = []
    for i in range(n):
        e = n2a[i]
        for j in range(n):
            if q.a[j] and R[j][i]:
                e = e + q.a[j] * R[j][i]
        jac.append(e)
    fr = adapted_frame(S)
    omega = fr.adapted_one_form([ZERO] + [-b for b in q.b] + [-a for a in q.a])
    alpha = fr.adapted_one_form([ZERO] + list(q.b) + [-a for a in q.a])
    Gamma = projectors(S)[2]
    d = exterior_d(theta.coordinate_form())
    return DualSymmetry(
        tuple(-b for b in q.b),
        tuple(-a for a in q.a),
        tuple(q.b),
        tuple(-a for a in q.a),
        weakest(is_zero(q.b[i] + c.na[i], n=n) for i in range(n)),
        weakest(is_zero(c.nb[i] - c.aR[i], n=n) for i in range(n)),
        weakest(is_zero(e, n=n) for e in jac),
        verdict(lie_form(S.vector_field, interior_vf(S.vector_field, d)), n=n),
        verdict(alpha + interior_t11(Gamma, omega), n=n),
    )


# ---------------------------------------------------------------------------
# check


@dataclass
class HelmholtzReport:
    n: int
    quantities: HelmholtzQuantities
    conditions: Dict[str, Condition]
    route: str
    classification: str
    nondegeneracy: Nondegeneracy
    two_forms: Dict[str, dict]
    witness: Optional[dict] = None
    lagrangian: Optional[ExtractedLagrangian] = None
    first_integral: Optional[FirstIntegral] = None
    dual_symmetry: Optional[DualSymmetry] = None

    @property
    def passed(self) -> bool:
        return self.classification != FAIL

    @property
    def evidence(self) -> str:
        """``symbolic`` when every required verdict is ProvenZero, else ``probe``."""
        req = CLOSED_ROUTE_REQUIRED if self.route == "dJ-closed" else OPEN_ROUTE_REQUIRED
        vs = [self.conditions[k].verdict for k in req]
        return "symbolic" if all(isinstance(v, ProvenZero) for v in vs) else "probe"

    def as_dict(self) -> dict:
        q = self.quantities
        out = {
            "n": self.n,
            "route": self.route,
            "classification": self.classification,
            "passed": self.passed,
            "evidence": self.evidence if self.passed else None,
            "quantities": {
                "a": [str(e) for e in q.a],
                "b": [str(e) for e in q.b],
                "b_ij": [[str(e) for e in r] for r in q.bij],
                "g": [[str(e) for e in r] for r in q.g],
            },
            "conditions": {k: c.as_dict() for k, c in self.conditions.items()},
            "nondegeneracy": self.nondegeneracy.as_dict(),
            "two_forms": self.two_forms,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.lagrangian is not None:
            out["lagrangian"] = self.lagrangian.as_dict()
        if self.first_integral is not None:
            out["first_integral"] = self.first_integral.as_dict()
        if self.dual_symmetry is not None:
            out["dual_symmetry"] = self.dual_symmetry.as_dict()
        return out


def _two_form_summary(S: Semispray, theta: SemiBasicOneForm) -> Dict[str, dict]:
    n = S.n
    dt = KForm.basis(n, 0)
    out = {}
    for name, (local, generic) in derived_two_forms(S, theta).items():
        cross = verdict(local - generic, n=n)
        if not cross.is_zero:
            raise OracleMismatchError(f"{name}: local assembly disagrees with generic calculus ({cross!r})")
        out[f"{name} ^ dt"] = {
            "zero_test": verdict(wedge(local, dt), n=n).as_dict(),
            "cross_check": cross.kind,
        }
    return out


def check(S: Semispray, theta: SemiBasicOneForm, *, cross_check: bool = True) -> HelmholtzReport:
    """Evaluate every condition, classify ``θ`` and attach the extracted data."""
    n = _check_dims(S, theta)
    q = helmholtz_quantities(S, theta)
    c = covariant_quantities(S, q)
    conds = helmholtz_conditions(S, q, c)
    nd = Nondegeneracy(determinant(q.g), is_zero(determinant(q.g), n=n))
    two = _two_form_summary(S, theta) if cross_check else {}
    if cross_check:
        two_form_d_theta(S, theta)
        lie_S_d_theta(S, theta)
    route = "dJ-closed" if conds["dJ"].passed else "dJ-open"
    required = CLOSED_ROUTE_REQUIRED if route == "dJ-closed" else OPEN_ROUTE_REQUIRED
    witness = None
    for k in required:
        bad = conds[k].failing
        if bad is not None:
            label, e, v = bad
            witness = {"condition": k, "component": label, "expression": str(e), **v.as_dict()}
            break
    if witness is None and not nd.nondegenerate:
        witness = {"condition": "nondegeneracy", "component": "det g", "expression": str(nd.det), **nd.verdict.as_dict()}
    report = HelmholtzReport(
        n, q, conds, route, FAIL if witness else (POINCARE_CARTAN if route == "dJ-closed" else CONSERVATIVE), nd, two, witness
    )
    if report.passed:
        L = extract_lagrangian(S, theta, d_j_closed=route == "dJ-closed")
        report.lagrangian = L
        report.first_integral = first_integral(S, theta, L)
        if route == "dJ-open":
            report.dual_symmetry = dual_symmetry(S, theta, q)
    return report


# ---------------------------------------------------------------------------
# Lagrangian → semispray


def euler_lagrange_semispray(L: Lagrangian, *, check_result: bool = True) -> Semispray:
    """``2G^j = g^{ji}(∂²L/∂t∂y^i + y^k ∂²L/∂x^k∂y^i - ∂L/∂x^i)``."""
    n = L.n
    if n > MAX_SYMBOLIC_N:
        raise ValueError(f"symbolic inversion supports n <= {MAX_SYMBOLIC_N}; use numeric-only mode")
    g = L.g
    det = determinant(g)
    v = is_zero(det, n=n)
    if v.is_zero:
        raise SingularMetricError(f"det g = {det} vanishes ({v.kind})", det, v)
    tv = Var("t")
    rhs = []
    for i in range(n):
        Ly = diff(L.L, _y(i + 1))
        e = diff(Ly, tv) - diff(L.L, _x(i + 1))
        for k in range(n):
            e = e + _y(k + 1) * diff(Ly, _x(k + 1))
        rhs.append(e)
    adj = adjugate(g)
    inv_det = ONE / det
    G = []
    for j in range(n):
        s = ZERO
        for i in range(n):
            if adj[j][i] and rhs[i]:
                s = s + adj[j][i] * rhs[i]
        G.append(s * inv_det * Fraction(1, 2))
    S = Semispray(n, G)
    if check_result:
        res = el_residual_exprs(L, S)
        rv = weakest(is_zero(e, n=n) for e in res)
        if not rv.is_zero:
            raise OracleMismatchError(f"Euler-Lagrange residual does not vanish: {rv!r}")
    return S


def el_residual_exprs(L: Lagrangian, S: Semispray) -> List[Expr]:
    """``S(∂L/∂y^i) - ∂L/∂x^i``."""
    return [S(diff(L.L, _y(i + 1))) - diff(L.L, _x(i + 1)) for i in range(L.n)]


def numeric_semispray(L: Lagrangian) -> Callable:
    """``(t, x, y) -> G`` by solving ``g (2G) = rhs`` at each point (no symbolic inverse)."""
    n = L.n
    tv = Var("t")
    g_flat = [e for r in L.g for e in r]
    rhs = []
    for i in range(n):
        Ly = diff(L.L, _y(i + 1))
        e = diff(Ly, tv) - diff(L.L, _x(i + 1))
        for k in range(n):
            e = e + _y(k + 1) * diff(Ly, _x(k + 1))
        rhs.append(e)
    f = lambdify(g_flat + rhs, n)

    def G(t, x, y):
        vals = f(t, x, y)
        gm = np.array(vals[: n * n], dtype=float).reshape(n, n)
        r = np.array(vals[n * n :], dtype=float)
        try:
            return 0.5 * np.linalg.solve(gm, r)
        except np.linalg.LinAlgError:
            raise SingularMetricError(f"g is singular at t={t}, x={list(x)}, y={list(y)}", determinant(L.g))

    return G


__all__ = [
    "OracleMismatchError",
    "SingularMetricError",
    "DegenerateRequestError",
    "HomotopyDomainError",
    "SemiBasicOneForm",
    "Lagrangian",
    "HelmholtzQuantities",
    "CovariantQuantities",
    "Condition",
    "Nondegeneracy",
    "ExtractedLagrangian",
    "FirstIntegral",
    "DualSymmetry",
    "HelmholtzReport",
    "POINCARE_CARTAN",
    "CONSERVATIVE",
    "FAIL",
    "helmholtz_quantities",
    "covariant_quantities",
    "helmholtz_conditions",
    "two_form_d_theta",
    "lie_S_d_theta",
    "lie_S_d_theta_generic",
    "derived_two_forms",
    "nondegenerate",
    "nondegeneracy_two_form",
    "determinant",
    "adjugate",
    "poincare_cartan",
    "extract_lagrangian",
    "first_integral",
    "dual_symmetry",
    "check",
    "euler_lagrange_semispray",
    "el_residual_exprs",
    "numeric_semispray",
]
