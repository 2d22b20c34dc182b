"""Exterior and Frölicher–Nijenhuis calculus in the coordinate frame of J¹π.

Everything here is expressed in the frame ``(∂t, ∂x1..∂xn, ∂y1..∂yn)`` and the
dual cobasis ``(dt, dx1..dxn, dy1..dyn)``; frame index 0 is ``t``, ``1..n`` are
the ``x`` and ``n+1..2n`` the ``y`` directions.

Forms store only strictly increasing multi-indices, and ``dx^I`` evaluated on
``(∂_I)`` is 1 (determinant convention). These routines are the generic oracle
against which the adapted-frame formulas in :mod:`jethelm.semispray` and
:mod:`jethelm.helmholtz` are checked.
"""
from __future__ import annotations

from itertools import product
from typing import Dict, Optional, Sequence, Tuple

from .expr import ONE, ZERO, Expr, as_expr, coords, diff, is_zero, weakest
from .expr.numeric import ZeroVerdict

MAX_DEGREE = 4

Index = Tuple[int, ...]


class DegreeError(ValueError):
    pass


def _sort_index(idx: Sequence[int]):
    """Sort a multi-index; returns ``(sign, sorted)`` or ``(0, None)`` on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # insertion sort counting transpositions; indices are short
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def _accumulate(out: Dict[Index, Expr], idx: Sequence[int], coef: Expr, sign: int = 1):
    s, key = _sort_index(idx)
    if s == 0 or not coef:
        return
    s *= sign
    term = coef if s == 1 else -coef
    prev = out.get(key)
    out[key] = term if prev is None else prev + term


class KForm:
    """A scalar k-form ``sum_{I increasing} coeff_I dx^I``."""

    __slots__ = ("n", "degree", "comps")

    def __init__(self, n: int, degree: int, comps: Optional[Dict[Index, Expr]] = None):
        if degree < 0 or degree > MAX_DEGREE:
            raise DegreeError(f"degree {degree} outside 0..{MAX_DEGREE}")
        self.n = n
        self.degree = degree
        self.comps = {k: v for k, v in (comps or {}).items() if v}

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @classmethod
    def function(cls, n: int, f) -> "KForm":
        return cls(n, 0, {(): as_expr(f)})

    @classmethod
    def basis(cls, n: int, *idx: int) -> "KForm":
        out: Dict[Index, Expr] = {}
        _accumulate(out, idx, ONE)
        return cls(n, len(idx), out)

    @classmethod
    def one_form(cls, n: int, coeffs: Sequence) -> "KForm":
        return cls(n, 1, {(i,): as_expr(c) for i, c in enumerate(coeffs)})

    @property
    def scalar(self) -> Expr:
        if self.degree != 0:
            raise DegreeError("not a 0-form")
        return self.comps.get((), ZERO)

    def coeff(self, *idx: int) -> Expr:
        s, key = _sort_index(idx)
        if s == 0:
            return ZERO
        v = self.comps.get(key, ZERO)
        return v if s == 1 else -v

    def __add__(self, other: "KForm") -> "KForm":
        _same_degree(self, other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            out[k] = out[k] + v if k in out else v
        return KForm(self.n, self.degree, out)

    def __neg__(self) -> "KForm":
        return KForm(self.n, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def __mul__(self, f) -> "KForm":
        f = as_expr(f)
        return KForm(self.n, self.degree, {k: v * f for k, v in self.comps.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, KForm)
            and self.degree == other.degree
            and self.n == other.n
            and self.comps == other.comps
        )

    def __hash__(self):
        return hash((self.n, self.degree, frozenset(self.comps.items())))

    def __repr__(self):
        return f"KForm(n={self.n}, degree={self.degree}, {format_form(self)})"

    def components(self):
        return list(self.comps.values())


def _same_degree(a: KForm, b: KForm):
    if a.degree != b.degree or a.n != b.n:
        raise DegreeError(f"incompatible forms: degree {a.degree} vs {b.degree}")


def format_form(w: KForm) -> str:
    names = coord_names(w.n)
    if not w.comps:
        return "0"
    parts = []
    for idx in sorted(w.comps):
        basis = "^".join("d" + names[i] for i in idx)
        parts.append(f"({w.comps[idx]})" + (f" {basis}" if basis else ""))
    return " + ".join(parts)


def coord_names(n: int):
    return [v.name for v in coords(n)]


def zero_form(n: int, degree: int) -> KForm:
    return KForm(n, degree)


def dt(n: int) -> KForm:
    return KForm.basis(n, 0)


def wedge(a: KForm, b: KForm) -> KForm:
    if a.degree + b.degree > MAX_DEGREE:
        raise DegreeError(f"wedge degree {a.degree + b.degree} exceeds {MAX_DEGREE}")
    out: Dict[Index, Expr] = {}
    for ia, fa in a.comps.items():
        for ib, fb in b.comps.items():
            _accumulate(out, ia + ib, fa * fb)
    return KForm(a.n, a.degree + b.degree, out)


class VectorField:
    """Components over the coordinate frame."""

    __slots__ = ("n", "comps")

    def __init__(self, n: int, comps: Sequence):
        if len(comps) != 2 * n + 1:
            raise ValueError(f"vector field needs {2 * n + 1} components, got {len(comps)}")
        self.n = n
        self.comps = tuple(as_expr(c) for c in comps)

    @classmethod
    def basis(cls, n: int, i: int) -> "VectorField":
        c = [ZERO] * (2 * n + 1)
        c[i] = ONE
        return cls(n, c)

    def __call__(self, f: Expr) -> Expr:
        """Directional derivative ``X(f)``."""
        vs = coords(self.n)
        out = ZERO
        for c, v in zip(self.comps, vs):
            if c:
                d = diff(f, v)
                if d:
                    out = out + c * d
        return out

    def __add__(self, other):
        return VectorField(self.n, [a + b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return VectorField(self.n, [-a for a in self.comps])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        f = as_expr(f)
        return VectorField(self.n, [a * f for a in self.comps])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def __repr__(self):
        names = coord_names(self.n)
        parts = [f"({c}) d/d{nm}" for c, nm in zip(self.comps, names) if c]
        return "VectorField(" + (" + ".join(parts) or "0") + ")"

    def components(self):
        return list(self.comps)


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Lie bracket ``[X, Y]``."""
    return VectorField(X.n, [X(b) - Y(a) for a, b in zip(X.comps, Y.comps)])


def partial_vf(i: int, X: VectorField) -> VectorField:
    """``[∂_i, X]`` i.e. the componentwise partial derivative."""
    v = coords(X.n)[i]
    return VectorField(X.n, [diff(c, v) for c in X.comps])


class Tensor11:
    """(1,1)-tensor ``A = A[a][b] ∂_a ⊗ dx^b``; ``A(∂_b) = sum_a A[a][b] ∂_a``."""

    __slots__ = ("n", "m")

    def __init__(self, n: int, m: Sequence[Sequence]):
        d = 2 * n + 1
        if len(m) != d or any(len(r) != d for r in m):
            raise ValueError(f"tensor must be {d}x{d}")
        self.n = n
        self.m = tuple(tuple(as_expr(v) for v in row) for row in m)

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @classmethod
    def identity(cls, n: int) -> "Tensor11":
        d = 2 * n + 1
        return cls(n, [[ONE if a == b else ZERO for b in range(d)] for a in range(d)])

    @classmethod
    def zero(cls, n: int) -> "Tensor11":
        d = 2 * n + 1
        return cls(n, [[ZERO] * d for _ in range(d)])

    @classmethod
    def outer(cls, X: VectorField, w: KForm) -> "Tensor11":
        """``X ⊗ w`` for a 1-form ``w``."""
        if w.degree != 1:
            raise DegreeError("outer product needs a 1-form")
        d = 2 * X.n + 1
        return cls(X.n, [[X.comps[a] * w.coeff(b) for b in range(d)] for a in range(d)])

    def column(self, b: int) -> VectorField:
        return VectorField(self.n, [row[b] for row in self.m])

    def __call__(self, X: VectorField) -> VectorField:
        out = []
        for row in self.m:
            s = ZERO
            for a, xb in zip(row, X.comps):
                if a and xb:
                    s = s + a * xb
            out.append(s)
        return VectorField(self.n, out)

    def __matmul__(self, other: "Tensor11") -> "Tensor11":
        d = self.dim
        cols = [[other.m[k][b] for k in range(d)] for b in range(d)]
        out = []
        for row in self.m:
            r = []
            for col in cols:
                s = ZERO
                for a, c in zip(row, col):
                    if a and c:
                        s = s + a * c
                r.append(s)
            out.append(r)
        return Tensor11(self.n, out)

    def __add__(self, other):
        return Tensor11(self.n, [[a + b for a, b in zip(r, s)] for r, s in zip(self.m, other.m)])

    def __neg__(self):
        return Tensor11(self.n, [[-a for a in r] for r in self.m])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        f = as_expr(f)
        return Tensor11(self.n, [[a * f for a in r] for r in self.m])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Tensor11) and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def __repr__(self):
        return "Tensor11(" + "; ".join(", ".join(str(v) for v in r) for r in self.m) + ")"

    def components(self):
        return [v for r in self.m for v in r]

    def nonzero_rows(self):
        return [[(b, v) for b, v in enumerate(r) if v] for r in self.m]


class VectorValued2Form:
    """Vector-valued 2-form stored as one scalar 2-form per output direction."""

    __slots__ = ("n", "comps")

    def __init__(self, n: int, comps: Sequence[KForm]):
        if len(comps) != 2 * n + 1:
            raise ValueError("one 2-form per output direction required")
        if any(c.degree != 2 for c in comps):
            raise DegreeError("components must be 2-forms")
        self.n = n
        self.comps = tuple(comps)

    @classmethod
    def zero(cls, n: int) -> "VectorValued2Form":
        return cls(n, [KForm(n, 2) for _ in range(2 * n + 1)])

    def __call__(self, X: VectorField, Y: VectorField) -> VectorField:
        out = []
        for w in self.comps:
            s = ZERO
            for (b, c), f in w.comps.items():
                s = s + f * (X.comps[b] * Y.comps[c] - X.comps[c] * Y.comps[b])
            out.append(s)
        return VectorField(self.n, out)

    def __add__(self, other):
        return VectorValued2Form(self.n, [a + b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return VectorValued2Form(self.n, [-a for a in self.comps])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        return VectorValued2Form(self.n, [a * f for a in self.comps])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, VectorValued2Form) and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def __repr__(self):
        names = coord_names(self.n)
        parts = [f"d/d{nm} ⊗ [{format_form(w)}]" for nm, w in zip(names, self.comps) if w.comps]
        return "VectorValued2Form(" + (" + ".join(parts) or "0") + ")"

    def components(self):
        return [v for w in self.comps for v in w.comps.values()]


# ---------------------------------------------------------------------------
# derivations on scalar forms


def exterior_d(w: KForm) -> KForm:
    if w.degree >= MAX_DEGREE:
        raise DegreeError(f"exterior derivative of a {w.degree}-form exceeds degree cap {MAX_DEGREE}")
    vs = coords(w.n)
    out: Dict[Index, Expr] = {}
    for idx, f in w.comps.items():
        for j, v in enumerate(vs):
            if j in idx:
                continue
            df = diff(f, v)
            if df:
                _accumulate(out, (j,) + idx, df)
    return KForm(w.n, w.degree + 1, out)


def interior_vf(X: VectorField, w: KForm) -> KForm:
    if w.degree == 0:
        raise DegreeError("interior product of a 0-form")
    out: Dict[Index, Expr] = {}
    for idx, f in w.comps.items():
        for p, i in enumerate(idx):
            xi = X.comps[i]
            if xi:
                _accumulate(out, idx[:p] + idx[p + 1:], f * xi, -1 if p % 2 else 1)
    return KForm(w.n, w.degree - 1, out)


def _interior_basis(i: int, w: KForm) -> KForm:
    out: Dict[Index, Expr] = {}
    for idx, f in w.comps.items():
        if i in idx:
            p = idx.index(i)
            _accumulate(out, idx[:p] + idx[p + 1:], f, -1 if p % 2 else 1)
    return KForm(w.n, w.degree - 1, out)


def interior_t11(A: Tensor11, w: KForm) -> KForm:
    """Algebraic derivation ``i_A``: ``(i_A w)(X_1..X_k) = sum_i w(.., A X_i, ..)``."""
    if w.degree == 0:
        return KForm(w.n, 0)
    rows = A.nonzero_rows()
    out: Dict[Index, Expr] = {}
    for idx, f in w.comps.items():
        for p, a in enumerate(idx):
            for b, v in rows[a]:
                _accumulate(out, idx[:p] + (b,) + idx[p + 1:], f * v)
    return KForm(w.n, w.degree, out)


def interior_vv2(K: VectorValued2Form, w: KForm) -> KForm:
    """``i_K w`` for a vector-valued 2-form, via ``i_{α⊗V} w = α ∧ i_V w``."""
    if w.degree == 0:
        return KForm(w.n, 1)
    total = KForm(w.n, w.degree + 1)
    for a, alpha in enumerate(K.comps):
        if alpha.comps:
            inner = _interior_basis(a, w)
            if inner.comps:
                total = total + wedge(alpha, inner)
    return total


def a_star(A: Tensor11, w: KForm) -> KForm:
    """``A* w (X_1..X_k) = w(A X_1, .., A X_k)``."""
    if w.degree == 0:
        return w
    rows = A.nonzero_rows()
    out: Dict[Index, Expr] = {}
    for idx, f in w.comps.items():
        for choice in product(*(rows[a] for a in idx)):
            coef = f
            for _, v in choice:
                coef = coef * v
            _accumulate(out, [b for b, _ in choice], coef)
    return KForm(w.n, w.degree, out)


def d_A(A, w: KForm) -> KForm:
    """``d_A = i_A d - (-1)^(l-1) d i_A`` for a (1,1)-tensor (l=1) or vector-valued 2-form (l=2)."""
    if isinstance(A, Tensor11):
        return interior_t11(A, exterior_d(w)) - exterior_d(interior_t11(A, w))
    if isinstance(A, VectorValued2Form):
        first = interior_vv2(A, exterior_d(w))
        if w.degree == 0:
            return first
        return first + exterior_d(interior_vv2(A, w))
    raise TypeError("d_A needs a Tensor11 or VectorValued2Form")


def lie_form(X: VectorField, w: KForm) -> KForm:
    """Cartan's formula ``L_X = i_X d + d i_X``."""
    if w.degree == 0:
        return KForm.function(w.n, X(w.scalar))
    return interior_vf(X, exterior_d(w)) + exterior_d(interior_vf(X, w))


def lie_vf(X: VectorField, Y: VectorField) -> VectorField:
    return bracket(X, Y)


# ---------------------------------------------------------------------------
# tensors


def lie_t11(X: VectorField, A: Tensor11) -> Tensor11:
    """``(L_X A)(Y) = [X, AY] - A[X, Y]``."""
    d = A.dim
    vs = coords(A.n)
    dX = [[diff(X.comps[a], vs[c]) for c in range(d)] for a in range(d)]
    rows = []
    for a in range(d):
        row = []
        for b in range(d):
            s = X(A.m[a][b])
            for c in range(d):
                if A.m[c][b] and dX[a][c]:
                    s = s - A.m[c][b] * dX[a][c]
                if A.m[a][c] and dX[c][b]:
                    s = s + A.m[a][c] * dX[c][b]
            row.append(s)
        rows.append(row)
    return Tensor11(A.n, rows)


def _vv2_from_pairs(n: int, value) -> VectorValued2Form:
    d = 2 * n + 1
    comps = [dict() for _ in range(d)]
    for b in range(d):
        for c in range(b + 1, d):
            V = value(b, c)
            for a, f in enumerate(V.comps):
                if f:
                    comps[a][(b, c)] = f
    return VectorValued2Form(n, [KForm(n, 2, cm) for cm in comps])


def fn_bracket_t11(A: Tensor11, B: Tensor11) -> VectorValued2Form:
    """Frölicher–Nijenhuis bracket of two (1,1)-tensors, evaluated on frame pairs."""
    n = A.n
    d = A.dim
    Ac = [A.column(b) for b in range(d)]
    Bc = [B.column(b) for b in range(d)]
    dA = {}
    dB = {}

    def pA(i, b):
        if (i, b) not in dA:
            dA[(i, b)] = partial_vf(i, Ac[b])
        return dA[(i, b)]

    def pB(i, b):
        if (i, b) not in dB:
            dB[(i, b)] = partial_vf(i, Bc[b])
        return dB[(i, b)]

    def value(b, c):
        # [∂_b, ∂_c] = 0, so the (A∘B + B∘A)[X, Y] term drops
        v = bracket(Ac[b], Bc[c]) + bracket(Bc[b], Ac[c])
        v = v - A(pB(b, c)) + A(pB(c, b)) - B(pA(b, c)) + B(pA(c, b))
        return v

    return _vv2_from_pairs(n, value)


def nijenhuis(A: Tensor11) -> VectorValued2Form:
    """``N_A = ½[A, A]``."""
    return fn_bracket_t11(A, A) * (ONE / 2)


def vv1_wedge(A: Tensor11, alpha: KForm) -> VectorValued2Form:
    """``(A ∧ α)(X, Y) = A(X) α(Y) - A(Y) α(X)``."""
    d = A.dim
    a_cols = [A.column(b) for b in range(d)]
    al = [alpha.coeff(b) for b in range(d)]

    def value(b, c):
        return a_cols[b] * al[c] - a_cols[c] * al[b]

    return _vv2_from_pairs(A.n, value)


def vv1_wedge_dt(A: Tensor11) -> VectorValued2Form:
    return vv1_wedge(A, dt(A.n))


def interior_vf_vv2(X: VectorField, K: VectorValued2Form) -> Tensor11:
    """``(i_X K)(Y) = K(X, Y)`` as a (1,1)-tensor."""
    d = 2 * K.n + 1
    rows = []
    for w in K.comps:
        one = interior_vf(X, w)
        rows.append([one.coeff(b) for b in range(d)])
    return Tensor11(K.n, rows)


# ---------------------------------------------------------------------------
# zero tests


def components_of(obj) -> list:
    if isinstance(obj, Expr):
        return [obj]
    if isinstance(obj, (KForm, VectorField, Tensor11, VectorValued2Form)):
        return obj.components()
    if isinstance(obj, (list, tuple)):
        out = []
        for o in obj:
            out.extend(components_of(o))
        return out
    raise TypeError(f"cannot take components of {type(obj).__name__}")


def verdict(obj, *, n: Optional[int] = None, probes: Optional[int] = None, tol: Optional[float] = None) -> ZeroVerdict:
    """Weakest zero verdict over all components of ``obj``."""
    if n is None:
        n = getattr(obj, "n", None)
    return weakest(is_zero(c, probes, tol, n=n) for c in components_of(obj))


def is_identically_zero(obj) -> bool:
    return verdict(obj).is_zero
