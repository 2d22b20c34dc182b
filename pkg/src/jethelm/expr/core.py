"""Canonical symbolic expressions over the jet coordinates ``t, x1..xn, y1..yn``.

An :class:`Expr` is stored as an expanded sum of monomials with exact rational
coefficients. A monomial is a sorted tuple of ``(atom, exponent)`` pairs where an
atom is a coordinate :class:`Var`, a function application :class:`Apply`, or an
opaque base (an ``Expr`` raised to a negative or fractional power).

Canonicalization rules:

* products of sums are expanded, positive integer powers of sums too;
* like atoms merge by adding exponents, zero exponents vanish;
* all ``exp`` factors of a monomial merge into a single ``exp(sum)``;
* a sum raised to a negative integer power is made monic (leading coefficient 1)
  before it becomes an atom.

Two canonical expressions are mathematically equal when their term tables are
equal; the converse does not hold (``sin(t)^2 + cos(t)^2`` stays as it is).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

Number = Union[int, Fraction]

FUNCTIONS = ("sin", "cos", "exp", "ln")

_KIND_ORDER = {"t": 0, "x": 1, "y": 2}


class DomainError(ArithmeticError):
    """Elementary function evaluated outside its real domain."""


class Var:
    """A jet coordinate: ``t``, ``x<i>`` or ``y<i>`` (1-based index)."""

    __slots__ = ("kind", "index", "name", "key", "_hash")

    def __init__(self, kind: str, index: int = 0):
        if kind not in _KIND_ORDER:
            raise ValueError(f"unknown coordinate kind {kind!r}")
        if kind == "t":
            index = 0
        elif index < 1:
            raise ValueError("coordinate indices start at 1")
        self.kind = kind
        self.index = index
        self.name = "t" if kind == "t" else f"{kind}{index}"
        self.key = (0, "%d:%06d" % (_KIND_ORDER[kind], index))
        self._hash = hash(("var", self.name))

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.name

    def frame_index(self, n: int) -> int:
        """Position in the coordinate order ``(t, x1..xn, y1..yn)``."""
        if self.kind == "t":
            return 0
        if self.index > n:
            raise ValueError(f"{self.name} out of range for n={n}")
        return self.index if self.kind == "x" else n + self.index


class Apply:
    """Elementary function applied to an expression."""

    __slots__ = ("func", "arg", "_key", "_hash")

    def __init__(self, func: str, arg: "Expr"):
        self.func = func
        self.arg = arg
        self._key = None
        self._hash = hash(("apply", func, arg))

    @property
    def key(self):
        if self._key is None:
            self._key = (1, f"{self.func}({self.arg})")
        return self._key

    def __eq__(self, other):
        return (
            isinstance(other, Apply)
            and other._hash == self._hash
            and other.func == self.func
            and other.arg == self.arg
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"{self.func}({self.arg})"


Atom = Union[Var, Apply, "Expr"]
Monomial = Tuple[Tuple[Atom, Number], ...]


def _norm_exp(e: Number) -> Number:
    if isinstance(e, Fraction) and e.denominator == 1:
        return int(e)
    return e


def _atom_key(atom) -> tuple:
    return atom.key


def _mono_key(mono: Monomial) -> tuple:
    return tuple((a.key, e) for a, e in mono)


def _exact_root(c: Fraction, q: int):
    """Exact positive q-th root of a non-negative rational, or None."""
    if c < 0:
        return None
    num = _int_root(c.numerator, q)
    den = _int_root(c.denominator, q)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(v: int, q: int):
    if q == 2:
        r = isqrt(v)
        return r if r * r == v else None
    r = round(v ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == v:
            return cand
    return None


def _rational_pow(c: Fraction, e: Number):
    """c**e when the result is rational, else None."""
    if isinstance(e, int):
        if c == 0 and e < 0:
            raise ZeroDivisionError("division by zero in constant power")
        return c**e
    root = _exact_root(c, e.denominator)
    if root is None:
        return None
    if root == 0 and e < 0:
        raise ZeroDivisionError("division by zero in constant power")
    return root**e.numerator


class Expr:
    """Immutable canonical expression (see module docstring)."""

    __slots__ = ("terms", "_hash", "_str", "_vars", "_key")

    def __init__(self, terms: Dict[Monomial, Fraction]):
        # callers guarantee canonical monomials and nonzero coefficients
        self.terms = terms
        self._hash = None
        self._str = None
        self._vars = None
        self._key = None

    # -- construction -----------------------------------------------------
    @staticmethod
    def const(c: Number) -> "Expr":
        c = Fraction(c)
        if c == 0:
            return ZERO
        return Expr({(): c})

    @staticmethod
    def atom(a: Atom, e: Number = 1) -> "Expr":
        return atom_power(a, e)

    # -- basic predicates -------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    @property
    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), Fraction(0))

    @property
    def free_vars(self) -> frozenset:
        if self._vars is None:
            out = set()
            for mono in self.terms:
                for a, _ in mono:
                    if isinstance(a, Var):
                        out.add(a)
                    elif isinstance(a, Apply):
                        out |= a.arg.free_vars
                    else:
                        out |= a.free_vars
            self._vars = frozenset(out)
        return self._vars

    def depends_on(self, v: Var) -> bool:
        return v in self.free_vars

    # -- identity ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Expr.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        if self is other:
            return True
        if self._hash is not None and other._hash is not None and self._hash != other._hash:
            return False
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    @property
    def key(self):
        """Sort key when this expression is used as an opaque power base."""
        if self._key is None:
            self._key = (2, str(self))
        return self._key

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: _mono_key(kv[0]))

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Expr(out)

    __radd__ = __add__

    def __neg__(self):
        return Expr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return _mul(_coerce(other), power(self, -1))

    def __pow__(self, e):
        return power(self, e)

    # -- calculus ---------------------------------------------------------
    def diff(self, v: Var) -> "Expr":
        return diff(self, v)

    def subs(self, mapping: Mapping[Var, "Expr"]) -> "Expr":
        return substitute(self, mapping)

    # -- printing ---------------------------------------------------------
    def __str__(self):
        if self._str is None:
            self._str = _format(self)
        return self._str

    def __repr__(self):
        return f"Expr({str(self)!r})"


ZERO = Expr({})
ONE = Expr({(): Fraction(1)})


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr.const(x)
    if isinstance(x, Var):
        return Expr.atom(x)
    return NotImplemented


def as_expr(x) -> Expr:
    out = _coerce(x)
    if out is NotImplemented:
        raise TypeError(f"cannot convert {type(x).__name__} to Expr")
    return out


# ---------------------------------------------------------------------------
# multiplication


def _mul(a: Expr, b: Expr) -> Expr:
    if not a.terms or not b.terms:
        return ZERO
    if len(a.terms) > len(b.terms):
        a, b = b, a
    out: Dict[Monomial, Fraction] = {}
    pending = []
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            mono, coef, extra = _mono_mul(ma, mb)
            coef = coef * ca * cb
            if extra is not None:
                pending.append(_mul(Expr({mono: coef}), extra))
                continue
            s = out.get(mono)
            if s is None:
                out[mono] = coef
            else:
                s = s + coef
                if s:
                    out[mono] = s
                else:
                    del out[mono]
    res = Expr(out)
    for p in pending:
        res = res + p
    return res


@lru_cache(maxsize=1 << 18)
def _mono_mul(ma: Monomial, mb: Monomial):
    """Product of two monomials.

    Returns ``(monomial, coefficient, extra)`` where ``extra`` is an Expr factor
    that still has to be multiplied in (expanded sums, merged exponentials), or None.
    """
    if not ma:
        return mb, Fraction(1), None
    if not mb:
        return ma, Fraction(1), None
    merged: Dict[Atom, Number] = dict(ma)
    for atom, e in mb:
        s = merged.get(atom)
        merged[atom] = e if s is None else _norm_exp(s + e)
    return _finish_monomial(merged)


def _finish_monomial(merged: Dict[Atom, Number]):
    coef = Fraction(1)
    extra = None
    exp_arg = None
    keep = []
    for atom, e in merged.items():
        if e == 0:
            continue
        if isinstance(atom, Apply) and atom.func == "exp":
            term = atom.arg if e == 1 else atom.arg * Expr.const(e)
            exp_arg = term if exp_arg is None else exp_arg + term
            continue
        if isinstance(atom, Expr) and isinstance(e, int) and (e > 0 or _is_monomial(atom)):
            f = power(atom, e)
            extra = f if extra is None else _mul(extra, f)
            continue
        keep.append((atom, e))
    if exp_arg is not None:
        f = exp(exp_arg)
        if f.is_constant:
            coef *= f.constant_value
        else:
            (m, c), = f.terms.items()
            if len(m) == 1 and m[0][1] == 1 and c == 1:
                keep.append(m[0])
            else:
                extra = f if extra is None else _mul(extra, f)
    keep.sort(key=lambda ae: ae[0].key)
    return tuple(keep), coef, extra


def _is_monomial(e: Expr) -> bool:
    return len(e.terms) <= 1


def atom_power(atom, e: Number) -> Expr:
    """``atom**e`` in canonical form."""
    e = _norm_exp(Fraction(e)) if not isinstance(e, int) else e
    if e == 0:
        return ONE
    m, coef, extra = _finish_monomial({atom: e})
    res = Expr({m: coef})
    return res if extra is None else _mul(res, extra)


# ---------------------------------------------------------------------------
# powers


def power(base, e) -> Expr:
    base = as_expr(base)
    if isinstance(e, Expr):
        if not e.is_constant:
            raise ValueError("only rational exponents are supported")
        e = e.constant_value
    e = _norm_exp(Fraction(e)) if not isinstance(e, int) else e
    if e == 0:
        return ONE
    if e == 1:
        return base
    if not base.terms:
        if e < 0:
            raise ZeroDivisionError("division by zero")
        return ZERO
    if len(base.terms) == 1:
        (mono, c), = base.terms.items()
        return _monomial_power(mono, c, base, e)
    # genuine sum
    if isinstance(e, int):
        if e > 0:
            return _expand_power(base, e)
        lead_mono, lead_c = min(base.terms.items(), key=lambda kv: _mono_key(kv[0]))
        if lead_c != 1:
            monic = Expr({m: c / lead_c for m, c in base.terms.items()})
            return Expr({((monic, e),): lead_c**e})
        return Expr({((base, e),): Fraction(1)})
    return Expr({((base, e),): Fraction(1)})


def _expand_power(base: Expr, e: int) -> Expr:
    result = ONE
    sq = base
    while e:
        if e & 1:
            result = _mul(result, sq)
        e >>= 1
        if e:
            sq = _mul(sq, sq)
    return result


def _monomial_power(mono: Monomial, c: Fraction, base: Expr, e: Number) -> Expr:
    if not mono:
        r = _rational_pow(c, e)
        if r is not None:
            return Expr.const(r)
        # irrational constant power stays opaque
        return Expr({((Expr.const(c), e),): Fraction(1)})
    if isinstance(e, int):
        merged = {}
        for atom, ae in mono:
            merged[atom] = _norm_exp(Fraction(ae) * e) if not isinstance(ae, int) else ae * e
        m, coef, extra = _finish_monomial(merged)
        coef = coef * c**e
        res = Expr({m: coef})
        return res if extra is None else _mul(res, extra)
    # fractional exponent: distribute only where it is valid on the real domain
    rc = _rational_pow(c, e) if c > 0 else None
    ok = rc is not None and all(
        (isinstance(a, Apply) and a.func == "exp") or ae == 1 or not isinstance(ae, int)
        for a, ae in mono
    )
    if not ok:
        return Expr({((base, e),): Fraction(1)})
    merged = {}
    for atom, ae in mono:
        merged[atom] = _norm_exp(Fraction(ae) * e)
    m, coef, extra = _finish_monomial(merged)
    res = Expr({m: coef * rc})
    return res if extra is None else _mul(res, extra)


# ---------------------------------------------------------------------------
# elementary functions


def _leading_coeff(e: Expr) -> Fraction:
    return min(e.terms.items(), key=lambda kv: _mono_key(kv[0]))[1]


def exp(a) -> Expr:
    a = as_expr(a)
    if not a.terms:
        return ONE
    if len(a.terms) == 1:
        (m, c), = a.terms.items()
        if c == 1 and len(m) == 1 and isinstance(m[0][0], Apply) and m[0][0].func == "ln" and m[0][1] == 1:
            return m[0][0].arg
    return Expr({((Apply("exp", a), 1),): Fraction(1)})


def ln(a) -> Expr:
    a = as_expr(a)
    if a.is_constant:
        v = a.constant_value
        if v == 1:
            return ZERO
        if v <= 0:
            raise DomainError(f"ln of non-positive constant {v}")
    if len(a.terms) == 1:
        (m, c), = a.terms.items()
        if c == 1 and len(m) == 1 and isinstance(m[0][0], Apply) and m[0][0].func == "exp":
            return m[0][0].arg * Expr.const(m[0][1])
    return Expr({((Apply("ln", a), 1),): Fraction(1)})


def sin(a) -> Expr:
    a = as_expr(a)
    if not a.terms:
        return ZERO
    if _leading_coeff(a) < 0:
        return -Expr({((Apply("sin", -a), 1),): Fraction(1)})
    return Expr({((Apply("sin", a), 1),): Fraction(1)})


def cos(a) -> Expr:
    a = as_expr(a)
    if not a.terms:
        return ONE
    if _leading_coeff(a) < 0:
        a = -a
    return Expr({((Apply("cos", a), 1),): Fraction(1)})


def sqrt(a) -> Expr:
    return power(a, Fraction(1, 2))


FUNCTION_TABLE = {"sin": sin, "cos": cos, "exp": exp, "ln": ln, "sqrt": sqrt}


# ---------------------------------------------------------------------------
# differentiation and substitution


def _dfunc(func: str, arg: Expr) -> Expr:
    if func == "sin":
        return cos(arg)
    if func == "cos":
        return -sin(arg)
    if func == "exp":
        return exp(arg)
    if func == "ln":
        return power(arg, -1)
    raise ValueError(func)


def as_var(v) -> Var:
    """Accept a :class:`Var` or an Expr that is a bare coordinate."""
    if isinstance(v, Var):
        return v
    if isinstance(v, Expr) and len(v.terms) == 1:
        (mono, c), = v.terms.items()
        if c == 1 and len(mono) == 1 and isinstance(mono[0][0], Var) and mono[0][1] == 1:
            return mono[0][0]
    raise TypeError(f"not a coordinate variable: {v!r}")


def diff(e: Expr, v) -> Expr:
    """Exact partial derivative of ``e`` with respect to coordinate ``v``."""
    return _diff(e, as_var(v))


@lru_cache(maxsize=1 << 17)
def _diff(e: Expr, v: Var) -> Expr:
    if v not in e.free_vars:
        return ZERO
    result = ZERO
    for mono, c in e.terms.items():
        for k, (atom, ae) in enumerate(mono):
            if isinstance(atom, Var):
                if atom != v:
                    continue
                inner = ONE
            elif isinstance(atom, Apply):
                if v not in atom.arg.free_vars:
                    continue
                inner = _diff(atom.arg, v)
                if atom.func == "exp":
                    # exp atoms always carry exponent 1
                    result = result + _mul(Expr({mono: c}), inner)
                    continue
                inner = _mul(_dfunc(atom.func, atom.arg), inner)
            else:
                if v not in atom.free_vars:
                    continue
                inner = _diff(atom, v)
            rest = Expr({mono[:k] + mono[k + 1:]: c * ae})
            if ae != 1:
                rest = _mul(rest, atom_power(atom, ae - 1))
            result = result + _mul(rest, inner)
    return result


def substitute(e: Expr, mapping: Mapping[Var, Expr]) -> Expr:
    """Replace coordinates by expressions and re-canonicalize."""
    mapping = {k: as_expr(v) for k, v in mapping.items()}
    if not (e.free_vars & set(mapping)):
        return e
    cache: dict = {}

    def atom_value(atom):
        if atom in cache:
            return cache[atom]
        if isinstance(atom, Var):
            val = mapping.get(atom, None)
            val = Expr.atom(atom) if val is None else val
        elif isinstance(atom, Apply):
            val = FUNCTION_TABLE[atom.func](substitute(atom.arg, mapping))
        else:
            val = substitute(atom, mapping)
        cache[atom] = val
        return val

    total = ZERO
    for mono, c in e.terms.items():
        term = Expr.const(c)
        for atom, ae in mono:
            term = _mul(term, power(atom_value(atom), ae))
        total = total + term
    return total


# ---------------------------------------------------------------------------
# printing


def _fmt_exp(e: Number) -> str:
    if isinstance(e, int) and e > 0:
        return str(e)
    return f"({e})"


def _fmt_atom(atom, e: Number) -> str:
    if isinstance(atom, Var) or isinstance(atom, Apply):
        s = str(atom)
    else:
        s = f"({atom})"
    return s if e == 1 else f"{s}^{_fmt_exp(e)}"


def _format(e: Expr) -> str:
    if not e.terms:
        return "0"
    parts = []
    for i, (mono, c) in enumerate(e.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        factors = [_fmt_atom(atom, ae) for atom, ae in mono]
        if not factors:
            body = str(a)
        elif a == 1:
            body = "*".join(factors)
        else:
            body = f"{a}*" + "*".join(factors)
        if i == 0:
            parts.append(("-" + body) if neg else body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


# ---------------------------------------------------------------------------
# convenience constructors


def t() -> Expr:
    return Expr.atom(Var("t"))


def x(i: int) -> Expr:
    return Expr.atom(Var("x", i))


def y(i: int) -> Expr:
    return Expr.atom(Var("y", i))


def coords(n: int) -> Tuple[Var, ...]:
    """Coordinate variables in frame order ``(t, x1..xn, y1..yn)``."""
    return (Var("t"),) + tuple(Var("x", i) for i in range(1, n + 1)) + tuple(
        Var("y", i) for i in range(1, n + 1)
    )


def max_index(e: Expr) -> int:
    return max((v.index for v in e.free_vars), default=0)


def iter_atoms(e: Expr) -> Iterator:
    for mono in e.terms:
        for a, _ in mono:
            yield a


def polynomial_degree(e: Expr, variables: Iterable[Var]):
    """Per-term total degree in ``variables``; None if not polynomial in them."""
    vs = set(variables)
    out = []
    for mono, c in e.terms.items():
        d = 0
        for a, ae in mono:
            if isinstance(a, Var):
                if a in vs:
                    if not isinstance(ae, int) or ae < 0:
                        return None
                    d += ae
            else:
                inner = a.arg.free_vars if isinstance(a, Apply) else a.free_vars
                if inner & vs:
                    return None
        out.append((mono, c, d))
    return out
