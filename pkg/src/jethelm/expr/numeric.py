"""Floating-point evaluation, compilation to Python callables, and zero testing."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Apply, DomainError, Expr, Var, max_index

DEFAULT_PROBES = 32
DEFAULT_TOL = 1e-9
SAMPLE_HALF_WIDTH = 2.0
MAX_OVERSAMPLING = 10


class EvaluationError(ArithmeticError):
    """Numeric evaluation failed; ``subtree`` is the offending piece."""

    def __init__(self, message: str, subtree: str):
        super().__init__(f"{message}: {subtree}")
        self.subtree = subtree


class EvalDomainError(EvaluationError, DomainError):
    pass


class EvalZeroDivisionError(EvaluationError, ZeroDivisionError):
    pass


class ProbeExhaustionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Point:
    t: float
    x: tuple
    y: tuple

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same length")
        if not all(math.isfinite(v) for v in (self.t, *self.x, *self.y)):
            raise ValueError("point coordinates must be finite")

    @property
    def n(self) -> int:
        return len(self.x)

    def env(self) -> dict:
        env = {Var("t"): np.array([self.t])}
        for i, v in enumerate(self.x, 1):
            env[Var("x", i)] = np.array([v])
        for i, v in enumerate(self.y, 1):
            env[Var("y", i)] = np.array([v])
        return env

    def as_dict(self) -> dict:
        return {"t": self.t, "x": list(self.x), "y": list(self.y)}


# ---------------------------------------------------------------------------
# vectorized evaluation


class _Batch:
    """Evaluates many expressions on one batch of points, sharing atom values."""

    def __init__(self, env: dict, size: int):
        self.env = env
        self.size = size
        self.atoms: dict = {}
        self.exprs: dict = {}
        self.bad = np.zeros(size, dtype=bool)
        self.magnitude = np.zeros(size)
        self.first_error: Optional[EvaluationError] = None

    def _flag(self, mask, exc_type, msg, subtree):
        if mask.any():
            self.bad |= mask
            if self.first_error is None:
                self.first_error = exc_type(msg, subtree)

    def _track(self, vals):
        with np.errstate(invalid="ignore"):
            mag = np.abs(vals)
        np.maximum(self.magnitude, np.where(np.isfinite(mag), mag, 0.0), out=self.magnitude)

    def atom_power(self, atom, e):
        key = (atom, e)
        got = self.atoms.get(key)
        if got is not None:
            return got
        base = self.atom(atom)
        with np.errstate(all="ignore"):
            if isinstance(e, int):
                if e < 0:
                    zero = base == 0
                    self._flag(zero, EvalZeroDivisionError, "division by zero", _atom_str(atom, e))
                    vals = np.where(zero, np.nan, 1.0 / np.where(zero, 1.0, base)) ** (-e)
                else:
                    vals = base**e
            else:
                neg = base < 0
                zero_neg = (base == 0) & (e < 0)
                self._flag(neg, EvalDomainError, "fractional power of negative value", _atom_str(atom, e))
                self._flag(zero_neg, EvalZeroDivisionError, "division by zero", _atom_str(atom, e))
                safe = np.where(neg | zero_neg, 1.0, base)
                vals = np.where(neg | zero_neg, np.nan, safe ** float(e))
        self._track(vals)
        self.atoms[key] = vals
        return vals

    def atom(self, atom):
        got = self.atoms.get(atom)
        if got is not None:
            return got
        if isinstance(atom, Var):
            try:
                vals = self.env[atom]
            except KeyError:
                raise KeyError(f"no value supplied for {atom.name}") from None
        elif isinstance(atom, Apply):
            arg = self.expr(atom.arg)
            with np.errstate(all="ignore"):
                if atom.func == "sin":
                    vals = np.sin(arg)
                elif atom.func == "cos":
                    vals = np.cos(arg)
                elif atom.func == "exp":
                    vals = np.exp(arg)
                elif atom.func == "ln":
                    badm = arg <= 0
                    self._flag(badm, EvalDomainError, "ln of non-positive value", str(atom))
                    vals = np.where(badm, np.nan, np.log(np.where(badm, 1.0, arg)))
                else:  # pragma: no cover - grammar excludes others
                    raise ValueError(atom.func)
        else:
            vals = self.expr(atom)
        self._track(vals)
        self.atoms[atom] = vals
        return vals

    def expr(self, e: Expr):
        got = self.exprs.get(id(e))
        if got is not None and got[0] is e:
            return got[1]
        total = np.zeros(self.size)
        for mono, c in e.terms.items():
            term = np.full(self.size, float(c))
            for atom, ae in mono:
                if ae == 1:
                    term = term * self.atom(atom)
                else:
                    term = term * self.atom_power(atom, ae)
            self._track(term)
            total = total + term
        self._track(total)
        nonfinite = ~np.isfinite(total) & ~self.bad
        if nonfinite.any():
            self._flag(nonfinite, EvalDomainError, "non-finite value", str(e))
        self.exprs[id(e)] = (e, total)
        return total


def _atom_str(atom, e) -> str:
    s = str(atom) if not isinstance(atom, Expr) else f"({atom})"
    return f"{s}^({e})"


def evaluate_batch(exprs: Sequence[Expr], env: dict, size: int):
    """Evaluate expressions on arrays of coordinate values.

    Returns ``(values, magnitude, bad, first_error)``: a list of arrays, the max
    absolute intermediate value per point, the mask of points where some
    evaluation failed, and the first failure encountered.
    """
    batch = _Batch(env, size)
    vals = [batch.expr(e) for e in exprs]
    return vals, batch.magnitude, batch.bad, batch.first_error


def evaluate(e: Expr, p: Point) -> float:
    """Evaluate ``e`` at a single point, raising on domain errors."""
    (vals,), _, bad, err = evaluate_batch([e], p.env(), 1)
    if bad[0]:
        raise err
    return float(vals[0])


# ---------------------------------------------------------------------------
# compilation for integrators


def _rpow(b, e):
    if b < 0:
        raise EvalDomainError("fractional power of negative value", f"{b}^{e}")
    if b == 0 and e < 0:
        raise EvalZeroDivisionError("division by zero", f"0^{e}")
    return b**e


def _ipow(b, e):
    if e < 0 and b == 0:
        raise EvalZeroDivisionError("division by zero", f"0^{e}")
    return b**e


def _log(v):
    if v <= 0:
        raise EvalDomainError("ln of non-positive value", repr(v))
    return math.log(v)


def _code(e: Expr, names: dict) -> str:
    if not e.terms:
        return "0.0"
    parts = []
    for mono, c in e.sorted_terms():
        factors = [repr(float(c))]
        for atom, ae in mono:
            if isinstance(atom, Var):
                base = names[atom]
            elif isinstance(atom, Apply):
                fn = {"sin": "_sin", "cos": "_cos", "exp": "_exp", "ln": "_log"}[atom.func]
                base = f"{fn}({_code(atom.arg, names)})"
            else:
                base = f"({_code(atom, names)})"
            if ae == 1:
                factors.append(base)
            elif isinstance(ae, int):
                factors.append(f"_ipow({base}, {ae})")
            else:
                factors.append(f"_rpow({base}, {float(ae)!r})")
        parts.append("*".join(factors))
    return " + ".join(parts)


def lambdify(exprs: Sequence[Expr], n: int) -> Callable:
    """Compile expressions into ``f(t, x, y) -> tuple`` using scalar math.

    ``x`` and ``y`` are sequences of length ``n``. Domain problems raise
    :class:`EvaluationError` subclasses.
    """
    names = {Var("t"): "t"}
    for i in range(1, n + 1):
        names[Var("x", i)] = f"x[{i - 1}]"
        names[Var("y", i)] = f"y[{i - 1}]"
    body = ", ".join(_code(e, names) for e in exprs)
    src = f"def _f(t, x, y):\n    return ({body}{',' if len(exprs) == 1 else ''})\n"
    ns = {
        "_sin": math.sin,
        "_cos": math.cos,
        "_exp": math.exp,
        "_log": _log,
        "_rpow": _rpow,
        "_ipow": _ipow,
    }
    exec(compile(src, "<jethelm-lambdify>", "exec"), ns)
    fn = ns["_f"]

    def wrapped(t, x, y):
        try:
            return fn(t, x, y)
        except ZeroDivisionError:
            raise EvalZeroDivisionError("division by zero", "compiled expression") from None
        except OverflowError:
            raise EvalDomainError("overflow", "compiled expression") from None

    return wrapped


# ---------------------------------------------------------------------------
# zero testing


class ZeroVerdict:
    """Base class for the three zero-test outcomes."""

    kind = "?"
    rank = 0

    @property
    def is_zero(self) -> bool:
        return self.rank > 0

    def as_dict(self) -> dict:
        return {"verdict": self.kind}


class ProvenZero(ZeroVerdict):
    kind = "ProvenZero"
    rank = 2

    def __repr__(self):
        return "ProvenZero()"

    def __eq__(self, other):
        return isinstance(other, ProvenZero)

    def __hash__(self):
        return hash("ProvenZero")


@dataclass(frozen=True, eq=True)
class ProbablyZero(ZeroVerdict):
    probes: int
    max_abs: float
    kind = "ProbablyZero"
    rank = 1

    def as_dict(self) -> dict:
        return {"verdict": self.kind, "probes": self.probes, "max_abs": self.max_abs}


@dataclass(frozen=True, eq=True)
class NonZero(ZeroVerdict):
    witness: Point
    value: float
    kind = "NonZero"
    rank = 0

    def as_dict(self) -> dict:
        return {"verdict": self.kind, "witness": self.witness.as_dict(), "value": self.value}


PROVEN_ZERO = ProvenZero()


@dataclass(frozen=True)
class ProbeSettings:
    """Global zero-test configuration (overridable from the command line)."""

    probes: int = DEFAULT_PROBES
    tol: float = DEFAULT_TOL
    seed: int = 0
    numeric_only: bool = False


_settings = ProbeSettings()


def get_settings() -> ProbeSettings:
    return _settings


def set_settings(settings: ProbeSettings) -> ProbeSettings:
    """Install new defaults; returns the previous settings."""
    global _settings
    old, _settings = _settings, settings
    return old


def _rng_for(e: Expr, seed: int) -> np.random.Generator:
    # seeded by content so verdicts do not depend on call order
    digest = zlib.crc32(str(e).encode())
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, digest])


def sample_points(rng: np.random.Generator, n: int, count: int) -> dict:
    env = {Var("t"): rng.uniform(-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH, count)}
    for i in range(1, n + 1):
        env[Var("x", i)] = rng.uniform(-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH, count)
    for i in range(1, n + 1):
        env[Var("y", i)] = rng.uniform(-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH, count)
    return env


def _point_from(env: dict, n: int, k: int) -> Point:
    return Point(
        float(env[Var("t")][k]),
        tuple(float(env[Var("x", i)][k]) for i in range(1, n + 1)),
        tuple(float(env[Var("y", i)][k]) for i in range(1, n + 1)),
    )


def is_zero(
    e: Expr,
    probes: Optional[int] = None,
    tol: Optional[float] = None,
    *,
    n: Optional[int] = None,
    seed: Optional[int] = None,
    numeric_only: Optional[bool] = None,
) -> ZeroVerdict:
    """Tri-state zero test.

    ``ProvenZero`` when the canonical form is 0. Otherwise ``e`` is evaluated at
    ``probes`` points drawn uniformly from ``[-2, 2]^(2n+1)`` (points where
    evaluation fails are resampled, up to 10x oversampling) and the result is
    ``ProbablyZero`` if every value satisfies ``|v| <= tol * (1 + M)`` with ``M``
    the largest intermediate magnitude at that point, else ``NonZero``.
    """
    s = _settings
    probes = s.probes if probes is None else probes
    tol = s.tol if tol is None else tol
    seed = s.seed if seed is None else seed
    numeric_only = s.numeric_only if numeric_only is None else numeric_only
    if probes < 1:
        raise ValueError("probes must be >= 1")
    if not e.terms and not numeric_only:
        return PROVEN_ZERO
    n = max(max_index(e), 1) if n is None else n
    rng = _rng_for(e, seed)
    total = probes * MAX_OVERSAMPLING
    env = sample_points(rng, n, total)
    (vals,), mag, bad, err = evaluate_batch([e], env, total)
    good = np.flatnonzero(~bad)
    if len(good) < probes:
        raise ProbeExhaustionError(
            f"only {len(good)} of {probes} probe points were in the domain of {e}"
            + (f" ({err})" if err else "")
        )
    good = good[:probes]
    v = vals[good]
    bound = tol * (1.0 + mag[good])
    fails = np.flatnonzero(np.abs(v) > bound)
    if len(fails):
        k = good[fails[0]]
        return NonZero(_point_from(env, n, k), float(vals[k]))
    return ProbablyZero(probes, float(np.max(np.abs(v))) if len(v) else 0.0)


def weakest(verdicts) -> ZeroVerdict:
    """Combine verdicts: a NonZero dominates, then ProbablyZero, then ProvenZero."""
    out: ZeroVerdict = PROVEN_ZERO
    for v in verdicts:
        if v.rank < out.rank:
            out = v
            if v.rank == 0:
                break
    return out
