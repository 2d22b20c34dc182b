"""Fixed-step RK4 integration of ``x'' = -2 G(t, x, x')`` and checks along the result."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .expr import EvaluationError, Expr, Point, lambdify
from .helmholtz import Lagrangian, el_residual_exprs
from .semispray import Semispray

METHOD = "rk4"


class IntegrationError(RuntimeError):
    """Integration stopped early; ``last_good`` is the last finite sample."""

    def __init__(self, message: str, last_good: Optional[tuple] = None, t: Optional[float] = None):
        super().__init__(message)
        self.last_good = last_good
        self.t = t


class BlowUpError(IntegrationError):
    pass


class IntegrationDomainError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    t0: float
    t1: float
    h: float
    dtype: type = np.float64

    def __post_init__(self):
        if not (self.h > 0):
            raise ValueError("step h must be positive")
        if not (self.t1 > self.t0):
            raise ValueError("t1 must exceed t0")
        if (self.t1 - self.t0) / self.h < 1 - 1e-12:
            raise ValueError("interval shorter than one step")


@dataclass
class Trajectory:
    n: int
    t: np.ndarray
    x: np.ndarray  # shape (samples, n)
    y: np.ndarray
    h: float
    method: str = METHOD
    semispray: Optional[Semispray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def point(self, k: int) -> Point:
        return Point(float(self.t[k]), tuple(float(v) for v in self.x[k]), tuple(float(v) for v in self.y[k]))

    @property
    def final(self) -> Point:
        return self.point(len(self) - 1)

    def to_csv(self, extra: Optional[dict] = None) -> str:
        """CSV with header ``t,x1..xn,y1..yn`` (plus any extra named columns)."""
        extra = extra or {}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["t"] + [f"x{i}" for i in range(1, self.n + 1)] + [f"y{i}" for i in range(1, self.n + 1)]
        w.writerow(header + list(extra))
        for k in range(len(self)):
            row = [self.t[k], *self.x[k], *self.y[k]] + [col[k] for col in extra.values()]
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v) -> str:
    return format(float(v), ".17g")


GFunction = Callable[[float, Sequence[float], Sequence[float]], Sequence[float]]


def _g_function(S: Union[Semispray, GFunction], n: int) -> GFunction:
    if isinstance(S, Semispray):
        f = lambdify(list(S.G), n)
        return lambda t, x, y: f(t, x, y)
    return S


def integrate(
    S: Union[Semispray, GFunction],
    init: Point,
    cfg: IntegratorConfig,
    *,
    n: Optional[int] = None,
) -> Trajectory:
    """Classical RK4 with fixed step; a shorter last step lands exactly on ``t1``.

    ``S`` may also be a plain callable returning ``G(t, x, y)`` (used when no
    symbolic inverse metric is available).
    """
    n = init.n if n is None else n
    if isinstance(S, Semispray) and S.n != n:
        raise ValueError("initial point dimension does not match the semispray")
    G = _g_function(S, n)
    dt_ = cfg.dtype

    def rhs(t, z):
        x, y = z[:n], z[n:]
        try:
            g = G(t, x, y)
        except (EvaluationError, ArithmeticError, ValueError) as exc:
            raise IntegrationDomainError(f"G not defined at t={float(t)}: {exc}", t=float(t))
        acc = np.array([-2 * dt_(v) for v in g], dtype=dt_)
        return np.concatenate([y, acc])

    steps = int(math.floor((cfg.t1 - cfg.t0) / cfg.h + 1e-9))
    times = [dt_(cfg.t0) + dt_(k) * dt_(cfg.h) for k in range(steps + 1)]
    if float(cfg.t1 - times[-1]) > 1e-12 * max(1.0, abs(cfg.t1)):
        times.append(dt_(cfg.t1))
    else:
        times[-1] = dt_(cfg.t1)
    z = np.array(list(init.x) + list(init.y), dtype=dt_)
    out = [z.copy()]
    for k in range(len(times) - 1):
        t, hk = times[k], times[k + 1] - times[k]
        # overflow shows up as a non-finite state and is reported below
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                k1 = rhs(t, z)
                k2 = rhs(t + hk / 2, z + hk / 2 * k1)
                k3 = rhs(t + hk / 2, z + hk / 2 * k2)
                k4 = rhs(t + hk, z + hk * k3)
            except IntegrationDomainError as exc:
                exc.last_good = (float(t), tuple(float(v) for v in z))
                raise
            z = z + hk / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z.astype(float))):
            raise BlowUpError(
                f"state became non-finite at t={float(times[k + 1])}",
                last_good=(float(t), tuple(float(v) for v in out[-1])),
                t=float(t),
            )
        out.append(z.copy())
    arr = np.array(out)
    return Trajectory(
        n,
        np.array(times, dtype=dt_),
        arr[:, :n],
        arr[:, n:],
        cfg.h,
        METHOD,
        S if isinstance(S, Semispray) else None,
    )


def _values_along(exprs: List[Expr], traj: Trajectory) -> np.ndarray:
    f = lambdify(exprs, traj.n)
    return np.array(
        [f(float(traj.t[k]), [float(v) for v in traj.x[k]], [float(v) for v in traj.y[k]]) for k in range(len(traj))],
        dtype=float,
    )


def el_residual_samples(L: Lagrangian, traj: Trajectory, S: Optional[Semispray] = None) -> np.ndarray:
    """Per-sample max over ``i`` of ``|S(∂L/∂y^i) - ∂L/∂x^i|``."""
    S = S or traj.semispray
    if S is None:
        raise ValueError("trajectory carries no semispray; pass S explicitly")
    return np.max(np.abs(_values_along(el_residual_exprs(L, S), traj)), axis=1)


def el_residual(L: Lagrangian, traj: Trajectory, S: Optional[Semispray] = None) -> float:
    """Max Euler–Lagrange residual along ``traj``, with ``d/dt`` replaced by ``S``."""
    return float(np.max(el_residual_samples(L, traj, S)))


def first_integral_samples(f: Union[Expr, Callable], traj: Trajectory) -> np.ndarray:
    if isinstance(f, Expr):
        return _values_along([f], traj)[:, 0]
    return np.array(
        [f(float(traj.t[k]), [float(v) for v in traj.x[k]], [float(v) for v in traj.y[k]]) for k in range(len(traj))],
        dtype=float,
    )


def conservation_check(f: Union[Expr, Callable], traj: Trajectory) -> float:
    """``max_k |f(sample_k) - f(sample_0)|``."""
    vals = first_integral_samples(f, traj)
    return float(np.max(np.abs(vals - vals[0])))


__all__ = [
    "IntegrationError",
    "BlowUpError",
    "IntegrationDomainError",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "el_residual",
    "el_residual_samples",
    "first_integral_samples",
    "conservation_check",
]
