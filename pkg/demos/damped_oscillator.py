"""Damped oscillator x'' + 2γx' + ω²x = 0 and its exponential multiplier.

The equation is not conservative, yet e^{2γt} turns it into an Euler–Lagrange
system. We check that claim, recover the Lagrangian, and watch a trajectory.
"""
from fractions import Fraction

import numpy as np

from jethelm.expr import Point, exp, t, x, y
from jethelm.geodesic import IntegratorConfig, el_residual, integrate
from jethelm.helmholtz import Lagrangian, SemiBasicOneForm, check
from jethelm.semispray import Semispray, jacobi_endomorphism

gamma, omega2 = Fraction(1, 2), Fraction(2)

# G = γy + ω²x/2, so that x'' = -2G
S = Semispray(1, [gamma * y(1) + omega2 / 2 * x(1)])
print("semispray coefficients:", [str(g) for g in S.G])
print("Jacobi endomorphism R =", jacobi_endomorphism(S).R[0][0], "(expected ω² - γ² = 7/4)")

theta = SemiBasicOneForm(exp(2 * gamma * t()) * (y(1) ** 2 - omega2 * x(1) ** 2) / 2, [exp(2 * gamma * t()) * y(1)])
report = check(S, theta)
print("\nroute:", report.route, "->", report.classification)
for name, cond in report.conditions.items():
    print(f"  {name:3s} {cond.verdict.kind:12s} {cond.description}")
print("Lagrangian:", report.lagrangian.expr)

# Numerically the extracted L satisfies the Euler–Lagrange equations along solutions
traj = integrate(S, Point(0.0, (1.0,), (0.0,)), IntegratorConfig(0.0, 10.0, 1e-3))
print("\nx(10) =", traj.final.x[0])
print("max EL residual along the trajectory:", el_residual(report.lagrangian.lagrangian, traj))

# amplitude decays like e^{-γt}
early, late = np.abs(traj.x[:2000, 0]).max(), np.abs(traj.x[-2000:, 0]).max()
print(f"max |x| on [0, 2]: {early:.4f}, on [8, 10]: {late:.4f}")
