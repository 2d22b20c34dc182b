"""From a Lagrangian to its semispray and back.

L = ½((y¹)² + (y²)²) − x¹x² gives coupled oscillators; the Poincaré–Cartan
form of L must pass every condition on the d_J-closed route and give L back.
"""
from jethelm.expr import parse
from jethelm.helmholtz import Lagrangian, SingularMetricError, check, euler_lagrange_semispray, poincare_cartan

n = 2
L = Lagrangian(parse("(y1^2 + y2^2)/2 - x1*x2", n), n)
S = euler_lagrange_semispray(L)
print("G =", [str(g) for g in S.G])

theta_L = poincare_cartan(L)
print("theta_L: theta_0 =", theta_L.theta0, " theta_i =", [str(e) for e in theta_L.theta])

report = check(S, theta_L)
print("route:", report.route, "classification:", report.classification)
print("recovered L:", report.lagrangian.expr, "| same as input:", report.lagrangian.expr == L.L)

# a degenerate Lagrangian has no semispray
try:
    euler_lagrange_semispray(Lagrangian(parse("y1", 1), 1))
except SingularMetricError as exc:
    print("\nL = y1:", exc)
