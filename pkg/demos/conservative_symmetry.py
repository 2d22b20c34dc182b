"""A multiplier that is not a Poincaré–Cartan form but still makes the
harmonic oscillator variational, with a first integral and a dual symmetry.
"""
import numpy as np

from jethelm.expr import Point, x, y
from jethelm.geodesic import IntegratorConfig, conservation_check, integrate
from jethelm.helmholtz import SemiBasicOneForm, check
from jethelm.semispray import Semispray

S = Semispray(1, [x(1) / 2])  # x'' = -x
theta = SemiBasicOneForm(y(1) ** 2, [y(1)])

report = check(S, theta)
print("classification:", report.classification, f"(evidence: {report.evidence})")
print("a_1 =", report.quantities.a[0], " so theta is not d_J-closed")
print("Lagrangian L =", report.lagrangian.expr)
print("first integral f = theta_0 - L =", report.first_integral.expr)
print("S(f) =", report.first_integral.S_of_f, report.first_integral.verdict.kind)

ds = report.dual_symmetry
print("\ndual symmetry omega = i_S dθ:")
print("  delta x part:", [str(e) for e in ds.omega_dx], " delta y part:", [str(e) for e in ds.omega_dy])
for label, v in [("b + ∇a", ds.b_plus_nabla_a), ("∇b - aR", ds.nabla_b_minus_aR), ("Jacobi", ds.jacobi), ("L_S ω", ds.lie_invariance)]:
    print(f"  {label:12s} {v.kind}")

rng = np.random.default_rng(1)
drifts = []
for _ in range(5):
    x0, y0 = rng.uniform(-2, 2, 2)
    tr = integrate(S, Point(0.0, (x0,), (y0,)), IntegratorConfig(0.0, 5.0, 1e-3))
    drifts.append(conservation_check(report.first_integral.expr, tr))
print("\nfirst-integral drift on 5 random trajectories:", ["%.1e" % d for d in drifts])
