"""Run the structural identity suite on a few random quadratic semisprays."""
import time

from jethelm.fuzz import random_semispray_coeffs, rng_for
from jethelm.identities import run_identities
from jethelm.semispray import Semispray

for n in (1, 2, 3):
    S = Semispray(n, random_semispray_coeffs(rng_for(2024, "demo", n), n))
    start = time.perf_counter()
    results = run_identities(S, seed=0)
    took = time.perf_counter() - start
    bad = [r.name for r in results if not r.passed]
    kinds = sorted({r.verdict.kind for r in results})
    print(f"n={n}  G={list(map(str, S.G))}")
    print(f"      {len(results)} identities in {took:.2f} s, verdicts {kinds}, failures {bad}")
