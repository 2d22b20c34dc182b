"""Random polynomial inputs for the identity and round-trip suites."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .expr import ZERO, Expr, Var, coords
from .forms import KForm, Tensor11, VectorField


def rng_for(seed: int, *tags) -> random.Random:
    """Independent stream per (seed, tag) so suites do not depend on run order."""
    return random.Random(repr((seed,) + tags))


def random_coefficient(rng: random.Random, bound: int = 3, denom: int = 2) -> Fraction:
    """Nonzero rational in ``[-bound, bound]`` with denominator at most ``denom``."""
    while True:
        d = rng.randint(1, denom)
        c = Fraction(rng.randint(-bound * d, bound * d), d)
        if c:
            return c


def random_polynomial(
    rng: random.Random,
    n: int,
    degree: int = 2,
    terms: int = 3,
    variables: Optional[Sequence[Var]] = None,
) -> Expr:
    """Sum of up to ``terms`` distinct random monomials of total degree <= ``degree``.

    Monomials are distinct so every coefficient stays within the bound.
    """
    vs = list(variables) if variables is not None else list(coords(n))
    seen = set()
    e = ZERO
    for _ in range(terms):
        mono = tuple(sorted(rng.randrange(len(vs)) for _ in range(rng.randint(0, degree))))
        c = random_coefficient(rng)
        if mono in seen:
            continue
        seen.add(mono)
        m = Expr.const(c)
        for k in mono:
            m = m * Expr.atom(vs[k])
        e = e + m
    return e


def random_semispray_coeffs(rng: random.Random, n: int, degree: int = 2, terms: int = 3):
    return [random_polynomial(rng, n, degree, terms) for _ in range(n)]


def random_form(rng: random.Random, n: int, k: int, degree: int = 1, density: float = 0.5) -> KForm:
    comps = {}
    for idx in combinations(range(2 * n + 1), k):
        if k == 0 or rng.random() < density:
            comps[idx] = random_polynomial(rng, n, degree, 2)
    return KForm(n, k, comps)


def random_vector_field(rng: random.Random, n: int, degree: int = 1) -> VectorField:
    return VectorField(n, [random_polynomial(rng, n, degree, 2) for _ in range(2 * n + 1)])


def random_tensor(rng: random.Random, n: int, degree: int = 1, density: float = 0.4) -> Tensor11:
    d = 2 * n + 1
    return Tensor11(
        n,
        [[random_polynomial(rng, n, degree, 2) if rng.random() < density else ZERO for _ in range(d)] for _ in range(d)],
    )


def random_semibasic(rng: random.Random, n: int, degree: int = 2, terms: int = 3):
    """``(θ_0, [θ_i])`` with random polynomial components."""
    return random_polynomial(rng, n, degree, terms), [random_polynomial(rng, n, degree, terms) for _ in range(n)]


__all__ = [
    "rng_for",
    "random_coefficient",
    "random_polynomial",
    "random_semispray_coeffs",
    "random_form",
    "random_vector_field",
    "random_tensor",
    "random_semibasic",
]
