import csv
import io
import math

import numpy as np
import pytest

from jethelm.expr import Point, parse, x, y
from jethelm.geodesic import (
    BlowUpError,
    IntegrationDomainError,
    IntegratorConfig,
    conservation_check,
    el_residual,
    integrate,
)
from jethelm.helmholtz import Lagrangian
from jethelm.semispray import Semispray

FREE = Semispray.free_particle(1)
HARMONIC = Semispray.parse(["x1/2"], 1)
DAMPED = Semispray.parse(["y1 + x1/2"], 1)


def test_free_particle_is_exact():
    tr = integrate(FREE, Point(0, (0.0,), (1.0,)), IntegratorConfig(0, 2, 0.1))
    assert abs(tr.final.x[0] - 2) < 1e-12
    assert np.allclose(tr.x[:, 0], tr.t, atol=1e-12)


def test_harmonic_endpoint():
    tr = integrate(HARMONIC, Point(0, (1.0,), (0.0,)), IntegratorConfig(0, math.pi, 1e-3))
    assert tr.t[-1] == math.pi
    assert abs(tr.final.x[0] + 1) < 1e-6


def test_damped_matches_closed_form():
    tr = integrate(DAMPED, Point(0, (1.0,), (-1.0,)), IntegratorConfig(0, 5, 1e-3))
    assert np.max(np.abs(tr.x[:, 0] - np.exp(-tr.t))) < 1e-6


def test_partial_last_step_lands_on_t1():
    tr = integrate(FREE, Point(0, (0.0,), (1.0,)), IntegratorConfig(0, 1, 0.3))
    assert list(np.round(tr.t, 12)) == [0, 0.3, 0.6, 0.9, 1.0]
    assert np.all(np.diff(tr.t) > 0)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(0, 1, 0)
    with pytest.raises(ValueError):
        IntegratorConfig(1, 0, 0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(0, 0.05, 0.1)


def test_el_residual_examples():
    tr = integrate(FREE, Point(0, (0.0,), (1.0,)), IntegratorConfig(0, 2, 0.01))
    assert el_residual(Lagrangian(y(1) ** 2 / 2, 1), tr) <= 1e-10
    L = Lagrangian(parse("exp(2*t)*(y1^2 - x1^2)/2", 1), 1)
    tr = integrate(DAMPED, Point(0, (1.0,), (-1.0,)), IntegratorConfig(0, 5, 1e-3))
    assert el_residual(L, tr) <= 1e-8
    tr = integrate(HARMONIC, Point(0, (1.0,), (0.0,)), IntegratorConfig(0, 1, 1e-3))
    assert el_residual(Lagrangian(y(1) ** 2 / 2, 1), tr) > 0.1


def test_conservation_examples():
    tr = integrate(FREE, Point(0, (0.0,), (1.0,)), IntegratorConfig(0, 2, 0.01))
    assert conservation_check(y(1), tr) == 0
    assert abs(conservation_check(x(1), tr) - 2) < 1e-12
    tr = integrate(HARMONIC, Point(0, (1.0,), (0.0,)), IntegratorConfig(0, 10, 1e-3))
    assert conservation_check((x(1) ** 2 + y(1) ** 2) / 2, tr) <= 1e-8


def test_domain_error_reports_time():
    S = Semispray.parse(["1/x1"], 1)
    with pytest.raises(IntegrationDomainError) as info:
        integrate(S, Point(0, (0.0,), (1.0,)), IntegratorConfig(0, 1, 0.01))
    assert info.value.t == 0.0


def test_blow_up():
    S = Semispray.parse(["-x1^3"], 1)
    with pytest.raises(BlowUpError) as info:
        integrate(S, Point(0, (10.0,), (10.0,)), IntegratorConfig(0, 10, 0.1))
    assert info.value.last_good is not None


def test_callable_G():
    tr = integrate(lambda t, x_, y_: [x_[0] / 2], Point(0, (1.0,), (0.0,)), IntegratorConfig(0, math.pi, 1e-3))
    assert abs(tr.final.x[0] + 1) < 1e-6


def test_csv_format():
    tr = integrate(FREE, Point(0, (0.0,), (1.0 / 3,)), IntegratorConfig(0, 0.2, 0.1))
    text = tr.to_csv({"f": [1.0, 2.0, 3.0]})
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "x1", "y1", "f"]
    assert rows[1][2] == "0.33333333333333331"
    assert len(rows) == 4
