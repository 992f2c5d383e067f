import math

import numpy as np
import pytest

from webgeom.base.analysis_config import AnalysisConfig
from webgeom.exprlang import parse_expr
from webgeom.jets import jet_lift
from webgeom.oracle import (
    MAX_STEP,
    central_difference,
    expression_function,
    initial_step,
    oracle_coefficients,
    oracle_jet,
    ridders_derivative,
)
from webgeom.webframe import build_coframe, build_coframe_from_jets, solve_chern

from tests.conftest import corpus_web


def test_central_difference_second_derivative():
    func = lambda x: math.exp(x[0]) * x[1]
    x = np.array([0.2, 1.5])
    value = central_difference(func, x, (2, 0), 1e-3)
    assert value == pytest.approx(math.exp(0.2) * 1.5, rel=1e-5)


def test_ridders_improves_on_plain_difference():
    func = lambda x: math.sin(3.0 * x[0])
    x = np.array([0.4])
    value, err = ridders_derivative(func, x, (3,), 0.1)
    assert value == pytest.approx(-27.0 * math.cos(1.2), rel=1e-7)
    assert err < 1e-5


def test_ridders_rejects_zero_step():
    with pytest.raises(ValueError):
        ridders_derivative(lambda x: x[0], np.array([0.0]), (1,), 0.0)


def test_step_grows_with_degree():
    assert initial_step(1, 1e-3) == pytest.approx(1e-3)
    assert initial_step(3, 1e-3) == pytest.approx(0.1)
    assert initial_step(8, 1e-3) == MAX_STEP


def test_expression_function():
    func = expression_function(parse_expr("x1*y2 + x2"))
    assert func(np.array([2.0, 1.0, 0.0, 3.0])) == pytest.approx(7.0)


@pytest.mark.parametrize("name", ["affine_group", "generic_cubic", "exp_web", "rational"])
def test_oracle_matches_jets(name):
    web, point = corpus_web(name)
    for expr in web.components:
        jet = jet_lift(expr, point, 3).coeffs
        oracle, errors = oracle_coefficients(expression_function(expr), point, 3)
        np.testing.assert_allclose(oracle, jet, rtol=1e-6, atol=1e-6)


def test_oracle_pipeline_agrees_on_torsion():
    # finite-difference jets satisfy the structure equations only approximately
    config = AnalysisConfig(tol_connection=1e-6)
    web, point = corpus_web("generic_cubic")
    exact = solve_chern(build_coframe(web, point, config), config)
    f = np.stack([oracle_jet(expr, point, config.jet_order, config) for expr in web.components])
    approx = solve_chern(build_coframe_from_jets(f, point, config, web.name), config)
    np.testing.assert_allclose(approx.a[..., 0], exact.a[..., 0], atol=1e-5)
