import numpy as np
import pytest

from models.geometry import BasePoint
from webgeom.base.errors import NotAWebAtPointError
from webgeom.exprlang import parse_web
from webgeom.jets import constant_array
from webgeom.webframe import (
    basis_differentials,
    build_coframe,
    solve_chern,
    torsion_tensor,
    unit_forms,
    wedge,
)

from tests.conftest import corpus_web


def test_parallel_web_is_flat(config):
    web, point = corpus_web("parallel")
    coframe = build_coframe(web, point, config)
    np.testing.assert_allclose(basis_differentials(coframe), 0.0, atol=1e-15)
    cd = solve_chern(coframe, config)
    np.testing.assert_allclose(cd.a[..., 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(cd.conn[..., 0], 0.0, atol=1e-15)


def test_coframe_jacobians(config):
    web, point = corpus_web("affine_group")
    coframe = build_coframe(web, point, config)
    # Λ = ∂f/∂x = [[y1, 0], [y2, 1]], Μ = ∂f/∂y = [[x1, 0], [0, x1]] at (1, 0, 1, 0)
    np.testing.assert_allclose(coframe.lam[..., 0], [[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(coframe.mu[..., 0], [[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(coframe.frame_inverse[..., 0], np.eye(4))


def test_degenerate_point():
    web = parse_web("f1 = x1 + y1\nf2 = x1 + y2\n")
    with pytest.raises(NotAWebAtPointError) as info:
        build_coframe(web, BasePoint(x1=0.0, x2=0.0, y1=0.0, y2=0.0))
    assert info.value.details["block"] == "x"
    assert info.value.exit_code == 2


def test_affine_group_has_torsion(config):
    web, point = corpus_web("affine_group")
    cd = solve_chern(build_coframe(web, point, config), config)
    assert np.hypot(*cd.a[..., 0]) > 1e-3
    assert max(cd.residuals.values()) < 1e-12


def test_structure_equations_on_random_webs(random_webs, config):
    for web, point in random_webs:
        cd = solve_chern(build_coframe(web, point, config), config)
        assert cd.residuals["structure_first"] < 1e-9
        assert cd.residuals["structure_second"] < 1e-9
        assert cd.residuals["a_consistency"] < 1e-9


def test_basis_differentials_are_antisymmetric(config):
    web, point = corpus_web("exp_web")
    structure = basis_differentials(build_coframe(web, point, config))
    np.testing.assert_allclose(structure, -structure.swapaxes(1, 2), atol=1e-15)


def test_wedge_of_basis_forms():
    units = unit_forms(2)
    form = wedge(units[0], units[3])
    expected = np.zeros((4, 4))
    expected[0, 3] = 1.0
    expected[3, 0] = -1.0
    np.testing.assert_allclose(form[..., 0], expected)
    np.testing.assert_allclose(wedge(units[1], units[1]), 0.0)


def test_wedge_is_bilinear_in_jets():
    u = constant_array(np.array([1.0, 2.0, 0.0, 0.0]), 1)
    v = constant_array(np.array([0.0, 0.0, 3.0, -1.0]), 1)
    np.testing.assert_allclose(wedge(u, v), -wedge(v, u))


def test_torsion_tensor():
    a = np.array([0.7, -1.3])
    t = torsion_tensor(a)
    np.testing.assert_allclose(t, -t.swapaxes(1, 2))
    # aⁱ_ik summed over i is ½(a_k − 2a_k) = −½a_k
    np.testing.assert_allclose(np.einsum("iik->k", t), -0.5 * a)
