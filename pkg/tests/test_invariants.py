import numpy as np
import pytest

from models.geometry import BasePoint
from webgeom.base.errors import (
    DegenerateFrameChangeError,
    DistributionUndefinedError,
    PreconditionNotMetError,
)
from webgeom.invariants import (
    FrameChange,
    FrameSpecialization,
    brute_force_transform,
    bundle_connection,
    check_geodesic_parallel,
    check_hexagonal,
    check_integrability,
    check_principal_bivector,
    check_totally_geodesic,
    classify,
    conformal_curvature_poly,
    evaluate_quartic,
    flagged_conditions,
    hexagonality_contraction,
    invariant_b,
    specialize_frame,
    transform_connection,
    transform_tensors,
)
from webgeom.prolong import WebTensors

from tests.conftest import TORSION_WEBS, analyze_point, corpus_web

ORIGIN = BasePoint(x1=0.0, x2=0.0, y1=0.0, y2=0.0)


def random_frames(a, count, seed=11):
    rng = np.random.default_rng(seed)
    frames = []
    while len(frames) < count:
        frame = FrameChange.from_rows(a, rng.uniform(-2.0, 2.0, size=2))
        if abs(frame.D) > 0.1 * float(np.dot(a, a)):
            frames.append(frame)
    return frames


def test_parallel_web_is_isoclinic(config):
    web, point = corpus_web("parallel")
    report = classify(analyze_point(web, point, config)[1], config)
    assert report.isoclinicly_geodesic
    assert report.delta_integrable is None
    assert report.principal_bivector is None
    assert report.frame_change is None
    assert report.C_coeffs == [0.0] * 5
    assert flagged_conditions(report) == ["isoclinicly_geodesic"]


def test_affine_group_web_at_seeded_points(config):
    web, _ = corpus_web("affine_group")
    rng = np.random.default_rng(5)
    for _ in range(5):
        point = BasePoint(
            x1=float(rng.uniform(0.5, 1.5)), x2=float(rng.uniform(-0.5, 0.5)),
            y1=float(rng.uniform(0.5, 1.5)), y2=float(rng.uniform(-0.5, 0.5)),
        )
        t = analyze_point(web, point, config)[1]
        assert np.hypot(*t.a) > 1e-3
        assert np.max(np.abs(t.b)) < 1e-8
        report = classify(t, config)
        assert max(abs(c) for c in report.C_coeffs) < 1e-8
        assert report.principal_bivector.flag


def test_specialized_frame_normalizes_a(torsion_tensors):
    frame, specialized = specialize_frame(torsion_tensors)
    np.testing.assert_allclose(specialized.a, [1.0, 0.0], atol=1e-12)
    assert specialized.frame_tag == "specialized"
    assert specialized.prolongations_stale
    np.testing.assert_allclose(frame.A[0], torsion_tensors.a)


@pytest.mark.parametrize("specialization, check", [
    (FrameSpecialization.A1_ZERO, lambda a: (a[0], a[1] - 1.0)),
    (FrameSpecialization.A1_EQ_A2, lambda a: (a[0] - a[1],)),
    (FrameSpecialization.A1_EQ_MINUS_A2, lambda a: (a[0] + a[1],)),
])
def test_alternative_specializations(torsion_tensors, specialization, check):
    _, specialized = specialize_frame(torsion_tensors, specialization=specialization)
    np.testing.assert_allclose(check(specialized.a), 0.0, atol=1e-12)


def test_degenerate_frame_change():
    with pytest.raises(DegenerateFrameChangeError) as info:
        FrameChange.from_rows((1.0, 2.0), (2.0, 4.0))
    assert info.value.exit_code == 2


def test_second_row_parallel_to_a_is_rejected(torsion_tensors):
    with pytest.raises(DegenerateFrameChangeError):
        specialize_frame(torsion_tensors, row2=tuple(2.0 * torsion_tensors.a))


def test_distribution_undefined_without_torsion():
    t = WebTensors.from_components(ORIGIN)
    with pytest.raises(DistributionUndefinedError):
        check_integrability(t)
    with pytest.raises(DistributionUndefinedError):
        specialize_frame(t)


def test_curvature_transform_matches_index_loops(torsion_tensors):
    for frame in random_frames(torsion_tensors.a, 10):
        moved = transform_tensors(torsion_tensors, frame)
        loops = brute_force_transform(torsion_tensors.b, frame)
        np.testing.assert_allclose(moved.b, loops, atol=1e-10 * (1.0 + np.max(np.abs(loops))))


def test_frame_change_formulas_for_p_and_q(torsion_tensors):
    t = torsion_tensors
    for frame in random_frames(t.a, 10):
        (a1, a2), (c1, c2) = frame.A
        moved = transform_tensors(t, frame)
        for m, m_moved in ((t.p, moved.p), (t.q, moved.q)):
            off_diagonal = c1 * (a2 * m[0, 1] - a1 * m[1, 1]) + c2 * (a1 * m[1, 0] - a2 * m[0, 0])
            integrability_lhs = a2 * a2 * m[0, 0] - a1 * a2 * (m[0, 1] + m[1, 0]) + a1 * a1 * m[1, 1]
            assert frame.D ** 2 * m_moved[1, 0] == pytest.approx(off_diagonal, abs=1e-10)
            assert frame.D ** 2 * m_moved[1, 1] == pytest.approx(integrability_lhs, abs=1e-10)


def test_specialized_curvature_components(torsion_tensors):
    t = torsion_tensors
    frame = FrameChange.default_for(t.a)
    moved = transform_tensors(t, frame)
    b1, b2 = hexagonality_contraction(t, frame)
    (a1, a2), (c1, c2) = frame.A
    assert moved.b[0, 1, 1, 1] == pytest.approx(a1 * b1 + a2 * b2, abs=1e-10)
    assert moved.b[1, 1, 1, 1] == pytest.approx(c1 * b1 + c2 * b2, abs=1e-10)


@pytest.mark.parametrize("name", TORSION_WEBS)
def test_verdicts_are_frame_invariant(name, config):
    web, point = corpus_web(name)
    t = analyze_point(web, point, config)[1]
    base = FrameChange.default_for(t.a)
    expected = (
        check_integrability(t, config).flag,
        check_geodesic_parallel(t, config).flag,
        check_hexagonal(t, config, base).flag,
    )
    for frame in random_frames(t.a, 10):
        moved = transform_tensors(t, frame)
        moved_frame = FrameChange.default_for(moved.a)
        assert (
            check_integrability(moved, config).flag,
            check_geodesic_parallel(moved, config).flag,
            check_hexagonal(moved, config, moved_frame).flag,
        ) == expected


@pytest.mark.parametrize("name", TORSION_WEBS)
def test_invariant_b_relation(name, config):
    web, point = corpus_web(name)
    t = analyze_point(web, point, config)[1]
    if abs(t.a[0]) <= 0.1:
        pytest.skip("a₁ too small for the polynomial relation")
    for frame in [FrameChange.default_for(t.a)] + random_frames(t.a, 5):
        result = check_principal_bivector(t, config, frame)
        assert abs(result.relation_residual) < 1e-8
        assert abs(result.expansion_residual) < 1e-10 * (1.0 + abs(result.invariant_b))


def test_invariant_b_in_normalized_frame():
    b = np.zeros((2, 2, 2, 2))
    b[0, 1, 1, 1] = 2.0
    t = WebTensors.from_components(ORIGIN, a=(1.0, 0.0), b=b)
    frame = FrameChange.default_for(t.a)
    np.testing.assert_allclose(frame.A, np.eye(2))
    assert invariant_b(t, frame) == pytest.approx(2.0)
    result = check_principal_bivector(t, frame=frame)
    assert not result.flag
    assert result.expansion_residual == pytest.approx(0.0)


def test_conformal_polynomials_differ_in_two_coefficients():
    b = np.random.default_rng(9).normal(size=(2, 2, 2, 2))
    poly = conformal_curvature_poly(WebTensors.from_components(ORIGIN, a=(1.0, 0.5), b=b))
    same = [p == pytest.approx(c) for p, c in zip(poly.printed, poly.consistent)]
    assert same == [True, True, False, False, True]
    assert evaluate_quartic((1.0, 0.0, 0.0, 0.0, -1.0), 2.0) == pytest.approx(15.0)


def test_totally_geodesic_matches_integrability_in_specialized_frame(corpus_case, config):
    name, web, point = corpus_case
    t = analyze_point(web, point, config)[1]
    if np.hypot(*t.a) < config.tol_classify:
        pytest.skip(f"{name} has no torsion")
    _, specialized = specialize_frame(t, config=config)
    assert check_totally_geodesic(specialized, config) == check_integrability(specialized, config).flag
    assert check_totally_geodesic(specialized, config) == check_integrability(t, config).flag


def test_totally_geodesic_needs_specialized_frame():
    t = WebTensors.from_components(ORIGIN, a=(1.0, 0.5))
    with pytest.raises(PreconditionNotMetError):
        check_totally_geodesic(t)


def test_totally_geodesic_needs_distribution():
    # a = 0 leaves Δ undefined, so −p₂₂/a₁ has no meaning
    p = np.zeros((2, 2))
    p[1, 1] = 1.0
    t = WebTensors.from_components(ORIGIN, a=(0.0, 0.0), p=p)
    with pytest.raises(DistributionUndefinedError):
        check_totally_geodesic(t)


def test_non_integrable_distribution():
    p = np.zeros((2, 2))
    p[1, 1] = 1.0
    t = WebTensors.from_components(ORIGIN, a=(1.0, 0.0), p=p)
    result = check_integrability(t)
    assert not result.flag
    assert result.residual_p == pytest.approx(1.0)
    assert not check_totally_geodesic(t)
    with pytest.raises(PreconditionNotMetError):
        check_hexagonal(t, theorem_mode=True)
    assert not check_hexagonal(t).theorem_applies


def test_geodesic_parallel_implies_integrable():
    # p and q vanish on Δ in both slots
    t = WebTensors.from_components(ORIGIN, a=(1.0, 0.0), p=[[3.0, 0.0], [0.0, 0.0]])
    result = check_geodesic_parallel(t)
    assert result.flag
    assert result.implies_integrable
    assert check_integrability(t).flag


def test_bundle_connection_in_specialized_frame():
    omega = np.random.default_rng(2).normal(size=(2, 2, 4))
    t = WebTensors.from_components(ORIGIN, a=(2.0, 0.0), omega=omega)
    theta = bundle_connection(t, 0.3, -0.7)
    correction = theta - omega
    np.testing.assert_allclose(correction[0], 0.0)
    # θ²₁ = ω²₁ + ½a₁(p ω₁² + q ω₂²)
    np.testing.assert_allclose(correction[1, 0], [0.0, 0.3, 0.0, -0.7])
    # θ²₂ = ω²₂ − ½a₁(p ω₁¹ + q ω₂¹)
    np.testing.assert_allclose(correction[1, 1], [-0.3, 0.0, 0.7, 0.0])
    np.testing.assert_allclose(bundle_connection(t, 0.0, 0.0), omega)


def test_transform_connection_identity():
    omega = np.random.default_rng(4).normal(size=(2, 2, 4))
    np.testing.assert_allclose(transform_connection(omega, FrameChange.identity()), omega)


def test_classify_report_fields(torsion_tensors, config):
    report = classify(torsion_tensors, config, include_tensors=True)
    assert not report.isoclinicly_geodesic
    assert report.frame_change is not None
    assert report.relation58_residual == report.principal_bivector.relation_residual
    assert set(report.tensors) == {"pipeline", "specialized"}
    assert report.tensors["specialized"]["frame_tag"] == "specialized"
    assert report.tensors["specialized"]["prolongations_stale"] is True
    assert report.tolerances["tol_classify"] == config.tol_classify
