"""Shared fixtures: corpus webs, seeded random webs and golden files."""

import json
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
import pytest

from models.geometry import BasePoint
from webgeom.base.analysis_config import AnalysisConfig
from webgeom.exprlang import WebDefinition, parse_point, parse_web
from webgeom.prolong import WebTensors, compute_tensors
from webgeom.webframe import ChernData, build_coframe, solve_chern

ROOT = Path(__file__).resolve().parent.parent
WEB_DIR = ROOT / "data" / "webs"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

# name -> (definition text, generic point)
CORPUS: Dict[str, Tuple[str, str]] = {
    "parallel": ("f1 = x1 + y1\nf2 = x2 + y2\n", "0.3,0.2,0.5,0.4"),
    "affine_group": ("f1 = x1*y1\nf2 = x1*y2 + x2\n", "1,0,1,0"),
    "generic_cubic": ("f1 = x1 + y1 + x2*y2\nf2 = x2 + y2 + x1*y1^2\n", "0.3,0.2,0.5,0.4"),
    "exp_web": ("f1 = exp(x1)*y1 + x2\nf2 = x2*y2 + sin(x1 + y2)\n", "0.2,0.7,0.9,0.4"),
    "rational": ("f1 = x1 + y1 + x1*y2/(2 + x2)\nf2 = x2 + y2 + x2*y1^2/(3 + y2)\n", "0.1,0.3,-0.2,0.5"),
}

# Webs with a ≠ 0 at their corpus point
TORSION_WEBS = ("affine_group", "generic_cubic", "exp_web", "rational")


def corpus_web(name: str) -> Tuple[WebDefinition, BasePoint]:
    text, point = CORPUS[name]
    web = parse_web(f"name = {name}\n{text}")
    return web, parse_point(point)


def random_polynomial_web(rng: np.random.Generator) -> Tuple[WebDefinition, BasePoint]:
    """Identity-plus-perturbation web with random terms up to degree 4."""
    monomials = ["x1*y1", "x1*y2", "x2*y1", "x2*y2", "x1^2*y2", "x2*y1^2",
                 "x1*x2*y1", "y1*y2*x2", "x1^2*y1*y2", "x2^2*y1^2", "x1*y2^3"]
    components = []
    for lead in ("x1 + y1", "x2 + y2"):
        chosen = rng.choice(len(monomials), size=4, replace=False)
        terms = [f"({rng.uniform(-0.8, 0.8):.4f})*{monomials[k]}" for k in chosen]
        components.append(" + ".join([lead] + terms))
    web = parse_web(f"f1 = {components[0]}\nf2 = {components[1]}\n")
    coords = rng.uniform(-0.3, 0.3, size=4)
    return web, BasePoint.from_sequence([round(float(c), 4) for c in coords])


def analyze_point(web: WebDefinition, point: BasePoint, config: AnalysisConfig) -> Tuple[ChernData, WebTensors]:
    cd = solve_chern(build_coframe(web, point, config), config)
    return cd, compute_tensors(cd, config)


@pytest.fixture
def config() -> AnalysisConfig:
    return AnalysisConfig()


@pytest.fixture(params=sorted(CORPUS))
def corpus_case(request) -> Tuple[str, WebDefinition, BasePoint]:
    web, point = corpus_web(request.param)
    return request.param, web, point


@pytest.fixture(params=TORSION_WEBS)
def torsion_tensors(request, config) -> WebTensors:
    web, point = corpus_web(request.param)
    return analyze_point(web, point, config)[1]


@pytest.fixture(scope="session")
def random_webs() -> List[Tuple[WebDefinition, BasePoint]]:
    rng = np.random.default_rng(20240611)
    return [random_polynomial_web(rng) for _ in range(20)]


# Float tolerance for goldens of webs whose last digits depend on the LAPACK build
GOLDEN_RTOL = 1e-7
GOLDEN_ATOL = 1e-9


def assert_same_document(actual: Any, expected: Any, where: str = "$") -> None:
    """Structural comparison of parsed JSON with float tolerance.

    Keys must appear in the same order; strings, booleans and nulls must be
    equal; numbers agree within GOLDEN_RTOL / GOLDEN_ATOL.
    """
    if isinstance(expected, dict):
        assert isinstance(actual, dict), f"{where}: expected an object"
        assert list(actual) == list(expected), f"{where}: keys differ"
        for key in expected:
            assert_same_document(actual[key], expected[key], f"{where}.{key}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), f"{where}: list length differs"
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_same_document(a, e, f"{where}[{i}]")
    elif isinstance(expected, bool) or expected is None or isinstance(expected, str):
        assert actual == expected and type(actual) is type(expected), f"{where}: {actual!r} != {expected!r}"
    else:
        assert isinstance(actual, (int, float)) and not isinstance(actual, bool), f"{where}: expected a number"
        assert actual == pytest.approx(expected, rel=GOLDEN_RTOL, abs=GOLDEN_ATOL), f"{where}: {actual!r} != {expected!r}"


@pytest.fixture
def golden() -> Callable[..., None]:
    """Compare output with tests/golden/<name>.

    A missing golden file is a failure. ``WEBGEOM_UPDATE_GOLDEN=1`` rewrites
    the file instead of comparing. With ``exact=False`` the output must be
    JSON and floats are compared with a tolerance.
    """
    def check(name: str, text: str, exact: bool = True) -> None:
        path = GOLDEN_DIR / name
        if os.getenv("WEBGEOM_UPDATE_GOLDEN") == "1":
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            return
        if not path.exists():
            pytest.fail(f"golden file {name} is missing; rerun with WEBGEOM_UPDATE_GOLDEN=1 to create it")
        expected = path.read_text(encoding="utf-8")
        if exact:
            assert text == expected
        else:
            assert text.endswith("\n")
            assert_same_document(json.loads(text), json.loads(expected))
    return check
