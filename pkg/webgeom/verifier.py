"""Verification battery for the computed web tensors.

The verifier accumulates residual families over the structure equations,
the curvature purity, the identity systems and a set of random constant
frame changes. ``inject`` corrupts tensor components so that the battery can
be shown to catch them.
"""

import logging
import re
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.reports import ResidualFamily, VerificationReport
from webgeom.base.analysis_config import AnalysisConfig, get_default_config
from webgeom.base.errors import DegenerateFrameChangeError, UsageError
from webgeom.invariants import (
    FrameChange,
    brute_force_transform,
    check_geodesic_parallel,
    check_hexagonal,
    check_integrability,
    check_principal_bivector,
    transform_tensors,
)
from webgeom.prolong import TENSOR_RANKS, WebTensors, curvature_purity, tensor_scale, verify_identities
from webgeom.webframe import ChernData, torsion_tensor

logger = logging.getLogger(__name__)

_INJECT_RE = re.compile(
    r"^(bbar|btil|pbar|ptil|qbar|qtil|a|p|q|b)([12]+)=([+-]?)(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)$"
)


def parse_injection(spec: str) -> Tuple[str, Tuple[int, ...], str, float]:
    """Parse ``NAMEIDX=[+|-]value`` with 1-based indices.

    A signed value is added to the component, an unsigned one replaces it.

    Returns:
        (tensor name, 0-based index, "add" or "set", value)

    Raises:
        UsageError: If the injection string is malformed
    """
    match = _INJECT_RE.match(spec.strip())
    if not match:
        raise UsageError(
            f"invalid injection '{spec}', expected NAMEIDX=[+|-]value such as b1112=+1",
            {"inject": spec}
        )
    name, digits, sign, number = match.groups()
    if len(digits) != TENSOR_RANKS[name]:
        raise UsageError(
            f"injection '{spec}': {name} takes {TENSOR_RANKS[name]} indices, got {len(digits)}",
            {"inject": spec}
        )
    value = float(number)
    if sign:
        return name, tuple(int(c) - 1 for c in digits), "add", value if sign == "+" else -value
    return name, tuple(int(c) - 1 for c in digits), "set", value


def inject(t: WebTensors, specs: Sequence[str]) -> WebTensors:
    """Apply corruptions to a copy of the tensors."""
    changes = {}
    for spec in specs:
        name, index, mode, value = parse_injection(spec)
        arr = changes.get(name)
        if arr is None:
            arr = np.array(t.tensor(name), dtype=float, copy=True)
            changes[name] = arr
        if mode == "add":
            arr[index] += value
        else:
            arr[index] = value
        logger.info(f"Injected {spec} into {name}")
    return t.replace(**changes) if changes else t


def random_frame_changes(a: np.ndarray, seeds: int, pivot_tol: float = 1e-12) -> List[FrameChange]:
    """Seeded admissible frame changes with first row a."""
    frames = []
    rng = np.random.default_rng(seeds)
    norm = float(np.hypot(a[0], a[1]))
    while len(frames) < seeds:
        row2 = rng.uniform(-2.0, 2.0, size=2) * max(norm, 1.0)
        try:
            frame = FrameChange.from_rows(a, row2, pivot_tol)
        except DegenerateFrameChangeError:
            continue
        # Keep D away from zero so that 1/D³ stays well conditioned.
        if abs(frame.D) < 0.1 * norm * norm:
            continue
        frames.append(frame)
    return frames


class WebVerifier:
    """Runs the residual battery over Chern data and web tensors."""

    FRAME_TOL = 1e-10
    RELATION_MIN_A1 = 0.1

    def __init__(self, config: Optional[AnalysisConfig] = None):
        self.config = config or get_default_config()
        self.checks_performed = 0
        self.checks_passed = 0

    def verify(
        self,
        cd: ChernData,
        t: WebTensors,
        seeds: int = 0,
        injections: Sequence[str] = ()
    ) -> VerificationReport:
        """Run every check.

        Args:
            cd: Chern connection data the tensors were computed from
            t: Web tensors in the pipeline frame
            seeds: Number of random frame changes for the frame checks
            injections: Tensor corruptions applied before the identity checks

        Returns:
            VerificationReport; invalid if any family exceeds its tolerance
        """
        logger.info(f"Verifying {t.name or 'web'} at ({t.base}) with {seeds} frame changes")
        self.checks_performed = 0
        self.checks_passed = 0
        tensors = inject(t, injections) if injections else t

        report = VerificationReport(
            web=t.name,
            point=t.base.as_list(),
            is_valid=True,
            injected=list(injections),
        )
        self._check_structure(cd, report)
        self._check_purity(cd, report)
        self._check_torsion_tensor(cd, report)
        self._check_identities(tensors, report)
        self._check_frames(tensors, seeds, report)

        report.checks_performed = self.checks_performed
        report.checks_passed = self.checks_passed
        report.is_valid = not report.errors
        if report.is_valid:
            logger.info(f"Verification passed: {self.checks_passed}/{self.checks_performed} checks")
        else:
            logger.warning(f"Verification FAILED: {len(report.errors)} families out of tolerance")
        return report

    def _record(
        self,
        report: VerificationReport,
        name: str,
        description: str,
        value: Optional[float],
        tolerance: float
    ) -> None:
        if value is None:
            report.families.append(ResidualFamily(
                name=name, description=description, tolerance=tolerance, passed=True, skipped=True
            ))
            return
        self.checks_performed += 1
        passed = value < tolerance
        if passed:
            self.checks_passed += 1
        else:
            report.errors.append(f"{name}: residual {value:.3e} exceeds {tolerance:.3e}")
        report.families.append(ResidualFamily(
            name=name, description=description, max_residual=value, tolerance=tolerance, passed=passed
        ))

    def _check_structure(self, cd: ChernData, report: VerificationReport) -> None:
        """Structure equations of the coframe and the two determinations of a."""
        scale = float(np.max(np.abs(cd.structure[..., 0]))) if cd.structure.size else 0.0
        tol = self.config.tol_connection * (1.0 + scale)
        r = cd.residuals
        self._record(report, "structure_equations", "dω₁, dω₂ against the Chern connection",
                     max(r.get("structure_first", 0.0), r.get("structure_second", 0.0)), tol)
        self._record(report, "torsion_covector", "torsion part is a covector, both determinations agree",
                     max(r.get("torsion_covector", 0.0), r.get("a_consistency", 0.0),
                         r.get("pure_second_in_first", 0.0), r.get("pure_first_in_second", 0.0)), tol)

    def _check_purity(self, cd: ChernData, report: VerificationReport) -> None:
        purity = curvature_purity(cd)
        tol = self.config.tol_connection * (1.0 + purity["scale"])
        self._record(report, "curvature_purity", "curvature has only ω₁∧ω₂ terms",
                     max(purity["pure_first"], purity["pure_second"]), tol)

    def _check_torsion_tensor(self, cd: ChernData, report: VerificationReport) -> None:
        a = cd.a[..., 0]
        eye = np.eye(2)
        # 2aⁱ_fe must equal the coefficient a_f δⁱ_e − a_e δⁱ_f of a_j ω^j ∧ ωⁱ
        expected = np.einsum("f,ie->ife", a, eye) - np.einsum("e,if->ife", a, eye)
        value = float(np.max(np.abs(2.0 * torsion_tensor(a) - expected)))
        self._record(report, "torsion_tensor", "aⁱ_jk = ½(a_j δⁱ_k − a_k δⁱ_j) reproduces the torsion",
                     value, self.config.tol_connection * (1.0 + float(np.max(np.abs(a)))))

    def _check_identities(self, t: WebTensors, report: VerificationReport) -> None:
        identities = verify_identities(t, self.config)
        for family in identities.families:
            self._record(report, family.name, family.description,
                         None if family.skipped else family.max_residual, family.tolerance)

    def _check_frames(self, t: WebTensors, seeds: int, report: VerificationReport) -> None:
        """Transformation laws and frame invariance of the verdicts."""
        names = (
            ("frame_change_pq", "D²p'₂₁ and D²p'₂₂ against their closed forms, same for q"),
            ("curvature_transform", "curvature transformation against explicit index loops"),
            ("frame_invariance", "integrability, parallelism and hexagonality flags unchanged"),
            ("invariant_b_relation", "b + (a₁⁴/D³) C(a₂/a₁) = 0"),
        )
        # frame-change and transform residuals are relative
        tol_frame = self.FRAME_TOL
        tol_relation = self.config.tol_identity * (1.0 + tensor_scale(t))
        tolerances = (tol_frame, tol_frame, 0.5, tol_relation)

        norm = float(np.hypot(t.a[0], t.a[1]))
        if seeds <= 0 or norm < self.config.tol_classify:
            for (name, description), tol in zip(names, tolerances):
                self._record(report, name, description, None, tol)
            return

        frames = random_frame_changes(t.a, seeds, self.config.tol_pivot)
        base_flags = self._flags(t, FrameChange.default_for(t.a, pivot_tol=self.config.tol_pivot))
        pq_residual, transform_residual, mismatches, relation = 0.0, 0.0, 0, None
        for frame in frames:
            moved = transform_tensors(t, frame)
            pq_residual = max(pq_residual, self._frame_change_residual(t, moved, frame))
            loops = brute_force_transform(t.b, frame)
            scale = 1.0 + float(np.max(np.abs(loops)))
            transform_residual = max(transform_residual, float(np.max(np.abs(moved.b - loops))) / scale)
            moved_frame = FrameChange.default_for(moved.a, pivot_tol=self.config.tol_pivot)
            flags = self._flags(moved, moved_frame)
            if flags != base_flags:
                mismatches += 1
                logger.warning(f"Verdicts changed under frame change D = {frame.D:.4g}: {base_flags} -> {flags}")
            if abs(t.a[0]) > self.RELATION_MIN_A1:
                residual = check_principal_bivector(t, self.config, frame).relation_residual
                if residual is not None:
                    relation = max(relation or 0.0, abs(residual))

        values = (pq_residual, transform_residual, float(mismatches), relation)
        for (name, description), value, tol in zip(names, values, tolerances):
            self._record(report, name, description, value, tol)

    def _flags(self, t: WebTensors, frame: FrameChange) -> Tuple[bool, bool, bool]:
        return (
            check_integrability(t, self.config).flag,
            check_geodesic_parallel(t, self.config).flag,
            check_hexagonal(t, self.config, frame).flag,
        )

    @staticmethod
    def _frame_change_residual(t: WebTensors, moved: WebTensors, frame: FrameChange) -> float:
        (a1, a2), (c1, c2) = frame.A
        d2 = frame.D ** 2
        worst = 0.0
        for m, m_moved in ((t.p, moved.p), (t.q, moved.q)):
            off_diagonal = c1 * (a2 * m[0, 1] - a1 * m[1, 1]) + c2 * (a1 * m[1, 0] - a2 * m[0, 0])
            diagonal = a2 * a2 * m[0, 0] - a1 * a2 * (m[0, 1] + m[1, 0]) + a1 * a1 * m[1, 1]
            for lhs, rhs in ((d2 * m_moved[1, 0], off_diagonal), (d2 * m_moved[1, 1], diagonal)):
                worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs)))
        return float(worst)
