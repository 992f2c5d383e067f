"""Curvature, covector derivatives and third-order prolongations of a web.

Starting from the Chern connection, this module computes

* the curvature tensor bⁱ_jkl from dωⁱ_j − ωᵏ_j ∧ ωⁱ_k = bⁱ_jkl ω₁ᵏ ∧ ω₂ˡ,
* p_ij, q_ij from da_i − a_j ωʲ_i = p_ij ω₁ʲ + q_ij ω₂ʲ,
* the prolongations b̄, b̃, p̄, p̃, q̄, q̃ from ∇b, ∇p, ∇q,

and checks the identity systems they satisfy. Brackets carry weight ½.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from models.geometry import BasePoint
from models.reports import IdentityReport, ResidualFamily
from webgeom.base.analysis_config import AnalysisConfig, get_default_config
from webgeom.base.errors import CurvaturePurePartNonzeroError
from webgeom.jets import jet_add, jet_einsum, jet_sub, values
from webgeom.webframe import ChernData, exterior_derivative, frame_derivative

logger = logging.getLogger(__name__)

EYE = np.eye(2)

# Tensor name -> rank, in report order
TENSOR_RANKS: Dict[str, int] = {
    "a": 1,
    "p": 2,
    "q": 2,
    "b": 4,
    "bbar": 5,
    "btil": 5,
    "pbar": 3,
    "ptil": 3,
    "qbar": 3,
    "qtil": 3,
}

PROLONGATION_NAMES = ("bbar", "btil", "pbar", "ptil", "qbar", "qtil")


@dataclass(frozen=True)
class WebTensors:
    """Numeric values of the web tensors at a point.

    Attributes:
        a: Torsion covector, shape (2,)
        p: p_ij, shape (2, 2)
        q: q_ij, shape (2, 2)
        b: bⁱ_jkl, shape (2, 2, 2, 2)
        bbar: b̄ⁱ_jklm, shape (2, 2, 2, 2, 2)
        btil: b̃ⁱ_jklm, shape (2, 2, 2, 2, 2)
        pbar: p̄_jkl, shape (2, 2, 2)
        ptil: p̃_jkl
        qbar: q̄_jkl
        qtil: q̃_jkl
        omega: Connection coefficients ωⁱ_j = omega[i, j, e] ω^e, shape (2, 2, 4)
        base: Base point
        frame_tag: Coframe the components are expressed in
        prolongations_stale: Prolongations were not carried through a frame change
        name: Optional web name
    """
    a: np.ndarray
    p: np.ndarray
    q: np.ndarray
    b: np.ndarray
    bbar: np.ndarray
    btil: np.ndarray
    pbar: np.ndarray
    ptil: np.ndarray
    qbar: np.ndarray
    qtil: np.ndarray
    omega: np.ndarray
    base: BasePoint
    frame_tag: str = "pipeline"
    prolongations_stale: bool = False
    name: Optional[str] = None

    def replace(self, **changes: Any) -> "WebTensors":
        return dataclasses.replace(self, **changes)

    def tensor(self, name: str) -> np.ndarray:
        if name not in TENSOR_RANKS:
            raise KeyError(f"unknown tensor '{name}'")
        return getattr(self, name)

    def to_dict(self) -> Dict[str, Any]:
        """Tensor components as nested lists, in report order."""
        return {name: self.tensor(name).tolist() for name in TENSOR_RANKS}

    @classmethod
    def from_components(
        cls,
        base: BasePoint,
        a: Iterable[float] = (0.0, 0.0),
        frame_tag: str = "pipeline",
        **components: Any
    ) -> "WebTensors":
        """Build tensors from given components, zero-filling the rest.

        Used for hand-made tensors in frame and classification checks.
        """
        arrays = {"a": np.asarray(list(a), dtype=float)}
        for name, rank in TENSOR_RANKS.items():
            if name == "a":
                continue
            value = components.pop(name, None)
            arrays[name] = np.zeros((2,) * rank) if value is None else np.asarray(value, dtype=float)
        omega = components.pop("omega", None)
        if components:
            raise TypeError(f"unexpected components: {sorted(components)}")
        return cls(
            omega=np.zeros((2, 2, 4)) if omega is None else np.asarray(omega, dtype=float),
            base=base,
            frame_tag=frame_tag,
            **arrays,
        )


def _max_abs(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def curvature_form(cd: ChernData) -> Tuple[np.ndarray, np.ndarray]:
    """Curvature forms Ωⁱ_j = dωⁱ_j − ωᵏ_j ∧ ωⁱ_k as 2-form matrices.

    Returns:
        (Ω of shape (2, 2, 4, 4, n), dω of the same shape)
    """
    conn = cd.conn
    d_conn = exterior_derivative(conn, cd.coframe, cd.structure)
    outer = jet_einsum("kjf,ike->ijfe", conn, conn)
    return jet_sub(d_conn, outer - outer.swapaxes(-3, -2)), d_conn


def _pure_parts(omega: np.ndarray) -> Tuple[float, float]:
    return _max_abs(omega[:, :, 0, 1, 0]), _max_abs(omega[:, :, 2, 3, 0])


def curvature_purity(cd: ChernData) -> Dict[str, float]:
    """Value-level ω₁∧ω₁ and ω₂∧ω₂ parts of the curvature forms, and their scale."""
    omega, d_conn = curvature_form(cd)
    pure_first, pure_second = _pure_parts(omega)
    return {"pure_first": pure_first, "pure_second": pure_second, "scale": _max_abs(d_conn[..., 0])}


def curvature_jets(cd: ChernData, config: Optional[AnalysisConfig] = None) -> np.ndarray:
    """Jet-valued curvature tensor bⁱ_jkl.

    Args:
        cd: Chern connection data (connection jets of order >= 1)
        config: Analysis configuration (default if omitted)

    Returns:
        Jet array of shape (2, 2, 2, 2, n)

    Raises:
        CurvaturePurePartNonzeroError: If the ω₁∧ω₁ or ω₂∧ω₂ part of Ωⁱ_j
            does not vanish
    """
    config = config or get_default_config()
    omega, d_conn = curvature_form(cd)
    pure_first, pure_second = _pure_parts(omega)
    tol = config.tol_connection * (1.0 + _max_abs(d_conn[..., 0]))
    if max(pure_first, pure_second) >= tol:
        raise CurvaturePurePartNonzeroError(
            f"curvature form has pure parts at ({cd.coframe.base}): "
            f"ω₁∧ω₁ {pure_first:.3e}, ω₂∧ω₂ {pure_second:.3e} (tolerance {tol:.3e})",
            {"pure_first": pure_first, "pure_second": pure_second, "tolerance": tol}
        )
    return np.array(omega[:, :, 0:2, 2:4])


def curvature(cd: ChernData, config: Optional[AnalysisConfig] = None) -> np.ndarray:
    """Curvature tensor bⁱ_jkl at the point, shape (2, 2, 2, 2)."""
    return values(curvature_jets(cd, config))


def _nabla_a(cd: ChernData) -> np.ndarray:
    # ∇a_i = da_i − a_j ωʲ_i, coefficients on the four basis forms
    return jet_sub(frame_derivative(cd.a, cd.coframe), jet_einsum("j,jif->if", cd.a, cd.conn))


def pq_jets(cd: ChernData) -> Tuple[np.ndarray, np.ndarray]:
    nabla = _nabla_a(cd)
    return np.array(nabla[:, 0:2]), np.array(nabla[:, 2:4])


def pq_tensors(cd: ChernData) -> Tuple[np.ndarray, np.ndarray]:
    """Values of p_ij and q_ij at the point."""
    p, q = pq_jets(cd)
    return values(p), values(q)


def _nabla_rank2(t: np.ndarray, cd: ChernData) -> np.ndarray:
    # ∇t_jk = dt_jk − t_mk ωᵐ_j − t_jm ωᵐ_k
    return jet_add(
        frame_derivative(t, cd.coframe),
        -jet_einsum("mk,mjf->jkf", t, cd.conn),
        -jet_einsum("jm,mkf->jkf", t, cd.conn),
    )


def _nabla_curvature(b: np.ndarray, cd: ChernData) -> np.ndarray:
    # ∇bⁱ_jkl = dbⁱ_jkl − bⁱ_mkl ωᵐ_j − bⁱ_jml ωᵐ_k − bⁱ_jkm ωᵐ_l + bᵐ_jkl ωⁱ_m
    conn = cd.conn
    return jet_add(
        frame_derivative(b, cd.coframe),
        -jet_einsum("imkl,mjf->ijklf", b, conn),
        -jet_einsum("ijml,mkf->ijklf", b, conn),
        -jet_einsum("ijkm,mlf->ijklf", b, conn),
        jet_einsum("mjkl,imf->ijklf", b, conn),
    )


def prolongations(
    cd: ChernData,
    config: Optional[AnalysisConfig] = None,
    jets: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Third-order prolongation tensors at the point.

    Args:
        cd: Chern connection data
        config: Analysis configuration (default if omitted)
        jets: Already computed (b, p, q) jets; computed from cd when omitted

    Returns:
        (bbar, btil, pbar, ptil, qbar, qtil); the last index of each is the
        direction ω₁ᵐ (bar) or ω₂ᵐ (tilde)
    """
    if jets is None:
        b = curvature_jets(cd, config)
        p, q = pq_jets(cd)
    else:
        b, p, q = jets
    nabla_b = values(_nabla_curvature(b, cd))
    nabla_p = values(_nabla_rank2(p, cd))
    nabla_q = values(_nabla_rank2(q, cd))
    return (
        nabla_b[..., 0:2], nabla_b[..., 2:4],
        nabla_p[..., 0:2], nabla_p[..., 2:4],
        nabla_q[..., 0:2], nabla_q[..., 2:4],
    )


def compute_tensors(
    cd: ChernData,
    config: Optional[AnalysisConfig] = None,
    frame_tag: str = "pipeline"
) -> WebTensors:
    """Evaluate every web tensor at the point of the Chern data.

    Args:
        cd: Chern connection data from jets of order >= 4
        config: Analysis configuration (default if omitted)
        frame_tag: Label of the coframe

    Returns:
        WebTensors with fresh prolongations
    """
    config = config or get_default_config()
    b_jets = curvature_jets(cd, config)
    p_jets, q_jets = pq_jets(cd)
    bbar, btil, pbar, ptil, qbar, qtil = prolongations(cd, config, jets=(b_jets, p_jets, q_jets))

    tensors = WebTensors(
        a=values(cd.a),
        p=values(p_jets),
        q=values(q_jets),
        b=values(b_jets),
        bbar=bbar,
        btil=btil,
        pbar=pbar,
        ptil=ptil,
        qbar=qbar,
        qtil=qtil,
        omega=values(cd.conn),
        base=cd.coframe.base,
        frame_tag=frame_tag,
        name=cd.coframe.name,
    )
    logger.debug(
        f"Tensors at ({tensors.base}): max|b| = {_max_abs(tensors.b):.3e}, "
        f"max|p| = {_max_abs(tensors.p):.3e}, max|q| = {_max_abs(tensors.q):.3e}"
    )
    return tensors


def symmetric_part(b: np.ndarray) -> np.ndarray:
    """sⁱ_jkl = bⁱ_(jkl), the mean over the six arrangements of j, k, l."""
    perms = ("ijkl", "ijlk", "ikjl", "iklj", "iljk", "ilkj")
    return sum(np.einsum(f"{perm}->ijkl", b) for perm in perms) / 6.0


def decomposition_tensor(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Trace part T of b = s + T, determined by p and q."""
    x = (p + p.T) / 3.0 - (q + q.T) / 6.0
    y = -0.5 * q + q.T / 6.0 - p.T / 3.0
    z = 0.5 * q + q.T / 6.0 - p.T / 3.0
    return (
        np.einsum("il,jk->ijkl", EYE, x)
        + np.einsum("ij,kl->ijkl", EYE, y)
        + np.einsum("ik,jl->ijkl", EYE, z)
    )


def _curvature_p(t: WebTensors) -> np.ndarray:
    # bⁱ_[j|l|k] = δⁱ_[k p_j]l
    lhs = 0.5 * (np.einsum("ijlk->ijkl", t.b) - np.einsum("iklj->ijkl", t.b))
    rhs = 0.5 * (np.einsum("ik,jl->ijkl", EYE, t.p) - np.einsum("ij,kl->ijkl", EYE, t.p))
    return lhs - rhs


def _curvature_q(t: WebTensors) -> np.ndarray:
    # bⁱ_[jk]l = δⁱ_[k q_j]l
    lhs = 0.5 * (t.b - np.einsum("ikjl->ijkl", t.b))
    rhs = 0.5 * (np.einsum("ik,jl->ijkl", EYE, t.q) - np.einsum("ij,kl->ijkl", EYE, t.q))
    return lhs - rhs


def _bbar_torsion(t: WebTensors) -> np.ndarray:
    return (
        0.5 * (t.bbar - np.einsum("ijmlk->ijklm", t.bbar))
        + 0.5 * (np.einsum("m,ijkl->ijklm", t.a, t.b) - np.einsum("k,ijml->ijklm", t.a, t.b))
    )


def _btil_torsion(t: WebTensors) -> np.ndarray:
    return (
        0.5 * (t.btil - np.einsum("ijkml->ijklm", t.btil))
        - 0.5 * (np.einsum("m,ijkl->ijklm", t.a, t.b) - np.einsum("l,ijkm->ijklm", t.a, t.b))
    )


def _pbar_torsion(t: WebTensors) -> np.ndarray:
    return (
        0.5 * (t.pbar - np.einsum("jlk->jkl", t.pbar))
        + 0.5 * (np.einsum("jk,l->jkl", t.p, t.a) - np.einsum("jl,k->jkl", t.p, t.a))
    )


def _qtil_torsion(t: WebTensors) -> np.ndarray:
    return (
        0.5 * (t.qtil - np.einsum("jlk->jkl", t.qtil))
        - 0.5 * (np.einsum("jk,l->jkl", t.q, t.a) - np.einsum("jl,k->jkl", t.q, t.a))
    )


def _mixed_prolongation(t: WebTensors) -> np.ndarray:
    return np.einsum("m,mjkl->jkl", t.a, t.b) - t.ptil + np.einsum("jlk->jkl", t.qbar)


def _trace_first_pair(prolonged: np.ndarray, derivative: np.ndarray) -> np.ndarray:
    # Derivative of the first curvature-trace system along one family of directions
    lhs = 0.5 * (np.einsum("ijlkm->ijklm", prolonged) - np.einsum("ikljm->ijklm", prolonged))
    rhs = 0.5 * (
        np.einsum("ik,jlm->ijklm", EYE, derivative) - np.einsum("ij,klm->ijklm", EYE, derivative)
    )
    return lhs - rhs


def _trace_second_pair(prolonged: np.ndarray, derivative: np.ndarray) -> np.ndarray:
    lhs = 0.5 * (prolonged - np.einsum("ikjlm->ijklm", prolonged))
    rhs = 0.5 * (
        np.einsum("ik,jlm->ijklm", EYE, derivative) - np.einsum("ij,klm->ijklm", EYE, derivative)
    )
    return lhs - rhs


def _decomposition(t: WebTensors) -> np.ndarray:
    return t.b - symmetric_part(t.b) - decomposition_tensor(t.p, t.q)


# (name, relation, needs prolongations, residual)
IDENTITY_FAMILIES: List[Tuple[str, str, bool, Callable[[WebTensors], np.ndarray]]] = [
    ("curvature_p", "bⁱ_[j|l|k] = δⁱ_[k p_j]l", False, _curvature_p),
    ("curvature_q", "bⁱ_[jk]l = δⁱ_[k q_j]l", False, _curvature_q),
    ("bbar_torsion", "b̄ⁱ_j[k|l|m] + a_[m bⁱ_|j|k]l = 0", True, _bbar_torsion),
    ("btil_torsion", "b̃ⁱ_jk[lm] − a_[m bⁱ_|jk|l] = 0", True, _btil_torsion),
    ("pbar_torsion", "p̄_j[kl] + p_j[k a_l] = 0", True, _pbar_torsion),
    ("qtil_torsion", "q̃_j[kl] − q_j[k a_l] = 0", True, _qtil_torsion),
    ("mixed_prolongation", "a_m bᵐ_jkl − p̃_jkl + q̄_jlk = 0", True, _mixed_prolongation),
    ("bbar_p_trace", "b̄ⁱ_[j|l|k]m = δⁱ_[k p̄_j]lm", True, lambda t: _trace_first_pair(t.bbar, t.pbar)),
    ("btil_p_trace", "b̃ⁱ_[j|l|k]m = δⁱ_[k p̃_j]lm", True, lambda t: _trace_first_pair(t.btil, t.ptil)),
    ("bbar_q_trace", "b̄ⁱ_[jk]lm = δⁱ_[k q̄_j]lm", True, lambda t: _trace_second_pair(t.bbar, t.qbar)),
    ("btil_q_trace", "b̃ⁱ_[jk]lm = δⁱ_[k q̃_j]lm", True, lambda t: _trace_second_pair(t.btil, t.qtil)),
    ("decomposition", "b = s + T(p, q) with s = bⁱ_(jkl)", False, _decomposition),
]


def identity_residuals(t: WebTensors) -> Dict[str, np.ndarray]:
    """Residual arrays of every identity family that can be evaluated on t."""
    return {
        name: residual(t)
        for name, _, needs_prolongations, residual in IDENTITY_FAMILIES
        if not (needs_prolongations and t.prolongations_stale)
    }


def tensor_scale(t: WebTensors) -> float:
    """Largest tensor component magnitude, used to scale tolerances."""
    return max(_max_abs(t.tensor(name)) for name in TENSOR_RANKS)


def verify_identities(t: WebTensors, config: Optional[AnalysisConfig] = None) -> IdentityReport:
    """Check the identity systems satisfied by the web tensors.

    Families that need prolongations are skipped when the tensors were
    carried through a frame change.

    Args:
        t: Web tensors
        config: Analysis configuration (default if omitted)

    Returns:
        IdentityReport with the maximum residual of every family
    """
    config = config or get_default_config()
    tol = config.tol_identity * (1.0 + tensor_scale(t))
    residuals = identity_residuals(t)

    report = IdentityReport(frame_tag=t.frame_tag)
    for name, description, _, _ in IDENTITY_FAMILIES:
        if name not in residuals:
            report.families.append(ResidualFamily(
                name=name, description=description, tolerance=tol, passed=True, skipped=True
            ))
            continue
        value = _max_abs(residuals[name])
        passed = value < tol
        report.families.append(ResidualFamily(
            name=name, description=description, max_residual=value, tolerance=tol, passed=passed
        ))
        report.checks_performed += 1
        report.checks_passed += int(passed)
        if not passed:
            logger.warning(f"Identity {name} residual {value:.3e} exceeds {tol:.3e}")

    report.is_valid = report.checks_passed == report.checks_performed
    logger.info(
        f"Identity check ({t.frame_tag}): {report.checks_passed}/{report.checks_performed} passed"
    )
    return report


def independent_counts(samples: Iterable[WebTensors], rtol: float = 1e-9) -> Dict[str, int]:
    """Numeric ranks of the sampled (p, q) and symmetric curvature parts.

    Over generic webs the pairs (p, q) span all 8 dimensions and the
    symmetric parts sⁱ_jkl at most 8 (4 per i).
    """
    pq_rows = []
    s_rows = []
    for t in samples:
        pq_rows.append(np.concatenate([t.p.ravel(), t.q.ravel()]))
        s = symmetric_part(t.b)
        s_rows.append(np.array([s[i, 0, 0, 0] for i in (0, 1)]
                               + [s[i, 0, 0, 1] for i in (0, 1)]
                               + [s[i, 0, 1, 1] for i in (0, 1)]
                               + [s[i, 1, 1, 1] for i in (0, 1)]))

    def _rank(rows: List[np.ndarray]) -> int:
        if not rows:
            return 0
        matrix = np.vstack(rows)
        singular = np.linalg.svd(matrix, compute_uv=False)
        if singular.size == 0 or singular[0] == 0.0:
            return 0
        return int(np.sum(singular > rtol * singular[0]))

    counts = {"pq": _rank(pq_rows), "symmetric_b": _rank(s_rows)}
    logger.info(f"Independent components over {len(pq_rows)} samples: {counts}")
    return counts
