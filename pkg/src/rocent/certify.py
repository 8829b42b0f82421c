"""Entanglement certification by negativity minimization.

For measured (or exact) joint statistics ``p_ij`` and binned RoC POVMs the
certifier solves

    min  tr T - 1
    s.t. T >= 0,  T >= rho^Gamma,  rho >= 0,  tr rho = 1,
         tr[rho (A_i (x) B_j)] = p_ij                  (exact mode)
    or   |tr[rho (A_i (x) B_j)] - p_ij| <= eps_ij      (Hoeffding mode)

A strictly positive optimum means every state compatible with the data is
entangled.  ``T >= rho^Gamma`` is written as ``T - S = rho^Gamma`` with a third
PSD block ``S``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import qr

from .povm import AnglePartition, BinnedPOVM, RoCDevice, build_binned_povm
from .qubit import IDENTITY4, DensityMatrix, hermitian_coords, negativity, partial_transpose
from .sdp import (SDPProblem, SDPStatus, SolverSettings, extract_hermitian, hermitian_basis,
                  hermitian_coeff, solve)
from .states import MeasurementRecord, _round_json

DECISION_THRESHOLD = 1e-6
RANK_TOL = 1e-10
CONSISTENCY_TOL = 1e-9


class CertStatus(str, enum.Enum):
    ENTANGLED = "ENTANGLED"
    INCONCLUSIVE = "INCONCLUSIVE"
    INFEASIBLE_DATA = "INFEASIBLE_DATA"
    SOLVER_FAILURE = "SOLVER_FAILURE"


@dataclass(frozen=True)
class ConfidenceSettings:
    c: float = 0.0
    mode: str = "exact"
    bonferroni: bool = False

    def __post_init__(self):
        if self.mode not in ("exact", "hoeffding"):
            raise ValueError(f"mode must be 'exact' or 'hoeffding', got {self.mode!r}")
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"confidence level must lie in [0, 1), got {self.c}")


@dataclass
class CertificationResult:
    status: CertStatus
    min_negativity: Optional[float]
    epsilon_used: Optional[np.ndarray] = None
    witness_state: Optional[DensityMatrix] = None
    c: Optional[float] = None
    mode: str = "exact"
    n: Optional[int] = None
    solver_iterations: int = 0
    residuals: dict = field(default_factory=dict)
    witness_violation: Optional[float] = None

    def to_dict(self) -> dict:
        eps = self.epsilon_used
        if eps is not None and np.ndim(eps) and np.allclose(eps, eps.flat[0]):
            eps = float(eps.flat[0])
        elif eps is not None:
            eps = np.asarray(eps).tolist()
        return _round_json({
            "status": self.status.value,
            "min_negativity": self.min_negativity,
            "c": self.c,
            "mode": self.mode,
            "epsilon": eps,
            "n": self.n,
            "solver_iterations": self.solver_iterations,
            "residuals": self.residuals,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def hoeffding_radius(n: int, c: float) -> float:
    """Frequency-scale half-width ``sqrt(ln(2/(1-c)) / (2n))``.

    With I.I.D. shots, ``P(|p_ij - P_ij| < radius) > c`` for each cell.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if c >= 1.0:
        raise ValueError("confidence c = 1 gives an infinite radius")
    if c < 0.0:
        raise ValueError("confidence must be >= 0")
    return float(np.sqrt(np.log(2.0 / (1.0 - c)) / (2.0 * n)))


def _cell_operators(povm_a: BinnedPOVM, povm_b: BinnedPOVM) -> np.ndarray:
    a, b = povm_a.stacked(), povm_b.stacked()
    return np.einsum("iab,jcd->ijacbd", a, b).reshape(len(a), len(b), 4, 4)


def _prune(rows: np.ndarray, rhs: np.ndarray):
    """Independent subset of linear functionals plus a consistency residual.

    ``rows`` holds Pauli-product coordinates of the constraint operators.
    Returns ``(kept_indices, residual_vector)`` where a nonzero residual ``w``
    satisfies ``w @ rows == 0`` and ``w @ rhs != 0``.
    """
    _, r, piv = qr(rows.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_TOL * max(diag[0], 1e-300)))
    keep = np.sort(piv[:rank])
    v, *_ = np.linalg.lstsq(rows[keep], rhs[keep], rcond=None)
    w = rows @ v - rhs
    return keep, w


def build_problem(probabilities: np.ndarray, povm_a: BinnedPOVM, povm_b: BinnedPOVM,
                  epsilon: Optional[np.ndarray] = None):
    """Assemble the negativity SDP.

    Returns ``(problem, info)``; ``info["inconsistency"]`` carries the linear
    residual found while pruning exact-mode constraints.
    """
    p = np.asarray(probabilities, dtype=float)
    ops = _cell_operators(povm_a, povm_b)
    if p.shape != ops.shape[:2]:
        raise ValueError(f"statistics of shape {p.shape} do not match POVMs {ops.shape[:2]}")
    eye8 = np.eye(8) / 2
    eqs = []
    for e in hermitian_basis(4):
        ce = hermitian_coeff(e)
        eqs.append(([-hermitian_coeff(partial_transpose(e)), ce, -ce], 0.0))
    flat_ops = ops.reshape(-1, 4, 4)
    info = {"inconsistency": 0.0, "certificate": None}
    ineqs = []
    if epsilon is None:
        rows = np.array([hermitian_coords(IDENTITY4)] + [hermitian_coords(o) for o in flat_ops])
        rhs = np.concatenate([[1.0], p.ravel()])
        keep, w = _prune(rows, rhs)
        info["inconsistency"] = float(np.max(np.abs(w)))
        info["certificate"] = w
        info["kept"] = keep
        all_ops = [IDENTITY4] + list(flat_ops)
        for k in keep:
            eqs.append(([hermitian_coeff(all_ops[k]), None, None], float(rhs[k])))
    else:
        eqs.append(([eye8, None, None], 1.0))
        eps = np.broadcast_to(np.asarray(epsilon, dtype=float), p.shape).ravel()
        for o, pij, e in zip(flat_ops, p.ravel(), eps):
            c = hermitian_coeff(o)
            if pij + e < 1.0:
                ineqs.append(([c, None, None], float(pij + e)))
            if pij - e > 0.0:
                ineqs.append(([-c, None, None], float(-(pij - e))))
    prob = SDPProblem([8, 8, 8], [None, eye8, None], eqs, ineqs)
    return prob, info


def min_negativity(probabilities: np.ndarray, partition_a: AnglePartition, partition_b: AnglePartition,
                   r_a: float, r_b: float, settings: ConfidenceSettings = ConfidenceSettings(),
                   n: Optional[int] = None, solver: Optional[SolverSettings] = None) -> CertificationResult:
    """Minimal negativity over all states compatible with the statistics.

    ``probabilities[i, j]`` belongs to Alice's bin ``i`` and Bob's bin ``j``.
    Hoeffding mode needs the shot count ``n``.
    """
    solver = solver or SolverSettings()
    povm_a = build_binned_povm(RoCDevice(r_a), partition_a)
    povm_b = build_binned_povm(RoCDevice(r_b), partition_b)
    p = np.asarray(probabilities, dtype=float)
    eps = None
    if settings.mode == "hoeffding":
        if n is None:
            raise ValueError("Hoeffding mode needs the number of shots n")
        c_eff = settings.c
        if settings.bonferroni:
            c_eff = 1.0 - (1.0 - settings.c) / p.size
        eps = np.full(p.shape, hoeffding_radius(n, c_eff))
    base = dict(epsilon_used=eps, c=settings.c if settings.mode == "hoeffding" else None,
                mode=settings.mode, n=n)

    prob, info = build_problem(p, povm_a, povm_b, eps)
    if eps is None and info["inconsistency"] > CONSISTENCY_TOL:
        return CertificationResult(CertStatus.INFEASIBLE_DATA, None,
                                   residuals={"linear_inconsistency": info["inconsistency"]}, **base)
    sol = solve(prob, solver)
    res = dict(sol.residuals)
    if sol.status is SDPStatus.PRIMAL_INFEASIBLE:
        res["certificate_residual"] = sol.certificate_residual
        return CertificationResult(CertStatus.INFEASIBLE_DATA, None, solver_iterations=sol.iterations,
                                   residuals=res, **base)
    if sol.status is not SDPStatus.OPTIMAL:
        return CertificationResult(CertStatus.SOLVER_FAILURE, None, solver_iterations=sol.iterations,
                                   residuals=res, **base)
    value = sol.objective - 1.0
    rho = extract_hermitian(sol.primal[0])
    witness = _project_state(rho)
    ops = _cell_operators(povm_a, povm_b)
    fitted = np.einsum("ab,ijba->ij", witness.matrix, ops).real
    viol = np.abs(fitted - p)
    if eps is not None:
        viol = np.clip(viol - eps, 0.0, None)
    status = CertStatus.ENTANGLED if value > DECISION_THRESHOLD else CertStatus.INCONCLUSIVE
    return CertificationResult(status, float(max(value, 0.0)),
                               witness_state=witness, solver_iterations=sol.iterations, residuals=res,
                               witness_violation=float(viol.max()), **base)


def _project_state(h: np.ndarray) -> DensityMatrix:
    lam, v = np.linalg.eigh(h)
    lam = np.clip(lam, 0.0, None)
    m = (v * lam) @ v.conj().T
    return DensityMatrix(m / np.trace(m).real)


def certify(record: MeasurementRecord, r_a: float, r_b: float,
            settings: ConfidenceSettings = ConfidenceSettings(c=0.99, mode="hoeffding"),
            solver: Optional[SolverSettings] = None) -> CertificationResult:
    """Certify entanglement from a measurement record."""
    if record.n < 1:
        raise ValueError("record holds no events")
    return min_negativity(record.frequencies, record.partition_a, record.partition_b, r_a, r_b,
                          settings, n=record.n, solver=solver)


def witness_negativity(result: CertificationResult) -> Optional[float]:
    """Eigenvalue negativity of the returned witness, as a cross-check."""
    return None if result.witness_state is None else negativity(result.witness_state)
