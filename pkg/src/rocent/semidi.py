"""Semi-device-independent entanglement scans.

The sample devices' contrasts are treated as unknown.  For each hypothetical
pair ``(r_A_hyp, r_B_hyp)`` the statistics are either reproduced only by
entangled states, also by some separable state, or not at all.  The sample is
certified entangled when no hypothesis admits a separable explanation and at
least one hypothesis reproduces the data.
"""
from __future__ import annotations

import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np

from .certify import CertStatus, ConfidenceSettings, min_negativity
from .povm import AnglePartition, RoCDevice, build_binned_povm
from .sdp import SolverSettings
from .states import NamedState, _round_json, joint_probabilities, make_state

WERNER_FAMILY_BOUND = 1.0 / 3.0
# Threshold values quoted for comparison only; see README.
REPORTED_THRESHOLDS = {"curve_estimate": 0.393, "scan_estimate": 0.4, "werner_family": WERNER_FAMILY_BOUND}


class Case(str, enum.Enum):
    REPLICATED_ENTANGLED = "REPLICATED_ENTANGLED"
    REPLICATED_SEPARABLE = "REPLICATED_SEPARABLE"
    NOT_REPLICABLE = "NOT_REPLICABLE"
    SOLVER_FAILURE = "SOLVER_FAILURE"


@dataclass(frozen=True)
class HypothesisGrid:
    r_values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.r_values)
        if not vals:
            raise ValueError("hypothesis grid is empty")
        if any(not 0.0 < v <= 1.0 for v in vals):
            raise ValueError("hypothetical contrasts must lie in (0, 1]")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("hypothesis grid must be strictly ascending")
        object.__setattr__(self, "r_values", vals)

    @classmethod
    def from_step(cls, step: float = 0.01) -> "HypothesisGrid":
        if not 0.0 < step <= 1.0:
            raise ValueError("grid step must lie in (0, 1]")
        k = int(np.floor(1.0 / step + 1e-9))
        vals = [round(step * i, 12) for i in range(1, k + 1)]
        if abs(vals[-1] - 1.0) > 1e-12:
            vals.append(1.0)
        vals[-1] = 1.0
        return cls(tuple(vals))


@dataclass(frozen=True)
class HypothesisOutcome:
    r_a_hyp: float
    r_b_hyp: float
    case: Case
    min_negativity: Optional[float]


@dataclass
class SemiDIVerdict:
    entangled: bool
    outcomes: list[HypothesisOutcome] = field(default_factory=list)

    @property
    def solver_failures(self) -> int:
        return sum(o.case is Case.SOLVER_FAILURE for o in self.outcomes)

    def to_dict(self) -> dict:
        return _round_json({
            "entangled": self.entangled,
            "solver_failures": self.solver_failures,
            "outcomes": [{"r_A_hyp": o.r_a_hyp, "r_B_hyp": o.r_b_hyp, "case": o.case.value,
                          "min_negativity": o.min_negativity} for o in self.outcomes],
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def aggregate(outcomes: Sequence[HypothesisOutcome]) -> SemiDIVerdict:
    cases = {o.case for o in outcomes}
    entangled = Case.REPLICATED_SEPARABLE not in cases and Case.REPLICATED_ENTANGLED in cases
    return SemiDIVerdict(entangled, list(outcomes))


def classify_hypothesis(statistics: np.ndarray, partition_a: AnglePartition, partition_b: AnglePartition,
                        r_a_hyp: float, r_b_hyp: float,
                        confidence: ConfidenceSettings = ConfidenceSettings(), n: Optional[int] = None,
                        solver: Optional[SolverSettings] = None) -> HypothesisOutcome:
    res = min_negativity(statistics, partition_a, partition_b, r_a_hyp, r_b_hyp, confidence, n=n, solver=solver)
    case = {
        CertStatus.ENTANGLED: Case.REPLICATED_ENTANGLED,
        CertStatus.INCONCLUSIVE: Case.REPLICATED_SEPARABLE,
        CertStatus.INFEASIBLE_DATA: Case.NOT_REPLICABLE,
        CertStatus.SOLVER_FAILURE: Case.SOLVER_FAILURE,
    }[res.status]
    return HypothesisOutcome(float(r_a_hyp), float(r_b_hyp), case, res.min_negativity)


def _classify_pair(pair, statistics, partition_a, partition_b, confidence, n, solver):
    return classify_hypothesis(statistics, partition_a, partition_b, pair[0], pair[1], confidence, n, solver)


def scan(statistics: np.ndarray, partition_a: AnglePartition, partition_b: AnglePartition,
         grid: HypothesisGrid, confidence: ConfidenceSettings = ConfidenceSettings(),
         n: Optional[int] = None, solver: Optional[SolverSettings] = None,
         workers: int = 1) -> SemiDIVerdict:
    """Classify every ``(r_A_hyp, r_B_hyp)`` on ``grid x grid``.

    Grid points are independent; with ``workers > 1`` they are evaluated in a
    process pool.  Outcomes are always returned in grid order.
    """
    stats = np.asarray(statistics, dtype=float)
    if stats.size == 0:
        raise ValueError("empty statistics")
    pairs = [(ra, rb) for ra in grid.r_values for rb in grid.r_values]
    fn = partial(_classify_pair, statistics=stats, partition_a=partition_a, partition_b=partition_b,
                 confidence=confidence, n=n, solver=solver)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outcomes = list(ex.map(fn, pairs, chunksize=max(1, len(pairs) // (4 * workers))))
    else:
        outcomes = [fn(p) for p in pairs]
    return aggregate(outcomes)


def werner_family_bound(r_a: float, r_b: float) -> bool:
    """Necessary condition ``r_a r_b > 1/3`` derived within the Werner family.

    This is a fast pre-check only; it is not the SDP verdict.
    """
    return r_a * r_b > WERNER_FAMILY_BOUND


def exact_statistics(state: NamedState, r_a: float, r_b: float,
                     partition_a: AnglePartition, partition_b: AnglePartition) -> np.ndarray:
    pa = build_binned_povm(RoCDevice(r_a), partition_a)
    pb = build_binned_povm(RoCDevice(r_b), partition_b)
    return joint_probabilities(make_state(state), pa, pb)


def threshold_curve(sample_r_values: Sequence[float], state: NamedState,
                    partition_a: AnglePartition, partition_b: AnglePartition,
                    solver: Optional[SolverSettings] = None) -> list[tuple[float, float]]:
    """Minimal negativity at the perfect hypothesis versus ``r_A r_B``.

    Each sample value ``r`` sets ``r_A = r_B = r``; statistics are exact.
    """
    out = []
    for r in sample_r_values:
        p = exact_statistics(state, r, r, partition_a, partition_b)
        res = min_negativity(p, partition_a, partition_b, 1.0, 1.0, solver=solver)
        if res.min_negativity is None:
            raise RuntimeError(f"certification at r={r} returned {res.status.value}")
        out.append((float(r * r), res.min_negativity))
    return sorted(out)


def extract_threshold(curve: Sequence[tuple[float, float]],
                      threshold: float = 1e-6) -> tuple[float, float]:
    """Midpoint of the bracket where the curve leaves zero, and its half-width.

    Returns ``(estimate, uncertainty)``; the uncertainty is half the grid
    spacing around the crossing.
    """
    xs = [x for x, _ in curve]
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        if y0 <= threshold < y1:
            return (x0 + x1) / 2, (x1 - x0) / 2
    if curve and curve[0][1] > threshold:
        return xs[0], 0.0
    raise ValueError("curve never rises above the threshold")


def bisect_threshold(state: NamedState, partition_a: AnglePartition, partition_b: AnglePartition,
                     lo: float = 0.0, hi: float = 1.0, tol: float = 1e-4,
                     solver: Optional[SolverSettings] = None) -> tuple[float, float]:
    """Bisection on the product ``r_A r_B`` for the zero crossing of the curve."""

    def positive(prod):
        r = np.sqrt(prod)
        p = exact_statistics(state, r, r, partition_a, partition_b)
        return min_negativity(p, partition_a, partition_b, 1.0, 1.0, solver=solver).status is CertStatus.ENTANGLED

    if not positive(hi):
        raise ValueError("no entanglement detected at the upper end")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if positive(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2, (hi - lo) / 2
