"""Steering with one RoC party, and the CHSH bound for RoC devices.

Bob's RoC device reproduces Pauli measurements by post-processing two binary
partitions: ``y`` splits ``[0, pi)`` at ``pi/2``, ``x`` separates
``[pi/4, 3pi/4)`` from its complement.  The difference of the two outcome
operators is ``(2r/pi) sigma``; rescaling by ``pi/(2r)`` needs ``r``.

Every binary measurement built from bins of one RoC device is a classical
post-processing of the same continuous parent measurement, so CHSH scores
from such devices never exceed 2.  :func:`chsh_score` lets that be checked
numerically; no dilation is constructed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .povm import AngleBin, AnglePartition, RoCDevice, build_binned_povm, union_element
from .qubit import DensityMatrix, pauli
from .states import _round_json

SX, SY = pauli("x"), pauli("y")
STEERING_BOUND = 2.0


def roc_pauli_differences(r: float) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled differences ``B^x - A^x`` and ``B^y - A^y``; equal ``(2r/pi) sigma``."""
    dev = RoCDevice(r)
    a_y = union_element(dev, [AngleBin(0.0, np.pi / 2)])
    b_y = union_element(dev, [AngleBin(np.pi / 2, np.pi)])
    a_x = union_element(dev, [AngleBin(np.pi / 4, 3 * np.pi / 4)])
    b_x = union_element(dev, [AngleBin(0.0, np.pi / 4), AngleBin(3 * np.pi / 4, np.pi)])
    return b_x - a_x, b_y - a_y


def pauli_from_roc(r: float) -> tuple[np.ndarray, np.ndarray]:
    """sigma_x and sigma_y rebuilt from a RoC device of known contrast ``r``."""
    if r <= 0:
        raise ValueError("contrast must be positive to recover Pauli observables")
    dx, dy = roc_pauli_differences(r)
    return np.pi / (2 * r) * dx, np.pi / (2 * r) * dy


@dataclass(frozen=True)
class CorrelationTable:
    """Correlators ``<sigma_i^A sigma_j^B>`` for ``i, j in {x, y}``."""

    xx: float
    xy: float
    yx: float
    yy: float

    def __post_init__(self):
        for name in ("xx", "xy", "yx", "yy"):
            v = getattr(self, name)
            if not np.isfinite(v) or abs(v) > 1 + 1e-10:
                raise ValueError(f"correlator {name}={v} outside [-1, 1]")

    @classmethod
    def from_state(cls, rho, bob_x: np.ndarray = SX, bob_y: np.ndarray = SY) -> "CorrelationTable":
        """Correlators of a state with trusted Alice Paulis and given Bob observables."""
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)

        def ev(a, b):
            return float(np.trace(m @ np.kron(a, b)).real)

        return cls(ev(SX, bob_x), ev(SX, bob_y), ev(SY, bob_x), ev(SY, bob_y))

    @classmethod
    def from_roc_bob(cls, rho, r: float, r_known: bool) -> "CorrelationTable":
        """Bob post-processes his RoC device; without ``r`` he rescales by pi/2 only."""
        if r_known:
            bx, by = pauli_from_roc(r)
        else:
            dx, dy = roc_pauli_differences(r)
            bx, by = np.pi / 2 * dx, np.pi / 2 * dy
        return cls.from_state(rho, bx, by)


def steering_functional(t: CorrelationTable) -> float:
    plus = np.hypot(t.xx + t.yx, t.xy + t.yy)
    minus = np.hypot(t.xx - t.yx, t.xy - t.yy)
    return float(plus + minus)


def steering_report(t: CorrelationTable, r_known: bool) -> dict:
    value = steering_functional(t)
    return _round_json({
        "functional_value": value,
        "threshold": STEERING_BOUND,
        "demonstrated": bool(value > STEERING_BOUND),
        "assumptions": "alice-trusted",
        "r_known": bool(r_known),
    })


def steering_report_json(t: CorrelationTable, r_known: bool) -> str:
    return json.dumps(steering_report(t, r_known), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class BinaryMeasurement:
    """A partition with a +1/-1 label per bin."""

    partition: AnglePartition
    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        if len(labels) != len(self.partition):
            raise ValueError("one label per bin required")
        if any(v not in (1, -1) for v in labels):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "labels", labels)

    def observable(self, r: float) -> np.ndarray:
        povm = build_binned_povm(RoCDevice(r), self.partition)
        return sum(l * e for l, e in zip(self.labels, povm.elements))


@dataclass(frozen=True)
class BellConfiguration:
    alice: tuple[BinaryMeasurement, BinaryMeasurement]
    bob: tuple[BinaryMeasurement, BinaryMeasurement]


def chsh_score(rho, config: BellConfiguration, r_a: float, r_b: float) -> float:
    """``<A1 B1> + <A1 B2> + <A2 B1> - <A2 B2>`` with binned RoC observables."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    a1, a2 = (meas.observable(r_a) for meas in config.alice)
    b1, b2 = (meas.observable(r_b) for meas in config.bob)

    def ev(a, b):
        return float(np.trace(m @ np.kron(a, b)).real)

    return ev(a1, b1) + ev(a1, b2) + ev(a2, b1) - ev(a2, b2)


def half_plane(theta: float, sign: int = 1) -> BinaryMeasurement:
    """Outcome ``sign`` on ``[theta, theta + pi/2)`` (mod pi), ``-sign`` elsewhere."""
    t = float(np.mod(theta, np.pi))
    end = t + np.pi / 2
    if t == 0.0:
        edges, labels = [0.0, np.pi / 2, np.pi], [sign, -sign]
    elif end <= np.pi:
        edges = [0.0, t, end, np.pi] if end < np.pi else [0.0, t, np.pi]
        labels = [-sign, sign, -sign] if end < np.pi else [-sign, sign]
    else:
        edges, labels = [0.0, end - np.pi, t, np.pi], [sign, -sign, sign]
    return BinaryMeasurement(AnglePartition.from_edges(edges), tuple(labels))


def canonical_chsh_configuration() -> BellConfiguration:
    """Half-plane measurements at polarization angles 0, pi/4 (Alice) and pi/8, 3pi/8 (Bob).

    Bob's labels are flipped so that the singlet scores positive.
    """
    return BellConfiguration(
        (half_plane(0.0), half_plane(np.pi / 4)),
        (half_plane(np.pi / 8, -1), half_plane(-np.pi / 8, -1)),
    )


def random_binary_measurement(rng: np.random.Generator, max_bins: int = 8) -> BinaryMeasurement:
    k = int(rng.integers(1, max_bins + 1))
    cuts = np.sort(rng.uniform(0.0, np.pi, size=k - 1))
    edges = np.concatenate([[0.0], cuts, [np.pi]])
    # drop slivers that would make degenerate bins
    keep = np.concatenate([[True], np.diff(edges) > 1e-9])
    edges = edges[keep]
    edges[-1] = np.pi
    labels = rng.choice([-1, 1], size=len(edges) - 1)
    return BinaryMeasurement(AnglePartition.from_edges(edges), tuple(labels))


def random_bell_configuration(rng: np.random.Generator, max_bins: int = 8) -> BellConfiguration:
    return BellConfiguration(
        (random_binary_measurement(rng, max_bins), random_binary_measurement(rng, max_bins)),
        (random_binary_measurement(rng, max_bins), random_binary_measurement(rng, max_bins)),
    )


def max_chsh_search(configs: Sequence[BellConfiguration], states: Sequence, r_pairs: Sequence[tuple[float, float]]) -> float:
    """Largest ``|CHSH|`` over all configuration x state x contrast combinations."""
    best = 0.0
    for cfg in configs:
        for r_a, r_b in r_pairs:
            a1, a2 = (meas.observable(r_a) for meas in cfg.alice)
            b1, b2 = (meas.observable(r_b) for meas in cfg.bob)
            op = np.kron(a1, b1) + np.kron(a1, b2) + np.kron(a2, b1) - np.kron(a2, b2)
            for rho in states:
                m = rho.matrix if isinstance(rho, DensityMatrix) else rho
                best = max(best, abs(float(np.trace(m @ op).real)))
    return best
