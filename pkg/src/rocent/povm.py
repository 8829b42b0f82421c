"""Rotationally covariant (RoC) single-qubit measurements.

A RoC device is fixed by a single contrast ``r``.  Its operator density over
the outcome angle ``phi in [0, pi)`` is

    M_phi = (1/pi) U_phi^* (1 + r sigma_x) U_phi
          = (1/pi) [1 + r (cos 2phi sigma_x - sin 2phi sigma_y)]

with ``U_phi = exp(-i phi sigma_z)``.  The sign of the sigma_y term follows
from that choice of rotation and is used consistently everywhere downstream.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qubit import IDENTITY2, hermitian_eigvals, pauli, rotation

SX = pauli("x")
SY = pauli("y")

COMPLETENESS_TOL = 1e-10
COVER_TOL = 1e-12


class ContrastClampWarning(UserWarning):
    """An estimated contrast fell outside [0, 1] and was clamped."""


@dataclass(frozen=True)
class RoCDevice:
    r: float

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0):
            raise ValueError(f"detector contrast must lie in [0, 1], got {self.r}")


@dataclass(frozen=True)
class AngleBin:
    """Half-open angle interval ``[lo, hi)`` inside ``[0, pi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise ValueError(f"degenerate bin: hi={self.hi} <= lo={self.lo}")
        if self.lo < -COVER_TOL or self.hi > np.pi + COVER_TOL:
            raise ValueError(f"bin [{self.lo}, {self.hi}) leaves [0, pi]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class AnglePartition:
    """Ordered, disjoint bins covering ``[0, pi)``."""

    bins: tuple[AngleBin, ...]

    def __post_init__(self):
        bins = tuple(self.bins)
        if not bins:
            raise ValueError("partition needs at least one bin")
        object.__setattr__(self, "bins", bins)
        ordered = sorted(bins, key=lambda b: b.lo)
        for left, right in zip(ordered, ordered[1:]):
            if right.lo < left.hi - COVER_TOL:
                raise ValueError(f"bins [{left.lo}, {left.hi}) and [{right.lo}, {right.hi}) overlap")
        total = sum(b.width for b in bins)
        if abs(total - np.pi) > COVER_TOL:
            raise ValueError(f"bins cover total length {total!r}, expected pi")

    def __len__(self) -> int:
        return len(self.bins)

    def __iter__(self):
        return iter(self.bins)

    @classmethod
    def uniform(cls, k: int, offset: float = 0.0) -> "AnglePartition":
        """``k`` equal bins; a nonzero ``offset`` splits the wrap-around bin in two."""
        if k < 1:
            raise ValueError("need at least one bin")
        edges = np.linspace(0.0, np.pi, k + 1)
        if offset == 0.0:
            return cls.from_edges(edges)
        cuts = np.sort(np.mod(edges[:-1] + offset, np.pi))
        edges = np.unique(np.concatenate([[0.0], cuts, [np.pi]]))
        return cls.from_edges(edges)

    @classmethod
    def from_edges(cls, edges: Sequence[float]) -> "AnglePartition":
        edges = list(map(float, edges))
        if abs(edges[0]) > COVER_TOL or abs(edges[-1] - np.pi) > COVER_TOL:
            raise ValueError("edges must run from 0 to pi")
        edges[0], edges[-1] = 0.0, np.pi
        return cls(tuple(AngleBin(lo, hi) for lo, hi in zip(edges, edges[1:])))

    def edges_deg(self) -> list[tuple[float, float]]:
        return [(np.degrees(b.lo), np.degrees(b.hi)) for b in self.bins]


def m_zero(device: RoCDevice) -> np.ndarray:
    """Reference element ``1 + r sigma_x``."""
    return IDENTITY2 + device.r * SX


def m_density(device: RoCDevice, phi: float) -> np.ndarray:
    """Operator density ``(1/pi) U_phi^* M_0 U_phi`` at outcome angle ``phi``."""
    u = rotation(phi)
    return u.conj().T @ m_zero(device) @ u / np.pi


def bin_element(device: RoCDevice, b: AngleBin) -> np.ndarray:
    """Closed-form integral of :func:`m_density` over ``b``."""
    if not b.hi > b.lo:
        raise ValueError("degenerate bin")
    lo, hi, r = b.lo, b.hi, device.r
    return ((hi - lo) / np.pi) * IDENTITY2 + (r / (2 * np.pi)) * (
        (np.sin(2 * hi) - np.sin(2 * lo)) * SX + (np.cos(2 * hi) - np.cos(2 * lo)) * SY
    )


def union_element(device: RoCDevice, bins: Sequence[AngleBin]) -> np.ndarray:
    """POVM element for a union of disjoint bins."""
    return sum((bin_element(device, b) for b in bins), np.zeros((2, 2), dtype=complex))


@dataclass(frozen=True)
class BinnedPOVM:
    device: RoCDevice
    partition: AnglePartition
    elements: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        total = np.zeros((2, 2), dtype=complex)
        for e in self.elements:
            if hermitian_eigvals(e)[0] < -COMPLETENESS_TOL:
                raise ValueError("POVM element is not positive semidefinite")
            total = total + e
        if np.max(np.abs(total - IDENTITY2)) > COMPLETENESS_TOL:
            raise ValueError("POVM elements do not sum to the identity")

    def __len__(self) -> int:
        return len(self.elements)

    def stacked(self) -> np.ndarray:
        return np.array(self.elements)


def build_binned_povm(device: RoCDevice, partition: AnglePartition) -> BinnedPOVM:
    if not isinstance(partition, AnglePartition):
        partition = AnglePartition(tuple(partition))
    elements = []
    for b in partition:
        e = bin_element(device, b)
        e.setflags(write=False)
        elements.append(e)
    return BinnedPOVM(device, partition, tuple(elements))


def estimate_contrast(n_h: float, n_v: float, a: float) -> float:
    """Contrast from horizontal/vertical counts of a partially polarized source.

    The source is ``rho_a = (a/2) 1 + (1 - a)|H><H|`` with known ``a in [0, 2]``
    and ``|H><H| = (1 - sigma_x)/2``.  With ``q = n_h / n_v`` the estimate is
    ``(q - 1) / ((q + 1)(a - 1))``.  Values outside [0, 1] by more than 1e-9
    are clamped and a :class:`ContrastClampWarning` is issued.
    """
    if n_v <= 0:
        raise ValueError("n_v must be positive")
    if n_h < 0:
        raise ValueError("n_h must be nonnegative")
    if not 0.0 <= a <= 2.0:
        raise ValueError(f"mixing parameter a must lie in [0, 2], got {a}")
    if a == 1.0:
        raise ValueError("a = 1 is the maximally mixed source; it carries no contrast information")
    q = n_h / n_v
    r = (q - 1.0) / ((q + 1.0) * (a - 1.0))
    if r < -1e-9 or r > 1.0 + 1e-9:
        warnings.warn(f"contrast estimate {r:.6g} clamped to [0, 1]", ContrastClampWarning, stacklevel=2)
    return float(min(1.0, max(0.0, r)))
