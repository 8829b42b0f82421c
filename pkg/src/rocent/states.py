"""Named two-qubit states, coincidence statistics and measurement records."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .povm import AngleBin, AnglePartition, BinnedPOVM, RoCDevice, build_binned_povm, m_density
from .qubit import IDENTITY2, IDENTITY4, DensityMatrix, pauli

NEG_PROB_TOL = 1e-12
CSV_HEADER = ["bin_a_lo_deg", "bin_a_hi_deg", "bin_b_lo_deg", "bin_b_hi_deg", "count"]


class RecordFormatError(ValueError):
    pass


def _singlet() -> np.ndarray:
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class NamedState:
    """Recipe for a two-qubit state.

    ``kind`` is one of ``singlet``, ``werner``, ``ortho_mixture`` or ``custom``.
    ``ortho_mixture`` is ``(|HV><HV| + |VH><VH|)/2``; with ``axis="x"`` the
    polarization states are ``|V><V| = (1 + sigma_x)/2`` and
    ``|H><H| = (1 - sigma_x)/2``.  ``axis="z"`` uses the sigma_z eigenbasis
    instead, which the RoC devices cannot see at all.
    """

    kind: str
    fidelity: float | None = None
    axis: str = "x"
    matrix: DensityMatrix | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("singlet", "werner", "ortho_mixture", "custom"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.kind == "werner":
            if self.fidelity is None or not 0.0 <= self.fidelity <= 1.0:
                raise ValueError(f"Werner fidelity must lie in [0, 1], got {self.fidelity}")
        if self.kind == "ortho_mixture" and self.axis not in ("x", "z"):
            raise ValueError("ortho_mixture axis must be 'x' or 'z'")
        if self.kind == "custom" and self.matrix is None:
            raise ValueError("custom state needs a density matrix")

    @classmethod
    def singlet(cls) -> "NamedState":
        return cls("singlet")

    @classmethod
    def werner(cls, f: float) -> "NamedState":
        return cls("werner", fidelity=float(f))

    @classmethod
    def ortho_mixture(cls, axis: str = "x") -> "NamedState":
        return cls("ortho_mixture", axis=axis)

    @classmethod
    def custom(cls, rho) -> "NamedState":
        if not isinstance(rho, DensityMatrix):
            rho = DensityMatrix(rho)
        return cls("custom", matrix=rho)

    def describe(self) -> str:
        if self.kind == "werner":
            return f"werner(f={self.fidelity:.12g})"
        if self.kind == "ortho_mixture":
            return f"ortho_mixture(axis={self.axis})"
        return self.kind


def make_state(kind: NamedState) -> DensityMatrix:
    if kind.kind == "singlet":
        return DensityMatrix(_singlet())
    if kind.kind == "werner":
        f = kind.fidelity
        return DensityMatrix(f * _singlet() + (1 - f) / 4 * IDENTITY4)
    if kind.kind == "ortho_mixture":
        s = pauli(kind.axis)
        v = (IDENTITY2 + s) / 2
        h = (IDENTITY2 - s) / 2
        return DensityMatrix((np.kron(h, v) + np.kron(v, h)) / 2)
    return kind.matrix


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def joint_density(rho, r_a: float, r_b: float, phi: float, psi: float) -> float:
    """Coincidence density ``tr[rho (M^{r_a}_phi (x) M^{r_b}_psi)]``."""
    op = np.kron(m_density(RoCDevice(r_a), phi), m_density(RoCDevice(r_b), psi))
    return float(np.trace(_as_matrix(rho) @ op).real)


def joint_probabilities(rho, povm_a: BinnedPOVM, povm_b: BinnedPOVM) -> np.ndarray:
    """Matrix ``P_ij = tr[rho (A_i (x) B_j)]``.

    Entries in ``[-1e-12, 0)`` are treated as roundoff and set to zero; more
    negative entries mean the inputs are not a state and POVMs.
    """
    r = _as_matrix(rho).reshape(2, 2, 2, 2)
    p = np.einsum("abcd,ica,jdb->ij", r, povm_a.stacked(), povm_b.stacked()).real
    if p.min() < -NEG_PROB_TOL:
        raise ValueError(f"negative probability {p.min():.3g}; inputs are not a state/POVM pair")
    return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class MeasurementRecord:
    """Joint bin counts for Alice x Bob plus free-form metadata."""

    partition_a: AnglePartition
    partition_b: AnglePartition
    counts: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.array(self.counts)
        if c.shape != (len(self.partition_a), len(self.partition_b)):
            raise ValueError(f"counts shape {c.shape} does not match partitions")
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.round(c)):
                raise ValueError("counts must be integers")
            c = c.astype(np.int64)
        if (c < 0).any():
            raise ValueError("counts must be nonnegative")
        if c.sum() < 1:
            raise ValueError("record holds no events")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n


def sample_record(rho, povm_a: BinnedPOVM, povm_b: BinnedPOVM, n: int, seed: int,
                  meta: dict[str, Any] | None = None) -> MeasurementRecord:
    """Multinomial draw of ``n`` coincidences from the exact joint probabilities.

    The generator is numpy's PCG64 seeded through ``SeedSequence(seed)``, so a
    given ``(seed, n, P)`` reproduces the same record bit for bit.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"number of shots must be a positive integer, got {n}")
    p = joint_probabilities(rho, povm_a, povm_b)
    p = p / p.sum()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counts = rng.multinomial(int(n), p.ravel()).reshape(p.shape)
    m = {"n": int(n), "seed": int(seed), "r_A": povm_a.device.r, "r_B": povm_b.device.r}
    m.update(meta or {})
    return MeasurementRecord(povm_a.partition, povm_b.partition, counts, m)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def record_to_csv(record: MeasurementRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for i, ba in enumerate(record.partition_a):
        for j, bb in enumerate(record.partition_b):
            w.writerow([_fmt(np.degrees(ba.lo)), _fmt(np.degrees(ba.hi)),
                        _fmt(np.degrees(bb.lo)), _fmt(np.degrees(bb.hi)), int(record.counts[i, j])])
    return buf.getvalue()


def _deg_to_rad(x: float) -> float:
    if abs(x) <= 1e-9:
        return 0.0
    if abs(x - 180.0) <= 1e-9:
        return np.pi
    return float(np.radians(x))


def record_from_csv(text: str, meta: dict[str, Any] | None = None) -> MeasurementRecord:
    """Parse the record CSV; errors name the offending (1-based) line."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [h.strip() for h in rows[0]] != CSV_HEADER:
        raise RecordFormatError(f"line 1: expected header {','.join(CSV_HEADER)}")
    a_keys: list[tuple[str, str]] = []
    b_keys: list[tuple[str, str]] = []
    cells: dict[tuple[tuple[str, str], tuple[str, str]], int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 5:
            raise RecordFormatError(f"line {lineno}: expected 5 fields, got {len(row)}")
        row = [c.strip() for c in row]
        try:
            [float(v) for v in row[:4]]
            count = int(row[4])
        except ValueError:
            raise RecordFormatError(f"line {lineno}: non-numeric field in {row}") from None
        if count < 0:
            raise RecordFormatError(f"line {lineno}: negative count")
        ka, kb = (row[0], row[1]), (row[2], row[3])
        if ka not in a_keys:
            a_keys.append(ka)
        if kb not in b_keys:
            b_keys.append(kb)
        if (ka, kb) in cells:
            raise RecordFormatError(f"line {lineno}: duplicate cell")
        cells[(ka, kb)] = count
    if len(cells) != len(a_keys) * len(b_keys):
        raise RecordFormatError("record is not a complete Alice x Bob grid")

    def partition(keys):
        try:
            return AnglePartition(tuple(AngleBin(_deg_to_rad(float(lo)), _deg_to_rad(float(hi))) for lo, hi in keys))
        except ValueError as exc:
            raise RecordFormatError(f"invalid partition: {exc}") from None

    counts = np.array([[cells[(ka, kb)] for kb in b_keys] for ka in a_keys], dtype=np.int64)
    try:
        return MeasurementRecord(partition(a_keys), partition(b_keys), counts, dict(meta or {}))
    except ValueError as exc:
        raise RecordFormatError(str(exc)) from None


def write_record(record: MeasurementRecord, csv_path: Path | str) -> tuple[Path, Path]:
    """Write ``<name>.csv`` and its JSON sidecar ``<name>.json``."""
    csv_path = Path(csv_path)
    csv_path.write_text(record_to_csv(record))
    side = csv_path.with_suffix(".json")
    meta = {"n": record.n}
    meta.update({k: v for k, v in record.meta.items() if k != "n"})
    side.write_text(json.dumps(_round_json(meta), indent=2, sort_keys=True) + "\n")
    return csv_path, side


def read_record(csv_path: Path | str) -> MeasurementRecord:
    csv_path = Path(csv_path)
    side = csv_path.with_suffix(".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    rec = record_from_csv(csv_path.read_text(), meta)
    if "n" in meta and int(meta["n"]) != rec.n:
        raise RecordFormatError(f"sidecar n={meta['n']} disagrees with count total {rec.n}")
    return rec


def _round_json(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round_json(obj.item())
    return obj


def uniform_povms(r_a: float, r_b: float, bins_a: int, bins_b: int) -> tuple[BinnedPOVM, BinnedPOVM]:
    return (build_binned_povm(RoCDevice(r_a), AnglePartition.uniform(bins_a)),
            build_binned_povm(RoCDevice(r_b), AnglePartition.uniform(bins_b)))
