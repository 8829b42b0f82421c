"""Two-qubit operator algebra.

Every bipartite operator in this package is ordered A (x) B, with Alice's
qubit as the slow (leftmost) Kronecker factor.  Partial transposes are always
taken on Alice's factor.  Matrices are plain complex ``numpy`` arrays; only
:class:`DensityMatrix` carries validation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_REJECT_TOL = 1e-9
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
IDENTITY4 = np.eye(4, dtype=complex)

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in _PAULI.values():
    _m.setflags(write=False)
IDENTITY2.setflags(write=False)
IDENTITY4.setflags(write=False)


def pauli(axis: str) -> np.ndarray:
    """Return the Pauli matrix for ``axis`` in ``{"x", "y", "z"}``."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def rotation(phi: float) -> np.ndarray:
    """Return ``U_phi = exp(-i phi sigma_z)``.

    The matrix has period 2 pi; its conjugation action already repeats after
    pi, since ``rotation(phi + pi) = -rotation(phi)``.
    """
    phi = float(np.mod(phi, 2 * np.pi))
    return np.diag([np.exp(-1j * phi), np.exp(1j * phi)])


def _check_dim(a: np.ndarray, dim: int, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}, got shape {a.shape}")
    return a


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b`` of two 2x2 operators."""
    return np.kron(_check_dim(a, 2, "a"), _check_dim(b, 2, "b"))


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose Alice's (first) factor of a 4x4 operator."""
    rho = _check_dim(rho, 4, "rho")
    # indices (a, b, a', b') -> (a', b, a, b')
    return rho.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def hermitian_eigvals(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (input is symmetrized)."""
    a = np.asarray(a, dtype=complex)
    return np.linalg.eigvalsh((a + a.conj().T) / 2)


def trace_norm(a: np.ndarray) -> float:
    """Trace norm of a Hermitian matrix: the sum of absolute eigenvalues."""
    return float(np.sum(np.abs(hermitian_eigvals(a))))


def positive_part_trace_eig(a: np.ndarray) -> float:
    """Sum of the positive eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.clip(hermitian_eigvals(a), 0.0, None)))


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density operator on C^2 or C^2 (x) C^2.

    The input is symmetrized ``(A + A^*)/2`` after checking that its
    anti-Hermitian part is below 1e-9; the stored array is read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise ValueError(f"density matrix must be 2x2 or 4x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix has non-finite entries")
        asym = np.max(np.abs(m - m.conj().T))
        if asym > HERMITIAN_REJECT_TOL:
            raise ValueError(f"matrix is not Hermitian (asymmetry {asym:.3g})")
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace must be 1, got {tr!r}")
        lam_min = np.linalg.eigvalsh(m)[0]
        if lam_min < -PSD_TOL:
            raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam_min:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op: np.ndarray) -> float:
        """``tr[rho op]`` for a Hermitian ``op`` (real part)."""
        return float(np.trace(self.matrix @ op).real)

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def negativity(rho) -> float:
    """Negativity ``(||rho^Gamma||_1 - 1) / 2`` of a two-qubit state.

    Accepts a :class:`DensityMatrix` or a raw 4x4 array; raw arrays must be
    Hermitian to 1e-9.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    m = _check_dim(m, 4, "rho")
    if not is_hermitian(m, HERMITIAN_REJECT_TOL):
        raise ValueError("negativity requires a Hermitian operator")
    lam = hermitian_eigvals(partial_transpose(m))
    return float(max(0.0, (np.sum(np.abs(lam)) - 1.0) / 2))


# Orthonormal basis of 2x2 Hermitian operators under <A, B> = Re tr(A B):
# sigma_mu / sqrt(2).  Products give an orthonormal basis on C^4.
_HERM2 = [IDENTITY2 / np.sqrt(2)] + [_PAULI[k] / np.sqrt(2) for k in "xyz"]
HERMITIAN_BASIS4 = np.array([np.kron(a, b) for a in _HERM2 for b in _HERM2])
HERMITIAN_BASIS4.setflags(write=False)


def hermitian_coords(h: np.ndarray) -> np.ndarray:
    """Real coordinates of a 4x4 Hermitian operator in the Pauli-product basis.

    ``tr[rho H] == hermitian_coords(rho) @ hermitian_coords(H)`` for Hermitian
    ``rho`` and ``H``.
    """
    h = _check_dim(h, 4, "h")
    return np.einsum("kij,ji->k", HERMITIAN_BASIS4, h).real


def from_hermitian_coords(v: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(v, dtype=float), HERMITIAN_BASIS4)


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed random state of the given rank (full by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_hermitian(rng: np.random.Generator, dim: int = 4, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2
