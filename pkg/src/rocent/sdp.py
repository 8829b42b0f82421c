"""Small dense semidefinite programs.

Problems are posed in the block form

    minimize    sum_k <C_k, X_k>
    subject to  sum_k <A_ik, X_k>  = b_i     (equalities)
                sum_k <G_jk, X_k> <= h_j     (inequalities)
                X_k PSD

Inequalities receive a nonnegative slack each; the slacks are handled as a
block of 1x1 PSD cones stored as one vector.  The solver is a primal-dual
path-following method on the homogeneous self-dual embedding

    A(X) - b tau = 0,   A*(y) + Z - C tau = 0,   <C, X> - b'y + kappa = 0,

with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.  The
Schur complement ``M_ij = <A_i, W A_j W>`` is factored by dense Cholesky.
When ``tau`` collapses relative to ``kappa`` the iterate is read as a
certificate of primal or dual infeasibility instead of a solution.

Hermitian variables are handled through :func:`embed_hermitian`, which maps a
complex ``d x d`` matrix to the real symmetric ``2d x 2d`` matrix
``[[Re, -Im], [Im, Re]]``.  Inner products double under the embedding, so
coefficients built from complex data are halved (:func:`hermitian_coeff`).
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .qubit import positive_part_trace_eig


class SDPStatus(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    PRIMAL_INFEASIBLE = "PRIMAL_INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"
    NUMERICAL_LIMIT = "NUMERICAL_LIMIT"


class SDPError(RuntimeError):
    """Raised by convenience wrappers when the solver does not reach OPTIMAL."""

    def __init__(self, solution: "SDPSolution"):
        super().__init__(f"SDP solver returned {solution.status.value}")
        self.solution = solution


@dataclass(frozen=True)
class SolverSettings:
    tol_feas: float = 1e-8
    tol_gap: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98


Coefficients = Sequence[Optional[np.ndarray]]


@dataclass
class SDPProblem:
    """Block SDP data.

    ``objective`` and every constraint carry one coefficient matrix per block;
    ``None`` stands for a zero block.  Constraints are ``(coefficients, rhs)``
    pairs.
    """

    block_dims: list[int]
    objective: list[Optional[np.ndarray]]
    equalities: list[tuple[Coefficients, float]] = field(default_factory=list)
    inequalities: list[tuple[Coefficients, float]] = field(default_factory=list)

    def __post_init__(self):
        if any(int(d) < 1 for d in self.block_dims):
            raise ValueError("block dimensions must be >= 1")
        nb = len(self.block_dims)
        if len(self.objective) != nb:
            raise ValueError("objective needs one coefficient matrix per block")
        for coeffs, _ in [(self.objective, 0.0)] + list(self.equalities) + list(self.inequalities):
            if len(coeffs) != nb:
                raise ValueError("constraint needs one coefficient matrix per block")
            for d, c in zip(self.block_dims, coeffs):
                if c is None:
                    continue
                c = np.asarray(c)
                if c.shape != (d, d):
                    raise ValueError(f"coefficient of shape {c.shape} in a block of size {d}")
                if np.iscomplexobj(c) or np.max(np.abs(c - c.T), initial=0.0) > 1e-12:
                    raise ValueError("coefficient matrices must be real symmetric")

    @property
    def n_constraints(self) -> int:
        return len(self.equalities) + len(self.inequalities)


@dataclass
class SDPSolution:
    status: SDPStatus
    primal: list[np.ndarray]
    slacks: np.ndarray
    dual: np.ndarray
    dual_slack: list[np.ndarray]
    objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    certificate: Optional[np.ndarray] = None
    certificate_residual: Optional[float] = None

    @property
    def residuals(self) -> dict[str, float]:
        return {"primal": self.primal_residual, "dual": self.dual_residual, "gap": self.gap}


def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Real symmetric ``[[Re, -Im], [Im, Re]]`` embedding of a Hermitian matrix."""
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def hermitian_coeff(h: np.ndarray) -> np.ndarray:
    """Coefficient such that ``<coeff, embed(X)> == Re tr(h X)``."""
    h = np.asarray(h, dtype=complex)
    return embed_hermitian((h + h.conj().T) / 2) / 2


def extract_hermitian(y: np.ndarray) -> np.ndarray:
    """Hermitian matrix represented by a (possibly unstructured) real block."""
    d = y.shape[0] // 2
    y11, y12, y21, y22 = y[:d, :d], y[:d, d:], y[d:, :d], y[d:, d:]
    h = (y11 + y22) / 2 + 1j * (y21 - y12) / 2
    return (h + h.conj().T) / 2


# --------------------------------------------------------------------------
# internal dense representation


class _Compiled:
    def __init__(self, problem: SDPProblem):
        self.dims = [int(d) for d in problem.block_dims]
        rows = list(problem.equalities) + list(problem.inequalities)
        self.m = len(rows)
        self.n_eq = len(problem.equalities)
        self.L = len(problem.inequalities)
        self.A = []
        for k, d in enumerate(self.dims):
            a = np.zeros((self.m, d, d))
            for i, (coeffs, _) in enumerate(rows):
                if coeffs[k] is not None:
                    a[i] = coeffs[k]
            self.A.append(a)
        self.Al = np.zeros((self.m, self.L))
        self.Al[self.n_eq:, :] = np.eye(self.L)
        self.b = np.array([float(rhs) for _, rhs in rows])
        self.C = [np.zeros((d, d)) if c is None else np.array(c, dtype=float)
                  for d, c in zip(self.dims, problem.objective)]
        self.cl = np.zeros(self.L)
        # row equilibration
        norms = np.sqrt(sum(np.einsum("ijk,ijk->i", a, a) for a in self.A) + np.sum(self.Al**2, axis=1))
        norms[norms == 0] = 1.0
        self.row_scale = 1.0 / norms
        self.A = [a * self.row_scale[:, None, None] for a in self.A]
        self.Al = self.Al * self.row_scale[:, None]
        self.b = self.b * self.row_scale
        self.nu = sum(self.dims) + self.L

    def op(self, X, xl):
        out = self.Al @ xl
        for a, x in zip(self.A, X):
            out = out + np.einsum("ijk,jk->i", a, x)
        return out

    def adj(self, y):
        return [np.einsum("i,ijk->jk", y, a) for a in self.A], self.Al.T @ y

    def cdot(self, X, xl):
        return sum(float(np.vdot(c, x)) for c, x in zip(self.C, X)) + float(self.cl @ xl)


def _sym(a):
    return (a + a.T) / 2


def _nt_scaling(x, z):
    """Return ``R`` and ``lam`` with ``R^-1 X R^-T = R^T Z R = diag(lam)``."""
    ls = np.linalg.cholesky(x)
    lz = np.linalg.cholesky(z)
    u, lam, vt = np.linalg.svd(lz.T @ ls)
    r = ls @ vt.T / np.sqrt(lam)
    rinv = (np.sqrt(lam)[:, None] * vt) @ np.linalg.inv(ls)
    return r, rinv, lam


def _lyap_solve(lam, rc):
    """Solve ``(diag(lam) U + U diag(lam)) / 2 = rc`` for ``U``."""
    return 2 * rc / (lam[:, None] + lam[None, :])


def _max_step(lam, d):
    """Largest alpha with ``diag(lam) + alpha d`` PSD (inf if unbounded)."""
    s = 1 / np.sqrt(lam)
    ev = np.linalg.eigvalsh(_sym(s[:, None] * d * s[None, :]))[0]
    return np.inf if ev >= 0 else -1.0 / ev


def solve(problem: SDPProblem, settings: SolverSettings | None = None) -> SDPSolution:
    """Solve ``problem``; see the module docstring for the algorithm."""
    st = settings or SolverSettings()
    P = _Compiled(problem)
    X = [np.eye(d) for d in P.dims]
    Z = [np.eye(d) for d in P.dims]
    xl = np.ones(P.L)
    zl = np.ones(P.L)
    y = np.zeros(P.m)
    tau = kappa = 1.0
    bnorm = 1 + np.linalg.norm(P.b)
    cnorm = 1 + np.sqrt(sum(np.sum(c * c) for c in P.C))

    def pack(status, it, cert=None, cert_res=None, scale=None):
        s = tau if scale is None else scale
        Xo = [x / s for x in X]
        zo = [z / s for z in Z]
        yo = y / s * P.row_scale
        pobj = P.cdot(X, xl) / s
        dobj = float(P.b @ y) / s
        return SDPSolution(status, Xo, xl / s, yo, zo, pobj, dobj, pres, dres, gap, it,
                           None if cert is None else cert * P.row_scale, cert_res)

    pres = dres = gap = np.inf
    for it in range(st.max_iter + 1):
        AX = P.op(X, xl)
        ATy, ATyl = P.adj(y)
        rp = P.b * tau - AX
        rd = [c * tau - a - z for c, a, z in zip(P.C, ATy, Z)]
        rdl = P.cl * tau - ATyl - zl
        cx = P.cdot(X, xl)
        by = float(P.b @ y)
        rg = by - cx - kappa
        xz = sum(float(np.vdot(x, z)) for x, z in zip(X, Z)) + float(xl @ zl)
        mu = (xz + tau * kappa) / (P.nu + 1)

        pres = np.linalg.norm(rp) / tau / bnorm
        dres = np.sqrt(sum(np.sum(r * r) for r in rd) + rdl @ rdl) / tau / cnorm
        pobj, dobj = cx / tau, by / tau
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        compl = xz / tau**2 / (1 + abs(pobj))
        if pres < st.tol_feas and dres < st.tol_feas and gap < st.tol_gap and compl < st.tol_gap:
            return pack(SDPStatus.OPTIMAL, it)
        # infeasibility certificates
        if by > 0:
            ry = np.sqrt(sum(np.sum((a + z) ** 2) for a, z in zip(ATy, Z)) + np.sum((ATyl + zl) ** 2)) / by
            if ry < st.tol_feas:
                return pack(SDPStatus.PRIMAL_INFEASIBLE, it, cert=y / by, cert_res=ry, scale=by)
        if cx < 0:
            rx = np.linalg.norm(AX) / -cx
            if rx < st.tol_feas:
                return pack(SDPStatus.UNBOUNDED, it, scale=-cx)
        if it == st.max_iter:
            break

        # scaling
        try:
            scal = [_nt_scaling(x, z) for x, z in zip(X, Z)]
        except LinAlgError:
            break
        lam_l = np.sqrt(xl * zl)
        d_l = xl / zl
        At = []
        for (r, _, _), a in zip(scal, P.A):
            At.append(np.einsum("ab,ibc,cd->iad", r.T, a, r).reshape(P.m, -1))
        M = sum(at @ at.T for at in At) + (P.Al * d_l) @ P.Al.T
        WCW = [r @ (r.T @ c @ r) @ r.T for (r, _, _), c in zip(scal, P.C)]
        g = P.op(WCW, d_l * P.cl)
        h = P.cdot(WCW, d_l * P.cl)
        try:
            cf = cho_factor(M, lower=True)
            msolve = lambda v: cho_solve(cf, v)
        except LinAlgError:
            lu = np.linalg.pinv(M)
            msolve = lambda v: lu @ v
        v_dir = msolve(g + P.b)
        den_base = float((g - P.b) @ v_dir) - h

        def direction(rc, rcl, rtau, eta):
            s = [_lyap_solve(lam, c) for (_, _, lam), c in zip(scal, rc)]
            sl = rcl / lam_l
            Pk = [r @ sk @ r.T for (r, _, _), sk in zip(scal, s)]
            Pl = np.sqrt(d_l) * sl
            WrdW = [r @ (r.T @ rdk @ r) @ r.T for (r, _, _), rdk in zip(scal, rd)]
            Wrdl = d_l * rdl
            h1 = eta * rp - P.op(Pk, Pl) + eta * P.op(WrdW, Wrdl)
            h2 = eta * rg - P.cdot(Pk, Pl) + eta * P.cdot(WrdW, Wrdl) - rtau / tau
            u = msolve(h1)
            dtau = (h2 - float((g - P.b) @ u)) / (den_base - kappa / tau)
            dy = u + v_dir * dtau
            ATdy, ATdyl = P.adj(dy)
            dZ = [_sym(eta * r_ - a + c * dtau) for r_, a, c in zip(rd, ATdy, P.C)]
            dzl = eta * rdl - ATdyl + P.cl * dtau
            dzt = [r.T @ dz @ r for (r, _, _), dz in zip(scal, dZ)]
            dxt = [_sym(sk - dz) for sk, dz in zip(s, dzt)]
            dX = [_sym(r @ dx @ r.T) for (r, _, _), dx in zip(scal, dxt)]
            dztl = dzl * np.sqrt(d_l)
            dxtl = sl - dztl
            dxl = np.sqrt(d_l) * dxtl
            dkappa = (rtau - kappa * dtau) / tau
            return dX, dxl, dy, dZ, dzl, dtau, dkappa, dxt, dzt, dxtl, dztl

        def step_len(dr):
            dX, dxl, dy, dZ, dzl, dtau, dkappa, dxt, dzt, dxtl, dztl = dr
            a = np.inf
            for (_, _, lam), dx, dz in zip(scal, dxt, dzt):
                a = min(a, _max_step(lam, dx), _max_step(lam, dz))
            for v in (dxtl, dztl):
                neg = v < 0
                if neg.any():
                    a = min(a, float(np.min(lam_l[neg] / -v[neg])))
            if dtau < 0:
                a = min(a, tau / -dtau)
            if dkappa < 0:
                a = min(a, kappa / -dkappa)
            return a

        # predictor
        rc_aff = [-np.diag(lam**2) for (_, _, lam) in scal]
        aff = direction(rc_aff, -lam_l**2, -tau * kappa, 1.0)
        a_aff = min(1.0, step_len(aff))
        dxt_a, dzt_a = aff[7], aff[8]
        xz_aff = 0.0
        for (_, _, lam), dx, dz in zip(scal, dxt_a, dzt_a):
            xz_aff += float(np.sum((np.diag(lam) + a_aff * dx) * (np.diag(lam) + a_aff * dz)))
        xz_aff += float(np.sum((lam_l + a_aff * aff[9]) * (lam_l + a_aff * aff[10])))
        xz_aff += (tau + a_aff * aff[5]) * (kappa + a_aff * aff[6])
        sigma = min(1.0, max(0.0, xz_aff / (P.nu + 1) / mu)) ** 3

        # corrector
        rc = []
        for (_, _, lam), dx, dz in zip(scal, dxt_a, dzt_a):
            rc.append(sigma * mu * np.eye(len(lam)) - np.diag(lam**2) - _sym(dx @ dz))
        rcl = sigma * mu - lam_l**2 - aff[9] * aff[10]
        rtau = sigma * mu - tau * kappa - aff[5] * aff[6]
        dr = direction(rc, rcl, rtau, 1.0 - sigma)
        alpha = min(1.0, st.step_fraction * step_len(dr))
        if not np.isfinite(alpha) or alpha < 1e-12:
            break
        dX, dxl, dy, dZ, dzl, dtau, dkappa = dr[:7]
        X = [_sym(x + alpha * d) for x, d in zip(X, dX)]
        Z = [_sym(z + alpha * d) for z, d in zip(Z, dZ)]
        xl = xl + alpha * dxl
        zl = zl + alpha * dzl
        y = y + alpha * dy
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa
        # keep the homogeneous iterate well scaled
        scale = max(tau, kappa)
        if scale > 1e6 or scale < 1e-6:
            X = [x / scale for x in X]
            Z = [z / scale for z in Z]
            xl, zl, y = xl / scale, zl / scale, y / scale
            tau, kappa = tau / scale, kappa / scale

    return pack(SDPStatus.NUMERICAL_LIMIT, it)


def positive_part_trace(a: np.ndarray, settings: SolverSettings | None = None) -> float:
    """``inf { tr T : T >= 0, T >= A }`` for Hermitian ``A``, solved as an SDP.

    The optimum is the sum of the positive eigenvalues of ``A``.
    """
    a = np.asarray(a, dtype=complex)
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-9:
        raise ValueError("positive_part_trace requires a Hermitian matrix")
    d = a.shape[0]
    basis = hermitian_basis(d)
    eye2 = np.eye(2 * d) / 2
    eqs = []
    for e in basis:
        c = hermitian_coeff(e)
        eqs.append(([c, -c], float(np.trace(e @ a).real)))
    prob = SDPProblem([2 * d, 2 * d], [eye2, None], eqs)
    sol = solve(prob, settings)
    if sol.status is not SDPStatus.OPTIMAL:
        raise SDPError(sol)
    return sol.objective


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal basis of ``d x d`` Hermitian matrices under ``Re tr(AB)``."""
    out = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j], e[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(e)
    return out


def dump_problem(problem: SDPProblem) -> str:
    """Text dump in an SDPA-sparse-like triplet layout, for debugging.

    Line 1: number of constraints ``m`` (equalities first, then inequalities);
    line 2: number of blocks; line 3: block sizes; line 4: right-hand sides;
    line 5: number of equalities.  Then one ``con block row col value`` line
    per nonzero upper-triangular entry, with ``con = 0`` for the objective and
    1-based indices throughout.
    """
    out = io.StringIO()
    rows = [(problem.objective, 0.0)] + list(problem.equalities) + list(problem.inequalities)
    out.write(f"{problem.n_constraints}\n{len(problem.block_dims)}\n")
    out.write(" ".join(str(d) for d in problem.block_dims) + "\n")
    out.write(" ".join(format(float(r), ".17g") for _, r in rows[1:]) + "\n")
    out.write(f"{len(problem.equalities)}\n")
    for con, (coeffs, _) in enumerate(rows):
        for blk, c in enumerate(coeffs, start=1):
            if c is None:
                continue
            c = np.asarray(c)
            iu, ju = np.nonzero(np.triu(c))
            for i, j in zip(iu, ju):
                out.write(f"{con} {blk} {i + 1} {j + 1} {c[i, j]:.17g}\n")
    return out.getvalue()


def positive_part_selftest(n: int = 200, seed: int = 0, tol: float = 1e-6,
                   settings: SolverSettings | None = None) -> tuple[bool, float]:
    """Compare :func:`positive_part_trace` against eigenvalues on random matrices.

    Returns ``(all_within_tol, worst_abs_error)``.
    """
    from .qubit import random_hermitian

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        a = random_hermitian(rng, 4)
        worst = max(worst, abs(positive_part_trace(a, settings) - positive_part_trace_eig(a)))
    return bool(worst <= tol), float(worst)
