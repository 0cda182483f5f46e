"""Quaternion SVD via the complex adjoint, thresholding, and trace bounds.

The SVD of a quaternion matrix is recovered from the classical SVD of its
2Mx2N complex adjoint, whose singular values appear in pairs.  Quaternion
unitary factors are rebuilt from every other complex singular vector and
verified against the reconstruction; degenerate spectra fall back to a
cluster-wise re-orthonormalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quat import QMatrix, column_quaternions, embed, quat_trace


class DecompositionError(RuntimeError):
    """The quaternion SVD factors could not be verified."""


class OrthonormalityError(ValueError):
    """A factor expected to have orthonormal rows does not."""


RECON_TOL = 1e-9


@dataclass(frozen=True)
class QsvdFactors:
    """Full quaternion SVD: A = U diag(sigma) V^H with unitary U, V."""

    U: QMatrix
    sigma: np.ndarray
    V: QMatrix

    def reconstruct(self) -> QMatrix:
        m, n = self.U.rows, self.V.rows
        k = len(self.sigma)
        s = np.zeros((m, n))
        s[:k, :k] = np.diag(self.sigma)
        return self.U @ QMatrix.from_real(s) @ self.V.H

    def rank(self, rank_tol: float | None = None) -> int:
        """Numerical rank: singular values above the usual relative cutoff."""
        if rank_tol is None:
            smax = float(self.sigma[0]) if len(self.sigma) else 0.0
            rank_tol = 1e-9 * smax * max(self.U.rows, self.V.rows)
        return int(np.sum(self.sigma > rank_tol))


@dataclass(frozen=True)
class TruncatedFactors:
    """Row-orthonormal factors taken from a quaternion SVD.

    A holds the first min(M, N) conjugated left singular vectors as rows,
    B the corresponding right ones; C and D keep only the leading r rows.
    """

    A: QMatrix
    B: QMatrix
    C: QMatrix
    D: QMatrix
    r: int


def _orthonormalize_columns(q: QMatrix, tol: float = 1e-12) -> QMatrix:
    """Gram-Schmidt over quaternion columns (right scalar multiplication).

    Columns that vanish under projection are replaced by canonical basis
    vectors orthogonalized against the rest, so the output always has a
    full orthonormal set.
    """
    m, n = q.shape
    cols: list[QMatrix] = []
    basis_ptr = 0

    def project_out(v: QMatrix) -> QMatrix:
        for u in cols:
            coef = u.H @ v  # 1x1 quaternion
            v = v - u @ coef
        return v

    for j in range(n):
        v = project_out(q[:, j])
        nv = v.norm()
        while nv <= tol:
            # degenerate direction: fall back to a canonical basis vector
            if basis_ptr >= m:
                raise DecompositionError("cannot complete orthonormal basis")
            e = np.zeros((4, m, 1))
            e[0, basis_ptr, 0] = 1.0
            basis_ptr += 1
            v = project_out(QMatrix(e))
            nv = v.norm()
        cols.append(v * (1.0 / nv))
    planes = np.concatenate([c.planes for c in cols], axis=2)
    return QMatrix(planes)


def _pair_columns(uc: np.ndarray) -> QMatrix:
    """Quaternion unitary candidate from every other adjoint singular vector."""
    return column_quaternions(np.ascontiguousarray(uc[:, 0::2]))


def _sigma_clusters(sigma: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Contiguous index ranges of (near-)equal singular values."""
    clusters = []
    start = 0
    for i in range(1, len(sigma) + 1):
        if i == len(sigma) or sigma[start] - sigma[i] > tol:
            clusters.append((start, i))
            start = i
    return clusters


def _verify(a: QMatrix, f: QsvdFactors) -> bool:
    m, n = a.shape
    if (f.reconstruct() - a).norm() > RECON_TOL * max(1.0, a.norm()):
        return False
    uerr = (f.U.H @ f.U - QMatrix.eye(m)).norm()
    verr = (f.V.H @ f.V - QMatrix.eye(n)).norm()
    return uerr <= RECON_TOL * m and verr <= RECON_TOL * n


def _repair(a: QMatrix, u: QMatrix, sigma: np.ndarray,
            v: QMatrix) -> QsvdFactors:
    """Rebuild factors when degenerate pairs mixed under the complex SVD.

    Within each cluster the right factors are re-orthonormalized; left
    factors for nonzero singular values are recomputed as A v / sigma, and
    the nullspace block is completed by Gram-Schmidt.
    """
    m, n = a.shape
    k = len(sigma)
    zero_tol = RECON_TOL * max(1.0, float(sigma[0]) if k else 0.0)
    v = _orthonormalize_columns(v)
    u_cols: list[QMatrix] = []
    for i in range(m):
        if i < k and sigma[i] > zero_tol:
            u_cols.append((a @ v[:, i]) * (1.0 / float(sigma[i])))
        else:
            u_cols.append(u[:, i])
    u = _orthonormalize_columns(QMatrix(
        np.concatenate([c.planes for c in u_cols], axis=2)))
    return QsvdFactors(U=u, sigma=sigma, V=v)


def qsvd(a: QMatrix) -> QsvdFactors:
    """Quaternion SVD computed from the complex SVD of the adjoint.

    The adjoint's singular values come in pairs; the returned sigma takes
    one of each, and the quaternion factors come from the corresponding
    columns.  The reconstruction is always verified; a DecompositionError
    signals an unrepairable failure.
    """
    m, n = a.shape
    if m < 1 or n < 1:
        raise ValueError("matrix must be at least 1x1")
    c = embed(a)
    try:
        uc, s, vch = np.linalg.svd(c, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend failure
        raise DecompositionError(f"complex SVD backend failed: {exc}") from exc
    sigma = np.maximum(s[0::2], 0.0)
    u = _pair_columns(uc)
    v = _pair_columns(vch.conj().T)
    factors = QsvdFactors(U=u, sigma=sigma, V=v)
    if _verify(a, factors):
        return factors
    factors = _repair(a, u, sigma, v)
    if _verify(a, factors):
        return factors
    residual = (factors.reconstruct() - a).norm()
    raise DecompositionError(
        f"QSVD verification failed: reconstruction residual {residual:.3e} "
        f"for shape {a.shape}")


def qsvt(t: QMatrix, tau: float) -> QMatrix:
    """Quaternion singular value thresholding: shrink sigma by tau at 0.

    This is the proximal operator of tau * (quaternion nuclear norm).
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    f = qsvd(t)
    shrunk = np.maximum(f.sigma - tau, 0.0)
    m, n = t.shape
    s = np.zeros((m, n))
    k = len(shrunk)
    s[:k, :k] = np.diag(shrunk)
    return f.U @ QMatrix.from_real(s) @ f.V.H


def truncated_factors(a: QMatrix, r: int) -> TruncatedFactors:
    """Conjugate-transposed singular vector blocks used by the solvers.

    A and B stack the first min(M, N) left / right singular vectors as
    conjugated rows; C and D are their leading r rows.
    """
    m, n = a.shape
    k = min(m, n)
    if not 1 <= r <= k:
        raise ValueError(f"truncation rank {r} outside [1, {k}]")
    f = qsvd(a)
    uh = f.U.H
    vh = f.V.H
    return TruncatedFactors(A=uh[:k, :], B=vh[:k, :],
                            C=uh[:r, :], D=vh[:r, :], r=r)


def trace_functional(a: QMatrix, x: QMatrix, b: QMatrix,
                     ortho_tol: float = 1e-8) -> float:
    """|tr(A X B^H)| for row-orthonormal A (r x M) and B (r x N).

    Bounded above by the sum of the r largest singular values of X, with
    equality when A and B come from the SVD of X.
    """
    r = a.rows
    if b.rows != r:
        raise ValueError("A and B must have the same number of rows")
    for name, f in (("A", a), ("B", b)):
        dev = (f @ f.H - QMatrix.eye(r)).norm()
        if dev > ortho_tol * max(1.0, r):
            raise OrthonormalityError(
                f"{name} rows not orthonormal: deviation {dev:.3e}")
    return abs(quat_trace(a @ x @ b.H))


def real_trace_functional(a: QMatrix, x: QMatrix, b: QMatrix) -> float:
    """Re(tr(A X B^H)); the form the weighted solvers optimize."""
    return quat_trace(a @ x @ b.H).w


def nuclear_norm(a: QMatrix) -> float:
    """Sum of all singular values."""
    return float(np.sum(qsvd(a).sigma))


def qtnn_value(a: QMatrix, r: int) -> float:
    """Sum of the min(M, N) - r smallest singular values."""
    k = min(a.rows, a.cols)
    if not 0 <= r <= k:
        raise ValueError(f"truncation rank {r} outside [0, {k}]")
    return float(np.sum(qsvd(a).sigma[r:]))
