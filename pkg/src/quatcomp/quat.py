"""Quaternion scalars, quaternion matrices, and the complex-adjoint embedding.

A quaternion matrix is stored as four dense real planes (the components of
A0 + A1*i + A2*j + A3*k).  The Cayley-Dickson split A = Ap + Aq*j with
complex Ap = A0 + A1*i and Aq = A2 + A3*i lets matrix products and the
2Mx2N complex-adjoint embedding run on ordinary complex BLAS.

All values are immutable after construction; every operation is a pure
function returning a fresh object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """Operand shapes are incompatible."""


class AdjointStructureError(ValueError):
    """A complex matrix does not have the required adjoint block structure."""


@dataclass(frozen=True)
class Quaternion:
    """A single quaternion w + x*i + y*j + z*k."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        return Quaternion(self.w * other, self.x * other,
                          self.y * other, self.z * other)

    def __rmul__(self, other) -> "Quaternion":
        # real scalar * quaternion
        return Quaternion(other * self.w, other * self.x,
                          other * self.y, other * self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __abs__(self) -> float:
        return float(np.sqrt(self.w ** 2 + self.x ** 2
                             + self.y ** 2 + self.z ** 2))

    @property
    def components(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product of two quaternions (non-commutative)."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


class QMatrix:
    """An M x N quaternion matrix stored as four real component planes."""

    __slots__ = ("planes",)

    def __init__(self, planes: np.ndarray):
        planes = np.asarray(planes, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[0] != 4:
            raise DimensionMismatchError(
                f"expected planes of shape (4, M, N), got {planes.shape}")
        planes = planes.copy()
        planes.setflags(write=False)
        object.__setattr__(self, "planes", planes)

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_planes(cls, a0, a1, a2, a3) -> "QMatrix":
        return cls(np.stack([np.asarray(a0, dtype=np.float64),
                             np.asarray(a1, dtype=np.float64),
                             np.asarray(a2, dtype=np.float64),
                             np.asarray(a3, dtype=np.float64)]))

    @classmethod
    def from_complex_pair(cls, ap: np.ndarray, aq: np.ndarray) -> "QMatrix":
        """Build from the Cayley-Dickson pair A = Ap + Aq*j."""
        ap = np.asarray(ap, dtype=np.complex128)
        aq = np.asarray(aq, dtype=np.complex128)
        if ap.shape != aq.shape:
            raise DimensionMismatchError("Cayley-Dickson halves differ in shape")
        return cls.from_planes(ap.real, ap.imag, aq.real, aq.imag)

    @classmethod
    def from_real(cls, a: np.ndarray) -> "QMatrix":
        a = np.asarray(a, dtype=np.float64)
        z = np.zeros_like(a)
        return cls.from_planes(a, z, z, z)

    @classmethod
    def zeros(cls, m: int, n: int) -> "QMatrix":
        return cls(np.zeros((4, m, n)))

    @classmethod
    def eye(cls, n: int) -> "QMatrix":
        p = np.zeros((4, n, n))
        p[0] = np.eye(n)
        return cls(p)

    @classmethod
    def random(cls, m: int, n: int, rng: np.random.Generator,
               scale: float = 1.0) -> "QMatrix":
        return cls(rng.standard_normal((4, m, n)) * scale)

    # -- basic structure --------------------------------------------------

    @property
    def rows(self) -> int:
        return self.planes.shape[1]

    @property
    def cols(self) -> int:
        return self.planes.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def is_pure(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.planes[0]), initial=0.0) <= tol)

    def cd_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """Cayley-Dickson split (Ap, Aq) with A = Ap + Aq*j."""
        return (self.planes[0] + 1j * self.planes[1],
                self.planes[2] + 1j * self.planes[3])

    def entry(self, i: int, j: int) -> Quaternion:
        return Quaternion(*(float(self.planes[l, i, j]) for l in range(4)))

    def __getitem__(self, key) -> "QMatrix":
        """Submatrix by plane-wise slicing (rows, cols)."""
        i, j = key
        sub = self.planes[:, i, j]
        if sub.ndim == 2:
            # a single row or column collapsed by integer indexing
            if isinstance(i, int):
                sub = sub[:, np.newaxis, :]
            else:
                sub = sub[:, :, np.newaxis]
        return QMatrix(sub)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._check_same_shape(other)
        return QMatrix(self.planes + other.planes)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._check_same_shape(other)
        return QMatrix(self.planes - other.planes)

    def __mul__(self, scalar: float) -> "QMatrix":
        return QMatrix(self.planes * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self.planes)

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        return mat_mul(self, other)

    @property
    def H(self) -> "QMatrix":
        return conj_transpose(self)

    def conj(self) -> "QMatrix":
        return QMatrix(np.stack([self.planes[0], -self.planes[1],
                                 -self.planes[2], -self.planes[3]]))

    def scale_rows(self, weights: np.ndarray) -> "QMatrix":
        """Left-multiply by diag(weights)."""
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.rows,):
            raise DimensionMismatchError("row weight length mismatch")
        return QMatrix(self.planes * w[np.newaxis, :, np.newaxis])

    def scale_cols(self, weights: np.ndarray) -> "QMatrix":
        """Right-multiply by diag(weights)."""
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.cols,):
            raise DimensionMismatchError("column weight length mismatch")
        return QMatrix(self.planes * w[np.newaxis, np.newaxis, :])

    def norm(self) -> float:
        """Frobenius norm: sqrt of the sum of squares of all plane entries."""
        return float(np.sqrt(np.sum(self.planes ** 2)))

    def allclose(self, other: "QMatrix", atol: float = 1e-12) -> bool:
        return (self.shape == other.shape
                and bool(np.allclose(self.planes, other.planes, atol=atol,
                                     rtol=0.0)))

    def equal_bitwise(self, other: "QMatrix") -> bool:
        return (self.shape == other.shape
                and bool(np.array_equal(self.planes, other.planes)))

    def _check_same_shape(self, other: "QMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionMismatchError(
                f"shape mismatch: {self.shape} vs {other.shape}")

    def __repr__(self) -> str:
        return f"QMatrix({self.rows}x{self.cols})"


def mat_mul(a: QMatrix, b: QMatrix) -> QMatrix:
    """Quaternion matrix product via the Cayley-Dickson split.

    (Ap + Aq j)(Bp + Bq j) = (Ap Bp - Aq Bq*) + (Ap Bq + Aq Bp*) j
    """
    if a.cols != b.rows:
        raise DimensionMismatchError(
            f"inner dimensions disagree: {a.shape} @ {b.shape}")
    ap, aq = a.cd_pair()
    bp, bq = b.cd_pair()
    cp = ap @ bp - aq @ bq.conj()
    cq = ap @ bq + aq @ bp.conj()
    return QMatrix.from_complex_pair(cp, cq)


def conj_transpose(a: QMatrix) -> QMatrix:
    """Conjugate transpose: (A^H)_p = Ap^H, (A^H)_q = -Aq^T."""
    ap, aq = a.cd_pair()
    return QMatrix.from_complex_pair(ap.conj().T, -aq.T)


def real_trace_inner(a: QMatrix, b: QMatrix) -> float:
    """Re(tr(A^H B)): the real inner product of two quaternion matrices.

    Equals the sum of componentwise products over all four planes, so
    real_trace_inner(A, A) is the squared Frobenius norm.
    """
    a._check_same_shape(b)
    return float(np.sum(a.planes * b.planes))


def quat_trace(a: QMatrix) -> Quaternion:
    """Quaternion trace (sum of diagonal entries) of a square matrix."""
    if a.rows != a.cols:
        raise DimensionMismatchError("trace of a non-square matrix")
    d = np.einsum("lii->l", a.planes)
    return Quaternion(*(float(v) for v in d))


def embed(a: QMatrix) -> np.ndarray:
    """Complex adjoint: the 2Mx2N matrix [[Ap, Aq], [-Aq*, Ap*]]."""
    ap, aq = a.cd_pair()
    return np.block([[ap, aq], [-aq.conj(), ap.conj()]])


def extract(c: np.ndarray, tol: float = 1e-10) -> QMatrix:
    """Inverse of embed; validates the adjoint block structure.

    Raises AdjointStructureError if the lower blocks are not the conjugate
    (resp. negated conjugate) of the upper blocks within tol, scaled by the
    matrix magnitude.
    """
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim != 2 or c.shape[0] % 2 or c.shape[1] % 2:
        raise DimensionMismatchError(
            f"adjoint matrix must have even dimensions, got {c.shape}")
    m, n = c.shape[0] // 2, c.shape[1] // 2
    ap, aq = c[:m, :n], c[:m, n:]
    scale = max(1.0, float(np.linalg.norm(c)))
    err = max(float(np.max(np.abs(c[m:, n:] - ap.conj()), initial=0.0)),
              float(np.max(np.abs(c[m:, :n] + aq.conj()), initial=0.0)))
    if err > tol * scale:
        raise AdjointStructureError(
            f"block structure violated: deviation {err:.3e} "
            f"exceeds {tol:.1e} * {scale:.3e}")
    return QMatrix.from_complex_pair(ap, aq)


def column_quaternions(c: np.ndarray) -> QMatrix:
    """Map 2M-row complex columns to quaternion columns.

    Each column [top; bot] becomes the quaternion column top - conj(bot)*j;
    this inverts the embedding of a quaternion column vector.
    """
    c = np.asarray(c, dtype=np.complex128)
    m = c.shape[0] // 2
    return QMatrix.from_complex_pair(c[:m, :], -c[m:, :].conj())
