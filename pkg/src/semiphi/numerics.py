"""Tolerance-aware kernels for dense complex linear algebra.

Every positivity, ordering, span, and least-squares decision in the toolkit
funnels through the operations here, so the whole package shares one
tolerance convention: a comparison at scale ``s`` uses the mixed threshold
``abs_tol + rel_tol * s``.

Positivity is decided by the smallest eigenvalue of the symmetrized matrix
(not a Cholesky test) so the margin is reportable and a witness eigenvector
is available to callers that need to build refutation certificates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "ShapeError",
    "HermiticityError",
    "ToleranceProfile",
    "DEFAULT_TOL",
    "PsdReport",
    "as_matrix",
    "dagger",
    "operator_norm",
    "is_psd",
    "loewner_leq",
    "column_span_onb",
    "least_squares_operator",
    "nullspace_onb",
]

MatrixLike = Union[np.ndarray, Sequence[Sequence[complex]]]


class ShapeError(ValueError):
    """Input matrices have incompatible or invalid shapes."""


class HermiticityError(ValueError):
    """A matrix required to be hermitian deviates beyond tolerance."""


@dataclass(frozen=True)
class ToleranceProfile:
    """Mixed absolute/relative tolerance threaded through every comparison."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")

    def threshold(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * float(abs(scale))


DEFAULT_TOL = ToleranceProfile()


def as_matrix(m: MatrixLike) -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting NaN/inf entries."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def dagger(m: MatrixLike) -> np.ndarray:
    return np.asarray(m, dtype=complex).conj().T


def operator_norm(m: MatrixLike) -> float:
    arr = np.asarray(m, dtype=complex)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


@dataclass(frozen=True)
class PsdReport:
    """Verdict of a PSD test, with the attained minimum eigenvalue.

    ``witness`` is a unit eigenvector for ``lambda_min`` (empty for 0x0
    input); downstream refutation certificates are built from it.
    """

    ok: bool
    lambda_min: float
    witness: np.ndarray

    def __bool__(self) -> bool:
        return self.ok


def _check_hermitian(m: np.ndarray, tol: ToleranceProfile, what: str = "matrix") -> None:
    scale = float(np.linalg.norm(m)) if m.size else 0.0
    defect = float(np.linalg.norm(m - dagger(m))) if m.size else 0.0
    if defect > tol.threshold(scale):
        raise HermiticityError(
            f"{what} is not hermitian: defect {defect:.3e} exceeds tolerance"
        )


def is_psd(m: MatrixLike, tol: ToleranceProfile = DEFAULT_TOL) -> PsdReport:
    """Decide positive semidefiniteness of a (nearly) hermitian matrix.

    The input must be hermitian within tolerance; it is symmetrized before
    the eigenvalue test.  True iff ``lambda_min >= -(abs_tol + rel_tol*|M|)``.
    """
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"is_psd needs a square matrix, got {arr.shape}")
    if arr.shape[0] == 0:
        return PsdReport(True, 0.0, np.zeros(0, dtype=complex))
    _check_hermitian(arr, tol)
    herm = (arr + dagger(arr)) / 2.0
    eigvals, eigvecs = np.linalg.eigh(herm)
    lam = float(eigvals[0])
    scale = float(np.linalg.norm(arr, 2))
    return PsdReport(lam >= -tol.threshold(scale), lam, eigvecs[:, 0])


def loewner_leq(a: MatrixLike, b: MatrixLike, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """Loewner order: ``a <= b`` iff ``b - a`` is positive semidefinite."""
    am, bm = as_matrix(a), as_matrix(b)
    if am.shape != bm.shape or am.shape[0] != am.shape[1]:
        raise ShapeError(f"loewner_leq needs equal square shapes, got {am.shape}, {bm.shape}")
    _check_hermitian(am, tol, "left operand")
    _check_hermitian(bm, tol, "right operand")
    return bool(is_psd(bm - am, tol))


def _stack_columns(vectors, height: int | None) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return vectors.astype(complex)
    cols = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if not cols:
        if height is None:
            return np.zeros((0, 0), dtype=complex)
        return np.zeros((height, 0), dtype=complex)
    h = cols[0].shape[0]
    if any(c.shape[0] != h for c in cols):
        raise ShapeError("all columns must have the same height")
    return np.column_stack(cols)


def column_span_onb(
    vectors, tol: ToleranceProfile = DEFAULT_TOL, height: int | None = None
) -> np.ndarray:
    """Orthonormal basis for the span of the given columns.

    Accepts a 2-d array (columns are the vectors) or a sequence of 1-d
    vectors.  Rank is cut at singular values above ``abs + rel*sigma_max``.
    Empty input yields the 0-column basis.
    """
    mat = _stack_columns(vectors, height)
    if mat.shape[1] == 0 or mat.shape[0] == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    rank = int(np.count_nonzero(s > tol.threshold(s[0])))
    return u[:, :rank]


def least_squares_operator(
    inputs: MatrixLike, targets: MatrixLike, tol: ToleranceProfile = DEFAULT_TOL
) -> tuple[np.ndarray, float]:
    """Least-squares operator ``S0`` with ``S0 @ inputs ~= targets``.

    Minimizes the Frobenius residual and is supported on the column span of
    ``inputs`` (zero on its orthocomplement).  A nonzero residual signals an
    inconsistent system; it is reported, never raised.
    """
    a = as_matrix(inputs)
    b = as_matrix(targets)
    if a.shape[1] != b.shape[1]:
        raise ShapeError(
            f"column counts must match, got {a.shape[1]} inputs and {b.shape[1]} targets"
        )
    if a.shape[1] == 0 or a.shape[0] == 0:
        s0 = np.zeros((b.shape[0], a.shape[0]), dtype=complex)
        return s0, float(np.linalg.norm(b))
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    cutoff = tol.threshold(s[0]) if s.size else 0.0
    keep = s > cutoff
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    pinv = dagger(vh) @ np.diag(s_inv) @ dagger(u)
    s0 = b @ pinv
    residual = float(np.linalg.norm(s0 @ a - b))
    return s0, residual


def nullspace_onb(m: MatrixLike, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the right nullspace of ``m``."""
    arr = as_matrix(m)
    if arr.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if arr.shape[0] == 0 or not arr.any():
        return np.eye(arr.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(arr)
    cutoff = tol.threshold(s[0]) if s.size else 0.0
    rank = int(np.count_nonzero(s > cutoff))
    return dagger(vh)[:, rank:]
