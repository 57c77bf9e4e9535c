"""Completely positive maps on block algebras.

A :class:`CPMap` stores one ``m x m`` value per matrix unit of its domain
algebra (block-major enumeration, see
:meth:`~semiphi.algebra.BlockAlgebra.unit_index_pairs`).  Maps on proper
block algebras are extended to all of ``M_q`` by precomposing with the
pinching conditional expectation before taking Choi, Kraus, or Stinespring
views; restricting back to the algebra recovers the original map, and the
pinch is CP and unital so positivity certificates transfer both ways.

The dilation used downstream is ``a -> a (x) I_r`` with ``r`` the Choi rank;
it is minimal whenever the domain is a full matrix algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import BlockAlgebra, AlgebraElement, contains, pinch
from .numerics import (
    DEFAULT_TOL,
    HermiticityError,
    PsdReport,
    ShapeError,
    ToleranceProfile,
    as_matrix,
    dagger,
    is_psd,
)

__all__ = [
    "NotCompletelyPositiveError",
    "CPMap",
    "StinespringDilation",
    "from_kraus",
    "identity_cp_map",
    "trace_cp_map",
    "transpose_map",
    "pinch_cp_map",
    "compose",
    "choi",
    "is_completely_positive",
    "kraus",
    "stinespring",
]


class NotCompletelyPositiveError(ValueError):
    """Kraus/Stinespring views were requested for a non-CP map."""


@dataclass(eq=False)
class CPMap:
    """Linear map from a block algebra into the ``m x m`` matrices."""

    domain: BlockAlgebra
    target_dim: int
    values: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        m = self.target_dim
        if m < 0:
            raise ValueError("target dimension must be nonnegative")
        if len(self.values) != self.domain.dimension:
            raise ShapeError(
                f"need {self.domain.dimension} values (one per matrix unit), "
                f"got {len(self.values)}"
            )
        fixed = []
        for v in self.values:
            mat = as_matrix(v)
            if mat.shape != (m, m):
                raise ShapeError(f"values must be {m}x{m}, got {mat.shape}")
            fixed.append(mat)
        self.values = tuple(fixed)

    @cached_property
    def _unit_index(self) -> dict[tuple[int, int], int]:
        return {pair: t for t, pair in enumerate(self.domain.unit_index_pairs())}

    @cached_property
    def _ambient_tensor(self) -> np.ndarray:
        """(m, m, q, q) tensor of the pinch-extended map on the matrix units."""
        q = self.domain.ambient_dim
        w = np.zeros((self.target_dim, self.target_dim, q, q), dtype=complex)
        for (i, j), t in self._unit_index.items():
            w[:, :, i, j] = self.values[t]
        return w

    def check_hermiticity(self, tol: ToleranceProfile = DEFAULT_TOL) -> None:
        """Verify the value on ``E_ji`` is the adjoint of the value on ``E_ij``."""
        for (i, j), t in self._unit_index.items():
            s = self._unit_index[(j, i)]
            a, b = self.values[t], dagger(self.values[s])
            if np.linalg.norm(a - b) > tol.threshold(max(np.linalg.norm(a), np.linalg.norm(b))):
                raise HermiticityError(
                    f"values on units ({i},{j}) and ({j},{i}) are not adjoint-consistent"
                )

    def apply_ambient(self, m) -> np.ndarray:
        """Apply the pinch-extended map to any ``q x q`` matrix."""
        arr = as_matrix(m)
        q = self.domain.ambient_dim
        if arr.shape != (q, q):
            raise ShapeError(f"expected a {q}x{q} matrix")
        return np.einsum("abij,ij->ab", self._ambient_tensor, arr)

    def apply(self, a, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
        """Apply to an algebra element; rejects matrices outside the algebra."""
        arr = a.value if isinstance(a, AlgebraElement) else as_matrix(a)
        if not contains(self.domain, arr, tol):
            raise ValueError("matrix is not in the domain algebra")
        return self.apply_ambient(arr)

    def apply_n(self, n: int, block_matrix) -> np.ndarray:
        """Amplification: apply the (pinch-extended) map entrywise to an
        ``n x n`` operator matrix of ``q x q`` blocks."""
        q, m = self.domain.ambient_dim, self.target_dim
        arr = as_matrix(block_matrix)
        if arr.shape != (n * q, n * q):
            raise ShapeError(f"expected a {n * q}x{n * q} matrix")
        blocks = arr.reshape(n, q, n, q).transpose(0, 2, 1, 3)
        out = np.einsum("abij,uvij->uavb", self._ambient_tensor, blocks)
        return out.reshape(n * m, n * m)

    def is_unital(self, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        img = self.apply_ambient(self.domain.identity())
        eye = np.eye(self.target_dim, dtype=complex)
        return float(np.linalg.norm(img - eye)) <= tol.threshold(1.0)


def from_kraus(algebra: BlockAlgebra, kraus_ops, target_dim: int | None = None) -> CPMap:
    """Build the CP map ``a -> sum_t K_t a K_t*`` from ``m x q`` Kraus operators."""
    q = algebra.ambient_dim
    ops = [as_matrix(k) for k in kraus_ops]
    if ops:
        m = ops[0].shape[0]
        if any(k.shape != (m, q) for k in ops):
            raise ShapeError(f"all Kraus operators must be m x {q} with a common m")
    else:
        if target_dim is None:
            raise ValueError("target_dim is required for an empty Kraus set")
        m = target_dim
    values = []
    for unit in algebra.matrix_units():
        acc = np.zeros((m, m), dtype=complex)
        for k in ops:
            acc += k @ unit @ dagger(k)
        values.append(acc)
    return CPMap(algebra, m, tuple(values))


def identity_cp_map(algebra: BlockAlgebra) -> CPMap:
    """The inclusion of the algebra into ``M_q``."""
    q = algebra.ambient_dim
    return CPMap(algebra, q, tuple(algebra.matrix_units()))


def trace_cp_map(algebra: BlockAlgebra) -> CPMap:
    values = tuple(np.array([[np.trace(u)]], dtype=complex) for u in algebra.matrix_units())
    return CPMap(algebra, 1, values)


def transpose_map(algebra: BlockAlgebra) -> CPMap:
    """The transpose on the ambient, restricted to the algebra.  Positive but
    (for any block of size >= 2) not completely positive; used as a standard
    rejection fixture."""
    q = algebra.ambient_dim
    values = tuple(u.T.copy() for u in algebra.matrix_units())
    return CPMap(algebra, q, values)


def pinch_cp_map(sub: BlockAlgebra) -> CPMap:
    """Pinching onto ``sub`` viewed as a CP map from ``sub`` into ``M_q``.

    Its pinch extension is the conditional expectation of ``M_q`` onto the
    block algebra.
    """
    q = sub.ambient_dim
    return CPMap(sub, q, tuple(sub.matrix_units()))


def compose(outer: CPMap, inner: CPMap) -> CPMap:
    """Composite ``outer~ o inner`` (outer extended over its ambient by pinch)."""
    if outer.domain.ambient_dim != inner.target_dim:
        raise ShapeError(
            "outer domain ambient dimension must equal inner target dimension"
        )
    values = tuple(outer.apply_ambient(v) for v in inner.values)
    return CPMap(inner.domain, outer.target_dim, values)


def choi(phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Choi matrix ``sum_ij E_ij (x) phi~(E_ij)`` of the pinch-extended map."""
    phi.check_hermiticity(tol)
    q, m = phi.domain.ambient_dim, phi.target_dim
    j = np.zeros((q * m, q * m), dtype=complex)
    for (r, c), t in phi._unit_index.items():
        j[r * m : (r + 1) * m, c * m : (c + 1) * m] = phi.values[t]
    return j


def is_completely_positive(phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL) -> PsdReport:
    """CP iff the Choi matrix is PSD; the report carries the margin."""
    return is_psd(choi(phi, tol), tol)


def kraus(phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL) -> list[np.ndarray]:
    """Kraus operators of the pinch-extended map, from Choi eigenvectors.

    Eigenvalue cutoff is relative to the largest eigenvalue; the returned
    operators are canonical only up to unitary mixing, so compare Kraus sets
    via the reconstruction identity, never entrywise.
    """
    report = is_completely_positive(phi, tol)
    if not report.ok:
        raise NotCompletelyPositiveError(
            f"map is not completely positive (Choi lambda_min = {report.lambda_min:.3e})"
        )
    j = choi(phi, tol)
    q, m = phi.domain.ambient_dim, phi.target_dim
    eigvals, eigvecs = np.linalg.eigh((j + dagger(j)) / 2.0)
    if eigvals.size == 0:
        return []
    lam_max = float(eigvals[-1])
    if lam_max <= 0.0:
        return []
    cutoff = tol.threshold(lam_max)
    ops = []
    for lam, vec in zip(eigvals[::-1], eigvecs.T[::-1]):
        if lam <= cutoff:
            break
        ops.append(np.sqrt(lam) * vec.reshape(q, m).T)
    return ops


@dataclass(eq=False)
class StinespringDilation:
    """Dilation ``phi(a) = V* (a (x) I_r) V`` on ``C^q (x) C^r``."""

    algebra: BlockAlgebra
    target_dim: int
    kraus: tuple[np.ndarray, ...]
    rank: int
    V: np.ndarray

    def represent(self, m) -> np.ndarray:
        """The representation ``a -> a (x) I_r`` applied to an ambient matrix."""
        return np.kron(as_matrix(m), np.eye(self.rank, dtype=complex))

    def reconstruction_defect(self, phi: CPMap) -> float:
        """Max over matrix units of ``|phi(u) - V*(u (x) I_r)V|``."""
        worst = 0.0
        for unit, value in zip(phi.domain.matrix_units(), phi.values):
            recon = dagger(self.V) @ self.represent(unit) @ self.V
            worst = max(worst, float(np.linalg.norm(recon - value, 2)))
        return worst


def stinespring(phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL) -> StinespringDilation:
    """Assemble the dilation from the Kraus operators.

    ``V h = sum_t (K_t* h) (x) e_t`` with the ``C^q (x) C^r`` ordering, so
    ``V[(i*r + t), a] = conj(K_t[a, i])``.
    """
    ops = kraus(phi, tol)
    q, m = phi.domain.ambient_dim, phi.target_dim
    r = len(ops)
    if r == 0:
        v = np.zeros((0, m), dtype=complex)
        return StinespringDilation(phi.domain, m, (), 0, v)
    stacked = np.stack(ops)  # (r, m, q)
    v = stacked.conj().transpose(2, 0, 1).reshape(q * r, m)
    return StinespringDilation(phi.domain, m, tuple(ops), r, v)
