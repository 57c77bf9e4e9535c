"""Hilbert C*-modules realized as matrix subspaces with the x*y inner product.

A :class:`ConcreteModule` over a :class:`~semiphi.algebra.BlockAlgebra` in
``M_q`` is a span of ``p x q`` matrices, closed under right multiplication
by the algebra, whose pairwise products ``x* y`` land back in the algebra.
The zero module (empty basis) is representable because orthogonal
complements can return it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebra import AlgebraElement, BlockAlgebra, contains, off_block_mass, pinch
from .numerics import (
    DEFAULT_TOL,
    ShapeError,
    ToleranceProfile,
    as_matrix,
    column_span_onb,
    dagger,
    nullspace_onb,
)

__all__ = [
    "MembershipError",
    "ModuleIntegrityError",
    "ConcreteModule",
    "ModuleElement",
    "ModuleValidation",
    "validate_module",
    "inner_product",
    "inner_product_matrix",
    "is_submodule",
    "orthogonal_complement",
    "is_full",
    "direct_sum",
    "BlockEmbedding",
    "embed_module",
    "is_contained_pair",
]


class MembershipError(ValueError):
    """A matrix is not in the span of a module's basis."""


class ModuleIntegrityError(ValueError):
    """An inner product escaped the coefficient algebra."""


@dataclass(eq=False)
class ConcreteModule:
    """Subspace of ``p x q`` matrices acting as a right Hilbert module."""

    algebra: BlockAlgebra
    row_dim: int
    basis: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        q = self.algebra.ambient_dim
        fixed = []
        for b in self.basis:
            mat = as_matrix(b)
            if mat.shape != (self.row_dim, q):
                raise ShapeError(
                    f"basis element must be {self.row_dim}x{q}, got {mat.shape}"
                )
            fixed.append(mat)
        self.basis = tuple(fixed)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def _basis_columns(self) -> np.ndarray:
        q = self.algebra.ambient_dim
        if not self.basis:
            return np.zeros((self.row_dim * q, 0), dtype=complex)
        return np.column_stack([b.reshape(-1) for b in self.basis])

    @cached_property
    def _basis_pinv(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((0, self.row_dim * self.algebra.ambient_dim), dtype=complex)
        return np.linalg.pinv(self._basis_columns)

    def coefficients(self, m, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
        """Coefficients of ``m`` over the basis; raises if ``m`` escapes the span."""
        arr = as_matrix(m)
        if arr.shape != (self.row_dim, self.algebra.ambient_dim):
            raise ShapeError(f"expected shape {(self.row_dim, self.algebra.ambient_dim)}")
        vec = arr.reshape(-1)
        coeffs = self._basis_pinv @ vec
        residual = float(np.linalg.norm(self._basis_columns @ coeffs - vec))
        if residual > tol.threshold(np.linalg.norm(vec)):
            raise MembershipError(f"matrix outside the module span (residual {residual:.3e})")
        return coeffs

    def contains_matrix(self, m, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        try:
            self.coefficients(m, tol)
        except MembershipError:
            return False
        return True

    def element(self, m, tol: ToleranceProfile = DEFAULT_TOL) -> "ModuleElement":
        self.coefficients(m, tol)
        return ModuleElement(self, as_matrix(m))

    def from_coefficients(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != self.dim:
            raise ShapeError(f"expected {self.dim} coefficients")
        q = self.algebra.ambient_dim
        if self.dim == 0:
            return np.zeros((self.row_dim, q), dtype=complex)
        return (self._basis_columns @ coeffs).reshape(self.row_dim, q)


@dataclass(frozen=True)
class ModuleElement:
    parent: ConcreteModule
    value: np.ndarray


@dataclass(frozen=True)
class ModuleValidation:
    ok: bool
    violations: tuple[str, ...]


def inner_product_matrix(x, y) -> np.ndarray:
    """Raw module inner product ``x* y`` of two equally-shaped matrices."""
    xm, ym = as_matrix(x), as_matrix(y)
    if xm.shape != ym.shape:
        raise ShapeError("inner product needs equal shapes")
    return dagger(xm) @ ym


def inner_product(x: ModuleElement, y: ModuleElement, tol: ToleranceProfile = DEFAULT_TOL) -> AlgebraElement:
    """Inner product of two elements of the same module, as an algebra element.

    Raises :class:`ModuleIntegrityError` if the product escapes the algebra.
    """
    if x.parent is not y.parent:
        raise ValueError("elements must share a parent module")
    raw = inner_product_matrix(x.value, y.value)
    algebra = x.parent.algebra
    residual = off_block_mass(algebra, raw)
    if residual > tol.threshold(np.linalg.norm(raw)):
        raise ModuleIntegrityError(
            f"inner product escapes the algebra (off-block mass {residual:.3e})"
        )
    return pinch(algebra, raw)


def validate_module(module: ConcreteModule, tol: ToleranceProfile = DEFAULT_TOL) -> ModuleValidation:
    """Check the module axioms and report every violation found.

    Checks: inner products land in the algebra, the span is closed under the
    right algebra action (tested on matrix units), and the basis is linearly
    independent.
    """
    violations: list[str] = []
    basis = module.basis
    for i, x in enumerate(basis):
        for j, y in enumerate(basis):
            raw = inner_product_matrix(x, y)
            if not contains(module.algebra, raw, tol):
                violations.append(f"inner product of basis ({i},{j}) escapes the algebra")
    units = module.algebra.matrix_units()
    for i, x in enumerate(basis):
        for (r, c), unit in zip(module.algebra.unit_index_pairs(), units):
            if not module.contains_matrix(x @ unit, tol):
                violations.append(
                    f"right action of unit ({r},{c}) on basis {i} leaves the span"
                )
                break
    if module.dim:
        onb = column_span_onb(module._basis_columns, tol)
        if onb.shape[1] != module.dim:
            violations.append(
                f"basis is linearly dependent (rank {onb.shape[1]} of {module.dim})"
            )
    return ModuleValidation(not violations, tuple(violations))


def _same_footprint(f: ConcreteModule, e: ConcreteModule) -> None:
    if f.algebra.blocks != e.algebra.blocks:
        raise ShapeError("modules live over different algebras")
    if f.row_dim != e.row_dim:
        raise ShapeError("modules have different row dimensions")


def is_submodule(f: ConcreteModule, e: ConcreteModule, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """True iff span(f) is contained in span(e) and f is a valid module."""
    _same_footprint(f, e)
    if not validate_module(f, tol).ok:
        return False
    return all(e.contains_matrix(b, tol) for b in f.basis)


def orthogonal_complement(
    f: ConcreteModule, e: ConcreteModule, tol: ToleranceProfile = DEFAULT_TOL
) -> ConcreteModule:
    """The submodule ``{x in e : <x, y> = 0 for all y in f}``.

    Solved as the nullspace of the linear system ``f_j* x = 0`` over the
    coefficients of ``x`` in e's basis.
    """
    if not is_submodule(f, e, tol):
        raise ValueError("f must be a submodule of e")
    if e.dim == 0:
        return ConcreteModule(e.algebra, e.row_dim, ())
    rows = []
    for fj in f.basis:
        fj_dag = dagger(fj)
        block = np.column_stack([(fj_dag @ b).reshape(-1) for b in e.basis])
        rows.append(block)
    if not rows:
        return e
    constraint = np.vstack(rows)
    coeff_onb = nullspace_onb(constraint, tol)
    basis = tuple(e.from_coefficients(coeff_onb[:, k]) for k in range(coeff_onb.shape[1]))
    return ConcreteModule(e.algebra, e.row_dim, basis)


def is_full(e: ConcreteModule, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """True iff the inner products of basis pairs span the whole algebra."""
    if e.dim == 0:
        return False
    products = [
        inner_product_matrix(x, y).reshape(-1) for x in e.basis for y in e.basis
    ]
    onb = column_span_onb(products, tol)
    return onb.shape[1] == e.algebra.dimension


def direct_sum(
    f: ConcreteModule,
    g: ConcreteModule,
    external: bool = False,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> ConcreteModule:
    """Internal (same rows, trivial intersection) or external (stacked rows) sum."""
    if f.algebra.blocks != g.algebra.blocks:
        raise ShapeError("direct sum needs a common algebra")
    q = f.algebra.ambient_dim
    if external:
        p = f.row_dim + g.row_dim
        top = [np.vstack([b, np.zeros((g.row_dim, q))]) for b in f.basis]
        bottom = [np.vstack([np.zeros((f.row_dim, q)), b]) for b in g.basis]
        return ConcreteModule(f.algebra, p, tuple(top) + tuple(bottom))
    if f.row_dim != g.row_dim:
        raise ShapeError("internal direct sum needs equal row dimensions")
    combined = tuple(f.basis) + tuple(g.basis)
    if combined:
        onb = column_span_onb([b.reshape(-1) for b in combined], tol)
        if onb.shape[1] != f.dim + g.dim:
            raise ValueError("internal direct sum requires a trivial span intersection")
    return ConcreteModule(f.algebra, f.row_dim, combined)


@dataclass(frozen=True)
class BlockEmbedding:
    """Block-aligned embedding of one block algebra into another's ambient.

    ``block_offsets[i]`` is the starting ambient index (in the target) of the
    i-th source block; each source block must land inside a single target
    block.  The identity embedding has matching blocks and zero-shifted
    offsets.
    """

    source: BlockAlgebra
    target: BlockAlgebra
    block_offsets: tuple[int, ...]

    def __post_init__(self) -> None:
        offsets = tuple(int(o) for o in self.block_offsets)
        object.__setattr__(self, "block_offsets", offsets)
        if len(offsets) != len(self.source.blocks):
            raise ValueError("need one offset per source block")
        target_slices = self.target.block_slices()
        covered: set[int] = set()
        for n, off in zip(self.source.blocks, offsets):
            span = range(off, off + n)
            if not any(sl.start <= off and off + n <= sl.stop for sl in target_slices):
                raise ValueError(
                    f"source block of size {n} at offset {off} crosses target blocks"
                )
            if covered & set(span):
                raise ValueError("source blocks overlap in the target")
            covered |= set(span)

    @classmethod
    def identity(cls, algebra: BlockAlgebra) -> "BlockEmbedding":
        offsets = tuple(sl.start for sl in algebra.block_slices())
        return cls(algebra, algebra, offsets)

    def column_map(self) -> np.ndarray:
        """Selection matrix J (q_target x q_source) with J[iota(c), c] = 1."""
        j = np.zeros((self.target.ambient_dim, self.source.ambient_dim))
        col = 0
        for sl, off in zip(self.source.block_slices(), self.block_offsets):
            for k in range(sl.stop - sl.start):
                j[off + k, sl.start + k] = 1.0
            col += sl.stop - sl.start
        return j

    def embed(self, m) -> np.ndarray:
        """Push a source-ambient matrix forward into the target ambient."""
        j = self.column_map()
        return j @ as_matrix(m) @ j.T

    def compress(self, m) -> np.ndarray:
        """Pull a target-ambient matrix back onto the embedded coordinates."""
        j = self.column_map()
        return j.T @ as_matrix(m) @ j


def embed_module(e: ConcreteModule, embedding: BlockEmbedding) -> ConcreteModule:
    """View a module over the embedding's source as one over its target."""
    if e.algebra.blocks != embedding.source.blocks:
        raise ShapeError("module algebra does not match the embedding source")
    j = embedding.column_map()
    basis = tuple(b @ j.T for b in e.basis)
    return ConcreteModule(embedding.target, e.row_dim, basis)


def is_contained_pair(
    e: ConcreteModule,
    f: ConcreteModule,
    embedding: BlockEmbedding,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> bool:
    """Containment of module/algebra pairs under a declared block embedding.

    True iff the embedded span of ``e`` sits inside ``f`` and the inner
    products of ``e`` agree with those computed in ``f`` after embedding.
    """
    if e.algebra.blocks != embedding.source.blocks or f.algebra.blocks != embedding.target.blocks:
        raise ShapeError("embedding endpoints do not match the modules")
    if e.row_dim != f.row_dim:
        raise ShapeError("row dimensions differ; no containment declared for that")
    e_in_f = embed_module(e, embedding)
    if not all(f.contains_matrix(b, tol) for b in e_in_f.basis):
        return False
    for x, xh in zip(e.basis, e_in_f.basis):
        for y, yh in zip(e.basis, e_in_f.basis):
            small = embedding.embed(inner_product_matrix(x, y))
            big = inner_product_matrix(xh, yh)
            if np.linalg.norm(small - big) > tol.threshold(np.linalg.norm(small)):
                return False
    return True
