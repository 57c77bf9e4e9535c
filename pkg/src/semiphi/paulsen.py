"""Operator systems built from a module and its algebra, block maps between
them, corner-preservation analysis, and the injectivity demonstration.

The system of a module ``E`` (subspace of ``p x q`` matrices over an algebra
``A``) lives inside ``M_(p+q)`` and is spanned by the scalar block, the
module corner, its adjoint corner, and the diagonal algebra block.  CP-ness
of a corner-structured map is decided through the Gram criterion for its
module part, with randomized PSD sampling as a falsification layer; deciding
CP for arbitrary maps defined only on an operator system (an SDP feasibility
problem) is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import BlockAlgebra, contains, off_block_mass, pinch
from .cpmaps import CPMap
from .extension import (
    ModuleMap,
    PreconditionError,
    SemiPhiReport,
    extend_semi_phi,
    is_completely_semi_phi,
)
from .modules import (
    BlockEmbedding,
    ConcreteModule,
    embed_module,
    is_contained_pair,
    is_submodule,
)
from .numerics import (
    DEFAULT_TOL,
    ShapeError,
    ToleranceProfile,
    as_matrix,
    dagger,
    is_psd,
)

__all__ = [
    "PaulsenSystem",
    "SystemMap",
    "SystemDecompositionError",
    "CornerReport",
    "build_system",
    "decompose_system_element",
    "block_map",
    "is_cp_system_map",
    "is_corner_preserving",
    "example_3_4_map",
    "injectivity_demo",
]


class SystemDecompositionError(ValueError):
    """A matrix does not lie in the operator system."""


@dataclass(eq=False)
class PaulsenSystem:
    """The smallest operator system containing a module and its algebra."""

    module: ConcreteModule
    algebra: BlockAlgebra
    basis: tuple[np.ndarray, ...]
    corner_layout: tuple[int, int]

    @property
    def ambient_dim(self) -> int:
        return sum(self.corner_layout)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def identity(self) -> np.ndarray:
        return np.eye(self.ambient_dim, dtype=complex)


def build_system(e: ConcreteModule) -> PaulsenSystem:
    """Assemble the system basis: scalar block, module corner, adjoint corner,
    algebra diagonal.  Dimension is ``1 + 2*dim(E) + dim(A)``."""
    p, q = e.row_dim, e.algebra.ambient_dim
    n = p + q
    basis: list[np.ndarray] = []
    scalar = np.zeros((n, n), dtype=complex)
    scalar[:p, :p] = np.eye(p)
    basis.append(scalar)
    for b in e.basis:
        corner = np.zeros((n, n), dtype=complex)
        corner[:p, p:] = b
        basis.append(corner)
    for b in e.basis:
        adj = np.zeros((n, n), dtype=complex)
        adj[p:, :p] = dagger(b)
        basis.append(adj)
    for unit in e.algebra.matrix_units():
        diag = np.zeros((n, n), dtype=complex)
        diag[p:, p:] = unit
        basis.append(diag)
    return PaulsenSystem(e, e.algebra, tuple(basis), (p, q))


def decompose_system_element(
    system: PaulsenSystem, x, tol: ToleranceProfile = DEFAULT_TOL
) -> tuple[complex, np.ndarray, np.ndarray, np.ndarray]:
    """Split a system element into (scalar, corner, adjoint-corner, diagonal).

    Rejects matrices whose top-left block is not a scalar multiple of the
    identity, whose corners escape the module span, or whose diagonal block
    escapes the algebra.
    """
    arr = as_matrix(x)
    p, q = system.corner_layout
    if arr.shape != (p + q, p + q):
        raise ShapeError(f"expected a {p + q}x{p + q} matrix")
    scale = max(float(np.linalg.norm(arr)), 1.0)
    top = arr[:p, :p]
    lam = complex(np.trace(top) / p) if p else 0.0
    if np.linalg.norm(top - lam * np.eye(p)) > tol.threshold(scale):
        raise SystemDecompositionError("top-left block is not a scalar multiple of I")
    corner = arr[:p, p:]
    adj = dagger(arr[p:, :p])
    for part, name in ((corner, "corner"), (adj, "adjoint corner")):
        if not system.module.contains_matrix(part, ToleranceProfile(tol.abs_tol + tol.rel_tol * scale, tol.rel_tol)):
            raise SystemDecompositionError(f"{name} escapes the module span")
    diag = arr[p:, p:]
    if off_block_mass(system.algebra, diag) > tol.threshold(scale):
        raise SystemDecompositionError("diagonal block escapes the algebra")
    return lam, corner, adj, pinch(system.algebra, diag).value


@dataclass(eq=False)
class SystemMap:
    """Corner-structured map between two systems, acting as
    ``[[lam, x], [y*, a]] -> [[lam, Phi(x)], [Phi(y)*, phi(a)]]``."""

    domain: PaulsenSystem
    codomain: PaulsenSystem
    module_map: ModuleMap
    cp_map: CPMap
    unital: bool

    def apply(self, x, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
        lam, corner, adj, diag = decompose_system_element(self.domain, x, tol)
        p_out, q_out = self.codomain.corner_layout
        out = np.zeros((p_out + q_out, p_out + q_out), dtype=complex)
        out[:p_out, :p_out] = lam * np.eye(p_out)
        out[:p_out, p_out:] = self.module_map.apply(corner, tol)
        out[p_out:, :p_out] = dagger(self.module_map.apply(adj, tol))
        out[p_out:, p_out:] = self.cp_map.apply_ambient(diag)
        return out

    def apply_n(self, n: int, x, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
        """Amplification: apply entrywise to an n x n matrix of system blocks."""
        arr = as_matrix(x)
        din = self.domain.ambient_dim
        dout = self.codomain.ambient_dim
        if arr.shape != (n * din, n * din):
            raise ShapeError(f"expected a {n * din}x{n * din} matrix")
        out = np.zeros((n * dout, n * dout), dtype=complex)
        for u in range(n):
            for v in range(n):
                block = arr[u * din : (u + 1) * din, v * din : (v + 1) * din]
                out[u * dout : (u + 1) * dout, v * dout : (v + 1) * dout] = self.apply(
                    block, tol
                )
        return out

    def compose(self, inner: "SystemMap", tol: ToleranceProfile = DEFAULT_TOL) -> "SystemMap":
        """Composite of two corner-structured maps, again corner-structured."""
        if inner.codomain.corner_layout != self.domain.corner_layout:
            raise ShapeError("layouts do not compose")
        values = tuple(
            self.module_map.apply(v, tol) for v in inner.module_map.values
        )
        composed_module = ModuleMap(
            inner.module_map.domain,
            self.module_map.h1_dim,
            self.module_map.h2_dim,
            values,
        )
        cp_values = tuple(self.cp_map.apply_ambient(v) for v in inner.cp_map.values)
        composed_cp = CPMap(inner.cp_map.domain, self.cp_map.target_dim, cp_values)
        return SystemMap(
            inner.domain,
            self.codomain,
            composed_module,
            composed_cp,
            self.unital and inner.unital,
        )


def block_map(
    phi_map: ModuleMap,
    phi: CPMap,
    codomain_module: ConcreteModule,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> SystemMap:
    """Corner-wise map assembled from a module map and a CP map.

    The codomain system is built from the declared range module and the CP
    map's range algebra; values escaping either raise.
    """
    if phi_map.domain.algebra.blocks != phi.domain.blocks:
        raise ShapeError("module map and CP map live over different algebras")
    p_out = codomain_module.row_dim
    q_out = codomain_module.algebra.ambient_dim
    if (phi_map.h2_dim, phi_map.h1_dim) != (p_out, q_out):
        raise ShapeError(
            "module map values must be elements of the declared codomain module"
        )
    if phi.target_dim != q_out:
        raise ShapeError("CP target dimension must match the codomain algebra ambient")
    for v in phi_map.values:
        if not codomain_module.contains_matrix(v, tol):
            raise ValueError("module-map range escapes the declared codomain module")
    for v in phi.values:
        if not contains(codomain_module.algebra, v, tol):
            raise ValueError("CP-map range escapes the declared codomain algebra")
    unital = phi.is_unital(tol)
    return SystemMap(
        build_system(phi_map.domain),
        build_system(codomain_module),
        phi_map,
        phi,
        unital,
    )


def random_psd_system_element(
    system: PaulsenSystem, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Random PSD element of the n-th matrix level of the system, shifted to
    have smallest eigenvalue exactly zero."""
    d = system.ambient_dim
    x = np.zeros((n * d, n * d), dtype=complex)
    for b in system.basis:
        coeff = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        x += np.kron(coeff, b)
    herm = (x + dagger(x)) / 2.0
    lam_min = float(np.linalg.eigvalsh(herm)[0])
    return herm - lam_min * np.eye(n * d)


def is_cp_system_map(
    sm: SystemMap,
    tol: ToleranceProfile = DEFAULT_TOL,
    rng: np.random.Generator | None = None,
    samples: int = 20,
    max_level: int = 3,
) -> SemiPhiReport:
    """CP verdict for a corner-structured map, via the equivalence with the
    Gram criterion for its module part.

    On a positive verdict, randomly sampled PSD system elements at levels up
    to ``max_level`` are pushed through the amplified map and asserted PSD
    (a falsification layer for the equivalence, not the decision procedure).
    """
    report = is_completely_semi_phi(sm.module_map, sm.cp_map, tol)
    if report.ok and rng is not None:
        scale_tol = ToleranceProfile(max(tol.abs_tol, 1e-8), max(tol.rel_tol, 1e-8))
        for level in range(1, max_level + 1):
            for _ in range(samples):
                sample = random_psd_system_element(sm.domain, level, rng)
                image = sm.apply_n(level, sample, tol)
                psd = is_psd(image, scale_tol)
                if not psd.ok:
                    raise RuntimeError(
                        "positive verdict refuted by PSD sampling "
                        f"(level {level}, lambda_min {psd.lambda_min:.3e})"
                    )
    return report


@dataclass(frozen=True)
class CornerReport:
    """Corner-preservation verdict with the offending entries.

    ``violations`` lists ``(part, (row, col), magnitude)`` for every image
    entry escaping its structural part; ``corner_image_entries`` records the
    support of the corner units' images as evidence of where the corner went.
    """

    ok: bool
    violations: tuple[tuple[str, tuple[int, int], float], ...]
    corner_image_entries: tuple[tuple[int, int], ...]

    def __bool__(self) -> bool:
        return self.ok


def _support(m: np.ndarray, cutoff: float) -> list[tuple[int, int]]:
    rows, cols = np.nonzero(np.abs(m) > cutoff)
    return list(zip(rows.tolist(), cols.tolist()))


def is_corner_preserving(
    unit_images,
    layout_in: tuple[int, int],
    layout_out: tuple[int, int],
    tol: ToleranceProfile = DEFAULT_TOL,
) -> CornerReport:
    """Check that each structural part maps into its counterpart.

    ``unit_images`` gives the image of every matrix unit of the domain
    ambient, row-major.  The structural generators are the scalar block sum,
    the corner units, the adjoint-corner units, and the diagonal units; the
    scalar generator must additionally map to a multiple of the codomain
    scalar.
    """
    p_in, q_in = layout_in
    p_out, q_out = layout_out
    d_in, d_out = p_in + q_in, p_out + q_out
    images = [as_matrix(m) for m in unit_images]
    if len(images) != d_in * d_in:
        raise ShapeError(f"need {d_in * d_in} unit images")
    if any(m.shape != (d_out, d_out) for m in images):
        raise ShapeError(f"unit images must be {d_out}x{d_out}")

    def image_of(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((d_out, d_out), dtype=complex)
        for i in range(d_in):
            for j in range(d_in):
                if mat[i, j] != 0:
                    out += mat[i, j] * images[i * d_in + j]
        return out

    scale = max(max(float(np.linalg.norm(m)) for m in images), 1.0)
    cutoff = tol.threshold(scale)
    violations: list[tuple[str, tuple[int, int], float]] = []

    def record_outside(name: str, img: np.ndarray, mask: np.ndarray) -> None:
        escaped = np.where(mask, 0.0, img)
        for r, c in _support(escaped, cutoff):
            violations.append((name, (r, c), float(abs(img[r, c]))))

    scalar_in = np.zeros((d_in, d_in), dtype=complex)
    scalar_in[:p_in, :p_in] = np.eye(p_in)
    scalar_img = image_of(scalar_in)
    scalar_mask = np.zeros((d_out, d_out), dtype=bool)
    scalar_mask[:p_out, :p_out] = True
    record_outside("scalar", scalar_img, scalar_mask)
    top = scalar_img[:p_out, :p_out]
    lam = complex(np.trace(top) / p_out) if p_out else 0.0
    pattern_defect = top - lam * np.eye(p_out)
    for r, c in _support(pattern_defect, cutoff):
        violations.append(("scalar", (r, c), float(abs(pattern_defect[r, c]))))

    corner_mask = np.zeros((d_out, d_out), dtype=bool)
    corner_mask[:p_out, p_out:] = True
    adj_mask = corner_mask.T.copy()
    diag_mask = np.zeros((d_out, d_out), dtype=bool)
    diag_mask[p_out:, p_out:] = True

    corner_entries: list[tuple[int, int]] = []
    for i in range(p_in):
        for j in range(q_in):
            unit = np.zeros((d_in, d_in), dtype=complex)
            unit[i, p_in + j] = 1.0
            img = image_of(unit)
            corner_entries.extend(_support(img, cutoff))
            record_outside("corner", img, corner_mask)
            record_outside("adjoint_corner", image_of(dagger(unit)), adj_mask)
    for i in range(q_in):
        for j in range(q_in):
            unit = np.zeros((d_in, d_in), dtype=complex)
            unit[p_in + i, p_in + j] = 1.0
            record_outside("diagonal", image_of(unit), diag_mask)

    return CornerReport(not violations, tuple(violations), tuple(dict.fromkeys(corner_entries)))


@dataclass(eq=False)
class Example34Map:
    """The displayed shuffle assignment from 2x2 blocks into 4x4 blocks:
    unital, completely positive, and not corner-preserving."""

    h_dim: int
    unit_images: tuple[np.ndarray, ...]

    def apply(self, m) -> np.ndarray:
        arr = as_matrix(m)
        h = self.h_dim
        if arr.shape != (2 * h, 2 * h):
            raise ShapeError(f"expected a {2 * h}x{2 * h} matrix")
        t = [
            [arr[:h, :h], arr[:h, h:]],
            [arr[h:, :h], arr[h:, h:]],
        ]
        out = np.zeros((4 * h, 4 * h), dtype=complex)
        blk = lambda r, c: (slice(r * h, (r + 1) * h), slice(c * h, (c + 1) * h))
        out[blk(0, 0)] = t[0][0]
        out[blk(0, 3)] = t[0][1]
        out[blk(1, 1)] = t[1][1]
        out[blk(2, 2)] = t[0][0]
        out[blk(3, 0)] = t[1][0]
        out[blk(3, 3)] = t[1][1]
        return out

    def as_cp_map(self) -> CPMap:
        """View over the full matrix algebra, for Choi-based certification."""
        return CPMap(BlockAlgebra((2 * self.h_dim,)), 4 * self.h_dim, self.unit_images)


def example_3_4_map(h_dim: int) -> Example34Map:
    if h_dim < 1:
        raise ValueError("h_dim must be >= 1")
    d = 2 * h_dim
    images = []
    probe = Example34Map(h_dim, ())
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            images.append(probe.apply(unit))
    return Example34Map(h_dim, tuple(images))


def injectivity_demo(
    g: ConcreteModule,
    f: ConcreteModule,
    embedding: BlockEmbedding,
    phi_map: ModuleMap,
    phi: CPMap,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> tuple[ModuleMap, CPMap]:
    """Extend a morphism along a containment, demonstrating injectivity of
    column-module targets.

    The CP part is extended by pulling back through the embedding's
    compression and pinch; the module part is extended by the engine.  The
    returned pair restricts to the input morphism on the embedded submodule.
    """
    if not is_contained_pair(g, f, embedding, tol):
        raise PreconditionError("the declared containment does not hold")
    if phi_map.domain is not g and phi_map.domain.basis != g.basis:
        raise PreconditionError("the module map must be defined on the contained module")
    semi = is_completely_semi_phi(phi_map, phi, tol)
    if not semi.ok:
        raise PreconditionError("the input pair is not a morphism (semi criterion fails)")

    big_algebra = f.algebra
    psi_values = tuple(
        phi.apply_ambient(
            pinch(phi.domain, embedding.compress(u)).value
        )
        for u in big_algebra.matrix_units()
    )
    psi = CPMap(big_algebra, phi.target_dim, psi_values)

    g_in_f = embed_module(g, embedding)
    if not is_submodule(g_in_f, f, tol):
        raise PreconditionError("embedded module is not a submodule of the container")
    lifted = ModuleMap(g_in_f, phi_map.h1_dim, phi_map.h2_dim, phi_map.values)
    result = extend_semi_phi(lifted, f, psi, tol)
    restriction = 0.0
    for b, orig in zip(g_in_f.basis, phi_map.values):
        restriction = max(
            restriction, float(np.linalg.norm(result.phi_prime.apply(b, tol) - orig))
        )
    if restriction > 1e3 * tol.threshold(1.0):
        raise RuntimeError("extension failed to restrict to the input morphism")
    return result.phi_prime, psi
