"""Module maps, the Gram criterion for completely semi-compatible maps, the
KSGNS-style universal map, and the extension engine with its corollaries.

The target Hilbert space of the universal map is realized concretely as a
subspace of ``C^p (x) C^r`` (columns of an orthonormal basis ``Q``) instead
of an abstract GNS quotient, so every intermediate operator is an explicit
matrix.  The engine's output is certified from scratch: restriction,
contraction bound, and the semi-compatibility of the extension are all
re-verified on the result rather than inherited from the construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cpmaps import CPMap, StinespringDilation, stinespring
from .modules import (
    ConcreteModule,
    inner_product_matrix,
    is_submodule,
    orthogonal_complement,
)
from .numerics import (
    DEFAULT_TOL,
    ShapeError,
    ToleranceProfile,
    as_matrix,
    column_span_onb,
    dagger,
    is_psd,
    least_squares_operator,
    operator_norm,
)

__all__ = [
    "PreconditionError",
    "ExtensionInputError",
    "ModuleMap",
    "GramPair",
    "PhiMapReport",
    "SemiPhiReport",
    "SemiPhiWitness",
    "ObstructionReport",
    "KsgnsResult",
    "ExtensionResult",
    "zero_module_map",
    "is_phi_map",
    "is_nondegenerate",
    "ksgns",
    "gram_pair",
    "is_completely_semi_phi",
    "semiphi_witness",
    "phi_extension_obstruction",
    "extend_semi_phi",
    "compare_extensions",
    "canonical_compacts_extension",
]


class PreconditionError(ValueError):
    """A stated precondition could not be verified; the verdict is an error,
    not False."""


class ExtensionInputError(ValueError):
    """The extension engine received inputs violating its hypotheses."""


@dataclass(eq=False)
class ModuleMap:
    """Linear map from a module into ``B(C^m, C^k)``, given on the basis."""

    domain: ConcreteModule
    h1_dim: int
    h2_dim: int
    values: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.domain.dim:
            raise ShapeError(
                f"need {self.domain.dim} values (one per basis element), got {len(self.values)}"
            )
        fixed = []
        for v in self.values:
            mat = as_matrix(v)
            if mat.shape != (self.h2_dim, self.h1_dim):
                raise ShapeError(f"values must be {self.h2_dim}x{self.h1_dim}, got {mat.shape}")
            fixed.append(mat)
        self.values = tuple(fixed)

    @cached_property
    def _value_stack(self) -> np.ndarray:
        if not self.values:
            return np.zeros((0, self.h2_dim, self.h1_dim), dtype=complex)
        return np.stack(self.values)

    def apply(self, x, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
        coeffs = self.domain.coefficients(x, tol)
        if self.domain.dim == 0:
            return np.zeros((self.h2_dim, self.h1_dim), dtype=complex)
        return np.einsum("i,ikm->km", coeffs, self._value_stack)

    def stacked_columns(self) -> np.ndarray:
        """The ``k x (dim * m)`` matrix of columns ``Phi(x_i) e_l`` (l fast)."""
        if not self.values:
            return np.zeros((self.h2_dim, 0), dtype=complex)
        return np.hstack(self.values)


def zero_module_map(domain: ConcreteModule, h1_dim: int, h2_dim: int) -> ModuleMap:
    values = tuple(np.zeros((h2_dim, h1_dim), dtype=complex) for _ in range(domain.dim))
    return ModuleMap(domain, h1_dim, h2_dim, values)


@dataclass(frozen=True)
class PhiMapReport:
    ok: bool
    worst_defect: float
    worst_pair: tuple[int, int] | None

    def __bool__(self) -> bool:
        return self.ok


def _check_compatible(phi_map: ModuleMap, phi: CPMap) -> None:
    if phi_map.domain.algebra.blocks != phi.domain.blocks:
        raise ShapeError("module map and CP map live over different algebras")
    if phi_map.h1_dim != phi.target_dim:
        raise ShapeError(
            f"module map h1_dim {phi_map.h1_dim} does not match CP target {phi.target_dim}"
        )


def is_phi_map(phi_map: ModuleMap, phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL) -> PhiMapReport:
    """Check ``Phi(x)* Phi(y) = phi(<x, y>)`` on all basis pairs.

    Sesquilinearity extends the basis check to arbitrary elements.
    """
    _check_compatible(phi_map, phi)
    worst, worst_pair = 0.0, None
    ok = True
    basis = phi_map.domain.basis
    for i in range(len(basis)):
        for j in range(len(basis)):
            lhs = dagger(phi_map.values[i]) @ phi_map.values[j]
            rhs = phi.apply_ambient(inner_product_matrix(basis[i], basis[j]))
            defect = float(np.linalg.norm(lhs - rhs))
            scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
            if defect > worst:
                worst, worst_pair = defect, (i, j)
            if defect > tol.threshold(scale):
                ok = False
    return PhiMapReport(ok, worst, worst_pair)


def is_nondegenerate(phi_map: ModuleMap, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    """True iff the vectors ``Phi(x_i) h`` span the whole codomain."""
    onb = column_span_onb(phi_map.stacked_columns(), tol)
    return onb.shape[1] == phi_map.h2_dim


@dataclass(eq=False)
class KsgnsResult:
    """Universal map through which semi-compatible maps factor by contraction."""

    map: ModuleMap
    onb: np.ndarray
    dilation: StinespringDilation


def ksgns(phi: CPMap, e: ConcreteModule, tol: ToleranceProfile = DEFAULT_TOL) -> KsgnsResult:
    """Kolmogorov-style factorization: the universal non-degenerate map.

    With ``V`` from the Stinespring dilation and ``r`` its rank, the carrier
    space is ``span{(x (x) I_r) V h}`` inside ``C^p (x) C^r``; ``Q`` is an
    orthonormal basis of it and the map sends ``x -> Q* (x (x) I_r) V``.
    """
    if e.algebra.blocks != phi.domain.blocks:
        raise ShapeError("module and CP map live over different algebras")
    dil = stinespring(phi, tol)
    r, m, p = dil.rank, phi.target_dim, e.row_dim
    cols = [np.kron(b, np.eye(r, dtype=complex)) @ dil.V for b in e.basis]
    stacked = (
        np.hstack(cols) if cols and r > 0 else np.zeros((p * r, 0), dtype=complex)
    )
    q_onb = column_span_onb(stacked, tol, height=p * r)
    values = tuple(dagger(q_onb) @ c for c in cols)
    result = ModuleMap(e, m, q_onb.shape[1], values)
    report = is_phi_map(result, phi, ToleranceProfile(tol.abs_tol * 1e3 + 1e-8, tol.rel_tol * 1e3 + 1e-8))
    if not report.ok:
        raise RuntimeError(
            f"universal map failed its compatibility self-check (defect {report.worst_defect:.3e})"
        )
    return KsgnsResult(result, q_onb, dil)


@dataclass(frozen=True)
class GramPair:
    """The two ``N x N`` quadratic forms compared by the semi criterion,
    ``N = dim(domain) * m``: blocks ``phi(<x_i, x_j>)`` against the Gram
    matrix of the columns ``Phi(x_i) e_l``."""

    g_phi: np.ndarray
    g_map: np.ndarray


def gram_pair(phi_map: ModuleMap, phi: CPMap) -> GramPair:
    _check_compatible(phi_map, phi)
    basis = phi_map.domain.basis
    d, m = len(basis), phi.target_dim
    g_phi = np.zeros((d * m, d * m), dtype=complex)
    for i in range(d):
        for j in range(d):
            g_phi[i * m : (i + 1) * m, j * m : (j + 1) * m] = phi.apply_ambient(
                inner_product_matrix(basis[i], basis[j])
            )
    cols = phi_map.stacked_columns()
    g_map = dagger(cols) @ cols
    return GramPair(g_phi, g_map)


@dataclass(frozen=True)
class SemiPhiReport:
    ok: bool
    gram: GramPair
    margin: float

    def __bool__(self) -> bool:
        return self.ok


def is_completely_semi_phi(
    phi_map: ModuleMap, phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL
) -> SemiPhiReport:
    """Decide the operator inequality at every matrix level at once.

    The single ``N x N`` Loewner comparison of the Gram pair is equivalent to
    the level-n condition for all n: both sides are the same quadratic form
    on the algebraic tensor of the module with ``C^m``, and each level-n
    instance decomposes into row families of that form.
    """
    pair = gram_pair(phi_map, phi)
    n = pair.g_phi.shape[0]
    if n == 0:
        return SemiPhiReport(True, pair, 0.0)
    diff = pair.g_phi - pair.g_map
    diff = (diff + dagger(diff)) / 2.0
    report = is_psd(diff, tol)
    return SemiPhiReport(report.ok, pair, report.lambda_min)


@dataclass(frozen=True)
class SemiPhiWitness:
    """Concrete family refuting the semi criterion.

    ``vectors[i]`` pairs with the i-th basis element; the re-evaluated gap
    ``lhs - rhs`` is strictly positive.
    """

    vectors: tuple[np.ndarray, ...]
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def semiphi_witness(
    phi_map: ModuleMap, phi: CPMap, tol: ToleranceProfile = DEFAULT_TOL
) -> SemiPhiWitness:
    """Build a refutation certificate from a negative eigenvector of the Gram
    gap; raises if the pair actually satisfies the criterion."""
    report = is_completely_semi_phi(phi_map, phi, tol)
    if report.ok:
        raise PreconditionError("witness requested for a satisfying pair")
    diff = report.gram.g_phi - report.gram.g_map
    diff = (diff + dagger(diff)) / 2.0
    psd = is_psd(diff, tol)
    w = psd.witness
    d, m = phi_map.domain.dim, phi_map.h1_dim
    vectors = tuple(w[k * m : (k + 1) * m] for k in range(d))
    # Independent re-evaluation straight from the stored values and fresh
    # inner products, not from the Gram matrices.
    total = np.zeros(phi_map.h2_dim, dtype=complex)
    for vec, val in zip(vectors, phi_map.values):
        total += val @ vec
    lhs = float(np.vdot(total, total).real)
    rhs = 0.0
    basis = phi_map.domain.basis
    for k in range(d):
        for kp in range(d):
            block = phi.apply_ambient(inner_product_matrix(basis[k], basis[kp]))
            rhs += np.vdot(vectors[k], block @ vectors[kp]).real
    witness = SemiPhiWitness(vectors, lhs, rhs)
    if witness.gap <= 0.0:
        raise RuntimeError("witness failed independent re-evaluation")
    return witness


@dataclass(frozen=True)
class ObstructionReport:
    """Non-extendability obstruction: the largest ``|phi(<f_perp, e>)|``."""

    vanishes: bool
    norm: float
    complement: ConcreteModule

    def __bool__(self) -> bool:
        return self.vanishes


def phi_extension_obstruction(
    phi: CPMap,
    f: ConcreteModule,
    e: ConcreteModule,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> ObstructionReport:
    """Evaluate the necessary condition for compatible-map extendability:
    the CP map must annihilate all inner products of the orthogonal
    complement against the ambient module."""
    if not is_submodule(f, e, tol):
        raise PreconditionError("obstruction requires f to be a submodule of e")
    f_perp = orthogonal_complement(f, e, tol)
    worst = 0.0
    scale = 1.0
    for x in e.basis:
        for y in e.basis:
            scale = max(scale, operator_norm(phi.apply_ambient(inner_product_matrix(x, y))))
    for z in f_perp.basis:
        for x in e.basis:
            worst = max(
                worst, operator_norm(phi.apply_ambient(inner_product_matrix(z, x)))
            )
    return ObstructionReport(worst <= tol.threshold(scale), worst, f_perp)


@dataclass(eq=False)
class ExtensionResult:
    """Full certificate of the extension construction.

    Carries the extension itself plus every intermediate operator (universal
    map, subspace basis ``Q``, projection ``P``, contraction ``S0``, composite
    ``S``, dilation) and a verification report re-computed from scratch.
    """

    phi_prime: ModuleMap
    original: ModuleMap
    ksgns_map: ModuleMap
    subspace_onb: np.ndarray
    projection: np.ndarray
    contraction: np.ndarray
    composite: np.ndarray
    dilation: StinespringDilation
    report: dict


def extend_semi_phi(
    phi_map: ModuleMap,
    e: ConcreteModule,
    phi: CPMap,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> ExtensionResult:
    """Extend a completely semi-compatible map from a submodule to the whole
    module, with the extension again completely semi-compatible.

    The contraction ``S0`` is produced by least squares over the spanning set
    of universal-map vectors; well-definedness is certified by the residual.
    When the input is an exactly compatible map and the obstruction vanishes,
    the extension kills the orthogonal complement and is exactly compatible
    against the complemented submodule (the report records both checks).
    """
    f = phi_map.domain
    _check_compatible(phi_map, phi)
    if not is_submodule(f, e, tol):
        raise ExtensionInputError("the map's domain must be a submodule of e")
    semi = is_completely_semi_phi(phi_map, phi, tol)
    if not semi.ok:
        raise ExtensionInputError(
            f"input map is not completely semi-compatible (margin {semi.margin:.3e})"
        )
    k, m = phi_map.h2_dim, phi_map.h1_dim
    kres = ksgns(phi, e, tol)
    universal = kres.map
    d_h = universal.h2_dim

    # Values of the universal map on the submodule basis, via coefficients.
    f_in_e = [e.coefficients(b, tol) for b in f.basis]
    univ_on_f = [
        np.einsum("i,ikm->km", c, universal._value_stack)
        if universal.domain.dim
        else np.zeros((d_h, m), dtype=complex)
        for c in f_in_e
    ]
    a_cols = (
        np.hstack(univ_on_f) if univ_on_f else np.zeros((d_h, 0), dtype=complex)
    )
    b_cols = (
        np.hstack(phi_map.values) if phi_map.values else np.zeros((k, 0), dtype=complex)
    )
    s0, residual = least_squares_operator(a_cols, b_cols, tol)
    b_scale = float(np.linalg.norm(b_cols)) if b_cols.size else 0.0
    # Loosened bound: the exact-arithmetic residual is 0 under the semi
    # hypothesis; numerical rank cuts in the ONB can leave small remnants.
    if residual > 1e3 * tol.threshold(max(b_scale, 1.0)):
        raise ExtensionInputError(
            f"least-squares system for the contraction is inconsistent (residual {residual:.3e})"
        )
    u = column_span_onb(a_cols, tol, height=d_h)
    projection = u @ dagger(u)
    norm_bound = 1.0 + 10.0 * (tol.abs_tol + tol.rel_tol)
    s0_norm = operator_norm(s0)
    if s0_norm > norm_bound:
        raise ExtensionInputError(
            f"factoring operator has norm {s0_norm:.6f} > 1; semi hypothesis violated"
        )
    composite = s0 @ projection
    prime_values = tuple(composite @ v for v in universal.values)
    phi_prime = ModuleMap(e, m, k, prime_values)

    report: dict = {
        "empty_submodule": f.dim == 0,
        "zero_cp_map": kres.dilation.rank == 0,
        "contraction_norm": s0_norm,
        "least_squares_residual": residual,
    }
    # Restriction certificate, re-derived through coefficients on e.
    restriction_defect = 0.0
    for b, orig in zip(f.basis, phi_map.values):
        restriction_defect = max(
            restriction_defect, float(np.linalg.norm(phi_prime.apply(b, tol) - orig))
        )
    report["restriction_defect"] = restriction_defect
    semi_prime = is_completely_semi_phi(phi_prime, phi, tol)
    report["extension_semi_ok"] = semi_prime.ok
    report["extension_semi_margin"] = semi_prime.margin

    input_phi_report = is_phi_map(phi_map, phi, tol)
    obstruction = phi_extension_obstruction(phi, f, e, tol)
    report["input_is_phi_map"] = input_phi_report.ok
    report["obstruction_vanishes"] = obstruction.vanishes
    report["obstruction_norm"] = obstruction.norm
    if input_phi_report.ok and obstruction.vanishes:
        f_perp = obstruction.complement
        part_i = 0.0
        for z in f_perp.basis:
            part_i = max(part_i, float(np.linalg.norm(phi_prime.apply(z, tol))))
        report["complement_killed_defect"] = part_i
        part_ii = 0.0
        y_basis = list(f.basis) + list(f_perp.basis)
        y_values = [phi_prime.apply(y, tol) for y in y_basis]
        for x, vx in zip(e.basis, phi_prime.values):
            for y, vy in zip(y_basis, y_values):
                lhs = dagger(vx) @ vy
                rhs = phi.apply_ambient(inner_product_matrix(x, y))
                part_ii = max(part_ii, float(np.linalg.norm(lhs - rhs)))
                lhs_adj = dagger(vy) @ vx
                rhs_adj = phi.apply_ambient(inner_product_matrix(y, x))
                part_ii = max(part_ii, float(np.linalg.norm(lhs_adj - rhs_adj)))
        report["exact_on_complemented_defect"] = part_ii

    return ExtensionResult(
        phi_prime=phi_prime,
        original=phi_map,
        ksgns_map=universal,
        subspace_onb=kres.onb,
        projection=projection,
        contraction=s0,
        composite=composite,
        dilation=kres.dilation,
        report=report,
    )


def compare_extensions(
    gamma: ModuleMap,
    result: ExtensionResult,
    phi: CPMap,
    f: ConcreteModule,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> bool:
    """Uniqueness check: a compatible extension of a non-degenerate compatible
    map must coincide with the engine's output.

    Unverified preconditions raise :class:`PreconditionError` rather than
    returning False.
    """
    e = result.phi_prime.domain
    if gamma.domain is not e and gamma.domain.basis != e.basis:
        raise PreconditionError("gamma must be defined on the same ambient module")
    for b, orig in zip(f.basis, result.original.values):
        if np.linalg.norm(gamma.apply(b, tol) - orig) > tol.threshold(
            max(np.linalg.norm(orig), 1.0)
        ):
            raise PreconditionError("gamma does not restrict to the original map")
    if not is_nondegenerate(result.original, tol):
        raise PreconditionError("original map is not non-degenerate")
    if not is_phi_map(gamma, phi, tol).ok:
        raise PreconditionError("gamma is not an exactly compatible map")
    for vg, vp in zip(gamma.values, result.phi_prime.values):
        scale = max(np.linalg.norm(vp), 1.0)
        if np.linalg.norm(vg - vp) > tol.threshold(scale):
            return False
    return True


def canonical_compacts_extension(
    phi_map: ModuleMap,
    e: ConcreteModule,
    phi: CPMap,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> ModuleMap:
    """The extension-by-zero along the complemented decomposition.

    Valid only when the obstruction vanishes; otherwise no exactly compatible
    extension exists at all and this refuses.  The output is certified to be
    exactly compatible on the whole module and to coincide with the engine's
    extension.
    """
    f = phi_map.domain
    obstruction = phi_extension_obstruction(phi, f, e, tol)
    if not obstruction.vanishes:
        raise PreconditionError(
            f"obstruction norm {obstruction.norm:.3e} is nonzero: "
            "no exactly compatible extension exists on the whole module"
        )
    if not is_phi_map(phi_map, phi, tol).ok:
        raise PreconditionError("input is not an exactly compatible map on its domain")
    f_perp = obstruction.complement
    combined = list(f.basis) + list(f_perp.basis)
    if combined:
        stacked = np.column_stack([b.reshape(-1) for b in combined])
    else:
        stacked = np.zeros((e.row_dim * e.algebra.ambient_dim, 0), dtype=complex)
    values = []
    for x in e.basis:
        vec = x.reshape(-1)
        # Solve x = sum_j c_j (f-basis, f_perp-basis)_j and keep the f part.
        sol, _, _, _ = np.linalg.lstsq(stacked, vec, rcond=None)
        defect = float(np.linalg.norm(stacked @ sol - vec)) if stacked.size else float(np.linalg.norm(vec))
        if defect > tol.threshold(max(np.linalg.norm(vec), 1.0)):
            raise PreconditionError("module does not decompose as f + f_perp")
        acc = np.zeros((phi_map.h2_dim, phi_map.h1_dim), dtype=complex)
        for j in range(f.dim):
            acc += sol[j] * phi_map.values[j]
        values.append(acc)
    extension = ModuleMap(e, phi_map.h1_dim, phi_map.h2_dim, tuple(values))
    certify = is_phi_map(extension, phi, tol)
    if not certify.ok:
        raise RuntimeError(
            f"extension-by-zero failed its compatibility certificate (defect {certify.worst_defect:.3e})"
        )
    engine = extend_semi_phi(phi_map, e, phi, tol)
    for ve, vp in zip(extension.values, engine.phi_prime.values):
        if np.linalg.norm(ve - vp) > 1e3 * tol.threshold(max(np.linalg.norm(ve), 1.0)):
            raise RuntimeError("extension-by-zero disagrees with the engine output")
    return extension
