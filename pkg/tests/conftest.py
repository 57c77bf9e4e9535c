"""Shared helpers: a brute-force sampler for the level-n operator inequality
and small builders used across test files."""

import numpy as np
import pytest

from semiphi import BlockAlgebra, ConcreteModule
from semiphi.modules import inner_product_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def full_rectangular_module(rows: int, cols: int) -> ConcreteModule:
    """All of M_{rows x cols} as a module over the full matrix algebra."""
    algebra = BlockAlgebra((cols,))
    basis = []
    for i in range(rows):
        for j in range(cols):
            b = np.zeros((rows, cols), dtype=complex)
            b[i, j] = 1.0
            basis.append(b)
    return ConcreteModule(algebra, rows, tuple(basis))


def sampled_level_violation(phi_map, phi, rng, levels=(1, 2, 3), samples=50):
    """Brute-force probe of the level-n operator inequality.

    Draws random elements of the n x n matrix module (by coefficients over
    the domain basis), evaluates both sides of the inequality directly, and
    returns the largest eigenvalue excess found (positive means refuted).
    Independent of the Gram-matrix route: sides are assembled from the map
    values and fresh inner products.
    """
    basis = phi_map.domain.basis
    d, m, k = len(basis), phi_map.h1_dim, phi_map.h2_dim
    if d == 0:
        return 0.0
    v_stack = np.stack(phi_map.values)  # (d, k, m)
    p_blocks = np.stack(
        [
            [phi.apply_ambient(inner_product_matrix(basis[i], basis[j])) for j in range(d)]
            for i in range(d)
        ]
    )  # (d, d, m, m)
    worst = 0.0
    for n in levels:
        for _ in range(samples):
            c = rng.standard_normal((n, n, d)) + 1j * rng.standard_normal((n, n, d))
            # Phi_n(x): block (u, v) = sum_i c[u, v, i] * Phi(basis_i)
            amp = np.einsum("uvi,ikm->ukvm", c, v_stack).reshape(n * k, n * m)
            lhs = amp.conj().T @ amp
            rhs = np.einsum("wui,wvj,ijab->uavb", c.conj(), c, p_blocks).reshape(
                n * m, n * m
            )
            diff = lhs - rhs
            diff = (diff + diff.conj().T) / 2.0
            excess = float(np.linalg.eigvalsh(diff)[-1])
            worst = max(worst, excess)
    return worst
