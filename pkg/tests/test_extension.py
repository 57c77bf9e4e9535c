import numpy as np
import pytest

from semiphi import (
    BlockAlgebra,
    ConcreteModule,
    ExtensionInputError,
    ModuleMap,
    PreconditionError,
    canonical_compacts_extension,
    compare_extensions,
    extend_semi_phi,
    identity_cp_map,
    is_completely_semi_phi,
    is_nondegenerate,
    is_phi_map,
    ksgns,
    phi_extension_obstruction,
    semiphi_witness,
    zero_module_map,
)
from semiphi.fixtures import (
    compacts_fixture,
    example_2_1,
    random_semi_phi_fixture,
    random_vanishing_obstruction_fixture,
    random_violating_module_map,
    scalar_fixture,
)
from conftest import full_rectangular_module


class TestPhiMapPredicate:
    def test_identity_on_full_module(self):
        e = full_rectangular_module(2, 2)
        phi = identity_cp_map(e.algebra)
        ident = ModuleMap(e, 2, 2, e.basis)
        assert is_phi_map(ident, phi).ok

    def test_top_projection_on_submodule(self):
        for n in (1, 2, 3):
            fx = example_2_1(n)
            assert is_phi_map(fx.phi_map, fx.phi).ok

    def test_zero_padding_fails_on_whole_module(self):
        fx = example_2_1(2)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        report = is_phi_map(res.phi_prime, fx.phi)
        assert not report.ok
        # The failing pair involves a bottom-half (complement) direction.
        i, j = report.worst_pair
        perp = phi_extension_obstruction(fx.phi, fx.f, fx.e).complement
        assert perp.contains_matrix(fx.e.basis[i]) or perp.contains_matrix(fx.e.basis[j])


class TestNondegeneracy:
    def test_scalar_projection(self):
        fx = example_2_1(1)
        assert is_nondegenerate(fx.phi_map)

    def test_zero_map(self):
        e = full_rectangular_module(2, 2)
        assert not is_nondegenerate(zero_module_map(e, 2, 1))

    def test_zero_padding_keeps_range(self):
        fx = example_2_1(2)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        assert is_nondegenerate(res.phi_prime)


class TestKsgns:
    def test_scalar_identity_model(self):
        algebra = BlockAlgebra((1,))
        e = ConcreteModule(
            algebra,
            2,
            (np.array([[1.0], [0.0]], dtype=complex), np.array([[0.0], [1.0]], dtype=complex)),
        )
        result = ksgns(identity_cp_map(algebra), e)
        assert result.map.h2_dim == 2
        assert is_phi_map(result.map, identity_cp_map(algebra)).ok
        assert is_nondegenerate(result.map)

    def test_universal_map_is_always_compatible(self, rng):
        for _ in range(20):
            fx = random_semi_phi_fixture(rng)
            result = ksgns(fx.phi, fx.e)
            assert is_phi_map(result.map, fx.phi).ok
            assert is_nondegenerate(result.map)

    def test_zero_cp_map_collapses(self):
        algebra = BlockAlgebra((1,))
        e = ConcreteModule(algebra, 1, (np.array([[1.0]], dtype=complex),))
        zero = identity_cp_map(algebra)
        zero = type(zero)(algebra, 1, (np.zeros((1, 1)),))
        result = ksgns(zero, e)
        assert result.map.h2_dim == 0


class TestSemiPredicate:
    def test_scalar_contraction_threshold(self):
        for c, expect in ((0.5, True), (1.0, True), (2.0, False)):
            pm, phi = scalar_fixture(c)
            assert is_completely_semi_phi(pm, phi).ok is expect

    def test_every_phi_map_is_semi(self):
        fx = example_2_1(2)
        report = is_completely_semi_phi(fx.phi_map, fx.phi)
        assert report.ok
        assert abs(report.margin) < 1e-9

    def test_extension_is_semi(self):
        fx = example_2_1(2)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        assert is_completely_semi_phi(res.phi_prime, fx.phi).ok


class TestWitness:
    def test_scalar_c2(self):
        pm, phi = scalar_fixture(2.0)
        w = semiphi_witness(pm, phi)
        assert w.lhs == pytest.approx(4.0)
        assert w.rhs == pytest.approx(1.0)

    def test_refuses_satisfying_pair(self):
        pm, phi = scalar_fixture(1.0)
        with pytest.raises(PreconditionError):
            semiphi_witness(pm, phi)

    def test_random_violations_produce_witnesses(self, rng):
        produced = 0
        for _ in range(30):
            fx = random_semi_phi_fixture(rng)
            bad = random_violating_module_map(fx, rng)
            if is_completely_semi_phi(bad, fx.phi).ok:
                continue  # scaling a zero form stays satisfying
            w = semiphi_witness(bad, fx.phi)
            assert w.gap > 0.0
            produced += 1
        assert produced >= 10


class TestObstruction:
    def test_stacked_pair_nonvanishing(self):
        for n in (1, 2, 3):
            fx = example_2_1(n)
            report = phi_extension_obstruction(fx.phi, fx.f, fx.e)
            assert not report.vanishes
            assert report.norm > 0.1

    def test_whole_module_vanishes(self):
        fx = example_2_1(2)
        report = phi_extension_obstruction(fx.phi, fx.e, fx.e)
        assert report.vanishes
        assert report.complement.dim == 0

    def test_killed_block_vanishes(self):
        fx = compacts_fixture(2)
        report = phi_extension_obstruction(fx.phi, fx.f, fx.e)
        assert report.vanishes


class TestExtensionEngine:
    def test_scalar_zero_padding(self):
        fx = example_2_1(1)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        # Values on the two basis directions: identity on top, zero on bottom.
        assert np.allclose(res.phi_prime.values[0], [[1.0]])
        assert np.linalg.norm(res.phi_prime.values[1]) < 1e-10

    def test_total_map_extends_to_itself(self):
        fx = example_2_1(2)
        total = ModuleMap(fx.e, 2, 2, tuple(b[:2, :] for b in fx.e.basis))
        res = extend_semi_phi(total, fx.e, fx.phi)
        for a, b in zip(res.phi_prime.values, total.values):
            assert np.linalg.norm(a - b) < 1e-9

    def test_rejects_non_semi_input(self):
        pm, phi = scalar_fixture(2.0)
        with pytest.raises(ExtensionInputError):
            extend_semi_phi(pm, pm.domain, phi)

    def test_rejects_non_submodule(self):
        fx = example_2_1(1)
        with pytest.raises(ExtensionInputError):
            extend_semi_phi(
                ModuleMap(fx.e, 1, 1, tuple(b[:1, :] for b in fx.e.basis)), fx.f, fx.phi
            )

    def test_empty_submodule_gives_zero_extension(self):
        fx = example_2_1(1)
        empty = ConcreteModule(fx.e.algebra, 2, ())
        res = extend_semi_phi(ModuleMap(empty, 1, 1, ()), fx.e, fx.phi)
        assert res.report["empty_submodule"]
        for v in res.phi_prime.values:
            assert np.linalg.norm(v) < 1e-12

    def test_contraction_norm_bounded(self, rng):
        for _ in range(20):
            fx = random_semi_phi_fixture(rng)
            res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
            assert res.report["contraction_norm"] <= 1.0 + 1e-6

    def test_parts_one_and_two(self, rng):
        for _ in range(15):
            fx = random_vanishing_obstruction_fixture(rng)
            res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
            assert res.report["input_is_phi_map"]
            assert res.report["obstruction_vanishes"]
            assert res.report["complement_killed_defect"] < 1e-9
            assert res.report["exact_on_complemented_defect"] < 1e-8


class TestUniqueness:
    def test_engine_output_agrees_with_itself(self):
        fx = compacts_fixture(2)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        assert compare_extensions(res.phi_prime, res, fx.phi, fx.f)

    def test_independent_construction_agrees(self):
        fx = compacts_fixture(2)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        gamma = canonical_compacts_extension(fx.phi_map, fx.e, fx.phi)
        assert compare_extensions(gamma, res, fx.phi, fx.f)

    def test_non_phi_map_candidate_refused(self):
        fx = compacts_fixture(1)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        bent_values = list(res.phi_prime.values)
        bent_values[-1] = bent_values[-1] + 1e-2
        bent = ModuleMap(fx.e, 1, 1, tuple(bent_values))
        with pytest.raises(PreconditionError):
            compare_extensions(bent, res, fx.phi, fx.f)

    def test_wrong_restriction_refused(self):
        fx = compacts_fixture(1)
        res = extend_semi_phi(fx.phi_map, fx.e, fx.phi)
        shrunk = ModuleMap(fx.e, 1, 1, tuple(0.5 * v for v in res.phi_prime.values))
        with pytest.raises(PreconditionError):
            compare_extensions(shrunk, res, fx.phi, fx.f)


class TestCanonicalCompactsExtension:
    def test_two_block_fixture(self):
        fx = compacts_fixture(2)
        gamma = canonical_compacts_extension(fx.phi_map, fx.e, fx.phi)
        assert is_phi_map(gamma, fx.phi).ok
        # The complement directions are annihilated.
        perp = phi_extension_obstruction(fx.phi, fx.f, fx.e).complement
        for z in perp.basis:
            assert np.linalg.norm(gamma.apply(z)) < 1e-10

    def test_refuses_nonvanishing_obstruction(self):
        fx = example_2_1(1)
        with pytest.raises(PreconditionError):
            canonical_compacts_extension(fx.phi_map, fx.e, fx.phi)

    def test_total_domain_returns_input(self):
        fx = example_2_1(1)
        total = ModuleMap(fx.e, 1, 2, fx.e.basis)  # identity inclusion
        gamma = canonical_compacts_extension(total, fx.e, fx.phi)
        for a, b in zip(gamma.values, total.values):
            assert np.linalg.norm(a - b) < 1e-10
