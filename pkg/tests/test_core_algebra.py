from fractions import Fraction

import numpy as np
import pytest

from rgw.codazzi import SpectralDecomp
from rgw.core_algebra import (
    InvalidSpaceError,
    SpaceSpec,
    StructureError,
    invariant_symmetric_forms,
    is_abelian,
    is_ideal,
    is_nilpotent,
    is_split_solvable,
    is_subalgebra,
    killing_form,
    killing_split,
    project_algebra,
    require_valid,
    validate_space,
    verify_chain,
)
from rgw.workbench import catalog as cat

from conftest import lie_table


class TestValidate:
    def test_abelian_all_zero(self, r3):
        rep = validate_space(r3)
        assert rep.valid
        assert all(c.residual == 0 for k, c in rep.checks.items() if k != "gram_positive_definite")

    def test_su2_and_berger(self, su2, su2_berger):
        assert validate_space(su2).valid
        assert validate_space(su2_berger).valid

    def test_sphere_hand(self, s2):
        rep = validate_space(s2)
        assert rep.valid
        assert rep.checks["reductive"].passed and rep.checks["metric_ad_h_invariant"].passed

    def test_jacobi_violation(self):
        # [e1,e2] = e3, [e1,e3] = e1 fails Jacobi on (e1, e2, e3)
        c = lie_table(3, {(0, 1): [0, 0, 1], (0, 2): [1, 0, 0]})
        rep = validate_space(SpaceSpec(0, 3, c, np.eye(3)))
        assert not rep.valid
        assert "jacobi" in rep.failures()

    def test_not_antisymmetric(self):
        c = np.zeros((2, 2, 2))
        c[0, 1, 0] = 1.0
        rep = validate_space(SpaceSpec(0, 2, c, np.eye(2)))
        assert "antisymmetry" in rep.failures()

    def test_indefinite_gram(self):
        rep = validate_space(cat.abelian(2, gram=np.diag([1.0, -1.0])))
        assert "gram_positive_definite" in rep.failures()
        with pytest.raises(InvalidSpaceError):
            require_valid(cat.abelian(2, gram=np.diag([1.0, -1.0])))

    def test_non_invariant_metric(self, s2):
        bad = SpaceSpec(1, 2, s2.structure_constants, np.diag([1.0, 2.0]))
        assert "metric_ad_h_invariant" in validate_space(bad).failures()

    def test_not_reductive(self):
        # [h, e1] = h + e1 leaves a component outside m
        c = lie_table(2, {(0, 1): [1, 1]})
        rep = validate_space(SpaceSpec(1, 1, c, np.eye(1)))
        assert "reductive" in rep.failures()

    def test_zero_dim_m(self):
        with pytest.raises(StructureError):
            validate_space(SpaceSpec(1, 0, np.zeros((1, 1, 1)), np.zeros((0, 0))))

    def test_shape_error(self):
        with pytest.raises(StructureError):
            SpaceSpec(0, 2, np.zeros((3, 3, 3)), np.eye(2))

    def test_exact_mode(self):
        s = cat.su2(exact=True)
        rep = validate_space(s)
        assert rep.exact and rep.valid
        assert s.structure_constants.dtype == object
        assert isinstance(s.gram[0, 0], Fraction)


class TestProjection:
    def test_sphere(self, s2):
        alg = project_algebra(s2)
        assert np.all(alg.bracket_m == 0)
        assert np.allclose(alg.bracket_h[0, 1], [1.0])
        assert np.allclose(alg.h_action[0], [[0, -1], [1, 0]])

    def test_su2(self, su2):
        alg = project_algebra(su2)
        assert alg.bracket_h.shape[2] == 0
        assert np.allclose(alg.bracket_m, su2.structure_constants)

    def test_heisenberg(self, heis):
        b = project_algebra(heis).bracket_m
        expected = np.zeros((3, 3, 3))
        expected[0, 1, 2], expected[1, 0, 2] = 1, -1
        assert np.array_equal(b, expected)


class TestKilling:
    def test_values(self, r3, su2, heis):
        assert np.all(killing_form(r3.algebra) == 0)
        assert np.allclose(killing_form(su2.algebra), -2 * np.eye(3))
        assert np.all(killing_form(heis.algebra) == 0)

    def test_split_su2(self, su2):
        d = SpectralDecomp.from_blocks(np.eye(3), [np.eye(3)[:, :1], np.eye(3)[:, 1:]])
        for beta, beta_k, corr in killing_split(su2.algebra, d, 0):
            assert beta == pytest.approx(beta_k + corr, abs=1e-14)
            assert beta == pytest.approx(-2.0)

    def test_split_heisenberg(self, heis):
        d = SpectralDecomp.from_blocks(np.eye(3), [np.eye(3)[:, :2], np.eye(3)[:, 2:]])
        assert killing_split(heis.algebra, d, 1) == [(0.0, 0.0, 0.0)]

    def test_split_abelian(self, r3):
        d = SpectralDecomp.from_blocks(np.eye(3), [np.eye(3)[:, :1], np.eye(3)[:, 1:]])
        for k in range(2):
            assert all(t == (0.0, 0.0, 0.0) for t in killing_split(r3.algebra, d, k))

    def test_split_needs_subalgebra(self, su2):
        # span{e1, e2} is not a subalgebra of su(2): the cross term survives
        d = SpectralDecomp.from_blocks(np.eye(3), [np.eye(3)[:, :2], np.eye(3)[:, 2:]])
        beta, beta_k, corr = killing_split(su2.algebra, d, 0)[0]
        assert abs(beta - beta_k - corr) == pytest.approx(2.0)

    def test_split_bad_index(self, su2):
        d = SpectralDecomp.from_blocks(np.eye(3), [np.eye(3)])
        with pytest.raises(IndexError):
            killing_split(su2.algebra, d, 1)


class TestSubspaces:
    def test_examples(self, heis, su2):
        e = np.eye(3)
        assert is_ideal(heis.algebra, e[:, 2])
        assert is_subalgebra(su2.algebra, e[:, 2])
        assert not is_ideal(su2.algebra, e[:, 2])
        assert is_ideal(su2.algebra, e)
        assert is_abelian(heis.algebra, e[:, [0, 2]])
        assert not is_abelian(heis.algebra, e[:, :2])

    def test_rank_deficient(self, su2):
        with pytest.raises(ValueError):
            is_ideal(su2.algebra, np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]))


class TestNilpotentSolvable:
    def test_nilpotent(self, r3, heis, su2):
        assert is_nilpotent(r3.algebra) == (True, 2)
        assert is_nilpotent(heis.algebra) == (True, 3)
        assert is_nilpotent(su2.algebra) == (False, None)

    def test_nilpotent_exact(self):
        assert is_nilpotent(cat.heisenberg(2, exact=True).algebra) == (True, 3)

    def test_split_solvable_heisenberg(self, heis):
        res = is_split_solvable(heis.algebra)
        assert res.verdict == "yes"
        assert verify_chain(heis.algebra, res.chain)
        assert [c.shape[1] for c in res.chain] == [3, 2, 1, 0]

    def test_split_solvable_su2(self, su2):
        res = is_split_solvable(su2.algebra)
        assert res.verdict == "no"
        assert np.max(np.abs(np.imag(res.witness_eigenvalues))) > 0.5

    def test_split_solvable_solvable_and_abelian(self, r3):
        for s in (cat.triangular([1]), cat.triangular([1, -2, 3], nil=1), r3):
            res = is_split_solvable(s.algebra)
            assert res.verdict == "yes"
            assert verify_chain(s.algebra, res.chain)

    def test_euclidean_plane_not_split(self):
        assert is_split_solvable(cat.euclidean_plane().algebra).verdict == "no"

    def test_bad_chain_rejected(self, heis):
        e = np.eye(3)
        # span{e1} is not an ideal of the Heisenberg algebra
        assert not verify_chain(heis.algebra, [e, e[:, :2], e[:, :1], e[:, :0]])


class TestInvariantForms:
    def test_no_isotropy(self, su2):
        assert len(invariant_symmetric_forms(su2)) == 6

    def test_spheres(self, s2):
        forms = invariant_symmetric_forms(s2)
        assert len(forms) == 1
        F = forms[0] / forms[0][0, 0]
        assert np.allclose(F, np.eye(2))
        for n in (2, 3, 4):
            assert len(invariant_symmetric_forms(cat.sphere(n))) == 1

    def test_flag(self):
        # three inequivalent root planes give three invariant forms
        assert len(invariant_symmetric_forms(cat.flag_su3())) == 3

    def test_isotropy_generator(self):
        # the reflection e1 -> -e1 kills the off-diagonal form on R^2
        P = np.diag([-1.0, 1.0])
        s = SpaceSpec(0, 2, np.zeros((2, 2, 2)), np.eye(2), (P,))
        assert validate_space(s).valid
        assert len(invariant_symmetric_forms(s)) == 2
