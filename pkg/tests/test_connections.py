from fractions import Fraction

import numpy as np
import pytest

from rgw import _linalg as la
from rgw.connections import (
    canonical_curvature,
    canonical_product,
    check_equivariance,
    covariant_differential,
    curvature,
    koszul_product,
    levi_civita_product,
    skew_adjointness_residual,
    torsion,
)
from rgw.core_algebra import InvalidSpaceError
from rgw.workbench import catalog as cat
from rgw.workbench.corpus import builtin_corpus


class TestKoszul:
    def test_su2_half_bracket(self, su2):
        a = levi_civita_product(su2)
        assert np.allclose(a[0, 1], [0, 0, 0.5], atol=1e-15)
        assert np.allclose(a, 0.5 * su2.algebra.bracket_m, atol=1e-15)

    def test_su2_exact(self):
        s = cat.su2(exact=True)
        a = levi_civita_product(s)
        assert a[0, 1, 2] == Fraction(1, 2)
        assert la.max_abs(torsion(s.algebra, a)) == 0

    def test_sphere_zero(self, s2):
        assert np.all(levi_civita_product(s2) == 0)

    def test_abelian_zero(self, r3):
        assert np.all(levi_civita_product(r3) == 0)

    def test_heisenberg(self, heis):
        a = levi_civita_product(heis)
        # alpha(x, y) = z/2, alpha(x, z) = -y/2, alpha(z, y) = x/2
        assert np.allclose(a[0, 1], [0, 0, 0.5])
        assert np.allclose(a[0, 2], [0, -0.5, 0])
        assert np.allclose(a[2, 1], [0.5, 0, 0])

    def test_invalid_space_rejected(self):
        with pytest.raises(InvalidSpaceError):
            levi_civita_product(cat.abelian(2, gram=np.diag([1.0, -1.0])))

    @pytest.mark.parametrize("doc", builtin_corpus(), ids=lambda d: d.name)
    def test_corpus_torsion_and_metric(self, doc):
        spec = doc.to_spec()
        a = koszul_product(spec.algebra.bracket_m, spec.gram)
        assert la.max_abs(torsion(spec.algebra, a)) <= 1e-12
        assert skew_adjointness_residual(a, spec.gram) <= 1e-12
        assert check_equivariance(spec, a)
        ex = doc.as_exact().to_spec()
        ae = koszul_product(ex.algebra.bracket_m, ex.gram)
        assert la.max_abs(torsion(ex.algebra, ae)) == 0
        assert skew_adjointness_residual(ae, ex.gram) == 0


class TestEquivariance:
    def test_perturbed_fails(self, s2):
        a = levi_civita_product(s2).copy()
        a[0, 0] = [0.0, 1.0]
        assert not check_equivariance(s2, a)

    def test_shape_mismatch(self, s2):
        with pytest.raises(ValueError):
            check_equivariance(s2, np.zeros((3, 3, 3)))

    def test_canonical_is_equivariant(self, s2):
        assert check_equivariance(s2, canonical_product(2))


class TestCanonical:
    def test_su2_torsion(self, su2):
        T = torsion(su2.algebra, canonical_product(3))
        assert np.allclose(T[0, 1], [0, 0, -1])

    def test_su2_canonical_flat(self, su2):
        assert np.all(canonical_curvature(su2.algebra) == 0)

    def test_sphere_canonical_equals_lc(self, s2):
        R = curvature(s2.algebra, levi_civita_product(s2))
        assert np.allclose(R, canonical_curvature(s2.algebra))
        # R(e1, e2) e2 = e1
        assert np.allclose(R[0, 1, 1], [1, 0])


class TestCovariantDifferential:
    def test_heisenberg_theta(self, heis):
        a = levi_civita_product(heis)
        theta = np.array([0.0, 0.0, 1.0])  # dual of z
        d = covariant_differential(a, theta)
        # (nabla_x theta)(y) = -theta(alpha(x, y)) = -1/2
        assert d[0, 1] == pytest.approx(-0.5)
        assert np.allclose(d + d.T, 0)

    def test_metric_is_parallel(self, su2_berger):
        a = levi_civita_product(su2_berger)
        assert la.max_abs(covariant_differential(a, su2_berger.gram)) < 1e-14

    def test_scalar(self, su2):
        d = covariant_differential(levi_civita_product(su2), np.float64(2.0))
        assert d.shape == (3,) and np.all(d == 0)
