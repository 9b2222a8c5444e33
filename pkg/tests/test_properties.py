"""Property tests over randomly generated Lie algebras, metrics and bases."""

from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from rgw import _linalg as la
from rgw.codazzi import (
    SpectralDecomp,
    check_compatibility,
    codazzi_residual,
    codazzi_solution_space,
    construct_codazzi,
    spectral_decompose,
)
from rgw.connections import covariant_differential, koszul_product, torsion
from rgw.core_algebra import SpaceSpec, killing_form, validate_space
from rgw.curvature import curvature_report
from rgw.workbench import catalog as cat
from rgw.workbench.document import parse_document, serialize
from rgw.workbench.fuzz import change_basis, fuzz_instance

seeds = st.integers(0, 2**32 - 1)
small = st.integers(-3, 3)


def spd(rng, n, lo=1.0, hi=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q @ np.diag(rng.uniform(lo, hi, n)) @ q.T


@st.composite
def lie_algebras(draw):
    """Metric Lie algebras (dim h = 0) drawn from several families."""
    kind = draw(st.sampled_from(["milnor", "triangular", "heisenberg", "sum"]))
    if kind == "milnor":
        spec = cat.milnor(draw(small), draw(small), draw(small))
    elif kind == "triangular":
        n = draw(st.integers(2, 5))
        spec = cat.triangular(draw(st.lists(small, min_size=n - 1, max_size=n - 1)), nil=draw(st.integers(0, 1)))
    elif kind == "heisenberg":
        spec = cat.heisenberg(draw(st.integers(1, 2)))
    else:
        spec = cat.direct_sum(cat.milnor(1, 1, 1), cat.triangular([draw(small)]))
    rng = np.random.default_rng(draw(seeds))
    return SpaceSpec(0, spec.dim_m, spec.structure_constants, spd(rng, spec.dim_m), name=kind)


@given(lie_algebras())
def test_koszul_torsion_free_and_metric(spec):
    assert validate_space(spec).valid
    a = koszul_product(spec.algebra.bracket_m, spec.gram)
    assert la.max_abs(torsion(spec.algebra, a)) <= 1e-12 * max(1.0, la.max_abs(a))
    assert la.max_abs(covariant_differential(a, spec.gram)) <= 1e-11 * max(1.0, la.max_abs(a)) * la.max_abs(spec.gram)


@given(st.lists(st.integers(1, 9), min_size=3, max_size=3), small, small, small)
def test_koszul_exact(diag, a, b, c):
    g = la.exact_array(np.diag([Fraction(d, 3) for d in diag]))
    spec = cat.milnor(a, b, c, exact=True)
    spec = SpaceSpec(0, 3, spec.structure_constants, g)
    alpha = koszul_product(spec.algebra.bracket_m, spec.gram)
    assert la.max_abs(torsion(spec.algebra, alpha)) == 0
    assert la.max_abs(covariant_differential(alpha, spec.gram)) == 0


@given(lie_algebras(), seeds)
def test_curvature_invariant_under_basis_change(spec, seed):
    rng = np.random.default_rng(seed)
    n = spec.dim_m
    P = rng.standard_normal((n, n)) + 3 * np.eye(n)
    other = change_basis(spec, np.zeros((0, 0)), P)
    s1, s2 = curvature_report(spec).s, curvature_report(other).s
    assert abs(s1 - s2) <= 1e-8 * max(1.0, abs(s1))
    # Killing form transforms as a bilinear form
    assert np.allclose(P.T @ killing_form(spec.algebra) @ P, killing_form(other.algebra), atol=1e-8)


@given(lie_algebras(), seeds)
def test_solution_space_dimension_is_basis_free(spec, seed):
    rng = np.random.default_rng(seed)
    n = spec.dim_m
    P = rng.standard_normal((n, n)) + 3 * np.eye(n)
    other = change_basis(spec, np.zeros((0, 0)), P)
    d1 = len(codazzi_solution_space(spec, koszul_product(spec.algebra.bracket_m, spec.gram)))
    d2 = len(codazzi_solution_space(other, koszul_product(other.algebra.bracket_m, other.gram)))
    assert d1 == d2 >= 1


@given(lie_algebras())
def test_solver_solutions_are_compatible(spec):
    alpha = koszul_product(spec.algebra.bracket_m, spec.gram)
    for A in codazzi_solution_space(spec, alpha):
        assert codazzi_residual(A, alpha) <= 1e-9 * max(1.0, la.max_abs(A)) * max(1.0, la.max_abs(alpha))
        d = spectral_decompose(A, spec.gram)
        assert check_compatibility(spec.algebra, spec.gram, d)[0]


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3, unique=True), seeds)
def test_compatible_blocks_give_codazzi(lams, seed):
    lams = sorted(lams)
    spec = cat.su2_codazzi(lams)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(3)
    blocks = [np.eye(3)[:, [i]] for i in perm]
    A = construct_codazzi(spec, blocks, [float(lams[i]) for i in perm])
    alpha = koszul_product(spec.algebra.bracket_m, spec.gram)
    assert codazzi_residual(A, alpha) <= 1e-10 * max(1.0, la.max_abs(A)) * max(1.0, la.max_abs(alpha))


@given(st.integers(2, 5), seeds)
def test_abelian_every_decomposition_compatible(n, seed):
    rng = np.random.default_rng(seed)
    g = spd(rng, n)
    F = la.gram_orthonormalize(rng.standard_normal((n, n)), g)
    k = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    blocks = np.split(F, cuts, axis=1)
    d = SpectralDecomp.from_blocks(g, blocks, rng.permutation(len(blocks)).astype(float))
    assert check_compatibility(cat.abelian(n).algebra, g, d)[0]


@given(seeds, st.integers(0, 50))
def test_fuzz_roundtrip_and_determinism(seed, index):
    d = fuzz_instance(seed, index, [1, 2, 3, 4, 5, 6, 7, 8])
    text = serialize(d)
    assert serialize(parse_document(text)) == text
    assert serialize(fuzz_instance(seed, index, [1, 2, 3, 4, 5, 6, 7, 8])) == text
    assert validate_space(parse_document(text).to_spec()).valid


@given(seeds, st.integers(1, 6))
def test_spectral_decompose_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    g = spd(rng, n)
    S = rng.standard_normal((n, n))
    A = S + S.T
    d = spectral_decompose(A, g)
    assert np.allclose(d.form(), A, atol=1e-9 * max(1.0, la.max_abs(A)) * np.linalg.cond(g))
    assert np.all(np.diff(d.lambdas) > 0)
