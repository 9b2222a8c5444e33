"""Invariant connections on G/H as bilinear products on m.

A product table ``a`` has ``a[i, j, k]`` = coefficient of ``e_k`` in
``alpha(e_i, e_j)``; a curvature tensor ``R`` has ``R[i, j, k, l]`` =
coefficient of ``e_l`` in ``R(e_i, e_j) e_k``. Covariant tensors are plain
k-index arrays over the m-basis.
"""

from __future__ import annotations

import string

import numpy as np

from rgw import _linalg as la
from rgw.core_algebra import DEFAULT_TOL, MAlgebra, SpaceSpec, require_valid


def koszul_product(bracket_m: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Levi-Civita product of ``gram`` from the m-part of the bracket."""
    exact = la.is_exact(gram)
    lowered = la.einsum("ijk,kl->ijl", bracket_m, gram)
    # 2<a(X,Y),Z> = <[X,Y],Z> - <X,[Y,Z]> - <[X,Z],Y>
    doubled = lowered - lowered.transpose(2, 0, 1) - lowered.transpose(0, 2, 1)
    return la.half(exact) * la.einsum("ijl,lk->ijk", doubled, la.inverse(gram))


def levi_civita_product(spec: SpaceSpec, tol: float = DEFAULT_TOL) -> np.ndarray:
    require_valid(spec, tol)
    return koszul_product(spec.algebra.bracket_m, spec.gram)


def canonical_product(dim: int, exact: bool = False) -> np.ndarray:
    """Zero product: the canonical connection of the second kind."""
    return la.zeros_like_field((dim, dim, dim), exact)


def equivariance_residual(spec: SpaceSpec, prod: np.ndarray) -> float:
    """Largest defect of ad(W) (and each isotropy generator) acting as a derivation/automorphism of ``prod``."""
    alg = spec.algebra
    worst = 0.0
    for M in alg.h_action:
        lhs = la.einsum("ijl,kl->ijk", prod, M)
        rhs = la.einsum("pi,pjk->ijk", M, prod) + la.einsum("pj,ipk->ijk", M, prod)
        worst = max(worst, la.max_abs(lhs - rhs))
    for P in spec.isotropy_generators:
        lhs = la.einsum("ijl,kl->ijk", prod, P)
        rhs = la.einsum("ai,bj,abk->ijk", P, P, prod)
        worst = max(worst, la.max_abs(lhs - rhs))
    return worst


def check_equivariance(spec: SpaceSpec, prod: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    if np.shape(prod) != (spec.dim_m,) * 3:
        raise ValueError("product table does not match dim_m")
    return la.within(equivariance_residual(spec, prod), tol, spec.exact and la.is_exact(prod))


def torsion(alg: MAlgebra, prod: np.ndarray) -> np.ndarray:
    """T(X, Y) = alpha(X, Y) - alpha(Y, X) - [X, Y]_m as a (1,2) block."""
    return prod - prod.transpose(1, 0, 2) - alg.bracket_m


def curvature(alg: MAlgebra, prod: np.ndarray) -> np.ndarray:
    """R(X,Y)Z = a(X,a(Y,Z)) - a(Y,a(X,Z)) - a([X,Y]_m,Z) - [[X,Y]_h, Z]."""
    first = la.einsum("jkp,ipl->ijkl", prod, prod)
    third = la.einsum("ijp,pkl->ijkl", alg.bracket_m, prod)
    fourth = la.einsum("ijw,wlk->ijkl", alg.bracket_h, alg.h_action)
    return first - first.transpose(1, 0, 2, 3) - third - fourth


def canonical_curvature(alg: MAlgebra) -> np.ndarray:
    """R0(X,Y)Z = -[[X,Y]_h, Z]."""
    return -la.einsum("ijw,wlk->ijkl", alg.bracket_h, alg.h_action)


def covariant_differential(prod: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """(nabla theta)(X, Y_1..Y_k) = -sum_i theta(Y_1, .., alpha(X, Y_i), .., Y_k).

    The differentiation slot is the first index of the result.
    """
    theta = np.asarray(theta)
    k = theta.ndim
    letters = string.ascii_lowercase
    x, ys, p = "z", letters[:k], "y"
    out = None
    for i in range(k):
        sub_theta = ys[:i] + p + ys[i + 1 :]
        term = la.einsum(f"{x}{ys[i]}{p},{sub_theta}->{x}{ys}", prod, theta)
        out = term if out is None else out + term
    if out is None:
        return la.zeros_like_field((prod.shape[0],), la.is_exact(prod))
    return -out


def skew_adjointness_residual(prod: np.ndarray, gram: np.ndarray) -> float:
    """<alpha(X,Y),Z> + <Y, alpha(X,Z)> over basis triples."""
    low = la.einsum("ijk,kl->ijl", prod, gram)
    return la.max_abs(low + low.transpose(0, 2, 1))
