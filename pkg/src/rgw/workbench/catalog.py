"""Structure constants of standard Lie algebras and homogeneous spaces.

Every builder returns a :class:`SpaceSpec`. Lie algebra builders have
``dim_h = 0``; the metric defaults to the identity.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np

from rgw import _linalg as la
from rgw.core_algebra import SpaceSpec


def _lie(n: int, table: dict, exact: bool = False) -> np.ndarray:
    c = la.zeros_like_field((n, n, n), exact)
    for (i, j), v in table.items():
        v = la.exact_array(v) if exact else np.asarray(v, dtype=float)
        c[i, j] = v
        c[j, i] = -v
    return c


def _metric(gram, n: int, exact: bool):
    g = np.eye(n, dtype=int) if gram is None else np.asarray(gram)
    return la.exact_array(g) if exact else g.astype(float)


def abelian(n: int, gram=None, exact: bool = False) -> SpaceSpec:
    return SpaceSpec(0, n, la.zeros_like_field((n, n, n), exact), _metric(gram, n, exact), name=f"abelian-R{n}")


def heisenberg(k: int = 1, gram=None, exact: bool = False) -> SpaceSpec:
    """[x_a, y_a] = z on R^{2k+1}, basis x_1..x_k, y_1..y_k, z."""
    n = 2 * k + 1
    table = {}
    for a in range(k):
        v = [0] * n
        v[-1] = 1
        table[(a, k + a)] = v
    return SpaceSpec(0, n, _lie(n, table, exact), _metric(gram, n, exact), name=f"heisenberg-{n}")


def triangular(weights, nil: float = 0, gram=None, exact: bool = False) -> SpaceSpec:
    """R acting on R^{n-1}: [e_1, e_j] = w_j e_j (+ nil * e_{j+1} for j < n)."""
    n = len(weights) + 1
    table = {}
    for t, w in enumerate(weights):
        j = t + 1
        v = [0] * n
        v[j] = w
        if nil and j + 1 < n:
            v[j + 1] = nil
        table[(0, j)] = v
    return SpaceSpec(0, n, _lie(n, table, exact), _metric(gram, n, exact), name=f"solvable-{n}")


def euclidean_plane(gram=None, exact: bool = False) -> SpaceSpec:
    """e(2): [e1, e2] = e3, [e1, e3] = -e2. Solvable with non-real ad spectrum."""
    table = {(0, 1): [0, 0, 1], (0, 2): [0, -1, 0]}
    return SpaceSpec(0, 3, _lie(3, table, exact), _metric(gram, 3, exact), name="e2")


def milnor(a, b, c, gram=None, exact: bool = False) -> SpaceSpec:
    """[e2, e3] = a e1, [e3, e1] = b e2, [e1, e2] = c e3 (su(2) when a, b, c > 0)."""
    table = {(1, 2): [a, 0, 0], (2, 0): [0, b, 0], (0, 1): [0, 0, c]}
    return SpaceSpec(0, 3, _lie(3, table, exact), _metric(gram, 3, exact), name=f"milnor({a},{b},{c})")


def su2(gram=None, exact: bool = False) -> SpaceSpec:
    s = milnor(1, 1, 1, gram, exact)
    return SpaceSpec(0, 3, s.structure_constants, s.gram, name="su2")


def su2_codazzi(lambdas=(0, 1, 3), exact: bool = False) -> SpaceSpec:
    """Milnor constants (l_i - l_j)^2 with the identity metric; diag(lambdas) is a Codazzi tensor."""
    l1, l2, l3 = lambdas
    s = milnor((l2 - l3) ** 2, (l3 - l1) ** 2, (l1 - l2) ** 2, None, exact)
    return SpaceSpec(0, 3, s.structure_constants, s.gram, name=f"su2-codazzi{tuple(lambdas)}")


def direct_sum(a: SpaceSpec, b: SpaceSpec, name: str | None = None) -> SpaceSpec:
    """Direct sum of two spaces; the h-parts and m-parts are concatenated (h first)."""
    exact = a.exact or b.exact
    if exact:
        a, b = a.to_exact(), b.to_exact()
    ha, ma, hb, mb = a.dim_h, a.dim_m, b.dim_h, b.dim_m
    n = a.dim + b.dim
    ia = list(range(ha)) + list(range(ha + hb, ha + hb + ma))
    ib = list(range(ha, ha + hb)) + list(range(ha + hb + ma, n))
    c = la.zeros_like_field((n, n, n), exact)
    c[np.ix_(ia, ia, ia)] = a.structure_constants
    c[np.ix_(ib, ib, ib)] = b.structure_constants
    g = la.zeros_like_field((ma + mb, ma + mb), exact)
    g[:ma, :ma] = a.gram
    g[ma:, ma:] = b.gram
    gens = []
    for P in a.isotropy_generators:
        G = la.zeros_like_field((ma + mb, ma + mb), exact)
        G[:ma, :ma] = P
        G[ma:, ma:] = np.eye(mb, dtype=int) if not exact else la.exact_array(np.eye(mb, dtype=int))
        gens.append(G)
    for P in b.isotropy_generators:
        G = la.zeros_like_field((ma + mb, ma + mb), exact)
        G[:ma, :ma] = np.eye(ma, dtype=int) if not exact else la.exact_array(np.eye(ma, dtype=int))
        G[ma:, ma:] = P
        gens.append(G)
    return SpaceSpec(ha + hb, ma + mb, c, g, tuple(gens), name or f"{a.name}+{b.name}")


# --- matrix Lie algebras ---------------------------------------------------------------


def constants_from_matrices(basis: list, exact: bool = True) -> np.ndarray:
    """Structure constants of a matrix Lie algebra spanned by ``basis``.

    Commutators are expanded by least squares and rounded to nearby rationals,
    so the basis should have small rational constants.
    """
    B = np.column_stack([np.asarray(M).ravel() for M in basis])
    if np.iscomplexobj(B):
        B = np.vstack([B.real, B.imag])
    n = len(basis)
    c = np.zeros((n, n, n))
    for i, j in combinations(range(n), 2):
        X, Y = basis[i], basis[j]
        v = (X @ Y - Y @ X).ravel()
        if np.iscomplexobj(v) or len(v) != B.shape[0]:
            v = np.concatenate([np.real(v), np.imag(v)])
        coef, *_ = np.linalg.lstsq(B, v, rcond=None)
        if np.linalg.norm(B @ coef - v) > 1e-9:
            raise ValueError("basis is not closed under the commutator")
        c[i, j] = coef
        c[j, i] = -coef
    if not exact:
        return c
    out = np.empty(c.shape, dtype=object)
    for idx in np.ndindex(c.shape):
        out[idx] = Fraction(c[idx]).limit_denominator(1000)
    return out


def _so_unit(n: int, a: int, b: int) -> np.ndarray:
    M = np.zeros((n, n))
    M[a, b], M[b, a] = 1.0, -1.0
    return M


def sphere(n: int, exact: bool = True) -> SpaceSpec:
    """S^n = SO(n+1)/SO(n) with the round metric of curvature 1."""
    N = n + 1
    h = [_so_unit(N, a, b) for a, b in combinations(range(1, N), 2)]
    m = [_so_unit(N, 0, a) for a in range(1, N)]
    c = constants_from_matrices(h + m, exact)
    return SpaceSpec(len(h), n, c, _metric(None, n, exact), name=f"S{n}")


def flag_su3(weights=(1, 1, 1), exact: bool = True) -> SpaceSpec:
    """SU(3)/T^2 with the metric scaling the three root planes by ``weights``."""
    def E(p, q):
        M = np.zeros((3, 3), dtype=complex)
        M[p, q] = 1.0
        return M

    h = [1j * np.diag([1.0, -1.0, 0.0]), 1j * np.diag([0.0, 1.0, -1.0])]
    m = []
    for p, q in ((0, 1), (1, 2), (0, 2)):
        m += [E(p, q) - E(q, p), 1j * (E(p, q) + E(q, p))]
    c = constants_from_matrices(h + m, exact)
    w = [x for x in weights for _ in range(2)]
    return SpaceSpec(2, 6, c, _metric(np.diag(w), 6, exact), name=f"flag-su3{tuple(weights)}")
