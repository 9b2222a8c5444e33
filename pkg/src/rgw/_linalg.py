"""Small dense linear algebra shared by every module.

Arrays are either float64 or ``object`` arrays of :class:`fractions.Fraction`.
Object arrays switch every routine to exact arithmetic, in which case
tolerances are ignored and comparisons are equalities.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

RANK_RTOL = 1e-9


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        # decimal reading of the literal, not the binary expansion
        return Fraction(repr(float(x)))
    # gmpy2 / sympy rationals
    return Fraction(int(x.numerator), int(x.denominator))


def exact_array(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = to_fraction(a[idx])
    return out


def as_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


def max_abs(a) -> float:
    """Largest absolute entry as a float (0 for empty arrays)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.dtype == object:
        return float(max(abs(x) for x in a.flat))
    return float(np.max(np.abs(a)))


def within(residual, tol: float, exact: bool) -> bool:
    return residual == 0 if exact else residual <= tol


def zeros_like_field(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out[...] = Fraction(0)
        return out
    return np.zeros(shape)


def half(exact: bool):
    return Fraction(1, 2) if exact else 0.5


def _to_domain(M: np.ndarray) -> DomainMatrix:
    rows = [[QQ(int(x.numerator), int(x.denominator)) for x in row] for row in M]
    return DomainMatrix(rows, M.shape, QQ)


def _from_domain(D: DomainMatrix) -> np.ndarray:
    rows = D.to_list()
    out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            out[i, j] = to_fraction(x)
    return out


def nullspace(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Columns spanning the right null space of ``M``.

    Float input uses singular values with the rank cut ``s <= rtol * s_max``;
    exact input uses row reduction over the rationals.
    """
    M = np.asarray(M)
    n = M.shape[1]
    if n == 0:
        return np.zeros((0, 0), dtype=M.dtype)
    if is_exact(M):
        if M.shape[0] == 0:
            return exact_array(np.eye(n, dtype=int))
        ns = _to_domain(M).nullspace()
        if ns.shape[0] == 0:
            return np.empty((n, 0), dtype=object)
        return _from_domain(ns).T
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(n)
    rank = int(np.sum(s > rtol * smax))
    return vt[rank:].T.copy()


def rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if is_exact(M):
        return int(_to_domain(M).rank())
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def inverse(M: np.ndarray) -> np.ndarray:
    if is_exact(M):
        return _from_domain(_to_domain(M).inv())
    return np.linalg.inv(M)


def orth(M: np.ndarray, rtol: float = RANK_RTOL, atol: float = 0.0) -> np.ndarray:
    """Euclidean-orthonormal basis (columns) of the column span of ``M``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((M.shape[0], 0))
    keep = s > max(rtol * s[0], atol)
    return u[:, keep]


def outside_residual(basis: np.ndarray, vectors: np.ndarray) -> float:
    """Largest norm of the part of ``vectors`` (columns) outside span(``basis``)."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.size == 0:
        return 0.0
    q = orth(basis)
    rest = vectors - q @ (q.T @ vectors)
    return float(np.max(np.linalg.norm(rest, axis=0)))


def in_span_exact(basis: np.ndarray, vectors: np.ndarray) -> bool:
    if vectors.size == 0:
        return True
    return rank(np.hstack([basis, vectors])) == rank(basis)


def is_positive_definite(g: np.ndarray) -> tuple[bool, float]:
    """Positive-definiteness and the smallest eigenvalue (or pivot, exact mode)."""
    if is_exact(g):
        # symmetric Gaussian elimination without pivoting: all pivots > 0 iff PD
        a = g.copy()
        n = a.shape[0]
        smallest = None
        for k in range(n):
            p = a[k, k]
            smallest = p if smallest is None else min(smallest, p)
            if p <= 0:
                return False, float(p)
            for i in range(k + 1, n):
                f = a[i, k] / p
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
        return True, float(smallest if smallest is not None else 0)
    sym = 0.5 * (g + g.T)
    lam = np.linalg.eigvalsh(sym)
    return bool(lam[0] > 0), float(lam[0])


def gram_orthonormalize(vectors: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the columns of ``vectors`` against the form ``gram``.

    Raises ``ValueError`` on (numerically) dependent input.
    """
    vectors = np.asarray(vectors, dtype=float)
    gram = np.asarray(gram, dtype=float)
    out = []
    scale = max(1.0, max_abs(vectors))
    for v in vectors.T:
        w = v.copy()
        for _ in range(2):
            for q in out:
                w = w - (q @ gram @ w) * q
        nrm2 = w @ gram @ w
        if nrm2 <= (1e-10 * scale) ** 2:
            raise ValueError("vectors are linearly dependent")
        out.append(w / np.sqrt(nrm2))
    if not out:
        return np.zeros((gram.shape[0], 0))
    return np.column_stack(out)


def sym_basis(n: int) -> list[tuple[int, int]]:
    """Index pairs (a <= b) parametrising symmetric n x n matrices."""
    return [(a, b) for a in range(n) for b in range(a, n)]


def sym_from_vector(x, n: int) -> np.ndarray:
    exact = isinstance(x, np.ndarray) and x.dtype == object
    S = zeros_like_field((n, n), exact)
    for t, (a, b) in enumerate(sym_basis(n)):
        S[a, b] = x[t]
        S[b, a] = x[t]
    return S


def sym_unit(a: int, b: int, n: int, exact: bool) -> np.ndarray:
    E = zeros_like_field((n, n), exact)
    one = Fraction(1) if exact else 1.0
    E[a, b] = one
    E[b, a] = one
    return E


def _common_denominator(a: np.ndarray) -> int:
    d = 1
    for x in a.flat:
        d = math.lcm(d, x.denominator)
    return d


def einsum(subscripts: str, *operands):
    """``np.einsum`` that stays fast on Fraction arrays.

    Exact operands are scaled to integers by a common denominator, contracted
    in int64 when the result provably fits and as Python ints otherwise,
    then divided once.
    """
    if not any(is_exact(op) for op in operands):
        return np.einsum(subscripts, *operands)
    ints, scale, bound = [], 1, 1
    for op in operands:
        op = exact_array(op) if not is_exact(op) else op
        d = _common_denominator(op) if op.size else 1
        num = np.empty(op.shape, dtype=object)
        for idx in np.ndindex(op.shape):
            x = op[idx]
            num[idx] = x.numerator * (d // x.denominator)
        scale *= d
        bound *= max((abs(v) for v in num.flat), default=0) + 1
        ints.append(num)
    terms = 1
    for op in operands:
        terms *= max(1, np.size(op))  # crude bound on the number of summed products
    if bound * terms < 2**62:
        out = np.einsum(subscripts, *[a.astype(np.int64) for a in ints])
    else:
        out = np.einsum(subscripts, *ints)
    out = np.asarray(out, dtype=object)
    res = np.empty(out.shape, dtype=object)
    for idx in np.ndindex(out.shape):
        res[idx] = Fraction(int(out[idx]), scale)
    return res if res.ndim else res[()]
