"""Reductive decompositions g = h + m given by structure constants.

Index conventions, used by every module of the package:

* ``structure_constants[i, j, k]`` is the coefficient of ``f_k`` in
  ``[f_i, f_j]`` over the combined basis, ``h``-basis first.
* Vectors of ``m`` are coefficient arrays over the ``m``-basis ``e_1..e_n``.
* Linear maps of ``m`` are matrices acting on column vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from rgw import _linalg as la

if TYPE_CHECKING:
    from rgw.codazzi import SpectralDecomp

DEFAULT_TOL = 1e-9


class StructureError(ValueError):
    """Coefficient blocks whose shapes do not describe a space."""


class InvalidSpaceError(ValueError):
    """A space failing one of the invariants checked by :func:`validate_space`."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        bad = ", ".join(report.failures())
        super().__init__(f"invalid space {report.name!r}: {bad}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpaceSpec:
    """Structure constants of g over an h-then-m basis plus a metric on m."""

    dim_h: int
    dim_m: int
    structure_constants: np.ndarray
    gram: np.ndarray
    isotropy_generators: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.dim_h < 0 or self.dim_m < 0:
            raise StructureError("dimensions must be non-negative")
        n = self.dim_h + self.dim_m
        c = np.asarray(self.structure_constants)
        g = np.asarray(self.gram)
        gens = [np.asarray(p) for p in self.isotropy_generators]
        if c.shape != (n, n, n):
            raise StructureError(f"structure constants have shape {c.shape}, expected {(n, n, n)}")
        if g.shape != (self.dim_m, self.dim_m):
            raise StructureError(f"gram has shape {g.shape}, expected {(self.dim_m, self.dim_m)}")
        for p in gens:
            if p.shape != (self.dim_m, self.dim_m):
                raise StructureError(f"isotropy generator has shape {p.shape}")
        exact = any(a.dtype == object for a in [c, g, *gens])
        conv = la.exact_array if exact else (lambda a: np.array(a, dtype=float))
        object.__setattr__(self, "structure_constants", _freeze(conv(c)))
        object.__setattr__(self, "gram", _freeze(conv(g)))
        object.__setattr__(self, "isotropy_generators", tuple(_freeze(conv(p)) for p in gens))

    @property
    def dim(self) -> int:
        return self.dim_h + self.dim_m

    @property
    def exact(self) -> bool:
        return self.gram.dtype == object

    def to_float(self) -> "SpaceSpec":
        if not self.exact:
            return self
        return SpaceSpec(
            self.dim_h,
            self.dim_m,
            la.as_float(self.structure_constants),
            la.as_float(self.gram),
            tuple(la.as_float(p) for p in self.isotropy_generators),
            self.name,
        )

    def to_exact(self) -> "SpaceSpec":
        if self.exact:
            return self
        return SpaceSpec(
            self.dim_h,
            self.dim_m,
            la.exact_array(self.structure_constants),
            la.exact_array(self.gram),
            tuple(la.exact_array(p) for p in self.isotropy_generators),
            self.name,
        )

    @cached_property
    def algebra(self) -> "MAlgebra":
        return project_algebra(self)


@dataclass(frozen=True)
class Check:
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    name: str
    tol: float
    exact: bool
    checks: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, c in self.checks.items() if not c.passed]


def _jacobiator(c: np.ndarray) -> np.ndarray:
    """J[i,j,k,:] = [[f_i,f_j],f_k] + [[f_j,f_k],f_i] + [[f_k,f_i],f_j]."""
    return (
        la.einsum("ijl,lkm->ijkm", c, c)
        + la.einsum("jkl,lim->ijkm", c, c)
        + la.einsum("kil,ljm->ijkm", c, c)
    )


def validate_space(spec: SpaceSpec, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Evaluate every defining invariant of a reductive space with an invariant metric.

    Shapes are checked when the SpaceSpec is built; ``dim_m == 0`` is rejected here
    with :class:`StructureError`. In exact mode each residual must vanish.
    """
    if spec.dim_m == 0:
        raise StructureError("dim_m = 0: nothing to analyse")
    exact = spec.exact
    c, g = spec.structure_constants, spec.gram
    h = spec.dim_h
    report = ValidationReport(spec.name, tol, exact)

    def add(name, residual_array, detail=""):
        r = la.max_abs(residual_array)
        report.checks[name] = Check(la.within(r, tol, exact), r, detail)

    add("antisymmetry", c + c.transpose(1, 0, 2))
    add("jacobi", _jacobiator(c))
    add("h_subalgebra", c[:h, :h, h:])
    add("reductive", c[:h, h:, :h])
    add("gram_symmetric", g - g.T)
    pd, lam_min = la.is_positive_definite(g)
    if not exact:
        pd = pd and lam_min > tol
    report.checks["gram_positive_definite"] = Check(pd, max(0.0, -lam_min), f"min eigenvalue {lam_min:.3e}")
    action = c[:h, h:, h:].transpose(0, 2, 1)
    add("metric_ad_h_invariant", la.einsum("wki,kj->wij", action, g) + la.einsum("ik,wkj->wij", g, action))
    if spec.isotropy_generators:
        bm = c[h:, h:, h:]
        res_g, res_b = [], []
        for p in spec.isotropy_generators:
            res_g.append(la.max_abs(p.T @ g @ p - g))
            lhs = la.einsum("ijl,kl->ijk", bm, p)
            rhs = la.einsum("ai,bj,abk->ijk", p, p, bm)
            res_b.append(la.max_abs(lhs - rhs))
        report.checks["isotropy_preserves_gram"] = Check(
            la.within(max(res_g), tol, exact), max(res_g)
        )
        report.checks["isotropy_preserves_bracket"] = Check(
            la.within(max(res_b), tol, exact), max(res_b)
        )
    return report


def require_valid(spec: SpaceSpec, tol: float = DEFAULT_TOL) -> None:
    report = validate_space(spec, tol)
    if not report.valid:
        raise InvalidSpaceError(report)


@dataclass(frozen=True, eq=False)
class MAlgebra:
    """The non-associative algebra (m, [.,.]_m) with the h-part of the bracket.

    ``bracket_m[i, j, k]``: coefficient of ``e_k`` in ``[e_i, e_j]_m``;
    ``bracket_h[i, j, w]``: coefficient of the ``w``-th h-basis vector in ``[e_i, e_j]_h``;
    ``h_action[w]``: matrix of ``ad(W_w)`` restricted to m.
    """

    dim: int
    bracket_m: np.ndarray
    bracket_h: np.ndarray
    h_action: np.ndarray

    @property
    def exact(self) -> bool:
        return self.bracket_m.dtype == object

    @property
    def scale(self) -> float:
        return max(1.0, la.max_abs(self.bracket_m))

    @cached_property
    def ad_matrices(self) -> np.ndarray:
        """``ad[i]`` is the matrix of ``ad_m(e_i)``."""
        return self.bracket_m.transpose(0, 2, 1)

    def ad(self, x) -> np.ndarray:
        return la.einsum("i,ikj->kj", np.asarray(x), self.ad_matrices)

    def bracket(self, x, y) -> np.ndarray:
        return la.einsum("i,j,ijk->k", np.asarray(x), np.asarray(y), self.bracket_m)

    def bracket_in(self, basis: np.ndarray) -> np.ndarray:
        """Bracket table re-expressed over the columns of an invertible ``basis``."""
        basis = np.asarray(basis, dtype=float)
        b = la.as_float(self.bracket_m)
        out = la.einsum("ia,jb,ijk->abk", basis, basis, b)
        return la.einsum("abk,ck->abc", out, np.linalg.inv(basis))

    def to_float(self) -> "MAlgebra":
        if not self.exact:
            return self
        return MAlgebra(
            self.dim, la.as_float(self.bracket_m), la.as_float(self.bracket_h), la.as_float(self.h_action)
        )


def project_algebra(spec: SpaceSpec) -> MAlgebra:
    h = spec.dim_h
    c = spec.structure_constants
    return MAlgebra(
        spec.dim_m,
        _freeze(c[h:, h:, h:].copy()),
        _freeze(c[h:, h:, :h].copy()),
        _freeze(c[:h, h:, h:].transpose(0, 2, 1).copy()),
    )


def killing_form(alg: MAlgebra) -> np.ndarray:
    """beta(X, Y) = tr(ad_m(X) ad_m(Y)) as a matrix over the m-basis."""
    b = alg.bracket_m
    return la.einsum("xjk,ykj->xy", b, b)


def killing_split(alg: MAlgebra, decomp: "SpectralDecomp", k: int) -> list[tuple[float, float, float]]:
    """Split beta(Z, Z) for each basis vector Z of block ``k``.

    Returns ``(beta(Z,Z), beta_k(Z,Z), tr[(pi_perp ad(Z)|_perp)^2])`` per basis
    vector, where ``beta_k`` is the Killing form of the block algebra.
    The first entry equals the sum of the other two whenever the block is a
    subalgebra; for other blocks the cross term ``2 tr(B C)`` is left over.
    """
    if not 0 <= k < decomp.r:
        raise IndexError(f"block index {k} out of range for r = {decomp.r}")
    alg = alg.to_float()
    g = np.asarray(decomp.gram, dtype=float)
    bk = decomp.blocks[k]
    others = [b for i, b in enumerate(decomp.blocks) if i != k]
    bp = np.hstack(others) if others else np.zeros((alg.dim, 0))
    out = []
    for z in bk.T:
        adz = alg.ad(z)
        inner = bk.T @ g @ adz @ bk
        outer = bp.T @ g @ adz @ bp
        out.append((float(np.trace(adz @ adz)), float(np.trace(inner @ inner)), float(np.trace(outer @ outer))))
    return out


# --- subspace tests --------------------------------------------------------


def _check_subspace(S: np.ndarray, n: int) -> np.ndarray:
    S = np.asarray(S)
    if S.ndim == 1:
        S = S[:, None]
    if S.shape[0] != n:
        raise ValueError(f"subspace vectors must have length {n}")
    if la.rank(S) < S.shape[1]:
        raise ValueError("subspace columns are linearly dependent")
    return S


def _products_in(alg: MAlgebra, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    v = la.einsum("ia,jb,ijk->kab", left, right, alg.bracket_m)
    return v.reshape(alg.dim, -1)


def _contained(alg: MAlgebra, S: np.ndarray, vectors: np.ndarray, tol: float) -> bool:
    if alg.exact and la.is_exact(S):
        return la.in_span_exact(S, vectors)
    scale = alg.scale * max(1.0, la.max_abs(S)) ** 2
    return la.outside_residual(la.as_float(S), la.as_float(vectors)) <= tol * scale


def _identity(alg: MAlgebra) -> np.ndarray:
    if alg.exact:
        return la.exact_array(np.eye(alg.dim, dtype=int))
    return np.eye(alg.dim)


def is_ideal(alg: MAlgebra, subspace, tol: float = DEFAULT_TOL) -> bool:
    """[m, S]_m is contained in S (the product is antisymmetric, so one side suffices)."""
    S = _check_subspace(subspace, alg.dim)
    if S.shape[1] == 0:
        return True
    return _contained(alg, S, _products_in(alg, _identity(alg), S), tol)


def is_subalgebra(alg: MAlgebra, subspace, tol: float = DEFAULT_TOL) -> bool:
    S = _check_subspace(subspace, alg.dim)
    if S.shape[1] == 0:
        return True
    return _contained(alg, S, _products_in(alg, S, S), tol)


def is_abelian(alg: MAlgebra, subspace, tol: float = DEFAULT_TOL) -> bool:
    S = _check_subspace(subspace, alg.dim)
    prods = _products_in(alg, S, S)
    if alg.exact and la.is_exact(S):
        return la.max_abs(prods) == 0
    return la.max_abs(prods) <= tol * alg.scale * max(1.0, la.max_abs(S)) ** 2


# --- nilpotency ------------------------------------------------------------


def _bracket_span(alg: MAlgebra, U: np.ndarray, V: np.ndarray, tol: float) -> np.ndarray:
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros((alg.dim, 0))
    prods = _products_in(alg, U, V)
    return la.orth(prods, atol=tol * alg.scale)


def _same_span(U: np.ndarray, V: np.ndarray, tol: float) -> bool:
    if U.shape[1] != V.shape[1]:
        return False
    if U.shape[1] == 0:
        return True
    return la.outside_residual(U, V) <= np.sqrt(tol)


def lower_powers(alg: MAlgebra, tol: float = DEFAULT_TOL, max_steps: int | None = None) -> list[np.ndarray]:
    """Orthonormal bases of m^1, m^2, ... with m^t = sum_{p+q=t} [m^p, m^q]_m.

    The list stops at the first zero power, or once the chain has been
    constant over the second half of its history, or after ``max_steps``.
    """
    alg = alg.to_float()
    n = alg.dim
    if max_steps is None:
        max_steps = 4 * n + 8
    powers = [None, np.eye(n)]
    t = 1
    while powers[t].shape[1] > 0 and t < max_steps:
        t += 1
        spans = [_bracket_span(alg, powers[p], powers[t - p], tol) for p in range(1, t)]
        nxt = la.orth(np.hstack(spans), atol=tol * alg.scale) if spans else np.zeros((n, 0))
        powers.append(nxt)
        half = (t + 1) // 2
        if nxt.shape[1] > 0 and t >= 3 and all(_same_span(powers[s], nxt, tol) for s in range(half, t)):
            break
    return powers[1:]


def is_nilpotent(alg: MAlgebra, tol: float = DEFAULT_TOL) -> tuple[bool, int | None]:
    """(True, least t with m^t = 0) for nilpotent algebras, else (False, None)."""
    powers = lower_powers(alg, tol)
    if powers[-1].shape[1] == 0:
        return True, len(powers)
    return False, None


# --- split-solvability -----------------------------------------------------


@dataclass
class SplitSolvability:
    verdict: str  # "yes" | "no" | "undetermined"
    chain: list = field(default_factory=list)
    witness: np.ndarray | None = None
    witness_eigenvalues: np.ndarray | None = None


def _null_atol(M: np.ndarray, atol: float) -> np.ndarray:
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > atol))
    return vt[rank:].T


def _largest_invariant(E: np.ndarray, ops: list, atol: float) -> np.ndarray:
    """Largest subspace of span(E) mapped into itself by every operator."""
    Q = la.orth(E)
    while Q.shape[1] > 0:
        P = np.eye(Q.shape[0]) - Q @ Q.T
        stacked = np.vstack([P @ A @ Q for A in ops])
        y = _null_atol(stacked, atol)
        if y.shape[1] == Q.shape[1]:
            return Q
        Q = la.orth(Q @ y) if y.shape[1] else np.zeros((Q.shape[0], 0))
    return Q


def _common_eigvec(ops: list, rng: np.random.Generator, atol: float, depth: int = 0) -> np.ndarray | None:
    d = ops[0].shape[0]
    if d == 1:
        return np.ones(1)
    if all(la.max_abs(A - (np.trace(A) / d) * np.eye(d)) <= atol for A in ops):
        return np.eye(d)[:, 0]
    if depth > 2 * d + 2:
        return None
    C = sum(t * A for t, A in zip(rng.standard_normal(len(ops)), ops))
    w = np.linalg.eigvals(C)
    real = np.sort(w[np.abs(w.imag) <= 1e-5 * max(1.0, np.abs(w).max())].real)
    clusters: list[list[float]] = []
    for x in real:
        if clusters and x - clusters[-1][-1] <= 1e-6 * max(1.0, np.abs(real).max()):
            clusters[-1].append(x)
        else:
            clusters.append([x])
    for cl in clusters:
        mu = float(np.mean(cl))
        E = _null_atol(C - mu * np.eye(d), atol * max(1.0, la.max_abs(C)))
        if E.shape[1] == 0:
            continue
        E = _largest_invariant(E, ops, atol)
        if E.shape[1] == 0:
            continue
        if E.shape[1] == 1:
            return E[:, 0]
        sub = [E.T @ A @ E for A in ops]
        v = _common_eigvec(sub, rng, atol, depth + 1)
        if v is not None:
            return E @ v
    return None


def _is_common_eigvec(ops: list, v: np.ndarray, atol: float) -> bool:
    v = v / np.linalg.norm(v)
    return all(np.linalg.norm(A @ v - (v @ A @ v) * v) <= atol for A in ops)


def _find_flag(ops: list, rng: np.random.Generator, atol: float) -> list | None:
    """Bases of a complete flag V = F_0 > F_1 > ... > 0 invariant under all ``ops``."""
    d = ops[0].shape[0]
    if d == 0:
        return [np.zeros((0, 0))]
    # an invariant hyperplane is the kernel of a common left eigenvector
    phi = _common_eigvec([A.T for A in ops], rng, atol)
    if phi is None or not _is_common_eigvec([A.T for A in ops], phi, atol * 10):
        return None
    Q = la.nullspace(phi[None, :])
    Q = la.orth(Q)
    sub = [Q.T @ A @ Q for A in ops]
    rest = _find_flag(sub, rng, atol) if d > 1 else [np.zeros((0, 0))]
    if rest is None:
        return None
    return [np.eye(d)] + [Q @ F if F.shape[0] else np.zeros((d, 0)) for F in rest]


def _imag_witness(alg: MAlgebra, rng: np.random.Generator, probes: int):
    n = alg.dim
    candidates = list(np.eye(n)) + [rng.standard_normal(n) for _ in range(probes)]
    for x in candidates:
        A = alg.ad(x)
        w = np.linalg.eigvals(A)
        if np.any(np.abs(w.imag) > 1e-5 * max(1.0, np.linalg.norm(A))):
            return x, w
    return None


def is_split_solvable(
    alg: MAlgebra, tol: float = DEFAULT_TOL, seed: int = 0, probes: int = 4, retries: int = 8
) -> SplitSolvability:
    """Decide whether m has a complete flag of ideals of m.

    A non-real eigenvalue of some ad_m(X) proves "no". Otherwise a common
    invariant hyperplane of all ad_m(e_i) is searched with seeded random
    combinations and the search recurses inside it; the resulting chain is
    re-verified with :func:`is_ideal`.
    """
    alg = alg.to_float()
    n = alg.dim
    rng = np.random.default_rng(seed)
    hit = _imag_witness(alg, rng, probes)
    if hit is not None:
        return SplitSolvability("no", witness=hit[0], witness_eigenvalues=hit[1])
    ops = list(alg.ad_matrices)
    atol = max(tol, 1e-7) * alg.scale
    for _ in range(retries):
        flag = _find_flag(ops, rng, atol)
        if flag is not None and verify_chain(alg, flag, max(tol, 1e-7)):
            return SplitSolvability("yes", chain=flag)
    return SplitSolvability("undetermined")


def verify_chain(alg: MAlgebra, chain: list, tol: float = DEFAULT_TOL) -> bool:
    """Each member is an ideal of m of codimension one in its predecessor."""
    n = alg.dim
    if len(chain) != n + 1 or chain[0].shape[1] != n or chain[-1].shape[1] != 0:
        return False
    for prev, cur in zip(chain, chain[1:]):
        if cur.shape[1] != prev.shape[1] - 1:
            return False
        if cur.shape[1] == 0:
            continue
        if la.outside_residual(prev, cur) > tol * alg.scale:
            return False
        if not is_ideal(alg, cur, tol):
            return False
    return True


# --- invariant forms -------------------------------------------------------


def invariant_symmetric_forms(spec: SpaceSpec, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Basis of symmetric forms on m annihilated by ad(h) and fixed by the isotropy generators."""
    n = spec.dim_m
    exact = spec.exact
    alg = spec.algebra
    units = [la.sym_unit(a, b, n, exact) for a, b in la.sym_basis(n)]
    cols = []
    for E in units:
        eqs = [(M.T @ E + E @ M).ravel() for M in alg.h_action]
        eqs += [(P.T @ E @ P - E).ravel() for P in spec.isotropy_generators]
        cols.append(np.concatenate(eqs) if eqs else la.zeros_like_field(0, exact))
    system = np.column_stack(cols) if cols else la.zeros_like_field((0, 0), exact)
    null = la.nullspace(system)
    return [la.sym_from_vector(null[:, t], n) for t in range(null.shape[1])]
