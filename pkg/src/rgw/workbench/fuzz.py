"""Seeded random instances: catalog families, random basis changes, random invariant metrics.

Instance ``k`` of seed ``s`` draws from ``numpy.random.default_rng([s, k])``,
so every instance is reproducible on its own from ``(seed, index)``.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence

import numpy as np

from rgw.core_algebra import SpaceSpec, invariant_symmetric_forms, validate_space
from rgw.workbench import catalog as cat
from rgw.workbench.document import SpaceDocument, from_spec

MAX_DIM = 8
MAX_COND = 1e3
_ATTEMPTS = 50


def _pad(spec: SpaceSpec, d: int) -> SpaceSpec:
    """Direct sum with an abelian factor up to dim_m = d."""
    extra = d - spec.dim_m
    return spec if extra == 0 else cat.direct_sum(spec, cat.abelian(extra))


def _ints(rng, lo, hi, size, nonzero=False):
    vals = rng.integers(lo, hi + 1, size=size)
    if nonzero:
        vals = np.where(vals == 0, 1, vals)
    return [int(v) for v in vals]


def _sample_family(rng: np.random.Generator, d: int, depth: int = 0) -> tuple[str, SpaceSpec, bool]:
    """(family, spec over the model basis, keep the model metric)."""
    options = ["abelian"]
    if d >= 2:
        options += ["solvable", "sphere2"]
        if depth == 0:
            options.append("sum")
    if d >= 3:
        options += ["heisenberg", "su2", "sl2", "e2", "su2-codazzi", "su2-codazzi", "sphere3"]
    if d == 6:
        options.append("flag")
    fam = options[rng.integers(len(options))]
    if fam == "abelian":
        return fam, cat.abelian(d), False
    if fam == "solvable":
        w = _ints(rng, -3, 3, d - 1, nonzero=True)
        nil = int(rng.integers(0, 2))
        return fam, cat.triangular(w, nil=nil), False
    if fam == "heisenberg":
        k = int(rng.integers(1, (d - 1) // 2 + 1))
        return fam, _pad(cat.heisenberg(k), d), False
    if fam in ("su2", "sl2"):
        a, b, c = _ints(rng, 1, 4, 3)
        if fam == "sl2":
            c = -c
        return fam, _pad(cat.milnor(a, b, c), d), False
    if fam == "e2":
        return fam, _pad(cat.euclidean_plane(), d), False
    if fam == "su2-codazzi":
        lam = sorted(int(x) for x in rng.choice(6, size=3, replace=False))
        return fam, _pad(cat.su2_codazzi(lam), d), True
    if fam == "sphere2":
        return fam, _pad(cat.sphere(2, exact=False), d), bool(rng.integers(0, 2))
    if fam == "sphere3":
        return fam, _pad(cat.sphere(3, exact=False), d), bool(rng.integers(0, 2))
    if fam == "flag":
        w = _ints(rng, 1, 3, 3)
        return fam, cat.flag_su3(w, exact=False), True
    # sum of two smaller Lie algebra families
    d1 = int(rng.integers(1, d))
    f1, s1, _ = _sample_family(rng, d1, depth + 1)
    f2, s2, _ = _sample_family(rng, d - d1, depth + 1)
    return f"{f1}+{f2}", cat.direct_sum(s1, s2), False


def _random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _random_invertible(rng, n):
    if n == 0:
        return np.zeros((0, 0))
    s = rng.uniform(0.5, 2.0, size=n)
    return _random_orthogonal(rng, n) @ np.diag(s) @ _random_orthogonal(rng, n)


def _random_metric(rng, spec: SpaceSpec) -> np.ndarray:
    n = spec.dim_m
    if spec.dim_h == 0:
        Q = _random_orthogonal(rng, n)
        return Q @ np.diag(rng.uniform(1.0, 10.0, size=n)) @ Q.T
    forms = invariant_symmetric_forms(spec)
    g0 = np.asarray(spec.gram, dtype=float)
    for _ in range(_ATTEMPTS):
        x = rng.standard_normal(len(forms))
        g = g0 + sum(t * F for t, F in zip(x, forms))
        g = 0.5 * (g + g.T)
        ev = np.linalg.eigvalsh(g)
        if ev[0] > 0 and ev[-1] / ev[0] <= 50:
            return g
    return g0


def change_basis(spec: SpaceSpec, Ph: np.ndarray, Pm: np.ndarray) -> SpaceSpec:
    """Express ``spec`` in the basis whose columns are ``diag(Ph, Pm)``."""
    h, m = spec.dim_h, spec.dim_m
    P = np.zeros((spec.dim, spec.dim))
    P[:h, :h], P[h:, h:] = Ph, Pm
    Pinv = np.linalg.inv(P)
    c = np.einsum("ai,bj,abk,lk->ijl", P, P, np.asarray(spec.structure_constants, dtype=float), Pinv)
    g = Pm.T @ np.asarray(spec.gram, dtype=float) @ Pm
    gens = tuple(np.linalg.inv(Pm) @ np.asarray(G, dtype=float) @ Pm for G in spec.isotropy_generators)
    return SpaceSpec(h, m, c, 0.5 * (g + g.T), gens, spec.name)


def fuzz_instance(seed: int, index: int, dims: int | Sequence[int]) -> SpaceDocument:
    dims = [dims] if isinstance(dims, (int, np.integer)) else list(dims)
    if not dims or any(not 1 <= d <= MAX_DIM for d in dims):
        raise ValueError(f"fuzz dimensions must lie in [1, {MAX_DIM}]")
    rng = np.random.default_rng([seed, index])
    d = int(dims[rng.integers(len(dims))])
    for _ in range(_ATTEMPTS):
        fam, model, keep = _sample_family(rng, d)
        model = model.to_float()
        if not keep:
            model = SpaceSpec(model.dim_h, model.dim_m, model.structure_constants, _random_metric(rng, model),
                              model.isotropy_generators, model.name)
        spec = change_basis(model, _random_invertible(rng, model.dim_h), _random_invertible(rng, model.dim_m))
        if validate_space(spec).valid:
            return from_spec(spec, f"fuzz-s{seed}-i{index}-{fam}")
    raise RuntimeError(f"no valid instance after {_ATTEMPTS} attempts (seed {seed}, index {index})")


def fuzz_instances(seed: int, count: int, dims: int | Sequence[int]) -> Iterator[SpaceDocument]:
    """Deterministic stream of ``count`` valid instances."""
    for index in range(count):
        yield fuzz_instance(seed, index, dims)
