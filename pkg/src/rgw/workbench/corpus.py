"""Built-in example instances."""

from __future__ import annotations

from rgw.workbench import catalog as cat
from rgw.workbench.document import SpaceDocument, from_spec


def _named(spec, name: str, exact: bool) -> SpaceDocument:
    spec = spec.to_exact() if exact else spec.to_float()
    return from_spec(spec, name)


def builtin_corpus() -> list[SpaceDocument]:
    """Hand-built instances, sorted by name; rational ones are flagged exact."""
    docs = [
        _named(cat.abelian(2), "abelian-R2", True),
        _named(cat.abelian(3), "abelian-R3", False),
        _named(cat.heisenberg(1), "heisenberg", True),
        _named(cat.su2(), "su2", False),
        _named(cat.su2(gram=[[1, 0, 0], [0, 1, 0], [0, 0, 2]]), "su2-berger", True),
        _named(cat.sphere(2), "S2", True),
        _named(cat.sphere(3), "S3", True),
        _named(cat.triangular([1]), "solvable-affine", False),
        _named(cat.euclidean_plane(), "euclidean-e2", True),
        _named(cat.su2_codazzi((0, 1, 3)), "su2-codazzi", True),
        _named(cat.flag_su3(), "flag-su3", True),
        _named(cat.flag_su3((1, 1, 2)), "flag-su3-squashed", True),
        _named(cat.direct_sum(cat.sphere(2), cat.abelian(1)), "S2xR", True),
    ]
    return sorted(docs, key=lambda d: d.name)


def corpus_by_name() -> dict[str, SpaceDocument]:
    return {d.name: d for d in builtin_corpus()}
