"""Flat-file description of a homogeneous space (``.rgw.json``).

Schema (JSON syntax, indices 1-based over the combined basis, h first)::

    {
      "format": "rgw-space/1",
      "name": "su2",
      "dim_h": 0,
      "dim_m": 3,
      "exact": false,
      "brackets": [{"i": 1, "j": 2, "coeffs": [0, 0, 1]}, ...],
      "metric": [1, 0, 0, 0, 1, 0, 0, 0, 1],
      "isotropy_generators": [[...dim_m**2 row-major...]]
    }

Only ``i < j`` is stored; ``i > j`` entries are folded by antisymmetry and
omitted pairs are zero. With ``"exact": true`` numbers may be written as
rational strings such as ``"1/2"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from rgw import _linalg as la
from rgw.core_algebra import SpaceSpec

FORMAT_TAG = "rgw-space/1"
_KEYS = {"format", "name", "dim_h", "dim_m", "exact", "brackets", "metric", "isotropy_generators"}


class DocumentError(ValueError):
    """Parse or schema error, annotated with a JSON path and, when known, line/column."""

    def __init__(self, message: str, path: str = "", line: int | None = None, col: int | None = None):
        self.path, self.line, self.col = path, line, col
        where = []
        if line is not None:
            where.append(f"line {line}, column {col}")
        if path:
            where.append(f"at {path}")
        super().__init__(f"{message} ({'; '.join(where)})" if where else message)


@dataclass
class SpaceDocument:
    name: str
    dim_h: int
    dim_m: int
    brackets: dict  # (i, j) 0-based with i < j -> coefficient vector over the combined basis
    metric: np.ndarray
    isotropy_generators: list = field(default_factory=list)
    exact: bool = False

    @property
    def dim(self) -> int:
        return self.dim_h + self.dim_m

    def to_spec(self) -> SpaceSpec:
        n = self.dim
        c = la.zeros_like_field((n, n, n), self.exact)
        for (i, j), v in self.brackets.items():
            c[i, j] = v
            c[j, i] = -v
        return SpaceSpec(
            self.dim_h, self.dim_m, c, self.metric.copy(), tuple(g.copy() for g in self.isotropy_generators), self.name
        )

    def as_exact(self) -> "SpaceDocument":
        if self.exact:
            return self
        return SpaceDocument(
            self.name,
            self.dim_h,
            self.dim_m,
            {k: la.exact_array(v) for k, v in self.brackets.items()},
            la.exact_array(self.metric),
            [la.exact_array(g) for g in self.isotropy_generators],
            True,
        )


def _num(x, exact: bool, path: str):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise DocumentError("expected a number", path)
    if exact:
        try:
            return la.to_fraction(x)
        except (ValueError, ZeroDivisionError):
            raise DocumentError(f"not a rational number: {x!r}", path) from None
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            raise DocumentError(f"not a number: {x!r}", path) from None
    return float(x)


def _vector(xs, n: int, exact: bool, path: str) -> np.ndarray:
    if not isinstance(xs, list):
        raise DocumentError("expected a list", path)
    if len(xs) != n:
        raise DocumentError(f"expected {n} entries, got {len(xs)}", path)
    vals = [_num(x, exact, f"{path}[{t}]") for t, x in enumerate(xs)]
    return np.array(vals, dtype=object if exact else float)


def _int(x, path: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise DocumentError("expected an integer", path)
    if lo is not None and x < lo:
        raise DocumentError(f"expected an integer >= {lo}", path)
    return x


def _no_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise DocumentError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def _is_symmetric(M: np.ndarray, exact: bool) -> bool:
    if exact:
        return bool(np.all(M == M.T))
    return la.max_abs(M - M.T) <= 1e-12 * max(1.0, la.max_abs(M))


def parse_document(text: str) -> SpaceDocument:
    """Parse and normalise a space document; raises :class:`DocumentError`."""
    try:
        raw = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as e:
        raise DocumentError(f"malformed JSON: {e.msg}", line=e.lineno, col=e.colno) from None
    if not isinstance(raw, dict):
        raise DocumentError("top level must be an object")
    unknown = set(raw) - _KEYS
    if unknown:
        raise DocumentError(f"unknown key {sorted(unknown)[0]!r}")
    fmt = raw.get("format", FORMAT_TAG)
    if fmt != FORMAT_TAG:
        raise DocumentError(f"unsupported format {fmt!r}", "format")
    for key in ("dim_h", "dim_m", "metric"):
        if key not in raw:
            raise DocumentError(f"missing key {key!r}")
    dim_h = _int(raw["dim_h"], "dim_h", 0)
    dim_m = _int(raw["dim_m"], "dim_m", 1)
    name = raw.get("name", "")
    if not isinstance(name, str):
        raise DocumentError("expected a string", "name")
    exact = raw.get("exact", False)
    if not isinstance(exact, bool):
        raise DocumentError("expected true or false", "exact")
    n = dim_h + dim_m

    brackets: dict = {}
    entries = raw.get("brackets", [])
    if not isinstance(entries, list):
        raise DocumentError("expected a list", "brackets")
    for t, e in enumerate(entries):
        path = f"brackets[{t}]"
        if not isinstance(e, dict) or set(e) != {"i", "j", "coeffs"}:
            raise DocumentError("bracket entries need exactly the keys i, j, coeffs", path)
        i, j = _int(e["i"], path + ".i"), _int(e["j"], path + ".j")
        for key, v in (("i", i), ("j", j)):
            if not 1 <= v <= n:
                raise DocumentError(f"index {v} out of range 1..{n}", f"{path}.{key}")
        if i == j:
            raise DocumentError("diagonal bracket entry", path)
        v = _vector(e["coeffs"], n, exact, path + ".coeffs")
        key = (min(i, j) - 1, max(i, j) - 1)
        if key in brackets:
            raise DocumentError(f"duplicate bracket entry ({key[0] + 1}, {key[1] + 1})", path)
        brackets[key] = v if i < j else -v

    metric = _vector(raw["metric"], dim_m * dim_m, exact, "metric").reshape(dim_m, dim_m)
    if not _is_symmetric(metric, exact):
        raise DocumentError("non-symmetric metric", "metric")
    gens = raw.get("isotropy_generators", [])
    if not isinstance(gens, list):
        raise DocumentError("expected a list", "isotropy_generators")
    generators = [
        _vector(g, dim_m * dim_m, exact, f"isotropy_generators[{t}]").reshape(dim_m, dim_m) for t, g in enumerate(gens)
    ]
    return SpaceDocument(name, dim_h, dim_m, brackets, metric, generators, exact)


def _fmt(x, exact: bool):
    if exact:
        x = la.to_fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def to_json_obj(doc: SpaceDocument) -> dict:
    ex = doc.exact
    entries = [
        {"i": i + 1, "j": j + 1, "coeffs": [_fmt(x, ex) for x in v]}
        for (i, j), v in sorted(doc.brackets.items())
        if any(x != 0 for x in v)
    ]
    obj = {
        "format": FORMAT_TAG,
        "name": doc.name,
        "dim_h": doc.dim_h,
        "dim_m": doc.dim_m,
        "exact": ex,
        "brackets": entries,
        "metric": [_fmt(x, ex) for x in np.asarray(doc.metric).ravel()],
    }
    if doc.isotropy_generators:
        obj["isotropy_generators"] = [[_fmt(x, ex) for x in np.asarray(g).ravel()] for g in doc.isotropy_generators]
    return obj


def serialize(doc: SpaceDocument) -> str:
    """Canonical text: sorted nonzero brackets, one entry per line."""
    obj = to_json_obj(doc)
    lines = ["{"]
    items = list(obj.items())
    for t, (k, v) in enumerate(items):
        comma = "," if t < len(items) - 1 else ""
        if k == "brackets" and v:
            body = ",\n".join("    " + json.dumps(e) for e in v)
            lines.append(f'  "brackets": [\n{body}\n  ]{comma}')
        else:
            lines.append(f"  {json.dumps(k)}: {json.dumps(v)}{comma}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def from_spec(spec: SpaceSpec, name: str | None = None) -> SpaceDocument:
    c = spec.structure_constants
    n = spec.dim
    brackets = {(i, j): np.array(c[i, j]) for i in range(n) for j in range(i + 1, n) if any(x != 0 for x in c[i, j])}
    return SpaceDocument(
        spec.name if name is None else name,
        spec.dim_h,
        spec.dim_m,
        brackets,
        np.array(spec.gram),
        [np.array(g) for g in spec.isotropy_generators],
        spec.exact,
    )


def load_document(path: str) -> SpaceDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from None
    except UnicodeDecodeError:
        raise DocumentError(f"{path} is not UTF-8 text") from None
    return parse_document(text)
