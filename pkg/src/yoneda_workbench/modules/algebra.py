"""
Finite-dimensional split algebras Λ = E ⊕ 𝛬̄ given by structure constants.

E is spanned by a complete set of orthogonal idempotents e_1..e_r and every basis
element b satisfies e_i b e_j = b for its bidegree (i, j). The non-idempotent basis
elements ("letters") span 𝛬̄; tensor powers of 𝛬̄ over E are enumerated as composable
words of letters.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Any

import numpy as np

from . import linalg
from .errors import AlgebraValidationError, ParseError, QuiverError
from .linalg import FieldSpec

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

_TERM = re.compile(r"\s*([+-]?)\s*([^+-]+)")


def read_document(source: str | Path | dict) -> dict:
    """Load a TOML document from a path (or pass a parsed dict through)"""
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError as e:
        raise ParseError(f"No such document: {path}", str(path)) from e
    except tomllib.TOMLDecodeError as e:
        raise ParseError(f"Invalid TOML in {path}: {e}", str(path)) from e


def parse_combination(text: str, field: FieldSpec) -> list[tuple[Any, list[str]]]:
    """Parse '2*b*a - x + 1/2*y' into [(coefficient, factor names), ...].

    Leading numeric factors form the coefficient; the remaining factors are names.
    '0' (or an empty string) is the empty combination.
    """
    text = str(text).strip()
    if text in ("", "0"):
        return []
    terms = []
    pos = 0
    for match in _TERM.finditer(text):
        if match.start() != pos:
            raise ParseError(f"Cannot parse linear combination '{text}'", text)
        pos = match.end()
        sign, body = match.group(1), match.group(2).strip()
        factors = [f.strip() for f in body.split("*") if f.strip()]
        coeff = field.scalar(-1 if sign == "-" else 1)
        names = []
        for f in factors:
            if not names and re.fullmatch(r"\d+(/\d+)?", f):
                coeff = field.scalar(coeff * field.scalar(f))
            else:
                names.append(f)
        if not names:
            raise ParseError(f"Term '{body}' has no basis element", text)
        terms.append((coeff, names))
    if pos != len(text):
        raise ParseError(f"Cannot parse linear combination '{text}'", text)
    return terms


@dataclass(eq=False)
class Algebra:
    """A split algebra with basis b_0..b_{d-1} and structure constants c[i, j, k].

    Attributes:
        field: Ground field.
        labels: Basis labels.
        structure: c[i, j, :] holds the coordinates of b_i·b_j.
        idempotents: Basis indices of e_1..e_r (vertex v is idempotents[v]).
        left: Left vertex of every basis element.
        right: Right vertex of every basis element.
        name: Display name.
    """

    field: FieldSpec
    labels: tuple[str, ...]
    structure: np.ndarray
    idempotents: tuple[int, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        d = len(self.labels)
        if self.structure.shape != (d, d, d):
            raise AlgebraValidationError(f"Structure constants must have shape {(d, d, d)}", self.structure.shape)
        if len(self.left) != d or len(self.right) != d:
            raise AlgebraValidationError("Every basis element needs a bidegree", self.name)
        self.structure = self.field.array(self.structure)

    def __repr__(self) -> str:
        return f"Algebra({self.name or 'unnamed'}, dim={self.dim}, vertices={self.num_vertices}, {self.field.name})"

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def num_vertices(self) -> int:
        return len(self.idempotents)

    @cached_property
    def complement(self) -> tuple[int, ...]:
        """Basis indices of the letters spanning 𝛬̄"""
        idem = set(self.idempotents)
        return tuple(i for i in range(self.dim) if i not in idem)

    @cached_property
    def letter_of(self) -> dict[int, int]:
        return {b: pos for pos, b in enumerate(self.complement)}

    @property
    def num_letters(self) -> int:
        return len(self.complement)

    def letter_left(self, letter: int) -> int:
        return self.left[self.complement[letter]]

    def letter_right(self, letter: int) -> int:
        return self.right[self.complement[letter]]

    def letter_label(self, letter: int) -> str:
        return self.labels[self.complement[letter]]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as e:
            raise ParseError(f"Unknown basis element '{label}'", label) from e

    @cached_property
    def left_regular(self) -> tuple[np.ndarray, ...]:
        """Matrices of left multiplication: left_regular[i][k, j] = c[i, j, k]"""
        return tuple(np.ascontiguousarray(self.structure[i].T) for i in range(self.dim))

    @cached_property
    def right_regular(self) -> tuple[np.ndarray, ...]:
        """Matrices of right multiplication: right_regular[j][k, i] = c[i, j, k]"""
        return tuple(np.ascontiguousarray(self.structure[:, j, :].T) for j in range(self.dim))

    def product(self, i: int, j: int) -> np.ndarray:
        return self.structure[i, j]

    def multiply(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Product of two elements given in coordinates"""
        out = self.field.zeros(self.dim)
        for i in np.flatnonzero((u != 0).astype(bool)):
            out = self.field.add(out, self.field.scale(self.field.matmul(self.left_regular[i], v), u[i]))
        return out

    def basis_vector(self, i: int) -> np.ndarray:
        v = self.field.zeros(self.dim)
        v[i] = self.field.scalar(1)
        return v

    @cached_property
    def unit(self) -> np.ndarray:
        u = self.field.zeros(self.dim)
        for e in self.idempotents:
            u[e] = self.field.scalar(1)
        return u

    def project(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of the image in 𝛬̄ (idempotent components dropped)"""
        return v[list(self.complement)]

    @cached_property
    def _letter_products(self) -> dict[tuple[int, int], tuple[tuple[int, Any], ...]]:
        table = {}
        for a in range(self.num_letters):
            for b in range(self.num_letters):
                prod = self.project(self.product(self.complement[a], self.complement[b]))
                table[(a, b)] = tuple((int(k), prod[k]) for k in np.flatnonzero((prod != 0).astype(bool)))
        return table

    def letter_product(self, a: int, b: int) -> tuple[tuple[int, Any], ...]:
        """Projection of (letter a)·(letter b) to 𝛬̄ as (letter, coefficient) pairs"""
        return self._letter_products[(a, b)]

    def validate(self) -> None:
        """Check the algebra axioms.

        Raises:
            AlgebraValidationError: naming the first failing triple, element or idempotent.
        """
        f = self.field
        d = self.dim
        c = self.structure
        flat = c.reshape(d * d, d)
        # (b_i b_j) b_k and b_i (b_j b_k), both indexed [i, j, k, l]
        lhs = f.matmul(flat, c.reshape(d, d * d)).reshape(d, d, d, d)
        perm = np.ascontiguousarray(c.transpose(1, 0, 2)).reshape(d, d * d)
        rhs = f.matmul(flat, perm).reshape(d, d, d, d).transpose(2, 0, 1, 3)
        bad = np.argwhere(np.any((lhs != rhs).astype(bool), axis=3))
        if bad.size:
            i, j, k = (int(x) for x in bad[0])
            raise AlgebraValidationError(
                f"Associativity fails for ({self.labels[i]}, {self.labels[j]}, {self.labels[k]})", (i, j, k)
            )
        for v, e in enumerate(self.idempotents):
            for w, e2 in enumerate(self.idempotents):
                expected = self.basis_vector(e) if v == w else f.zeros(d)
                if not np.array_equal(c[e, e2], expected):
                    raise AlgebraValidationError(
                        f"Idempotents {self.labels[e]}, {self.labels[e2]} are not orthogonal idempotents", (e, e2)
                    )
        for b in range(d):
            bv = self.basis_vector(b)
            if not np.array_equal(self.multiply(self.unit, bv), bv) or not np.array_equal(
                self.multiply(bv, self.unit), bv
            ):
                raise AlgebraValidationError(f"Sum of idempotents is not a unit on {self.labels[b]}", b)
            for v, e in enumerate(self.idempotents):
                left_expected = bv if self.left[b] == v else f.zeros(d)
                right_expected = bv if self.right[b] == v else f.zeros(d)
                if not np.array_equal(c[e, b], left_expected) or not np.array_equal(c[b, e], right_expected):
                    raise AlgebraValidationError(f"Basis element {self.labels[b]} is not bidegree-homogeneous", b)
        logger.debug(f"Validated {self!r}")

    def is_basic(self) -> bool:
        """Whether 𝛬̄ is a nilpotent two-sided ideal, i.e. the radical (so E = Λ/rad Λ)"""
        f = self.field
        comp = list(self.complement)
        if not comp:
            return True
        for a in comp:
            for b in comp:
                prod = self.product(a, b)
                if any(prod[e] != 0 for e in self.idempotents):
                    return False
        power = f.identity(self.dim)[:, comp]
        for _ in range(self.dim + 1):
            images = [f.matmul(self.left_regular[a], power) for a in comp]
            power = linalg.image_basis(f, linalg.hstack(f, images, self.dim))
            if power.shape[1] == 0:
                return True
        return False

    def opposite(self) -> Algebra:
        return Algebra(
            field=self.field,
            labels=self.labels,
            structure=np.ascontiguousarray(self.structure.transpose(1, 0, 2)),
            idempotents=self.idempotents,
            left=self.right,
            right=self.left,
            name=f"{self.name}^op",
        )

    def tensor_power(self, p: int) -> TensorPower:
        return _tensor_power(self, p)


class TensorPower:
    """Basis of 𝛬̄^{⊗_E p}: composable words of letters.

    Word t has letters `words[t]`, left vertex `left[t]` and right vertex `right[t]`.
    For p = 0 there is one empty word per vertex.
    """

    def __init__(self, algebra: Algebra, p: int):
        self.algebra = algebra
        self.p = p
        self.words: list[tuple[int, ...]] = []
        self.left: list[int] = []
        self.right: list[int] = []
        a = algebra
        if p == 0:
            self.words = [()] * a.num_vertices
            self.left = list(range(a.num_vertices))
            self.right = list(range(a.num_vertices))
        elif p == 1:
            self.words = [(letter,) for letter in range(a.num_letters)]
            self.left = [a.letter_left(letter) for letter in range(a.num_letters)]
            self.right = [a.letter_right(letter) for letter in range(a.num_letters)]
        else:
            prev = a.tensor_power(p - 1)
            for t, w in enumerate(prev.words):
                for letter in range(a.num_letters):
                    if a.letter_left(letter) == prev.right[t]:
                        self.words.append(w + (letter,))
                        self.left.append(prev.left[t])
                        self.right.append(a.letter_right(letter))
        self._index = {w: t for t, w in enumerate(self.words)} if p else {}
        self._splits: dict[tuple[int, int], tuple[int, int]] = {}

    def __len__(self) -> int:
        return len(self.words)

    def __repr__(self) -> str:
        return f"TensorPower(p={self.p}, size={len(self)})"

    def find(self, letters: tuple[int, ...], vertex: int | None = None) -> int:
        """Index of a word; the empty word needs its vertex"""
        if not letters:
            return vertex
        return self._index[letters]

    def label(self, t: int) -> str:
        if self.p == 0:
            return f"[{self.left[t] + 1}]"
        return "|".join(self.algebra.letter_label(x) for x in self.words[t])

    @cached_property
    def merges(self) -> list[list[tuple[int, int, Any]]]:
        """For each word: (i, target word in W_{p-1}, coefficient) for merging letters i and i+1 (1-based)"""
        a = self.algebra
        if self.p < 2:
            return [[] for _ in self.words]
        lower = a.tensor_power(self.p - 1)
        table = []
        for w in self.words:
            entries = []
            for i in range(1, self.p):
                for letter, coeff in a.letter_product(w[i - 1], w[i]):
                    target = w[: i - 1] + (letter,) + w[i + 1 :]
                    entries.append((i, lower.find(target), coeff))
            table.append(entries)
        return table

    def split(self, t: int, q: int) -> tuple[int, int]:
        """Split word t after q letters into word indices of W_q and W_{p-q}"""
        key = (t, q)
        if key not in self._splits:
            w = self.words[t]
            head = self.algebra.tensor_power(q).find(w[:q], self.left[t])
            tail = self.algebra.tensor_power(self.p - q).find(w[q:], self.right[t])
            self._splits[key] = (head, tail)
        return self._splits[key]


@lru_cache(maxsize=None)
def _tensor_power(algebra: Algebra, p: int) -> TensorPower:
    if p < 0:
        raise ValueError(f"Negative tensor power {p}")
    return TensorPower(algebra, p)


def barlambda_tensor_power(algebra: Algebra, p: int) -> TensorPower:
    """Enumerate the basis of 𝛬̄^{⊗_E p} (composable words with their endpoints)"""
    return algebra.tensor_power(p)


def _vertex_number(value: Any, count: int, what: str) -> int:
    try:
        v = int(value) - 1
    except (TypeError, ValueError) as e:
        raise ParseError(f"Bad vertex {value!r} for {what}", what) from e
    if not 0 <= v < count:
        raise ParseError(f"Vertex {value} out of range for {what}", what)
    return v


def algebra_from_structure(doc: dict, field: FieldSpec) -> Algebra:
    """Build an algebra from [basis], [bidegrees] and [structure] tables.

    Products involving an idempotent are implied by the bidegrees; [structure] lists
    the products of non-idempotent basis elements ('x*y' = 'linear combination'),
    unlisted ones being zero.
    """
    basis = doc.get("basis", {})
    labels = tuple(str(x) for x in basis.get("labels", []))
    if not labels:
        raise ParseError("[basis] needs a non-empty 'labels' list", "basis")
    if len(set(labels)) != len(labels):
        raise ParseError("Duplicate basis labels", labels)
    idem_labels = basis.get("idempotents", [labels[0]])
    try:
        idempotents = tuple(labels.index(str(e)) for e in idem_labels)
    except ValueError as e:
        raise ParseError(f"Unknown idempotent in {idem_labels}", idem_labels) from e
    r = len(idempotents)
    bidegrees = doc.get("bidegrees", {})
    left, right = [0] * len(labels), [0] * len(labels)
    for v, e in enumerate(idempotents):
        left[e] = right[e] = v
    for b, label in enumerate(labels):
        if b in idempotents:
            continue
        if label in bidegrees:
            pair = bidegrees[label]
            if len(pair) != 2:
                raise ParseError(f"Bidegree of {label} must be [left, right]", label)
            left[b] = _vertex_number(pair[0], r, label)
            right[b] = _vertex_number(pair[1], r, label)
        elif r > 1:
            raise ParseError(f"Missing bidegree for {label}", label)
    d = len(labels)
    c = np.empty((d, d, d), dtype=object)
    c[...] = field.scalar(0)
    one = field.scalar(1)
    for v, e in enumerate(idempotents):
        c[e, e, e] = one
        for b in range(d):
            if b in idempotents:
                continue
            if left[b] == v:
                c[e, b, b] = one
            if right[b] == v:
                c[b, e, b] = one
    for key, value in doc.get("structure", {}).items():
        factors = [s.strip() for s in str(key).split("*")]
        if len(factors) != 2:
            raise ParseError(f"Structure key '{key}' must have the form 'a*b'", key)
        i, j = (labels.index(s) if s in labels else -1 for s in factors)
        if i < 0 or j < 0:
            raise ParseError(f"Structure key '{key}' names an unknown basis element", key)
        if i in idempotents or j in idempotents:
            raise ParseError(f"Products with idempotents are implied by bidegrees: '{key}'", key)
        for coeff, names in parse_combination(value, field):
            if len(names) != 1 or names[0] not in labels:
                raise ParseError(f"'{value}' is not a combination of basis elements", key)
            k = labels.index(names[0])
            c[i, j, k] = field.scalar(c[i, j, k] + coeff)
    return Algebra(
        field=field,
        labels=labels,
        structure=field.array(c),
        idempotents=idempotents,
        left=tuple(left),
        right=tuple(right),
        name=str(doc.get("name", "")),
    )


@dataclass(frozen=True)
class QuiverPresentation:
    """Quiver with relations: arrows are (name, source, target) and relations are linear
    combinations of paths written as products, 'b*a' meaning a followed by b."""

    vertices: tuple[str, ...]
    arrows: tuple[tuple[str, str, str], ...]
    relations: tuple[str, ...]
    path_bound: int

    @classmethod
    def from_document(cls, doc: dict) -> QuiverPresentation:
        q = doc.get("quiver")
        if q is None:
            raise ParseError("Missing [quiver] table", "quiver")
        vertices = tuple(str(v) for v in q.get("vertices", []))
        arrows = []
        for arrow in q.get("arrows", []):
            try:
                arrows.append((str(arrow["name"]), str(arrow["source"]), str(arrow["target"])))
            except KeyError as e:
                raise ParseError(f"Arrow entry {arrow} lacks {e}", arrow) from e
        return cls(
            vertices=vertices,
            arrows=tuple(arrows),
            relations=tuple(str(r) for r in q.get("relations", [])),
            path_bound=int(q.get("path_bound", 8)),
        )


def quiver_to_algebra(
    quiver: QuiverPresentation, field: FieldSpec, bound: int | None = None, name: str = ""
) -> Algebra:
    """Path algebra kQ/I with basis of normal paths.

    Relations must be admissible (every term of length ≥ 2, all terms parallel) and
    every path of length bound+1 must lie in the ideal.

    Raises:
        QuiverError: non-admissible relations or infinite dimension within the bound.
    """
    bound = quiver.path_bound if bound is None else bound
    vindex = {v: i for i, v in enumerate(quiver.vertices)}
    if len(vindex) != len(quiver.vertices) or not vindex:
        raise QuiverError("Quiver needs distinct, non-empty vertex names", quiver.vertices)
    arrow_names = [a[0] for a in quiver.arrows]
    if len(set(arrow_names)) != len(arrow_names):
        raise QuiverError("Duplicate arrow names", arrow_names)
    src, tgt = [], []
    for arrow_name, s, t in quiver.arrows:
        if s not in vindex or t not in vindex:
            raise QuiverError(f"Arrow {arrow_name} has an unknown endpoint", arrow_name)
        src.append(vindex[s])
        tgt.append(vindex[t])
    limit = bound + 1

    # paths as traversal-ordered arrow tuples; trivial paths as ("v", i)
    paths: list[tuple] = [("v", v) for v in range(len(vindex))]
    layer = [(a,) for a in range(len(arrow_names))]
    length = 1
    while layer and length <= limit:
        paths.extend(layer)
        layer = [p + (a,) for p in layer for a in range(len(arrow_names)) if src[a] == tgt[p[-1]]]
        length += 1

    def source(path):
        return path[1] if path[0] == "v" else src[path[0]]

    def target(path):
        return path[1] if path[0] == "v" else tgt[path[-1]]

    def plen(path):
        return 0 if path[0] == "v" else len(path)

    # longest paths first so that normal forms prefer short paths
    order = sorted(range(len(paths)), key=lambda i: (-plen(paths[i]), i))
    column = {paths[i]: col for col, i in enumerate(order)}
    ordered = [paths[i] for i in order]

    def concat(u, v):
        """The path u·v (v first), or None"""
        if target(v) != source(u):
            return None
        if u[0] == "v":
            return v
        if v[0] == "v":
            return u
        return v + u

    relations = []
    for text in quiver.relations:
        combo = {}
        for coeff, names in parse_combination(text, field):
            unknown = [n for n in names if n not in arrow_names]
            if unknown:
                raise QuiverError(f"Relation '{text}' uses unknown arrows {unknown}", text)
            path = tuple(arrow_names.index(n) for n in reversed(names))
            if len(path) < 2:
                raise QuiverError(f"Relation '{text}' is not admissible (term of length < 2)", text)
            if any(src[path[i + 1]] != tgt[path[i]] for i in range(len(path) - 1)):
                raise QuiverError(f"Relation '{text}' contains a non-composable product", text)
            combo[path] = field.scalar(combo.get(path, 0) + coeff)
        ends = {(source(p), target(p)) for p in combo}
        if len(ends) > 1:
            raise QuiverError(f"Relation '{text}' mixes non-parallel paths", text)
        if combo:
            relations.append(combo)

    generators = []
    for rel in relations:
        rel_len = min(len(p) for p in rel)
        for u in paths:
            for v in paths:
                if plen(u) + rel_len + plen(v) > limit:
                    continue
                row = {}
                for path, coeff in rel.items():
                    left_part = concat(path, v)
                    full = concat(u, left_part) if left_part is not None else None
                    if full is None or plen(full) > limit:
                        continue
                    row[column[full]] = field.scalar(row.get(column[full], 0) + coeff)
                if any(x != 0 for x in row.values()):
                    generators.append(row)
    ideal = field.zeros(len(generators), len(ordered))
    for r, row in enumerate(generators):
        for col, coeff in row.items():
            ideal[r, col] = coeff
    rref, pivots = linalg.row_reduce(field, ideal) if generators else (ideal, [])
    rref = rref[: len(pivots)]
    pivot_set = set(pivots)
    long_paths = [column[p] for p in ordered if plen(p) == limit]
    missing = [c for c in long_paths if c not in pivot_set]
    if missing:
        raise QuiverError(
            f"Quotient is not finite-dimensional within path bound {bound}", ordered[missing[0]]
        )
    basis_cols = [c for c in range(len(ordered)) if c not in pivot_set]
    basis_cols.sort(key=lambda c: (plen(ordered[c]), paths.index(ordered[c])))
    basis_paths = [ordered[c] for c in basis_cols]
    position = {c: k for k, c in enumerate(basis_cols)}

    def normal_form(col: int) -> np.ndarray:
        vec = field.zeros(len(basis_cols))
        if col in position:
            vec[position[col]] = field.scalar(1)
            return vec
        row = rref[pivots.index(col)]
        for c in np.flatnonzero((row != 0).astype(bool)):
            if int(c) in position:
                vec[position[int(c)]] = field.scalar(-row[c])
        return vec

    d = len(basis_paths)
    c = field.zeros(d * d, d).reshape(d, d, d)
    for i, u in enumerate(basis_paths):
        for j, v in enumerate(basis_paths):
            prod = concat(u, v)
            if prod is None or plen(prod) > limit:
                continue
            c[i, j] = normal_form(column[prod])

    def label(path):
        if path[0] == "v":
            return f"e{quiver.vertices[path[1]]}"
        return "*".join(arrow_names[a] for a in reversed(path))

    algebra = Algebra(
        field=field,
        labels=tuple(label(p) for p in basis_paths),
        structure=c,
        idempotents=tuple(range(len(vindex))),
        left=tuple(target(p) for p in basis_paths),
        right=tuple(source(p) for p in basis_paths),
        name=name,
    )
    logger.info(f"Quiver algebra {name or '(unnamed)'} has dimension {d}")
    return algebra


def load_algebra(source: str | Path | dict) -> Algebra:
    """Parse and validate an algebra document (structure-constant or quiver form).

    Raises:
        ParseError: malformed document.
        AlgebraValidationError: axioms fail.
        QuiverError: bad quiver presentation.
    """
    doc = read_document(source)
    try:
        field = FieldSpec(int(doc.get("field", {}).get("characteristic", 0)))
    except (TypeError, ValueError) as e:
        raise ParseError("[field] characteristic must be an integer", "field") from e
    name = str(doc.get("name", Path(source).stem if not isinstance(source, dict) else ""))
    if "quiver" in doc:
        algebra = quiver_to_algebra(QuiverPresentation.from_document(doc), field, name=name)
    elif "basis" in doc:
        algebra = algebra_from_structure({**doc, "name": name}, field)
    else:
        raise ParseError("Algebra document needs a [basis] or a [quiver] table", name)
    algebra.validate()
    if not algebra.is_basic():
        logger.warning(f"{algebra.name}: 𝛬̄ is not the radical; reduced windows are unavailable")
    return algebra

