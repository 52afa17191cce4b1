"""
The E-relative Yoneda dg category 𝒴.

𝒴(X, Y)^n is the product over filtration degrees p ≥ 0 of the E-linear maps
(s𝛬̄)^{⊗p} ⊗_E X → Y of degree n. For bounded X and Y only finitely many blocks
are nonzero in each degree. A coordinate is an elementary map E_{y,(t,x)} sending
the pair (word t, x ∈ X^m) to y ∈ Y^{m+n−p}; it exists when vertex(y) = left(t).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import linalg
from .algebra import Algebra
from .bar import BarTensor, bar_tensor
from .config import get_settings
from .errors import CompositionError, ShapeMismatch, WorkbenchError
from .homalg import (
    CochainMap,
    Complex,
    Module,
    cohomology_dim,
    ground_algebra,
    hom_complex,
    regular_module,
    vector_space,
)

logger = logging.getLogger(__name__)


def _nonzero_mask(a: np.ndarray) -> np.ndarray:
    return (a != 0).astype(bool)


class TensorSpace:
    """Basis of (s𝛬̄)^{⊗p} ⊗_E M: pairs (word t, basis vector x) with right(t) = vertex(x).

    Pairs are ordered by word, then by x.
    """

    def __init__(self, module: Module, p: int):
        alg = module.algebra
        self.module = module
        self.p = p
        self.words = alg.tensor_power(p)
        words_of, bases = [], []
        self._columns: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for t in range(len(self.words)):
            xs = module.vertex_blocks[self.words.right[t]]
            start = len(words_of)
            words_of.extend([t] * len(xs))
            bases.extend(int(x) for x in xs)
            self._columns[t] = (np.arange(start, start + len(xs), dtype=np.int64), np.asarray(xs, dtype=np.int64))
        self.word = np.asarray(words_of, dtype=np.int64)
        self.base = np.asarray(bases, dtype=np.int64)
        self.left = np.asarray([self.words.left[t] for t in words_of], dtype=np.int64)
        self.grid = np.full((len(self.words), module.dim), -1, dtype=np.int64)
        if len(words_of):
            self.grid[self.word, self.base] = np.arange(len(words_of))

    def __len__(self) -> int:
        return len(self.word)

    def __repr__(self) -> str:
        return f"TensorSpace(p={self.p}, {self.module.name}, size={len(self)})"

    def columns(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Positions of the pairs with word t and their base indices"""
        return self._columns[t]

    def position(self, t: int, x: int) -> int:
        return int(self.grid[t, x])

    @cached_property
    def prepend(self) -> np.ndarray:
        """prepend[a, c]: position of (a·word, x) one filtration up, or −1 when a does not compose"""
        alg = self.module.algebra
        upper = tensor_space(self.module, self.p + 1)
        out = np.full((alg.num_letters, len(self)), -1, dtype=np.int64)
        for c in range(len(self)):
            t = int(self.word[c])
            letters = self.words.words[t]
            for a in range(alg.num_letters):
                if alg.letter_right(a) == self.words.left[t]:
                    out[a, c] = upper.position(upper.words.find((a,) + letters), int(self.base[c]))
        return out

    @cached_property
    def contraction(self) -> np.ndarray:
        """T_{p+1}(M) → T_p(M): (−1)^p (last letter acting on x) + Σ_i (−1)^{i+1} (merge of letters i, i+1)"""
        alg = self.module.algebra
        f = alg.field
        upper = tensor_space(self.module, self.p + 1)
        mb = linalg.MatrixBuilder(f, len(self), len(upper))
        sign = f.sign(self.p)
        for c2 in range(len(upper)):
            t2, x2 = int(upper.word[c2]), int(upper.base[c2])
            letters = upper.words.words[t2]
            head = self.words.find(letters[:-1], upper.words.left[t2])
            column = self.module.action[alg.complement[letters[-1]]][:, x2]
            for x in np.flatnonzero(_nonzero_mask(column)):
                mb.add(self.position(head, int(x)), c2, f.scalar(sign * column[x]))
            for i, t_low, coeff in upper.words.merges[t2]:
                mb.add(self.position(t_low, x2), c2, f.scalar(f.sign(i + 1) * coeff))
        return mb.build()


@lru_cache(maxsize=None)
def tensor_space(module: Module, p: int) -> TensorSpace:
    return TensorSpace(module, p)


def tensor_map(phi: np.ndarray, source: Module, target: Module, p: int) -> np.ndarray:
    """1 ⊗ φ: (s𝛬̄)^{⊗p} ⊗ M → (s𝛬̄)^{⊗p} ⊗ N for an E-linear φ: M → N"""
    f = source.field
    src, tgt = tensor_space(source, p), tensor_space(target, p)
    mb = linalg.MatrixBuilder(f, len(tgt), len(src))
    phi = linalg.dense(phi)
    if len(src) == 0 or len(tgt) == 0:
        return mb.build()
    sub = phi[:, src.base]
    rows, cols = np.nonzero(_nonzero_mask(sub))
    positions = tgt.grid[src.word[cols], rows]
    keep = positions >= 0
    mb.extend(positions[keep], cols[keep], sub[rows[keep], cols[keep]])
    return mb.build()


@dataclass(eq=False)
class Cell:
    """Coordinates of one (p, m) block of 𝒴(X, Y)^n.

    Attributes:
        p: Filtration degree.
        m: Source degree.
        j: Target degree m + n − p.
        offset: First coordinate of the block.
        rows: Target basis index of every coordinate.
        cols: Tensor-space position of every coordinate.
        lookup: Coordinate of (row, col), −1 where vertices disagree.
    """

    p: int
    m: int
    j: int
    offset: int
    rows: np.ndarray
    cols: np.ndarray
    lookup: np.ndarray

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def coordinates(self) -> np.ndarray:
        return self.offset + np.arange(self.size, dtype=np.int64)


class YonedaSpace:
    """𝒴(X, Y) with its coordinates and the differential δ = δ_in + δ_ex in every degree"""

    def __init__(self, source: Complex, target: Complex):
        if source.algebra is not target.algebra:
            raise CompositionError("Yoneda spaces need complexes over the same algebra", (source.name, target.name))
        self.source = source
        self.target = target
        self.algebra: Algebra = source.algebra
        self.field = self.algebra.field
        self._cells: dict[int, dict[tuple[int, int], Cell]] = {}
        self._deltas: dict[tuple[int, bool], np.ndarray] = {}
        self._dx: dict[tuple[int, int], np.ndarray] = {}

    def __repr__(self) -> str:
        return f"YonedaSpace({self.source.name}, {self.target.name})"

    @property
    def name(self) -> str:
        return f"Y({self.source.name},{self.target.name})"

    def cells(self, n: int) -> dict[tuple[int, int], Cell]:
        if n not in self._cells:
            self._cells[n] = self._build_cells(n)
        return self._cells[n]

    def _build_cells(self, n: int) -> dict[tuple[int, int], Cell]:
        x, y = self.source, self.target
        cells: dict[tuple[int, int], Cell] = {}
        if y.is_zero:
            return cells
        ay, by = y.bounds
        offset = 0
        for m in x.support:
            for p in range(max(0, m + n - by), m + n - ay + 1):
                j = m + n - p
                ym = y.modules.get(j)
                if ym is None or ym.dim == 0:
                    continue
                ts = tensor_space(x.module(m), p)
                if not len(ts):
                    continue
                mask = np.asarray(ym.vertices, dtype=np.int64)[:, None] == ts.left[None, :]
                rows, cols = np.nonzero(mask)
                if rows.size == 0:
                    continue
                lookup = np.full(mask.shape, -1, dtype=np.int64)
                lookup[rows, cols] = offset + np.arange(rows.size)
                cells[(p, m)] = Cell(p, m, j, offset, rows, cols, lookup)
                offset += rows.size
        return cells

    def dim(self, n: int) -> int:
        return sum(c.size for c in self.cells(n).values())

    def max_filtration(self, n: int) -> int:
        """Largest p carrying coordinates in degree n (n + b_X − a_Y)"""
        return n + self.source.bounds[1] - self.target.bounds[0]

    def block_shape(self, n: int, p: int, m: int) -> tuple[int, int]:
        return self.target.dim(m + n - p), len(tensor_space(self.source.module(m), p))

    def _tensor_dx(self, p: int, m: int) -> np.ndarray:
        """1 ⊗ d_X^m on the p-th tensor space"""
        key = (p, m)
        if key not in self._dx:
            x = self.source
            self._dx[key] = tensor_map(x.differential(m), x.module(m), x.module(m + 1), p)
        return self._dx[key]

    def differential(self, n: int, twisted: bool = False) -> np.ndarray:
        """δ: 𝒴^n → 𝒴^{n+1}.

        With `twisted` the block (p, j) is sent by (−1)^j δ_ex + (−1)^p δ_in, the differential
        of 𝒴(Λ,Λ) ⊗_Λ Y transported along f ⊗ y ↦ f(−)y (source must be the stalk Λ).
        """
        key = (n, twisted)
        if key not in self._deltas:
            self._deltas[key] = self._assemble(n, twisted)
            logger.debug(f"{self.name}: δ^{n} has shape {self._deltas[key].shape}")
        return self._deltas[key]

    def _assemble(self, n: int, twisted: bool) -> np.ndarray:
        f = self.field
        alg = self.algebra
        x, y = self.source, self.target
        source_cells = self.cells(n)
        target_cells = self.cells(n + 1)
        mb = linalg.MatrixBuilder(f, self.dim(n + 1), self.dim(n))

        def left_multiply(out: Cell, a: np.ndarray, cell: Cell, sign) -> None:
            sub = linalg.dense(a)[:, cell.rows]
            y2, es = np.nonzero(_nonzero_mask(sub))
            targets = out.lookup[y2, cell.cols[es]]
            keep = targets >= 0
            mb.extend(targets[keep], cell.coordinates[es[keep]], sub[y2[keep], es[keep]] * sign)

        def right_compose(out: Cell, b: np.ndarray, cell: Cell, sign) -> None:
            sub = linalg.dense(b)[cell.cols, :]
            es, c2 = np.nonzero(_nonzero_mask(sub))
            targets = out.lookup[cell.rows[es], c2]
            keep = targets >= 0
            mb.extend(targets[keep], cell.coordinates[es[keep]], sub[es[keep], c2[keep]] * sign)

        for (p, m), cell in source_cells.items():
            j = cell.j
            internal = f.sign(p) if twisted else f.scalar(1)
            external = f.sign(j) if twisted else f.scalar(1)
            out = target_cells.get((p, m))
            if out is not None:
                left_multiply(out, y.differential(j), cell, internal)
            out = target_cells.get((p, m - 1))
            if out is not None and x.dim(m - 1):
                sign = f.scalar(-internal * f.sign(n + p))
                right_compose(out, self._tensor_dx(p, m - 1), cell, sign)
            out = target_cells.get((p + 1, m))
            if out is None:
                continue
            ts = tensor_space(x.module(m), p)
            right_compose(out, ts.contraction, cell, f.scalar(external * f.sign(n)))
            first_sign = f.scalar(external * f.sign(n + 1))
            ym = y.module(j)
            for a in range(alg.num_letters):
                pre = ts.prepend[a][cell.cols]
                valid = np.flatnonzero(pre >= 0)
                if valid.size == 0:
                    continue
                sub = ym.action[alg.complement[a]][:, cell.rows[valid]]
                y2, ks = np.nonzero(_nonzero_mask(sub))
                targets = out.lookup[y2, pre[valid[ks]]]
                keep = targets >= 0
                mb.extend(targets[keep], cell.coordinates[valid[ks[keep]]], sub[y2[keep], ks[keep]] * first_sign)
        return mb.build()

    @cached_property
    def has_left_action(self) -> bool:
        """Whether the source is a stalk bimodule in degree 0, so 𝒴(X, Y) is a left Λ-module"""
        x = self.source
        return x.support == [0] and x.module(0).right_action is not None

    @cached_property
    def _right_vertices(self) -> np.ndarray:
        alg = self.algebra
        xm = self.source.module(0)
        out = np.full(xm.dim, -1, dtype=np.int64)
        for v, e in enumerate(alg.idempotents):
            diag = np.diag(linalg.dense(xm.right_action[e]))
            out[np.flatnonzero(_nonzero_mask(diag))] = v
        return out

    def vertices(self, n: int) -> tuple[int, ...]:
        """Idempotent of every coordinate for the left action through the source"""
        out = []
        for (p, m), cell in self.cells(n).items():
            ts = tensor_space(self.source.module(m), p)
            out.extend(int(v) for v in self._right_vertices[ts.base[cell.cols]])
        return tuple(out)

    def action(self, n: int) -> tuple[np.ndarray, ...]:
        """(b·f)(w ⊗ x) = f(w ⊗ x·b) on the coordinates of degree n"""
        if not self.has_left_action:
            raise WorkbenchError(f"{self.name} carries no left Λ-action", self.name)
        f = self.field
        xm = self.source.module(0)
        d = self.dim(n)
        out = []
        for b in range(self.algebra.dim):
            mb = linalg.MatrixBuilder(f, d, d)
            r = linalg.dense(xm.right_action[b])
            for (p, _m), cell in self.cells(n).items():
                ts = tensor_space(xm, p)
                sub = r[ts.base[cell.cols], :]
                es, x2 = np.nonzero(_nonzero_mask(sub))
                positions = ts.grid[ts.word[cell.cols[es]], x2]
                keep = positions >= 0
                targets = cell.lookup[cell.rows[es[keep]], positions[keep]]
                mb.extend(targets, cell.coordinates[es[keep]], sub[es[keep], x2[keep]])
            out.append(mb.build())
        return tuple(out)

    def as_complex(self, lo: int, hi: int, twisted: bool = False, name: str = "") -> Complex:
        """The window lo..hi (degrees lo−1..hi+1 materialized) as a complex.

        Over Λ when the source is a stalk bimodule, otherwise over the ground field.
        """
        f = self.field
        density = get_settings().sparse_density
        name = name or (f"{self.name}⊗" if twisted else self.name)
        degrees = range(lo - 1, hi + 2)
        if self.has_left_action:
            alg = self.algebra
            modules = {n: Module(alg, self.action(n), self.vertices(n), f"{name}^{n}") for n in degrees}
        else:
            alg = ground_algebra(f)
            modules = {n: vector_space(alg, self.dim(n)) for n in degrees}
        diffs = {n: linalg.compact(f, self.differential(n, twisted), density) for n in range(lo - 1, hi + 1)}
        return Complex(alg, modules, diffs, name, (lo, hi))


@lru_cache(maxsize=None)
def yoneda_space(source: Complex, target: Complex) -> YonedaSpace:
    return YonedaSpace(source, target)


@lru_cache(maxsize=None)
def lambda_stalk(algebra: Algebra) -> Complex:
    """The stalk complex Λ (regular bimodule in degree 0), shared so Yoneda spaces are reused"""
    return Complex.stalk(regular_module(algebra), 0, "Lambda")


@dataclass(eq=False)
class YonedaElement:
    """A homogeneous element of 𝒴(X, Y): blocks[(p, m)] is the matrix of
    (s𝛬̄)^{⊗p} ⊗ X^m → Y^{m+n−p} on the tensor-space basis."""

    space: YonedaSpace
    degree: int
    blocks: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"YonedaElement({self.space.name}, degree={self.degree}, filtrations={self.filtrations})"

    @property
    def source(self) -> Complex:
        return self.space.source

    @property
    def target(self) -> Complex:
        return self.space.target

    @property
    def field(self) -> linalg.FieldSpec:
        return self.space.field

    @property
    def filtrations(self) -> list[int]:
        return sorted({p for (p, _m), b in self.blocks.items() if not linalg.is_zero(b)})

    def block(self, p: int, m: int) -> np.ndarray:
        b = self.blocks.get((p, m))
        if b is None:
            return self.field.zeros(*self.space.block_shape(self.degree, p, m))
        return b

    def vector(self) -> np.ndarray:
        f = self.field
        cells = self.space.cells(self.degree)
        vec = f.zeros(self.space.dim(self.degree))
        for key, b in self.blocks.items():
            cell = cells.get(key)
            if cell is None:
                if not linalg.is_zero(b):
                    raise ShapeMismatch(f"Block {key} lies outside {self.space.name} in degree {self.degree}", key)
                continue
            vec[cell.offset : cell.offset + cell.size] = b[cell.rows, cell.cols]
        return vec

    @classmethod
    def from_vector(cls, space: YonedaSpace, n: int, vec: np.ndarray) -> YonedaElement:
        f = space.field
        blocks = {}
        for (p, m), cell in space.cells(n).items():
            values = vec[cell.offset : cell.offset + cell.size]
            if linalg.is_zero(values):
                continue
            b = f.zeros(*space.block_shape(n, p, m))
            b[cell.rows, cell.cols] = values
            blocks[(p, m)] = b
        return cls(space, n, blocks)

    @classmethod
    def zero(cls, space: YonedaSpace, n: int) -> YonedaElement:
        return cls(space, n, {})

    def delta(self, twisted: bool = False) -> YonedaElement:
        vec = self.space.field.matmul(self.space.differential(self.degree, twisted), self.vector())
        return YonedaElement.from_vector(self.space, self.degree + 1, vec)

    def _combine(self, other: YonedaElement, sign) -> YonedaElement:
        if other.space is not self.space or other.degree != self.degree:
            raise ShapeMismatch("Elements of different Yoneda spaces or degrees", (self.degree, other.degree))
        f = self.field
        blocks = dict(self.blocks)
        for key, b in other.blocks.items():
            scaled = f.scale(b, sign)
            blocks[key] = f.add(blocks[key], scaled) if key in blocks else scaled
        return YonedaElement(self.space, self.degree, blocks)

    def __add__(self, other: YonedaElement) -> YonedaElement:
        return self._combine(other, 1)

    def __sub__(self, other: YonedaElement) -> YonedaElement:
        return self._combine(other, -1)

    def __neg__(self) -> YonedaElement:
        return self.scale(-1)

    def scale(self, c) -> YonedaElement:
        f = self.field
        return YonedaElement(self.space, self.degree, {k: f.scale(b, c) for k, b in self.blocks.items()})

    def is_zero(self) -> bool:
        return all(linalg.is_zero(b) for b in self.blocks.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, YonedaElement):
            return NotImplemented
        if other.space is not self.space or other.degree != self.degree:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def truncate(self, max_filtration: int) -> YonedaElement:
        """Blocks of filtration ≤ max_filtration"""
        blocks = {k: b for k, b in self.blocks.items() if k[0] <= max_filtration}
        return YonedaElement(self.space, self.degree, blocks)


def compose(g: YonedaElement, f: YonedaElement) -> YonedaElement:
    """g ⊙ f with (g⊙f)(s ā_{1,p+q} ⊗ x) = (−1)^{q|f|} g(s ā_{1,q} ⊗ f(s ā_{q+1,p+q} ⊗ x)).

    Raises:
        CompositionError: when the target of f is not the source of g.
    """
    if g.source is not f.target:
        raise CompositionError(f"Cannot compose {g.space.name} after {f.space.name}", (g.space.name, f.space.name))
    fld = f.field
    alg = f.space.algebra
    n, k = f.degree, g.degree
    x, y, z = f.source, f.target, g.target
    space = yoneda_space(x, z)
    out: dict[tuple[int, int], np.ndarray] = {}
    for (p, m), fb in f.blocks.items():
        if linalg.is_zero(fb):
            continue
        j = m + n - p
        fb = linalg.dense(fb)
        ts_f = tensor_space(x.module(m), p)
        words_p = alg.tensor_power(p)
        by_left: dict[int, list[int]] = {}
        for t2 in range(len(words_p)):
            by_left.setdefault(words_p.left[t2], []).append(t2)
        for (q, jj), gb in g.blocks.items():
            if jj != j or linalg.is_zero(gb):
                continue
            gb = linalg.dense(gb)
            ts_g = tensor_space(y.module(j), q)
            ts_out = tensor_space(x.module(m), p + q)
            words_q = alg.tensor_power(q)
            words_out = alg.tensor_power(p + q)
            key = (p + q, m)
            acc = out.get(key)
            if acc is None:
                acc = fld.zeros(z.dim(j + k - q), len(ts_out))
            sign = fld.sign(q * n)
            for t1 in range(len(words_q)):
                pos1, ys = ts_g.columns(t1)
                if not len(pos1):
                    continue
                g_t = gb[:, pos1]
                for t2 in by_left.get(words_q.right[t1], []):
                    pos2, _xs = ts_f.columns(t2)
                    if not len(pos2):
                        continue
                    product = fld.matmul(g_t, fb[np.ix_(ys, pos2)])
                    t = words_out.find(words_q.words[t1] + words_p.words[t2], words_q.left[t1])
                    pos, _ = ts_out.columns(t)
                    acc[:, pos] = fld.add(acc[:, pos], fld.scale(product, sign))
            out[key] = acc
    return YonedaElement(space, n + k, out)


def from_cochain_map(fmap: CochainMap) -> YonedaElement:
    """A (graded) cochain map as a filtration-0 element"""
    space = yoneda_space(fmap.source, fmap.target)
    blocks = {}
    for m in fmap.source.support:
        comp = fmap.component(m)
        if linalg.is_zero(comp):
            continue
        ts = tensor_space(fmap.source.module(m), 0)
        blocks[(0, m)] = np.ascontiguousarray(comp[:, ts.base])
    return YonedaElement(space, fmap.degree, blocks)


def identity(x: Complex) -> YonedaElement:
    return from_cochain_map(CochainMap.identity(x))


def random_element(space: YonedaSpace, n: int, rng: np.random.Generator) -> YonedaElement:
    """A uniformly random element of 𝒴(X, Y)^n (small numerators over ℚ)"""
    return YonedaElement.from_vector(space, n, space.field.random(rng, (space.dim(n),)))


def delta(f: YonedaElement) -> YonedaElement:
    return f.delta()


def y_hom(x: Complex, y: Complex, lo: int, hi: int) -> Complex:
    """𝒴(X, Y) on the window lo..hi"""
    return yoneda_space(x, y).as_complex(lo, hi)


def yoneda_ext(m: Module, n: Module, max_deg: int) -> list[int]:
    """dim H^k 𝒴(M, N) for 0 ≤ k ≤ max_deg"""
    space = yoneda_space(Complex.stalk(m, 0), Complex.stalk(n, 0))
    hom = space.as_complex(0, max_deg)
    return [cohomology_dim(hom, k) for k in range(max_deg + 1)]


def alpha(x: Complex, y: Complex, lo: int, hi: int) -> CochainMap:
    """α: 𝒴(X, Y) → Hom_Λ(𝔹 ⊗_Λ X, Y), f ↦ f̃ with f̃(a ⊗ s ā_{1,p} ⊗ x) = a f(s ā_{1,p} ⊗ x).

    Components cover degrees lo..hi+1; the Hom side is computed independently through
    `hom_complex` on a bar truncation deep enough for the window.
    """
    fld = x.field
    alg = x.algebra
    space = yoneda_space(x, y)
    cap = max(0, space.max_filtration(hi + 1))
    bt = bar_tensor(alg, x, cap)
    hom, bases = hom_complex(bt, y, lo, hi + 1)
    source = space.as_complex(lo, hi + 1)
    comps = {}
    for n in range(lo, hi + 2):
        comps[n] = _alpha_matrix(space, bt, bases[n], n)
    logger.info(f"alpha for {space.name}: window {lo}..{hi}, bar cap {cap}")
    return CochainMap(source, hom, comps)


def _alpha_matrix(space: YonedaSpace, bt: BarTensor, basis: list[tuple[int, np.ndarray]], n: int) -> np.ndarray:
    fld = space.field
    alg = space.algebra
    y = space.target
    d = space.dim(n)
    images: dict[int, np.ndarray] = {}
    for (p, m), cell in space.cells(n).items():
        i = m - p
        ts = tensor_space(space.source.module(m), p)
        rows_y = y.dim(i + n)
        if i not in images:
            images[i] = fld.zeros(rows_y * bt.dim(i), d)
        target = images[i]
        index = bt.index.get(i, {})
        for e in range(cell.size):
            yy = int(cell.rows[e])
            c = int(cell.cols[e])
            t, x0 = int(ts.word[c]), int(ts.base[c])
            coord = cell.offset + e
            for a in range(alg.dim):
                key = (p, t, x0, a)
                if key not in index:
                    continue
                column = y.module(i + n).action[a][:, yy]
                flat = np.arange(rows_y) * bt.dim(i) + index[key]
                target[flat, coord] = fld.add(target[flat, coord], column)
    out = fld.zeros(len(basis), d)
    for i, rhs in images.items():
        members = [j for j, (ii, _phi) in enumerate(basis) if ii == i]
        if not members:
            if not linalg.is_zero(rhs):
                raise WorkbenchError(f"α leaves the Hom basis in bar degree {i}", i)
            continue
        system = fld.zeros(rhs.shape[0], len(members))
        for col, j in enumerate(members):
            system[:, col] = basis[j][1].reshape(-1)
        out[members, :] = linalg.solve(fld, system, rhs)
    return out


def is_isomorphism(fmap: CochainMap, lo: int, hi: int) -> bool:
    """Degreewise bijective on lo..hi+1 and commuting with the differentials on lo..hi"""
    fld = fmap.source.field
    for n in range(lo, hi + 2):
        comp = fmap.component(n)
        if comp.shape[0] != comp.shape[1] or linalg.rank(fld, comp) != comp.shape[0]:
            return False
    try:
        fmap.validate(range(lo, hi + 1))
    except WorkbenchError:
        return False
    return True


def eta(y: Complex, lo: int, hi: int) -> CochainMap:
    """η_Y: Y → 𝒴(Λ, Y), y ↦ (a ↦ a·y), on the window lo..hi"""
    fld = y.field
    space = yoneda_space(lambda_stalk(y.algebra), y)
    target = space.as_complex(lo, hi)
    regular = lambda_stalk(y.algebra).module(0)
    ts0 = tensor_space(regular, 0)
    comps = {}
    for n in range(lo - 1, hi + 2):
        if not y.dim(n):
            continue
        mb = linalg.MatrixBuilder(fld, space.dim(n), y.dim(n))
        cell = space.cells(n).get((0, 0))
        if cell is not None:
            ym = y.module(n)
            for c in range(len(ts0)):
                act = ym.action[int(ts0.base[c])]
                y2, y1 = np.nonzero(_nonzero_mask(act))
                targets = cell.lookup[y2, c]
                keep = targets >= 0
                mb.extend(targets[keep], y1[keep], act[y2[keep], y1[keep]])
        comps[n] = mb.build()
    return CochainMap(y, target, comps)


def eta_element(y: Complex, n: int, vec: np.ndarray) -> YonedaElement:
    """η_Y(v) ∈ 𝒴(Λ, Y)^n for v ∈ Y^n"""
    space = yoneda_space(lambda_stalk(y.algebra), y)
    component = eta(y, n, n).component(n)
    return YonedaElement.from_vector(space, n, space.field.matmul(component, vec))


def iota(x: Complex, cap: int) -> YonedaElement:
    """ι_X: X → 𝔹_{≤cap} ⊗_Λ X, s ā_{1,p} ⊗ x ↦ (1 ⊗ s ā_{1,p} ⊗ 1) ⊗ x"""
    fld = x.field
    alg = x.algebra
    bt = bar_tensor(alg, x, cap)
    space = yoneda_space(x, bt)
    blocks = {}
    for m in x.support:
        for p in range(cap + 1):
            ts = tensor_space(x.module(m), p)
            if not len(ts):
                continue
            b = fld.zeros(bt.dim(m - p), len(ts))
            index = bt.index.get(m - p, {})
            for c in range(len(ts)):
                t, x0 = int(ts.word[c]), int(ts.base[c])
                b[index[(p, t, x0, alg.idempotents[ts.words.left[t]])], c] = fld.scalar(1)
            blocks[(p, m)] = b
    return YonedaElement(space, 0, blocks)


def psi(f: YonedaElement, lo: int, hi: int) -> CochainMap:
    """Ψ(f): 𝒴(Λ, X) → 𝒴(Λ, Y), g ↦ f ⊙ g, as a degree-|f| map on the window lo..hi"""
    alg = f.space.algebra
    n = f.degree
    lam = lambda_stalk(alg)
    sx = yoneda_space(lam, f.source)
    sy = yoneda_space(lam, f.target)
    source = sx.as_complex(lo, hi)
    target = sy.as_complex(lo + n, hi + n)
    comps = {}
    for k in range(lo - 1, hi + 2):
        d = sx.dim(k)
        columns = []
        for i in range(d):
            unit = sx.field.zeros(d)
            unit[i] = sx.field.scalar(1)
            g = YonedaElement.from_vector(sx, k, unit)
            columns.append(compose(f, g).vector().reshape(-1, 1))
        comps[k] = linalg.hstack(sx.field, columns, sy.dim(k + n))
    return CochainMap(source, target, comps, n)


def y_left_compose_map(x: Complex, y: Complex, n: int, lo: int, hi: int) -> np.ndarray:
    """Ψ on 𝒴(X, Y)^n as one matrix: column i stacks the components of Ψ(e_i) over degrees lo−1..hi+1"""
    space = yoneda_space(x, y)
    fld = space.field
    lam = lambda_stalk(x.algebra)
    sx, sy = yoneda_space(lam, x), yoneda_space(lam, y)
    rows = sum(sy.dim(k + n) * sx.dim(k) for k in range(lo - 1, hi + 2))
    columns = []
    for i in range(space.dim(n)):
        unit = fld.zeros(space.dim(n))
        unit[i] = fld.scalar(1)
        op = psi(YonedaElement.from_vector(space, n, unit), lo, hi)
        flat = [op.component(k).reshape(-1, 1) for k in range(lo - 1, hi + 2)]
        columns.append(linalg.vstack(fld, flat, 1))
    return linalg.hstack(fld, columns, rows)


def post_composition(g: CochainMap, w: Complex, lo: int, hi: int, twisted: bool = False) -> CochainMap:
    """g ⊙ −: 𝒴(W, Y) → 𝒴(W, Y′) for a cochain map g: Y → Y′ seen in filtration 0.

    The source is materialized up to degree hi+1 so that the cone is exact on lo..hi.
    """
    fld = g.source.field
    k = g.degree
    sy = yoneda_space(w, g.source)
    sz = yoneda_space(w, g.target)
    source = sy.as_complex(lo, hi + 1, twisted)
    target = sz.as_complex(lo + k, hi + k, twisted)
    comps = {}
    for n in range(lo - 1, hi + 2):
        mb = linalg.MatrixBuilder(fld, sz.dim(n + k), sy.dim(n))
        out_cells = sz.cells(n + k)
        for (p, m), cell in sy.cells(n).items():
            out = out_cells.get((p, m))
            if out is None:
                continue
            sub = g.component(cell.j)[:, cell.rows]
            y2, es = np.nonzero(_nonzero_mask(sub))
            targets = out.lookup[y2, cell.cols[es]]
            keep = targets >= 0
            mb.extend(targets[keep], cell.coordinates[es[keep]], sub[y2[keep], es[keep]])
        comps[n] = mb.build()
    return CochainMap(source, target, comps, k)


def phi_retraction(op: CochainMap, x: Complex, y: Complex) -> YonedaElement:
    """Φ: a degree-n operator 𝒴(Λ, X) → 𝒴(Λ, Y) back to 𝒴(X, Y); its p-component sends
    s ā_{1,p} ⊗ x to (−1)^{p|x|} (op ∘ η_X)(x) evaluated at s ā_{1,p} ⊗ 1."""
    fld = x.field
    alg = x.algebra
    n = op.degree
    lam = lambda_stalk(alg)
    sy = yoneda_space(lam, y)
    space = yoneda_space(x, y)
    regular = lam.module(0)
    ax, bx = x.bounds
    eta_x = eta(x, ax, bx)
    blocks = {}
    for (p, m), cell in space.cells(n).items():
        values = fld.matmul(op.component(m), eta_x.component(m))
        lam_cell = sy.cells(m + n).get((p, 0))
        if lam_cell is None:
            continue
        ts = tensor_space(x.module(m), p)
        ts_lam = tensor_space(regular, p)
        b = fld.zeros(*space.block_shape(n, p, m))
        sign = fld.sign(p * m)
        for c in range(len(ts)):
            t, x0 = int(ts.word[c]), int(ts.base[c])
            c_lam = ts_lam.position(t, alg.idempotents[ts.words.right[t]])
            coords = lam_cell.lookup[:, c_lam]
            present = np.flatnonzero(coords >= 0)
            b[present, c] = fld.scale(values[coords[present], x0], sign)
        blocks[(p, m)] = b
    return YonedaElement(space, n, blocks)
