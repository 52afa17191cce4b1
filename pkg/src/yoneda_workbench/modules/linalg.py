"""
Exact linear algebra over 𝔽_p and ℚ.

Matrices over 𝔽_p are numpy int64 arrays with entries in [0, p); matrices over ℚ
are numpy object arrays of `fractions.Fraction`. Elimination is row-vectorized:
each pivot clears its column with a single outer-product update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

import numpy as np
from scipy.sparse import csr_matrix, issparse

from .config import get_settings
from .errors import CompositionError, NoSolution, ShapeMismatch, WorkbenchError

logger = logging.getLogger(__name__)

MatrixLike = Union[np.ndarray, csr_matrix]

_INT64_LIMIT = 2**63 - 1
# float64 sums of integers stay exact below this bound, so BLAS can be used
_FLOAT_EXACT = 2**53


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The ground field: characteristic 0 means ℚ, otherwise the prime p < 2³¹."""

    characteristic: int

    def __post_init__(self):
        p = self.characteristic
        if p != 0 and (p >= 2**31 or not _is_prime(p)):
            raise WorkbenchError(f"Unsupported field characteristic {p}", p)

    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @property
    def name(self) -> str:
        return "Q" if self.is_rational else f"F{self.characteristic}"

    @property
    def dtype(self):
        return object if self.is_rational else np.int64

    def scalar(self, value: Any):
        """Coerce an int, string or Fraction into a field element"""
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except ValueError as e:
                raise WorkbenchError(f"Not a scalar: '{value}'", value) from e
        if self.is_rational:
            return Fraction(value)
        p = self.characteristic
        if isinstance(value, Fraction):
            if value.denominator % p == 0:
                raise WorkbenchError(f"Denominator of {value} vanishes in F{p}", value)
            return (value.numerator * pow(value.denominator, -1, p)) % p
        return int(value) % p

    def inverse(self, value):
        if value == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational:
            return 1 / Fraction(value)
        return pow(int(value), -1, self.characteristic)

    def array(self, data: Any) -> np.ndarray:
        """Convert array-like data into a reduced field matrix (or vector)"""
        if issparse(data):
            data = data.toarray()
        raw = np.asarray(data)
        if self.is_rational:
            out = np.empty(raw.shape, dtype=object)
            flat_in = raw.ravel()
            flat_out = out.ravel()
            for i, value in enumerate(flat_in):
                flat_out[i] = self.scalar(int(value) if isinstance(value, np.integer) else value)
            return out
        if raw.dtype.kind in "iub":
            return np.mod(raw.astype(np.int64), self.characteristic)
        out = np.empty(raw.shape, dtype=np.int64)
        flat_out = out.ravel()
        for i, value in enumerate(raw.ravel()):
            flat_out[i] = self.scalar(value)
        return out

    def zeros(self, rows: int, cols: int | None = None) -> np.ndarray:
        shape = (rows,) if cols is None else (rows, cols)
        if self.is_rational:
            return np.full(shape, Fraction(0), dtype=object)
        return np.zeros(shape, dtype=np.int64)

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros(n, n)
        for i in range(n):
            out[i, i] = self.scalar(1)
        return out

    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.is_rational:
            return a
        return np.mod(a, self.characteristic)

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(a + b)

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.reduce(a - b)

    def neg(self, a: np.ndarray) -> np.ndarray:
        return self.reduce(-a)

    def scale(self, a: np.ndarray, c) -> np.ndarray:
        return self.reduce(a * self.scalar(c))

    def sign(self, exponent: int):
        return self.scalar(-1 if exponent % 2 else 1)

    def matmul(self, a: MatrixLike, b: MatrixLike) -> np.ndarray:
        """Exact product; falls back to object arithmetic when int64 could overflow"""
        a = dense(a)
        b = dense(b)
        if a.shape[-1] != b.shape[0]:
            raise ShapeMismatch(f"Cannot multiply {a.shape} by {b.shape}", (a.shape, b.shape))
        if a.shape[-1] == 0:
            shape = a.shape[:-1] + b.shape[1:]
            return self.zeros(*shape) if shape else self.scalar(0)
        if self.is_rational:
            return a @ b
        p = self.characteristic
        bound = a.shape[-1] * (p - 1) ** 2
        if bound < _FLOAT_EXACT:
            product = a.astype(np.float64) @ b.astype(np.float64)
            return np.mod(product.astype(np.int64), p)
        if bound <= _INT64_LIMIT:
            return np.mod(a @ b, p)
        product = a.astype(object) @ b.astype(object)
        return np.mod(product, p).astype(np.int64)

    def outer(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.reduce(np.outer(x, y))

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Random field matrix; rationals have small numerators and denominators"""
        if self.is_rational:
            nums = rng.integers(-3, 4, size=shape)
            dens = rng.integers(1, 3, size=shape)
            out = np.empty(nums.shape, dtype=object)
            for idx in np.ndindex(nums.shape):
                out[idx] = Fraction(int(nums[idx]), int(dens[idx]))
            return out
        return rng.integers(0, self.characteristic, size=shape, dtype=np.int64)


def dense(m: MatrixLike) -> np.ndarray:
    if issparse(m):
        return m.toarray()
    return m


def compact(field: FieldSpec, m: np.ndarray, density: float) -> MatrixLike:
    """Store a matrix as CSR when it is sparse enough (𝔽_p only)"""
    if field.is_rational or m.ndim != 2 or m.size == 0:
        return m
    nnz = int(np.count_nonzero(m))
    if nnz <= density * m.size:
        return csr_matrix(m)
    return m


def is_zero(m: MatrixLike) -> bool:
    if issparse(m):
        return m.count_nonzero() == 0
    m = np.asarray(m)
    return m.size == 0 or not np.any((m != 0).astype(bool))


def hstack(field: FieldSpec, blocks: list[np.ndarray], rows: int) -> np.ndarray:
    blocks = [dense(b) for b in blocks if b.shape[1] > 0]
    if not blocks:
        return field.zeros(rows, 0)
    return np.hstack(blocks)


def vstack(field: FieldSpec, blocks: list[np.ndarray], cols: int) -> np.ndarray:
    blocks = [dense(b) for b in blocks if b.shape[0] > 0]
    if not blocks:
        return field.zeros(0, cols)
    return np.vstack(blocks)


def block_diag(field: FieldSpec, blocks: list[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = field.zeros(rows, cols)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = dense(b)
        r += b.shape[0]
        c += b.shape[1]
    return out


class MatrixBuilder:
    """Accumulates (row, col, value) entries, summing repeats"""

    def __init__(self, field: FieldSpec, rows: int, cols: int):
        self.field = field
        self.rows = rows
        self.cols = cols
        self._r: list[np.ndarray] = []
        self._c: list[np.ndarray] = []
        self._v: list[np.ndarray] = []

    def add(self, row: int, col: int, value) -> None:
        if value == 0:
            return
        self._r.append(np.array([row], dtype=np.int64))
        self._c.append(np.array([col], dtype=np.int64))
        values = np.empty(1, dtype=self.field.dtype)
        values[0] = value
        self._v.append(values)

    def extend(self, rows: np.ndarray, cols: np.ndarray, values: np.ndarray) -> None:
        """Add many entries at once (arrays of equal length)"""
        if len(rows) == 0:
            return
        self._r.append(np.asarray(rows, dtype=np.int64))
        self._c.append(np.asarray(cols, dtype=np.int64))
        self._v.append(np.asarray(values, dtype=self.field.dtype))

    def build(self) -> np.ndarray:
        out = self.field.zeros(self.rows, self.cols)
        if not self._v:
            return out
        rows = np.concatenate(self._r)
        cols = np.concatenate(self._c)
        values = np.concatenate(self._v)
        if self.field.is_rational:
            for r, c, v in zip(rows, cols, values):
                out[r, c] += v
            return out
        np.add.at(out, (rows, cols), np.mod(values, self.field.characteristic))
        return np.mod(out, self.field.characteristic)


def _eliminate(field: FieldSpec, a: np.ndarray, pivot_cols: int | None = None, full: bool = True):
    """In-place elimination; returns pivot columns. `full` clears above pivots as well."""
    rows, cols = a.shape
    limit = cols if pivot_cols is None else pivot_cols
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == rows:
            break
        nz = np.flatnonzero((a[r:, c] != 0).astype(bool))
        if nz.size == 0:
            continue
        pivot = r + int(nz[0])
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
        inv = field.inverse(a[r, c])
        a[r, c:] = field.scale(a[r, c:], inv)
        scope = slice(0, rows) if full else slice(r + 1, rows)
        col = a[scope, c]
        hits = np.flatnonzero((col != 0).astype(bool))
        if full:
            hits = hits[hits != r]
        else:
            hits = hits + r + 1
        if hits.size:
            a[hits, c:] = field.sub(a[hits, c:], field.outer(a[hits, c], a[r, c:]))
        pivots.append(c)
        r += 1
    return pivots


def row_reduce(field: FieldSpec, m: MatrixLike) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and its pivot columns"""
    a = field.array(dense(m)).copy()
    if a.ndim != 2:
        raise ShapeMismatch("row_reduce expects a matrix", a.shape)
    pivots = _eliminate(field, a)
    return a, pivots


def rank(field: FieldSpec, m: MatrixLike) -> int:
    a = dense(m)
    if a.size == 0:
        return 0
    if a.shape[0] > a.shape[1]:
        a = a.T
    a = field.array(a).copy()
    return len(_eliminate(field, a, full=False))


def kernel_basis(field: FieldSpec, m: MatrixLike) -> np.ndarray:
    """Columns spanning {v : m v = 0}"""
    a = dense(m)
    cols = a.shape[1]
    if a.shape[0] == 0:
        return field.identity(cols)
    rref, pivots = row_reduce(field, a)
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = field.zeros(cols, len(free))
    for j, f in enumerate(free):
        basis[f, j] = field.scalar(1)
        for i, pc in enumerate(pivots):
            basis[pc, j] = field.reduce(-rref[i, f])
    return basis


def image_basis(field: FieldSpec, m: MatrixLike) -> np.ndarray:
    """Independent columns of m spanning its image (pivot columns)"""
    a = field.array(dense(m))
    if a.size == 0:
        return field.zeros(a.shape[0], 0)
    _, pivots = row_reduce(field, a)
    return a[:, pivots]


def quotient_basis(field: FieldSpec, sub: MatrixLike, sup: MatrixLike) -> np.ndarray:
    """Columns of `sup` independent modulo the span of `sub`"""
    sub = dense(sub)
    sup = field.array(dense(sup))
    joined = hstack(field, [field.array(sub), sup], sup.shape[0])
    if joined.shape[1] == 0:
        return sup[:, :0]
    _, pivots = row_reduce(field, joined)
    offset = sub.shape[1]
    keep = [c - offset for c in pivots if c >= offset]
    return sup[:, keep]


def solve(field: FieldSpec, m: MatrixLike, b: MatrixLike, check: bool | None = None) -> np.ndarray:
    """A solution x of m·x = b (vector or matrix right-hand side).

    With `check` (default: the debug_checks setting) the solution is multiplied back
    and compared with b.

    Raises:
        NoSolution: when b is not in the column space of m, or the check fails.
    """
    if check is None:
        check = get_settings().debug_checks
    a = field.array(dense(m))
    rhs = field.array(dense(b))
    vector = rhs.ndim == 1
    if vector:
        rhs = rhs.reshape(-1, 1)
    if a.shape[0] != rhs.shape[0]:
        raise ShapeMismatch(f"Cannot solve {a.shape} against {rhs.shape}", (a.shape, rhs.shape))
    n = a.shape[1]
    augmented = np.hstack([a, rhs]) if a.shape[1] else rhs.copy()
    pivots = _eliminate(field, augmented, pivot_cols=n)
    r = len(pivots)
    if r < augmented.shape[0] and not is_zero(augmented[r:, n:]):
        raise NoSolution("Right-hand side is not in the column space")
    x = field.zeros(n, rhs.shape[1])
    for i, pc in enumerate(pivots):
        x[pc] = augmented[i, n:]
    if check and not np.array_equal(field.matmul(a, x), rhs):
        raise NoSolution("Solution failed verification")
    return x[:, 0] if vector else x


def restrict_map(field: FieldSpec, m: MatrixLike, source_basis: MatrixLike, target_basis: MatrixLike) -> np.ndarray:
    """R with target_basis·R = m·source_basis: the matrix of m between two subspaces.

    Raises:
        NoSolution: when m does not carry span(source_basis) into span(target_basis).
    """
    return solve(field, target_basis, field.matmul(m, source_basis))


def in_span(field: FieldSpec, basis: MatrixLike, vectors: MatrixLike) -> bool:
    try:
        solve(field, basis, vectors)
    except NoSolution:
        return False
    return True


def cohomology_dims(field: FieldSpec, d_prev: MatrixLike, d_next: MatrixLike) -> int:
    """dim ker d_next − rank d_prev for composable d_prev: U → V, d_next: V → W.

    Raises:
        CompositionError: when d_next·d_prev ≠ 0.
    """
    d_prev = dense(d_prev)
    d_next = dense(d_next)
    if d_prev.shape[0] != d_next.shape[1]:
        raise ShapeMismatch(f"Incompatible shapes {d_prev.shape} and {d_next.shape}", (d_prev.shape, d_next.shape))
    if d_prev.size and d_next.size and not is_zero(field.matmul(d_next, d_prev)):
        raise CompositionError("Consecutive maps do not compose to zero")
    return (d_next.shape[1] - rank(field, d_next)) - rank(field, d_prev)
