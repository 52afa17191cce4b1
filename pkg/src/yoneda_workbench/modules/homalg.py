"""
Finite-dimensional Λ-modules, bounded complexes and cochain maps.

Every module basis is adapted to the idempotents: basis vector i lies in e_v M for
v = vertices[i]. Differentials are stored as d^n: X^n → X^{n+1} with shape
(dim X^{n+1}, dim X^n).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, Any

import numpy as np

from . import linalg
from .algebra import Algebra, parse_combination
from .errors import ComplexValidationError, ModuleValidationError, NoSolution, ParseError, ShapeMismatch
from .linalg import FieldSpec

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def ground_algebra(fld: FieldSpec) -> Algebra:
    """The ground field k as a one-dimensional algebra; Hom complexes live over it"""
    return Algebra(
        field=fld,
        labels=("1",),
        structure=fld.array(np.ones((1, 1, 1), dtype=np.int64)),
        idempotents=(0,),
        left=(0,),
        right=(0,),
        name=fld.name,
    )


@dataclass(eq=False)
class Module:
    """A left Λ-module given by the matrices ρ(b) of every basis element.

    Attributes:
        algebra: The algebra acting.
        action: action[i] is ρ(b_i), a dim × dim matrix.
        vertices: Idempotent of every basis vector.
        name: Display name.
        labels: Optional basis labels (tuples for constructed modules).
        right_action: Optional right Λ-action for bimodules.
    """

    algebra: Algebra
    action: tuple[np.ndarray, ...]
    vertices: tuple[int, ...]
    name: str = ""
    labels: tuple | None = None
    right_action: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        n = len(self.vertices)
        if len(self.action) != self.algebra.dim:
            raise ModuleValidationError(
                f"Module {self.name} needs {self.algebra.dim} action matrices, got {len(self.action)}", self.name
            )
        for i, m in enumerate(self.action):
            if m.shape != (n, n):
                raise ShapeMismatch(f"Action of {self.algebra.labels[i]} on {self.name} has shape {m.shape}", self.name)

    def __repr__(self) -> str:
        return f"Module({self.name or 'unnamed'}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return len(self.vertices)

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    def act(self, b: int) -> np.ndarray:
        return self.action[b]

    def act_element(self, element: np.ndarray) -> np.ndarray:
        """ρ of an algebra element given in coordinates"""
        f = self.field
        out = f.zeros(self.dim, self.dim)
        for i in np.flatnonzero((element != 0).astype(bool)):
            out = f.add(out, f.scale(self.action[i], element[i]))
        return out

    @cached_property
    def vertex_blocks(self) -> tuple[np.ndarray, ...]:
        """Basis indices of e_v M for every vertex v"""
        verts = np.asarray(self.vertices, dtype=np.int64)
        return tuple(np.flatnonzero(verts == v) for v in range(self.algebra.num_vertices))

    def validate(self) -> None:
        """Check ρ(b_i)ρ(b_j) = Σ c_ijk ρ(b_k) and the idempotent block structure.

        Raises:
            ModuleValidationError: naming the first failing pair.
        """
        f = self.field
        alg = self.algebra
        for v, e in enumerate(alg.idempotents):
            expected = f.zeros(self.dim, self.dim)
            for i in self.vertex_blocks[v]:
                expected[i, i] = f.scalar(1)
            if not np.array_equal(self.action[e], expected):
                raise ModuleValidationError(f"{self.name}: idempotent {alg.labels[e]} does not act as its block", v)
        for i in range(alg.dim):
            for j in range(alg.dim):
                lhs = f.matmul(self.action[i], self.action[j])
                rhs = self.act_element(alg.product(i, j))
                if not np.array_equal(lhs, rhs):
                    raise ModuleValidationError(
                        f"{self.name}: action is not multiplicative on ({alg.labels[i]}, {alg.labels[j]})", (i, j)
                    )

    @classmethod
    def zero(cls, algebra: Algebra, name: str = "0") -> Module:
        f = algebra.field
        return cls(algebra, tuple(f.zeros(0, 0) for _ in range(algebra.dim)), (), name)

    @classmethod
    def from_action(cls, algebra: Algebra, action: Sequence[np.ndarray], name: str = "") -> Module:
        """Module from arbitrary action matrices, changing basis so that it is idempotent-adapted"""
        f = algebra.field
        action = [f.array(m) for m in action]
        dim = action[0].shape[0] if action else 0
        columns, vertices = [], []
        for v, e in enumerate(algebra.idempotents):
            block = linalg.image_basis(f, action[e])
            columns.append(block)
            vertices.extend([v] * block.shape[1])
        change = linalg.hstack(f, columns, dim)
        if change.shape[1] != dim:
            raise ModuleValidationError(f"{name}: idempotents do not decompose the module", name)
        inverse = linalg.solve(f, change, f.identity(dim))
        new_action = tuple(f.matmul(inverse, f.matmul(m, change)) for m in action)
        module = cls(algebra, new_action, tuple(vertices), name)
        module.validate()
        return module

    @classmethod
    def from_generators(
        cls, algebra: Algebra, vertices: Sequence[int], generators: dict[str, np.ndarray], name: str = ""
    ) -> Module:
        """Complete the action from the matrices of some letters.

        Missing basis elements are filled in whenever they are a scalar multiple of a
        product of two known ones; idempotents act by their vertex blocks.
        """
        f = algebra.field
        dim = len(vertices)
        known: dict[int, np.ndarray] = {}
        for v, e in enumerate(algebra.idempotents):
            block = f.zeros(dim, dim)
            for i, w in enumerate(vertices):
                if w == v:
                    block[i, i] = f.scalar(1)
            known[e] = block
        for label, matrix in generators.items():
            m = f.array(matrix)
            if m.shape != (dim, dim):
                raise ShapeMismatch(f"{name}: action of {label} must be {dim}x{dim}", label)
            known[algebra.index(label)] = m
        progress = True
        while progress and len(known) < algebra.dim:
            progress = False
            for i, j in [(i, j) for i in list(known) for j in list(known)]:
                prod = algebra.product(i, j)
                nz = np.flatnonzero((prod != 0).astype(bool))
                if len(nz) == 1 and int(nz[0]) not in known:
                    k = int(nz[0])
                    known[k] = f.scale(f.matmul(known[i], known[j]), f.inverse(prod[k]))
                    progress = True
        missing = [algebra.labels[k] for k in range(algebra.dim) if k not in known]
        if missing:
            raise ParseError(f"{name}: cannot determine the action of {missing}", name)
        module = cls(algebra, tuple(known[k] for k in range(algebra.dim)), tuple(int(v) for v in vertices), name)
        module.validate()
        return module

    def dual(self) -> Module:
        """D(M) = Hom_k(M, k) as a left module over the opposite algebra"""
        opp = _opposite(self.algebra)
        return Module(opp, tuple(np.ascontiguousarray(m.T) for m in self.action), self.vertices, f"D({self.name})")

    def submodule(self, basis: np.ndarray, name: str = "", vertices: Sequence[int] | None = None) -> Module:
        """The submodule spanned by adapted columns `basis` (each inside one e_v M)"""
        f = self.field
        if vertices is None:
            vertices = [self._vertex_of_vector(basis[:, i]) for i in range(basis.shape[1])]
        action = []
        for m in self.action:
            if basis.shape[1] == 0:
                action.append(f.zeros(0, 0))
                continue
            try:
                action.append(linalg.restrict_map(f, m, basis, basis))
            except NoSolution as e:
                raise ModuleValidationError(f"Columns do not span a submodule of {self.name}", self.name) from e
        return Module(self.algebra, tuple(action), tuple(vertices), name or f"sub({self.name})")

    def _vertex_of_vector(self, vec: np.ndarray) -> int:
        support = {self.vertices[i] for i in np.flatnonzero((vec != 0).astype(bool))}
        if len(support) != 1:
            raise ModuleValidationError(f"Vector is not homogeneous for the idempotents of {self.name}", self.name)
        return support.pop()


@lru_cache(maxsize=None)
def _opposite(algebra: Algebra) -> Algebra:
    return algebra.opposite()


def direct_sum(modules: Sequence[Module], name: str = "") -> Module:
    if not modules:
        raise ValueError("direct_sum needs at least one module")
    alg = modules[0].algebra
    f = alg.field
    action = tuple(linalg.block_diag(f, [m.action[i] for m in modules]) for i in range(alg.dim))
    vertices = tuple(v for m in modules for v in m.vertices)
    labels = None
    if all(m.labels is not None for m in modules):
        labels = tuple((k, lab) for k, m in enumerate(modules) for lab in m.labels)
    right = None
    if all(m.right_action is not None for m in modules):
        right = tuple(linalg.block_diag(f, [m.right_action[i] for m in modules]) for i in range(alg.dim))
    return Module(alg, action, vertices, name or "⊕".join(m.name for m in modules), labels, right)


def regular_module(algebra: Algebra) -> Module:
    """Λ as a bimodule over itself"""
    return Module(
        algebra,
        algebra.left_regular,
        algebra.left,
        "Lambda",
        tuple(algebra.labels),
        algebra.right_regular,
    )


def projective_module(algebra: Algebra, v: int) -> Module:
    """P_v = Λe_v"""
    idx = [b for b in range(algebra.dim) if algebra.right[b] == v]
    action = tuple(np.ascontiguousarray(m[np.ix_(idx, idx)]) for m in algebra.left_regular)
    vertices = tuple(algebra.left[b] for b in idx)
    return Module(algebra, action, vertices, f"P{v + 1}", tuple(algebra.labels[b] for b in idx))


def injective_module(algebra: Algebra, v: int) -> Module:
    """I_v = D(e_vΛ)"""
    idx = [b for b in range(algebra.dim) if algebra.left[b] == v]
    action = tuple(np.ascontiguousarray(m[np.ix_(idx, idx)].T) for m in algebra.right_regular)
    return Module(
        algebra, action, tuple(algebra.right[b] for b in idx), f"I{v + 1}", tuple(f"{algebra.labels[b]}*" for b in idx)
    )


def simple_module(algebra: Algebra, v: int) -> Module:
    """S_v, one-dimensional at vertex v with every letter acting by zero"""
    f = algebra.field
    action = []
    for b in range(algebra.dim):
        m = f.zeros(1, 1)
        if b == algebra.idempotents[v]:
            m[0, 0] = f.scalar(1)
        action.append(m)
    name = "k" if algebra.num_vertices == 1 else f"S{v + 1}"
    return Module(algebra, tuple(action), (v,), name)


def hom_space(m: Module, n: Module) -> list[np.ndarray]:
    """Basis of Hom_Λ(M, N) as dim N × dim M matrices"""
    f = m.field
    alg = m.algebra
    # unknowns: entries (r, c) with vertices[r] == vertices[c]
    unknowns = [(r, c) for c in range(m.dim) for r in range(n.dim) if n.vertices[r] == m.vertices[c]]
    if not unknowns:
        return []
    position = {u: k for k, u in enumerate(unknowns)}
    builder_rows = []
    for b in alg.complement:
        rho_m, rho_n = m.action[b], n.action[b]
        eq = linalg.MatrixBuilder(f, n.dim * m.dim, len(unknowns))
        # (ρ_N(b) φ − φ ρ_M(b))[r, c]
        for (r0, c0), k in position.items():
            for r in np.flatnonzero((rho_n[:, r0] != 0).astype(bool)):
                eq.add(int(r) * m.dim + c0, k, rho_n[r, r0])
            for c in np.flatnonzero((rho_m[c0, :] != 0).astype(bool)):
                eq.add(r0 * m.dim + int(c), k, f.scalar(-rho_m[c0, c]))
        builder_rows.append(eq.build())
    system = linalg.vstack(f, builder_rows, len(unknowns))
    kernel = linalg.kernel_basis(f, system)
    basis = []
    for j in range(kernel.shape[1]):
        phi = f.zeros(n.dim, m.dim)
        for (r, c), k in position.items():
            phi[r, c] = kernel[k, j]
        basis.append(phi)
    return basis


@dataclass(eq=False)
class Complex:
    """A bounded cochain complex of Λ-modules.

    Attributes:
        algebra: The algebra.
        modules: Components by degree; missing degrees are zero.
        differentials: d^n: X^n → X^{n+1} by source degree.
        name: Display name.
        window: When set, only degrees in this range are faithful (windowed truncations).
    """

    algebra: Algebra
    modules: dict[int, Module] = field(default_factory=dict)
    differentials: dict[int, Any] = field(default_factory=dict)
    name: str = ""
    window: tuple[int, int] | None = None

    def __repr__(self) -> str:
        dims = {n: m.dim for n, m in sorted(self.modules.items()) if m.dim}
        return f"Complex({self.name or 'unnamed'}, dims={dims})"

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    def module(self, n: int) -> Module:
        m = self.modules.get(n)
        if m is None:
            m = Module.zero(self.algebra)
            self.modules[n] = m
        return m

    def dim(self, n: int) -> int:
        m = self.modules.get(n)
        return 0 if m is None else m.dim

    def differential(self, n: int) -> np.ndarray:
        d = self.differentials.get(n)
        if d is None:
            return self.field.zeros(self.dim(n + 1), self.dim(n))
        return linalg.dense(d)

    @property
    def support(self) -> list[int]:
        return sorted(n for n, m in self.modules.items() if m.dim)

    @property
    def bounds(self) -> tuple[int, int]:
        """(a_X, b_X): lowest and highest nonzero degree; (0, -1) for the zero complex"""
        s = self.support
        return (s[0], s[-1]) if s else (0, -1)

    @property
    def is_zero(self) -> bool:
        return not self.support

    def validate(self) -> None:
        """Check shapes, d∘d = 0 and Λ-linearity of every differential.

        Raises:
            ComplexValidationError: naming the offending degree.
        """
        f = self.field
        degrees = sorted(set(self.modules) | set(self.differentials) | {n + 1 for n in self.differentials})
        for n in degrees:
            d = self.differential(n)
            if d.shape != (self.dim(n + 1), self.dim(n)):
                raise ComplexValidationError(f"{self.name}: d^{n} has shape {d.shape}", n)
            if not linalg.is_zero(f.matmul(self.differential(n + 1), d)):
                raise ComplexValidationError(f"{self.name}: d^{n + 1}∘d^{n} ≠ 0", n)
            src, tgt = self.module(n), self.module(n + 1)
            for b in range(self.algebra.dim):
                if not np.array_equal(f.matmul(d, src.action[b]), f.matmul(tgt.action[b], d)):
                    raise ComplexValidationError(
                        f"{self.name}: d^{n} is not Λ-linear on {self.algebra.labels[b]}", (n, self.algebra.labels[b])
                    )

    @classmethod
    def stalk(cls, module: Module, degree: int = 0, name: str = "") -> Complex:
        return cls(module.algebra, {degree: module}, {}, name or module.name)


@dataclass(eq=False)
class CochainMap:
    """A degree-`degree` map f^n: X^n → Y^{n+degree} commuting with the differentials up to (−1)^degree"""

    source: Complex
    target: Complex
    components: dict[int, Any] = field(default_factory=dict)
    degree: int = 0

    def component(self, n: int) -> np.ndarray:
        c = self.components.get(n)
        if c is None:
            return self.source.field.zeros(self.target.dim(n + self.degree), self.source.dim(n))
        return linalg.dense(c)

    def degrees(self) -> list[int]:
        return sorted(set(self.source.support) | {n - self.degree for n in self.target.support})

    def validate(self, degrees: Iterable[int] | None = None) -> None:
        """Check d_Y f = (−1)^deg f d_X on the given (default: all) source degrees"""
        f = self.source.field
        sign = f.sign(self.degree)
        for n in degrees if degrees is not None else self.degrees():
            lhs = f.matmul(self.target.differential(n + self.degree), self.component(n))
            rhs = f.scale(f.matmul(self.component(n + 1), self.source.differential(n)), sign)
            if not np.array_equal(lhs, rhs):
                raise ComplexValidationError(
                    f"Map {self.source.name} → {self.target.name} is not a cochain map at {n}", n
                )

    def is_linear(self) -> bool:
        f = self.source.field
        for n in self.degrees():
            c = self.component(n)
            src, tgt = self.source.module(n), self.target.module(n + self.degree)
            for b in range(self.source.algebra.dim):
                if not np.array_equal(f.matmul(c, src.action[b]), f.matmul(tgt.action[b], c)):
                    return False
        return True

    def compose(self, other: CochainMap) -> CochainMap:
        """self ∘ other"""
        f = self.source.field
        comps = {n: f.matmul(self.component(n + other.degree), other.component(n)) for n in other.degrees()}
        return CochainMap(other.source, self.target, comps, self.degree + other.degree)

    @classmethod
    def identity(cls, x: Complex) -> CochainMap:
        return cls(x, x, {n: x.field.identity(x.dim(n)) for n in x.support})


def shift(x: Complex, k: int = 1) -> Complex:
    """Σ^k X: (Σ^k X)^n = X^{n+k} with differential (−1)^k d"""
    f = x.field
    modules = {n - k: m for n, m in x.modules.items()}
    diffs = {n - k: f.scale(x.differential(n), f.sign(k)) for n in x.differentials}
    window = None if x.window is None else (x.window[0] - k, x.window[1] - k)
    return Complex(x.algebra, modules, diffs, f"Σ^{k}{x.name}" if k != 1 else f"Σ{x.name}", window)


def cone(f_map: CochainMap, name: str = "") -> Complex:
    """Cone(f)^n = Y^n ⊕ X^{n+1}, d = [[d_Y, f^{n+1}], [0, −d_X^{n+1}]]"""
    if f_map.degree != 0:
        raise ComplexValidationError("Cones are taken of degree-0 maps", f_map.degree)
    x, y = f_map.source, f_map.target
    fld = x.field
    degrees = sorted(set(y.modules) | {n - 1 for n in x.modules})
    modules = {n: direct_sum([y.module(n), x.module(n + 1)], f"{y.name}^{n}⊕{x.name}^{n + 1}") for n in degrees}
    diffs = {}
    for n in degrees:
        top = linalg.hstack(fld, [y.differential(n), f_map.component(n + 1)], y.dim(n + 1))
        bottom = linalg.hstack(
            fld, [fld.zeros(x.dim(n + 2), y.dim(n)), fld.neg(x.differential(n + 1))], x.dim(n + 2)
        )
        diffs[n] = linalg.vstack(fld, [top, bottom], y.dim(n) + x.dim(n + 1))
    for n in degrees:
        if n + 1 not in modules:
            modules[n + 1] = direct_sum([y.module(n + 1), x.module(n + 2)])
    window = None
    if x.window is not None and y.window is not None:
        window = (max(y.window[0], x.window[0] - 1), min(y.window[1], x.window[1] - 1))
    return Complex(x.algebra, modules, diffs, name or f"Cone({x.name}→{y.name})", window)


def cone_triangle(f_map: CochainMap) -> tuple[Complex, CochainMap, CochainMap]:
    """Cone(f) with the canonical maps Y → Cone(f) → ΣX"""
    x, y = f_map.source, f_map.target
    fld = x.field
    c = cone(f_map)
    sx = shift(x)
    incl, proj = {}, {}
    for n in c.support:
        dy, dx = y.dim(n), x.dim(n + 1)
        incl[n] = linalg.vstack(fld, [fld.identity(dy), fld.zeros(dx, dy)], dy)
        proj[n] = linalg.hstack(fld, [fld.zeros(dx, dy), fld.identity(dx)], dx)
    return c, CochainMap(y, c, incl), CochainMap(c, sx, proj)


@dataclass
class Cohomology:
    """H^n with representatives: `cycles` spans ker d^n, `boundaries` spans im d^{n-1},
    `representatives` are cycles independent modulo boundaries."""

    degree: int
    cycles: np.ndarray
    boundaries: np.ndarray
    representatives: np.ndarray

    @property
    def dim(self) -> int:
        return self.representatives.shape[1]


def cohomology_dim(x: Complex, n: int) -> int:
    return linalg.cohomology_dims(x.field, x.differential(n - 1), x.differential(n))


def cohomology(x: Complex, n: int) -> Cohomology:
    f = x.field
    cycles = linalg.kernel_basis(f, x.differential(n))
    boundaries = linalg.image_basis(f, x.differential(n - 1))
    reps = linalg.quotient_basis(f, boundaries, cycles)
    return Cohomology(n, cycles, boundaries, reps)


def induced_map_rank(f_map: CochainMap, n: int) -> int:
    """Rank of H^n(f)"""
    fld = f_map.source.field
    src = cohomology(f_map.source, n)
    tgt_boundaries = linalg.image_basis(fld, f_map.target.differential(n + f_map.degree - 1))
    images = fld.matmul(f_map.component(n), src.representatives)
    joined = linalg.hstack(fld, [tgt_boundaries, images], f_map.target.dim(n + f_map.degree))
    return linalg.rank(fld, joined) - tgt_boundaries.shape[1]


def quasi_iso_window(f_map: CochainMap, lo: int, hi: int) -> bool:
    """Whether Cone(f) is exact in degrees lo..hi"""
    c = cone(f_map)
    return all(cohomology_dim(c, n) == 0 for n in range(lo, hi + 1))


def hom_complex(x: Complex, y: Complex, lo: int | None = None, hi: int | None = None) -> tuple[Complex, dict]:
    """Hom_Λ(X, Y) as a complex of vector spaces, D(f) = d_Y f − (−1)^n f d_X.

    Returns the complex (over the ground field) and, per degree, the list of
    (m, basis of Hom_Λ(X^m, Y^{m+n})) used for coordinates.
    """
    fld = x.field
    ax, bx = x.bounds
    ay, by = y.bounds
    lo = ay - bx - 1 if lo is None else lo
    hi = by - ax + 1 if hi is None else hi
    k = ground_algebra(fld)
    bases: dict[int, list[tuple[int, np.ndarray]]] = {}
    for n in range(lo, hi + 2):
        entries = []
        for m in x.support:
            if y.dim(m + n):
                entries.extend((m, phi) for phi in hom_space(x.module(m), y.module(m + n)))
        bases[n] = entries
    modules = {n: vector_space(k, len(bases[n])) for n in bases}
    diffs = {}
    for n in range(lo, hi + 1):
        cols = []
        for m, phi in bases[n]:
            image = {}
            # d_Y φ lands in Hom(X^m, Y^{m+n+1}); φ d_X lands in Hom(X^{m-1}, Y^{m+n})
            image[m] = fld.matmul(y.differential(m + n), phi)
            image[m - 1] = fld.scale(fld.matmul(phi, x.differential(m - 1)), fld.scalar(-1) * fld.sign(n))
            cols.append(hom_coordinates(fld, bases[n + 1], image))
        diffs[n] = linalg.hstack(fld, cols, len(bases[n + 1])) if cols else fld.zeros(len(bases[n + 1]), 0)
    return Complex(k, modules, diffs, f"Hom({x.name},{y.name})", (lo + 1, hi)), bases


def vector_space(k: Algebra, dim: int) -> Module:
    f = k.field
    return Module(k, (f.identity(dim),), (0,) * dim)


def hom_coordinates(fld: FieldSpec, basis: list[tuple[int, np.ndarray]], image: dict[int, np.ndarray]) -> np.ndarray:
    """Coordinates of a family of component maps in a Hom basis"""
    if not basis:
        return fld.zeros(0, 1)
    rows = []
    target = []
    for m, comp in image.items():
        members = [j for j, (mm, _) in enumerate(basis) if mm == m]
        if not members:
            if not linalg.is_zero(comp):
                raise NoSolution("Image leaves the Hom basis", m)
            continue
        mat = fld.zeros(comp.size, len(basis))
        for j in members:
            mat[:, j] = basis[j][1].reshape(-1)
        rows.append(mat)
        target.append(comp.reshape(-1))
    if not rows:
        return fld.zeros(len(basis), 1)
    system = linalg.vstack(fld, rows, len(basis))
    rhs = np.concatenate(target)
    return linalg.solve(fld, system, rhs).reshape(-1, 1)


def homotopy_classes_dim(x: Complex, y: Complex, n: int = 0) -> int:
    """dim of degree-n maps X → Y modulo null-homotopic ones, computed from closed maps and
    the explicit null-homotopic family d_Y h + (−1)^n h d_X"""
    fld = x.field
    hom, bases = hom_complex(x, y, n - 1, n + 1)
    closed = linalg.kernel_basis(fld, hom.differential(n))
    null_cols = []
    for m, h in bases[n - 1]:
        image = {
            m: fld.matmul(y.differential(m + n - 1), h),
            m - 1: fld.scale(fld.matmul(h, x.differential(m - 1)), fld.sign(n)),
        }
        null_cols.append(hom_coordinates(fld, bases[n], image))
    nulls = linalg.hstack(fld, null_cols, len(bases[n]))
    return closed.shape[1] - linalg.rank(fld, nulls)


def tensor_over_algebra(b: Complex, x: Complex, name: str = "") -> Complex:
    """B ⊗_Λ X for a complex of bimodules B (components carry `right_action`).

    Components are coequalizers (B^i ⊗_k X^m)/(bλ⊗x − b⊗λx); the differential is
    d_B ⊗ 1 + (−1)^i 1 ⊗ d_X.
    """
    fld = x.field
    alg = x.algebra
    pieces: dict[int, list[tuple[int, int]]] = {}
    for i in b.support:
        for m in x.support:
            pieces.setdefault(i + m, []).append((i, m))
    quotient: dict[tuple[int, int], tuple[np.ndarray, np.ndarray, Module]] = {}
    for (i, m) in [pm for v in pieces.values() for pm in v]:
        bi, xm = b.module(i), x.module(m)
        if bi.right_action is None:
            raise ComplexValidationError(f"{b.name}^{i} carries no right action", i)
        size = bi.dim * xm.dim
        rel_blocks = []
        for lam in range(alg.dim):
            # (b·λ)⊗x − b⊗(λ·x) in the Kronecker basis (b-index major)
            rel_blocks.append(
                fld.sub(
                    np.kron(bi.right_action[lam], fld.identity(xm.dim)),
                    np.kron(fld.identity(bi.dim), xm.action[lam]),
                )
            )
        relations = linalg.image_basis(fld, linalg.hstack(fld, rel_blocks, size))
        section = linalg.quotient_basis(fld, relations, fld.identity(size))
        # projection: coordinates modulo relations
        full = linalg.hstack(fld, [section, relations], size)
        inverse = linalg.solve(fld, full, fld.identity(size))
        projection = inverse[: section.shape[1]]
        action = tuple(
            fld.matmul(projection, fld.matmul(np.kron(bi.action[lam], fld.identity(xm.dim)), section))
            for lam in range(alg.dim)
        )
        vertices = tuple(bi.vertices[int(np.flatnonzero((section[:, j] != 0).astype(bool))[0]) // xm.dim]
                         for j in range(section.shape[1]))
        quotient[(i, m)] = (section, projection, Module(alg, action, vertices, f"{bi.name}⊗{xm.name}"))
    modules, diffs = {}, {}
    for n, parts in pieces.items():
        modules[n] = direct_sum([quotient[p][2] for p in parts], f"({b.name}⊗{x.name})^{n}")
    for n, parts in pieces.items():
        targets = pieces.get(n + 1, [])
        rows = []
        for (i2, m2) in targets:
            row = []
            for (i, m) in parts:
                sec = quotient[(i, m)][0]
                proj = quotient[(i2, m2)][1]
                block = fld.zeros(proj.shape[0], sec.shape[1])
                if i2 == i + 1 and m2 == m:
                    block = fld.matmul(proj, fld.matmul(np.kron(b.differential(i), fld.identity(x.dim(m))), sec))
                elif i2 == i and m2 == m + 1:
                    lifted = np.kron(fld.identity(b.dim(i)), x.differential(m))
                    block = fld.scale(fld.matmul(proj, fld.matmul(lifted, sec)), fld.sign(i))
                row.append(block)
            rows.append(linalg.hstack(fld, row, row[0].shape[0] if row else 0))
        if targets:
            diffs[n] = linalg.vstack(fld, rows, modules[n].dim)
    return Complex(alg, modules, diffs, name or f"{b.name}⊗{x.name}")


def module_from_document(algebra: Algebra, name: str, table: dict) -> Module:
    """Parse a [modules.NAME] table: `vertices` (1-based) and `action` matrices for letters"""
    fld = algebra.field
    try:
        vertices = [int(v) - 1 for v in table["vertices"]]
    except KeyError:
        if algebra.num_vertices != 1:
            raise ParseError(f"Module {name} needs 'vertices'", name) from None
        vertices = [0] * int(table.get("dim", 0))
    if any(not 0 <= v < algebra.num_vertices for v in vertices):
        raise ParseError(f"Module {name} has a vertex out of range", name)
    generators = {}
    for label, rows in table.get("action", {}).items():
        generators[label] = fld.array([[fld.scalar(v) for v in row] for row in rows]) if rows else fld.zeros(0, 0)
    return Module.from_generators(algebra, vertices, generators, name)


def complex_from_document(algebra: Algebra, name: str, table: dict, modules: dict[str, Module]) -> Complex:
    """Parse a [complexes.NAME] table: `components` (degree → module name) and
    `differentials` (source degree → matrix)"""
    comps = {}
    for deg, mod_name in table.get("components", {}).items():
        if mod_name not in modules:
            raise ParseError(f"Complex {name} uses unknown module {mod_name}", name)
        comps[int(deg)] = modules[mod_name]
    fld = algebra.field
    diffs = {}
    for deg, rows in table.get("differentials", {}).items():
        n = int(deg)
        shape = (comps[n + 1].dim if n + 1 in comps else 0, comps[n].dim if n in comps else 0)
        mat = fld.array([[fld.scalar(v) for v in row] for row in rows]) if rows else fld.zeros(*shape)
        if mat.shape != shape:
            raise ParseError(f"Differential {n} of {name} must have shape {shape}", (name, n))
        diffs[n] = mat
    x = Complex(algebra, comps, diffs, name)
    x.validate()
    return x


def element_from_text(algebra: Algebra, text: str) -> np.ndarray:
    """Coordinates of an algebra element written as a linear combination of basis labels"""
    fld = algebra.field
    vec = fld.zeros(algebra.dim)
    for coeff, names in parse_combination(text, fld):
        if len(names) != 1:
            raise ParseError(f"'{text}' is not a combination of basis labels", text)
        k = algebra.index(names[0])
        vec[k] = fld.scalar(vec[k] + coeff)
    return vec
