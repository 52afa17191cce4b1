"""
Noncommutative differential forms Ω_nc(X) = s𝛬̄ ⊗_E X.

The left action is twisted, b ▸ (s ā ⊗ x) = s(ba)‾ ⊗ x − s b̄ ⊗ ax, and the
differential is d(s ā ⊗ x) = −s ā ⊗ d_X x. Iterated powers are built one slot at
a time, so Ω^p(Ω^q X) and Ω^{p+q} X are the same object.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg
from .bar import BarTensor, bar_tensor, coordinate_map
from .config import get_settings
from .errors import CapInsufficientError, WorkbenchError
from .homalg import CochainMap, Complex, Module
from .yoneda import (
    YonedaElement,
    compose,
    from_cochain_map,
    iota,
    tensor_space,
    yoneda_space,
)

logger = logging.getLogger(__name__)

# (letters, base index): a basis vector s ā_{1,p} ⊗ x of Ω^p X
FlatLabel = tuple[tuple[int, ...], int]


@dataclass(eq=False)
class OmegaComplex(Complex):
    """Ω_nc(Z) for a complex Z.

    Attributes:
        base: The complex Z.
        root: The complex X with Z = Ω^{level−1} X.
        level: Number of Ω slots over `root`.
        keys: Per degree n, (letter, index in Z^{n+1}) for every basis vector.
        index: Position of every key per degree.
        flat: Per degree, the (letters, root index) label of every basis vector.
    """

    base: Complex | None = None
    root: Complex | None = None
    level: int = 1
    keys: dict[int, list[tuple[int, int]]] = field(default_factory=dict)
    index: dict[int, dict[tuple[int, int], int]] = field(default_factory=dict)
    flat: dict[int, list[FlatLabel]] = field(default_factory=dict)

    def letter_rows(self, n: int, letter: int) -> np.ndarray:
        """For every z ∈ Z^{n+1}, the row of (letter, z) in degree n, or −1"""
        out = np.full(self.base.dim(n + 1), -1, dtype=np.int64)
        for (a, z), pos in self.index.get(n, {}).items():
            if a == letter:
                out[z] = pos
        return out


def flat_labels(x: Complex, n: int) -> list[FlatLabel]:
    """Labels (letters, root index) of X^n; a plain complex has empty words"""
    if isinstance(x, OmegaComplex):
        return x.flat.get(n, [])
    return [((), i) for i in range(x.dim(n))]


def root_of(x: Complex) -> tuple[Complex, int]:
    if isinstance(x, OmegaComplex):
        return x.root, x.level
    return x, 0


@lru_cache(maxsize=None)
def omega(z: Complex) -> OmegaComplex:
    """Ω_nc(Z) with its twisted action matrices"""
    alg = z.algebra
    f = alg.field
    root, level = root_of(z)
    keys: dict[int, list[tuple[int, int]]] = {}
    for m in z.support:
        zm = z.module(m)
        keys[m - 1] = [
            (a, i) for a in range(alg.num_letters) for i in range(zm.dim) if alg.letter_right(a) == zm.vertices[i]
        ]
    index = {n: {k: i for i, k in enumerate(ks)} for n, ks in keys.items()}
    projected = [
        [alg.project(alg.product(b, alg.complement[a])) for a in range(alg.num_letters)] for b in range(alg.dim)
    ]
    modules: dict[int, Module] = {}
    flat: dict[int, list[FlatLabel]] = {}
    for n, ks in keys.items():
        zm = z.module(n + 1)
        inner = flat_labels(z, n + 1)
        size = len(ks)
        action = []
        for b in range(alg.dim):
            mb = linalg.MatrixBuilder(f, size, size)
            letter_b = alg.letter_of.get(b)
            for pos, (a, i) in enumerate(ks):
                prod = projected[b][a]
                for k in np.flatnonzero((prod != 0).astype(bool)):
                    mb.add(index[n][(int(k), i)], pos, prod[k])
                if letter_b is None:
                    continue
                column = zm.action[alg.complement[a]][:, i]
                for i2 in np.flatnonzero((column != 0).astype(bool)):
                    target = index[n].get((letter_b, int(i2)))
                    if target is not None:
                        mb.add(target, pos, f.scalar(-column[i2]))
            action.append(mb.build())
        labels = tuple(((a,) + inner[i][0], inner[i][1]) for a, i in ks)
        flat[n] = list(labels)
        modules[n] = Module(alg, tuple(action), tuple(alg.letter_left(a) for a, _ in ks), f"Ω({z.name})^{n}", labels)
    density = get_settings().sparse_density
    diffs = {}
    for n, ks in keys.items():
        if n + 1 not in keys:
            continue
        d = z.differential(n + 1)
        mb = linalg.MatrixBuilder(f, len(keys[n + 1]), len(ks))
        for pos, (a, i) in enumerate(ks):
            for i2 in np.flatnonzero((d[:, i] != 0).astype(bool)):
                mb.add(index[n + 1][(a, int(i2))], pos, f.scalar(-d[i2, i]))
        diffs[n] = linalg.compact(f, mb.build(), density)
    result = OmegaComplex(
        alg, modules, diffs, f"Ω({z.name})", None, z, root, level + 1, keys, index, flat
    )
    if get_settings().debug_checks:
        result.validate()
    logger.debug(f"{result.name}: dims { {n: len(k) for n, k in keys.items()} }")
    return result


def omega_power(x: Complex, p: int) -> Complex:
    """Ω_nc^p(X); Ω^0 X = X"""
    if p < 0:
        raise WorkbenchError(f"Negative power of Ω: {p}", p)
    out = x
    for _ in range(p):
        out = omega(out)
    return out


def omega_on_morphism(f: YonedaElement) -> YonedaElement:
    """Ω_nc(f) = Id_{s𝛬̄} ⊗ f: s ā_{1,p} ⊗ (s c ⊗ x) ↦ (−1)^{|f|} s ā_1 ⊗ f(s ā_{2,p} s c ⊗ x)"""
    fld = f.field
    alg = f.space.algebra
    n = f.degree
    ox, oy = omega(f.source), omega(f.target)
    space = yoneda_space(ox, oy)
    sign = fld.sign(n)
    blocks = {}
    for (p, m), fb in f.blocks.items():
        if linalg.is_zero(fb):
            continue
        fb = linalg.dense(fb)
        mm = m - 1
        j = m + n - p
        ts_src = tensor_space(ox.module(mm), p)
        ts_f = tensor_space(f.source.module(m), p)
        words = alg.tensor_power(p)
        rows_by_letter = {a: oy.letter_rows(j - 1, a) for a in range(alg.num_letters)}
        out = fld.zeros(oy.dim(j - 1), len(ts_src))
        for c in range(len(ts_src)):
            t, k = int(ts_src.word[c]), int(ts_src.base[c])
            letter, x0 = ox.keys[mm][k]
            full = words.words[t] + (letter,)
            rest = full[1:]
            t_f = words.find(rest, f.source.module(m).vertices[x0])
            column = fb[:, ts_f.position(t_f, x0)]
            rows = rows_by_letter[full[0]]
            present = np.flatnonzero((column != 0).astype(bool))
            if present.size == 0:
                continue
            if np.any(rows[present] < 0):
                raise WorkbenchError("Ω(f) leaves the basis of Ω(Y)", (p, m))
            out[rows[present], c] = fld.scale(column[present], sign)
        blocks[(p, mm)] = out
    return YonedaElement(space, n, blocks)


def omega_power_on_morphism(f: YonedaElement, p: int) -> YonedaElement:
    out = f
    for _ in range(p):
        out = omega_on_morphism(out)
    return out


def theta(x: Complex) -> YonedaElement:
    """θ_X ∈ 𝒴_1(X, Ω_nc X), s ā ⊗ x ↦ s ā ⊗ x (closed of degree 0)"""
    fld = x.field
    ox = omega(x)
    space = yoneda_space(x, ox)
    blocks = {}
    for m in x.support:
        ts = tensor_space(x.module(m), 1)
        if not len(ts):
            continue
        b = fld.zeros(ox.dim(m - 1), len(ts))
        for c in range(len(ts)):
            letter = ts.words.words[int(ts.word[c])][0]
            b[ox.index[m - 1][(letter, int(ts.base[c]))], c] = fld.scalar(1)
        blocks[(1, m)] = b
    return YonedaElement(space, 0, blocks)


def varsigma_map(source: BarTensor, target: BarTensor, p: int) -> CochainMap:
    """ς_p: 𝔹 ⊗ Ω^p X → 𝔹_{≥p} ⊗ X,

    (a ⊗ s ā_{1,q}) ⊗ (s ā_{q+1,q+p} ⊗ x) ↦ (a ⊗ s ā_{1,q+p}) ⊗ x
    """
    alg = source.algebra
    f = source.field
    root, level = root_of(source.base)
    if level != p or root is not target.base:
        raise WorkbenchError(f"ς_{p} needs 𝔹 ⊗ Ω^{p} X and 𝔹_{{≥{p}}} ⊗ X", (source.name, target.name))
    comps = {}
    for j, ks in source.keys.items():
        labels_by_degree: dict[int, list[FlatLabel]] = {}
        index = target.index.get(j, {})
        mb = linalg.MatrixBuilder(f, target.dim(j), len(ks))
        for pos, (q, t, z, a) in enumerate(ks):
            m = j + q
            if m not in labels_by_degree:
                labels_by_degree[m] = flat_labels(source.base, m)
            letters, x0 = labels_by_degree[m][z]
            words = alg.tensor_power(q)
            combined = alg.tensor_power(q + p).find(words.words[t] + letters, words.left[t])
            key = (q + p, combined, x0, a)
            if key not in index:
                raise CapInsufficientError(f"ς_{p} needs word length {q + p} in {target.name}", key)
            mb.add(index[key], pos, f.scalar(1))
        comps[j] = mb.build()
    return CochainMap(source, target, comps)


def varsigma(x: Complex, p: int, cap: int) -> CochainMap:
    """ς_p on 𝔹_{≤cap} ⊗ Ω^p X → 𝔹_{[p, cap+p]} ⊗ X"""
    alg = x.algebra
    source = bar_tensor(alg, omega_power(x, p), cap)
    target = bar_tensor(alg, x, cap + p, floor=p)
    return varsigma_map(source, target, p)


def check_omega_bar_square(x: Complex, p: int, cap: int) -> bool:
    """(ς_{p+1} ∘ ι_{Ω^{p+1}X}) ⊙ θ_{Ω^p X} = (π_p ⊗ Id_X) ⊙ (ς_p ∘ ι_{Ω^p X})

    as maps into 𝔹_{[p+1, cap]} ⊗ X
    """
    if cap < p + 1:
        raise CapInsufficientError(f"The square at p={p} needs cap ≥ {p + 1}", cap)
    alg = x.algebra
    op = omega_power(x, p)
    op1 = omega(op)
    upper = bar_tensor(alg, x, cap, floor=p + 1)
    middle = bar_tensor(alg, x, cap, floor=p)

    iota_up = iota(op1, cap - p - 1)
    right = compose(from_cochain_map(varsigma_map(iota_up.target, upper, p + 1)), iota_up)
    lhs = compose(right, theta(op))

    iota_here = iota(op, cap - p)
    left = compose(from_cochain_map(varsigma_map(iota_here.target, middle, p)), iota_here)
    rhs = compose(from_cochain_map(coordinate_map(middle, upper)), left)
    equal = lhs == rhs
    logger.info(f"Ω/bar square for {x.name} at p={p}, cap {cap}: {'commutes' if equal else 'fails'}")
    return equal


def lower_arrow(source: BarTensor, target: BarTensor) -> CochainMap:
    """ψ ∘ (π_0 ⊗ Id): 𝔹 ⊗ X → 𝔹_{≥1} ⊗ X → 𝔹 ⊗ Ω_nc X, moving the last letter into Ω"""
    alg = source.algebra
    f = source.field
    ox = target.base
    if not isinstance(ox, OmegaComplex) or ox.base is not source.base:
        raise WorkbenchError("The lower arrow needs 𝔹 ⊗ X and 𝔹 ⊗ Ω(X)", (source.name, target.name))
    comps = {}
    for j, ks in source.keys.items():
        index = target.index.get(j, {})
        mb = linalg.MatrixBuilder(f, target.dim(j), len(ks))
        for pos, (q, t, x0, a) in enumerate(ks):
            if q == 0:
                continue
            letters = alg.tensor_power(q).words[t]
            head = alg.tensor_power(q - 1).find(letters[:-1], alg.right[a])
            z = ox.index[j + q - 1][(letters[-1], x0)]
            key = (q - 1, head, z, a)
            if key in index:
                mb.add(index[key], pos, f.scalar(1))
        comps[j] = mb.build()
    return CochainMap(source, target, comps)


def check_one_step_square(x: Complex, cap: int) -> bool:
    """ι_{ΩX} ⊙ θ_X = (ψ ∘ (π_0 ⊗ Id_X)) ⊙ ι_X"""
    if cap < 1:
        raise CapInsufficientError("The one-step square needs cap ≥ 1", cap)
    ox = omega(x)
    iota_omega = iota(ox, cap - 1)
    lhs = compose(iota_omega, theta(x))
    iota_x = iota(x, cap)
    rhs = compose(from_cochain_map(lower_arrow(iota_x.target, iota_omega.target)), iota_x)
    return lhs == rhs
