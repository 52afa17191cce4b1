"""
The normalized bar resolution 𝔹 of Λ relative to E and its tensor products 𝔹 ⊗_Λ X.

𝔹⊗_Λ X is built in collapsed form: in degree j the basis is the set of triples
a ⊗ sā_{1,q} ⊗ x with a a basis element of Λ, a word of q letters and x a basis
vector of X^{j+q}, subject to right(a) = left(word) and right(word) = vertex(x).
Taking X = Λ gives 𝔹 itself as a complex of bimodules.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import Algebra
from .config import get_settings
from .errors import CapInsufficientError
from .homalg import CochainMap, Complex, Module, regular_module

logger = logging.getLogger(__name__)

# a basis key (q, t, z, a): word length, word index in W_q, index in X^{j+q}, algebra basis element
BarKey = tuple[int, int, int, int]


@dataclass(eq=False)
class BarTensor(Complex):
    """𝔹_{[floor, cap]} ⊗_Λ X as a complex of left Λ-modules.

    Attributes:
        base: The complex X.
        cap: Largest word length kept.
        floor: Smallest word length kept (quotient 𝔹_{≥floor}).
        keys: Basis keys per degree.
        index: Position of every key per degree.
    """

    base: Complex | None = None
    cap: int = 0
    floor: int = 0
    keys: dict[int, list[BarKey]] = field(default_factory=dict)
    index: dict[int, dict[BarKey, int]] = field(default_factory=dict)

    def key_label(self, j: int, pos: int) -> tuple:
        """(a, letters, z) for the basis vector `pos` of degree j"""
        q, t, z, a = self.keys[j][pos]
        return a, self.algebra.tensor_power(q).words[t], z

    def word_lengths(self, j: int) -> list[int]:
        return sorted({k[0] for k in self.keys.get(j, [])})


def _enumerate_keys(alg: Algebra, x: Complex, j: int, floor: int, cap: int) -> list[BarKey]:
    keys = []
    for q in range(floor, cap + 1):
        m = j + q
        xm = x.modules.get(m)
        if xm is None or xm.dim == 0:
            continue
        w = alg.tensor_power(q)
        for t in range(len(w)):
            for z in range(xm.dim):
                if xm.vertices[z] != w.right[t]:
                    continue
                for a in range(alg.dim):
                    if alg.right[a] == w.left[t]:
                        keys.append((q, t, z, a))
    return keys


def _nonzero(vec: np.ndarray):
    nz = np.flatnonzero((vec != 0).astype(bool))
    return [(int(k), vec[k]) for k in nz]


def bar_tensor(a: Algebra, x: Complex, cap: int, floor: int = 0, name: str = "") -> BarTensor:
    """𝔹_{[floor, cap]} ⊗_Λ X with differential

    d(a⊗w⊗x) = a a₁⊗w_{2..q}⊗x + (−1)^q a⊗w_{1..q−1}⊗a_q x
               + Σ_i (−1)^i a⊗(… a_i a_{i+1} …)⊗x
               + (−1)^q a⊗w⊗d_X x,

    dropping terms whose word length leaves [floor, cap].
    """
    if cap < floor:
        raise CapInsufficientError(f"Bar cap {cap} is below floor {floor}", (floor, cap))
    f = a.field
    ax, bx = x.bounds
    if x.is_zero:
        return BarTensor(a, {}, {}, name or f"B⊗{x.name}", None, x, cap, floor)
    degrees = range(ax - cap, bx - floor + 1)
    keys = {j: _enumerate_keys(a, x, j, floor, cap) for j in degrees}
    index = {j: {k: i for i, k in enumerate(ks)} for j, ks in keys.items()}
    density = get_settings().sparse_density
    products = [[_nonzero(a.product(b, c)) for c in range(a.dim)] for b in range(a.dim)]
    modules: dict[int, Module] = {}
    for j, ks in keys.items():
        n = len(ks)
        action = []
        for b in range(a.dim):
            mb = linalg.MatrixBuilder(f, n, n)
            for pos, (q, t, z, av) in enumerate(ks):
                for c, coeff in products[b][av]:
                    mb.add(index[j][(q, t, z, c)], pos, coeff)
            action.append(mb.build())
        right = None
        base_module = x.modules.get(0)
        if x.support == [0] and base_module is not None and base_module.right_action is not None:
            right = []
            for b in range(a.dim):
                mb = linalg.MatrixBuilder(f, n, n)
                for pos, (q, t, z, av) in enumerate(ks):
                    for z2, coeff in _nonzero(base_module.right_action[b][:, z]):
                        key = (q, t, z2, av)
                        if key in index[j]:
                            mb.add(index[j][key], pos, coeff)
                right.append(mb.build())
            right = tuple(right)
        modules[j] = Module(
            a,
            tuple(action),
            tuple(a.left[k[3]] for k in ks),
            f"(B⊗{x.name})^{j}",
            tuple((k[3], a.tensor_power(k[0]).words[k[1]], k[2]) for k in ks),
            right,
        )
    diffs = {}
    for j, ks in keys.items():
        if j + 1 not in keys:
            continue
        target = index[j + 1]
        mb = linalg.MatrixBuilder(f, len(keys[j + 1]), len(ks))
        for pos, (q, t, z, av) in enumerate(ks):
            m = j + q
            w = a.tensor_power(q)
            if q >= 1 and q - 1 >= floor:
                letters = w.words[t]
                lower = a.tensor_power(q - 1)
                a1 = a.complement[letters[0]]
                rest = lower.find(letters[1:], w.right[t])
                for c, coeff in products[av][a1]:
                    mb.add(target[(q - 1, rest, z, c)], pos, coeff)
                aq = a.complement[letters[-1]]
                head = lower.find(letters[:-1], w.left[t])
                sign = f.sign(q)
                for z2, coeff in _nonzero(x.module(m).action[aq][:, z]):
                    mb.add(target[(q - 1, head, z2, av)], pos, f.scalar(sign * coeff))
                for i, t_low, coeff in w.merges[t]:
                    mb.add(target[(q - 1, t_low, z, av)], pos, f.scalar(f.sign(i) * coeff))
            sign = f.sign(q)
            for z2, coeff in _nonzero(x.differential(m)[:, z]):
                mb.add(target[(q, t, z2, av)], pos, f.scalar(sign * coeff))
        diffs[j] = linalg.compact(f, mb.build(), density)
    result = BarTensor(a, modules, diffs, name or f"B⊗{x.name}", None, x, cap, floor, keys, index)
    if get_settings().debug_checks:
        result.validate()
    logger.debug(f"{result.name}: word lengths {floor}..{cap}, dims { {j: len(k) for j, k in keys.items()} }")
    return result


def bar(a: Algebra, max_deg: int) -> BarTensor:
    """𝔹_{≤max_deg} as a complex of Λ-bimodules (degrees −max_deg..0)"""
    return bar_tensor(a, Complex.stalk(regular_module(a), 0, "Lambda"), max_deg, name=f"B_{max_deg}")


def external_differential(a: Algebra, n: int) -> np.ndarray:
    """d_ex: Λ⊗𝛬̄^{⊗n}⊗Λ → Λ⊗𝛬̄^{⊗(n−1)}⊗Λ in collapsed coordinates"""
    return bar(a, n).differential(-n)


def augmentation(bt: BarTensor) -> CochainMap:
    """ε ⊗ Id_X: 𝔹⊗X → X, a⊗x ↦ a·x on word length 0"""
    if bt.floor != 0:
        raise CapInsufficientError("Augmentation needs word length 0", bt.floor)
    x = bt.base
    f = bt.field
    comps = {}
    for j, ks in bt.keys.items():
        mb = linalg.MatrixBuilder(f, x.dim(j), len(ks))
        for pos, (q, _t, z, av) in enumerate(ks):
            if q == 0:
                for z2, coeff in _nonzero(x.module(j).action[av][:, z]):
                    mb.add(z2, pos, coeff)
        comps[j] = mb.build()
    return CochainMap(bt, x, comps)


def epsilon(a: Algebra, max_deg: int = 1) -> CochainMap:
    """ε: 𝔹 → Λ, a⊗b ↦ ab"""
    return augmentation(bar(a, max_deg))


def coordinate_map(source: BarTensor, target: BarTensor) -> CochainMap:
    """Inclusion or projection between truncations of the same 𝔹⊗X (shared keys map identically)"""
    f = source.field
    comps = {}
    for j, ks in source.keys.items():
        idx = target.index.get(j, {})
        mb = linalg.MatrixBuilder(f, target.dim(j), len(ks))
        for pos, key in enumerate(ks):
            if key in idx:
                mb.add(idx[key], pos, f.scalar(1))
        comps[j] = mb.build()
    return CochainMap(source, target, comps)


def truncation_maps(a: Algebra, p: int, cap: int, x: Complex | None = None) -> tuple[CochainMap, CochainMap]:
    """inc: 𝔹_{<p}⊗X ↪ 𝔹_{≤cap}⊗X and π_p: 𝔹_{[p, cap]}⊗X → 𝔹_{[p+1, cap]}⊗X"""
    if not 0 <= p <= cap:
        raise CapInsufficientError(f"Need 0 ≤ p ≤ cap, got p={p}, cap={cap}", (p, cap))
    x = x if x is not None else Complex.stalk(regular_module(a), 0, "Lambda")
    full = bar_tensor(a, x, cap)
    lower = bar_tensor(a, x, p - 1) if p > 0 else BarTensor(a, {}, {}, "0", None, x, -1, 0)
    upper = bar_tensor(a, x, cap, floor=p)
    top = bar_tensor(a, x, cap, floor=p + 1) if p < cap else BarTensor(a, {}, {}, "0", None, x, cap, p + 1)
    return coordinate_map(lower, full), coordinate_map(upper, top)
