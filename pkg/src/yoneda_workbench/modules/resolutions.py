"""
Projective covers, minimal projective resolutions and the classical oracles.

Free modules are stored as presentations P = ⊕_i Λe_{v_i}; a map out of P is
determined by the images of its generators e_{v_i}, which makes Hom_Λ(P, N) ≅ ⊕_i e_{v_i}N
cheap even for large N. All constructions here assume 𝛬̄ is the radical of Λ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import Algebra
from .errors import NotSelfInjectiveError, WorkbenchError
from .homalg import (
    Complex,
    Module,
    direct_sum,
    hom_space,
    projective_module,
    regular_module,
    simple_module,
)

logger = logging.getLogger(__name__)


def radical_basis(m: Module) -> np.ndarray:
    """Columns spanning rad M = 𝛬̄·M"""
    f = m.field
    images = [m.action[b] for b in m.algebra.complement]
    return linalg.image_basis(f, linalg.hstack(f, images, m.dim))


def top_generators(m: Module) -> list[tuple[int, np.ndarray]]:
    """(vertex, vector) lifts of a basis of M / rad M, vertex by vertex"""
    f = m.field
    rad = radical_basis(m)
    gens = []
    for v, block in enumerate(m.vertex_blocks):
        if block.size == 0:
            continue
        # rad M is the direct sum of its e_v-parts, so independence modulo rad M suffices
        chosen = linalg.quotient_basis(f, rad, f.identity(m.dim)[:, block])
        gens.extend((v, chosen[:, j]) for j in range(chosen.shape[1]))
    return gens


def free_module(algebra: Algebra, vertices: list[int], name: str = "") -> Module:
    """⊕_i Λe_{v_i} with basis (i, b) for b in Λe_{v_i}, generator-major"""
    if not vertices:
        return Module.zero(algebra, name or "0")
    summands = [projective_module(algebra, v) for v in vertices]
    return direct_sum(summands, name or "⊕".join(s.name for s in summands))


def map_from_free(algebra: Algebra, vertices: list[int], images: list[np.ndarray], target: Module) -> np.ndarray:
    """Matrix of the map ⊕ Λe_{v_i} → N sending e_{v_i} to images[i]"""
    f = algebra.field
    cols = []
    for v, img in zip(vertices, images):
        for b in range(algebra.dim):
            if algebra.right[b] == v:
                cols.append(f.matmul(target.action[b], img).reshape(-1, 1))
    return linalg.hstack(f, cols, target.dim)


@dataclass
class ProjectiveCover:
    """P(M) → M with the chosen top generators"""

    module: Module
    vertices: list[int]
    generators: list[np.ndarray]
    projection: np.ndarray


def projective_cover(m: Module) -> ProjectiveCover:
    gens = top_generators(m)
    vertices = [v for v, _ in gens]
    images = [vec for _, vec in gens]
    p = free_module(m.algebra, vertices, f"P({m.name})")
    return ProjectiveCover(p, vertices, images, map_from_free(m.algebra, vertices, images, m))


def kernel_submodule(source: Module, mapping: np.ndarray, name: str = "") -> tuple[Module, np.ndarray]:
    """ker of a Λ-linear map as a module, with its adapted inclusion matrix"""
    f = source.field
    cols, vertices = [], []
    for v, block in enumerate(source.vertex_blocks):
        if block.size == 0:
            continue
        k = linalg.kernel_basis(f, mapping[:, block])
        full = f.zeros(source.dim, k.shape[1])
        full[block] = k
        cols.append(full)
        vertices.extend([v] * k.shape[1])
    inclusion = linalg.hstack(f, cols, source.dim)
    return source.submodule(inclusion, name, vertices), inclusion


def syzygy(m: Module) -> tuple[Module, ProjectiveCover, np.ndarray]:
    """Ω(M) = ker(P(M) → M)"""
    cover = projective_cover(m)
    omega, inclusion = kernel_submodule(cover.module, cover.projection, f"Ω({m.name})")
    return omega, cover, inclusion


@dataclass
class ProjectiveResolution:
    """Minimal projective resolution ... → P_1 → P_0 → M.

    `vertices[k]` lists the generators of P_k, `images[k][i]` is the image of
    generator i of P_k, as a vector of P_{k-1} (of M for k = 0).
    """

    module: Module
    vertices: list[list[int]] = field(default_factory=list)
    images: list[list[np.ndarray]] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def betti(self) -> list[int]:
        return [len(v) for v in self.vertices]


def proj_resolution(m: Module, length: int) -> ProjectiveResolution:
    """Minimal projective resolution up to P_length"""
    alg = m.algebra
    res = ProjectiveResolution(m)
    current = m
    to_parent = None  # inclusion of `current` into the previous free module
    for k in range(length + 1):
        if current.dim == 0:
            res.vertices.append([])
            res.images.append([])
            continue
        cover = projective_cover(current)
        images = cover.generators
        if to_parent is not None:
            images = [alg.field.matmul(to_parent, g) for g in images]
        res.vertices.append(cover.vertices)
        res.images.append(images)
        current, to_parent = kernel_submodule(cover.module, cover.projection, f"Ω^{k + 1}({m.name})")
    logger.debug(f"Betti numbers of {m.name}: {res.betti()}")
    return res


def _hom_from_free_blocks(n: Module, vertices: list[int]) -> list[np.ndarray]:
    return [n.vertex_blocks[v] for v in vertices]


def _coboundary(alg: Algebra, res: ProjectiveResolution, k: int, n: Module) -> np.ndarray:
    """Matrix of Hom(P_{k-1}, N) → Hom(P_k, N) in the coordinates ⊕ e_v N"""
    f = alg.field
    src_vertices = res.vertices[k - 1]
    tgt_vertices = res.vertices[k]
    src_blocks = _hom_from_free_blocks(n, src_vertices)
    tgt_blocks = _hom_from_free_blocks(n, tgt_vertices)
    rows = sum(len(b) for b in tgt_blocks)
    cols = sum(len(b) for b in src_blocks)
    out = f.zeros(rows, cols)
    if not rows or not cols:
        return out
    # coordinates of P_{k-1}: generator j owns the basis elements b with right(b) = v_j
    offsets, members = [], []
    offset = 0
    for v in src_vertices:
        idx = [b for b in range(alg.dim) if alg.right[b] == v]
        offsets.append(offset)
        members.append(idx)
        offset += len(idx)
    r0 = 0
    for i, img in enumerate(res.images[k]):
        rb = tgt_blocks[i]
        c0 = 0
        for j, idx in enumerate(members):
            cb = src_blocks[j]
            coeffs = img[offsets[j] : offsets[j] + len(idx)]
            lam = f.zeros(alg.dim)
            lam[idx] = coeffs
            rho = n.act_element(lam)
            out[r0 : r0 + len(rb), c0 : c0 + len(cb)] = rho[np.ix_(rb, cb)]
            c0 += len(cb)
        r0 += len(rb)
    return out


def ext_oracle(m: Module, n: Module, max_deg: int) -> list[int]:
    """dim Ext^i_Λ(M, N) for i = 0..max_deg from a minimal projective resolution of M"""
    alg = m.algebra
    res = proj_resolution(m, max_deg + 1)
    dims = []
    for i in range(max_deg + 1):
        d_in = _coboundary(alg, res, i, n) if i > 0 else alg.field.zeros(
            sum(len(n.vertex_blocks[v]) for v in res.vertices[0]), 0
        )
        d_out = _coboundary(alg, res, i + 1, n)
        dims.append(linalg.cohomology_dims(alg.field, d_in, d_out))
    return dims


def is_injective(m: Module) -> bool:
    """M is injective iff Ext^1(S_v, M) = 0 for every simple S_v"""
    alg = m.algebra
    return all(ext_oracle(simple_module(alg, v), m, 1)[1] == 0 for v in range(alg.num_vertices))


def is_self_injective(algebra: Algebra) -> bool:
    return is_injective(regular_module(algebra))


def cosyzygy(m: Module) -> Module:
    """Ω^{-1}(M) = D Ω_{Λ^op}(D M), the cokernel of the injective envelope"""
    dual = m.dual()
    omega, _, _ = syzygy(dual)
    back = omega.dual()
    return Module(m.algebra, back.action, back.vertices, f"Ω^-1({m.name})")


def syzygy_power(m: Module, n: int) -> Module:
    """Ω^n(M); cosyzygies for negative n"""
    current = m
    for _ in range(abs(n)):
        current = syzygy(current)[0] if n > 0 else cosyzygy(current)
    return current


def stable_hom_oracle(m: Module, n: Module, deg: int) -> int:
    """dim of stable Hom(Ω^deg M, N), i.e. Hom_{D_sg}(M, N[deg]), over a self-injective algebra.

    Raises:
        NotSelfInjectiveError: when Λ is not injective over itself.
    """
    if not is_self_injective(m.algebra):
        raise NotSelfInjectiveError(f"{m.algebra.name} is not self-injective", m.algebra.name)
    f = m.field
    source = syzygy_power(m, deg)
    homs = hom_space(source, n)
    if not homs:
        return 0
    cover = projective_cover(n)
    through = [f.matmul(cover.projection, g) for g in hom_space(source, cover.module)]
    total = linalg.hstack(f, [h.reshape(-1, 1) for h in homs], n.dim * source.dim)
    factoring = linalg.hstack(f, [t.reshape(-1, 1) for t in through], n.dim * source.dim)
    return total.shape[1] - linalg.rank(f, factoring)


def socle_basis(m: Module, v: int) -> np.ndarray:
    """Columns spanning Soc(M) ∩ e_v M (vectors killed by every letter)"""
    f = m.field
    block = m.vertex_blocks[v]
    if block.size == 0:
        return f.zeros(m.dim, 0)
    stacked = linalg.vstack(f, [m.action[b][:, block] for b in m.algebra.complement], block.size)
    k = linalg.kernel_basis(f, stacked) if stacked.shape[0] else f.identity(block.size)
    out = f.zeros(m.dim, k.shape[1])
    out[block] = k
    return out


@dataclass
class ReducedWindow:
    """Minimal-model data of a windowed complex of injectives.

    `multiplicities[n][v]` counts copies of I_v in degree n; `dims` and `ranks` are the
    component dimensions and differential ranks of the minimal model.
    """

    lo: int
    hi: int
    multiplicities: dict[int, list[int]]
    dims: dict[int, int]
    ranks: dict[int, int]
    raw_dims: dict[int, int]


def reduced_window(x: Complex, lo: int, hi: int) -> ReducedWindow:
    """Reduce a complex of injectives to its minimal model in degrees lo..hi.

    Splits off the contractible summands detected by the socle differentials: a copy
    of I_v → I_v leaves one rank in d restricted to Soc_v.

    Raises:
        WorkbenchError: when 𝛬̄ is not the radical of Λ.
    """
    alg = x.algebra
    if not alg.is_basic():
        raise WorkbenchError(f"Reduced windows need 𝛬̄ = rad Λ; {alg.name} is not basic", alg.name)
    f = x.field
    inj_dim = [sum(1 for b in range(alg.dim) if alg.left[b] == v) for v in range(alg.num_vertices)]
    soc_rank: dict[tuple[int, int], int] = {}
    soc_dim: dict[tuple[int, int], int] = {}
    for n in range(lo - 1, hi + 1):
        mod = x.module(n)
        d = x.differential(n)
        for v in range(alg.num_vertices):
            s = socle_basis(mod, v)
            soc_dim[(n, v)] = s.shape[1]
            soc_rank[(n, v)] = linalg.rank(f, f.matmul(d, s)) if s.shape[1] else 0
    mult, dims, ranks, raw = {}, {}, {}, {}
    for n in range(lo, hi + 1):
        mult[n] = [soc_dim[(n, v)] - soc_rank[(n, v)] - soc_rank[(n - 1, v)] for v in range(alg.num_vertices)]
        dims[n] = sum(c * inj_dim[v] for v, c in enumerate(mult[n]))
        trivial = sum(soc_rank[(n, v)] * inj_dim[v] for v in range(alg.num_vertices))
        ranks[n] = linalg.rank(f, x.differential(n)) - trivial
        raw[n] = x.dim(n)
    return ReducedWindow(lo, hi, mult, dims, ranks, raw)

