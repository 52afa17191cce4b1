"""
The stabilization functor 𝕊 = Cone(κ_−) and the windows certifying it.

𝒴(Λ, Λ) ⊗_Λ Z is handled in its tensor model: the coordinates of 𝒴(Λ, Z) with the
transported differential (`twisted=True`). In that model ε_X is the sign change
(−1)^{p·j} on the block of filtration p and target degree j, and κ_X is ε_X after
post-composition with ε ⊗ Id_X on 𝔹_{≤Q} ⊗_Λ X.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import Algebra
from .bar import augmentation, bar_tensor, coordinate_map
from .config import Window, get_settings
from .errors import CapInsufficientError, NonStabilizationWarning, WorkbenchError
from .homalg import CochainMap, Complex, Module, cohomology_dim, cone, regular_module, simple_module
from .resolutions import ReducedWindow, ext_oracle, is_injective, kernel_submodule, proj_resolution, reduced_window
from .singyoneda import sy_reduced_window
from .yoneda import eta, lambda_stalk, post_composition, yoneda_space

logger = logging.getLogger(__name__)


def required_cap(x: Complex, lo: int) -> int:
    """Smallest bar cap keeping 𝔹_{≤Q} ⊗ X → X a quasi-isomorphism from degree lo on"""
    return max(0, x.bounds[1] - lo + 1)


def _block_signs(x: Complex, n: int) -> np.ndarray:
    fld = x.field
    space = yoneda_space(lambda_stalk(x.algebra), x)
    signs = np.empty(space.dim(n), dtype=fld.dtype)
    for (p, _m), cell in space.cells(n).items():
        signs[cell.offset : cell.offset + cell.size] = fld.sign(p * cell.j)
    return signs


def epsilon_map(x: Complex, lo: int, hi: int) -> CochainMap:
    """ε_X: 𝒴(Λ, Λ) ⊗_Λ X → 𝒴(Λ, X), f ⊗ x ↦ (−1)^{|x||f|} f(−)x"""
    fld = x.field
    space = yoneda_space(lambda_stalk(x.algebra), x)
    source = space.as_complex(lo, hi + 1, twisted=True)
    target = space.as_complex(lo, hi)
    comps = {}
    for n in range(lo - 1, hi + 2):
        d = space.dim(n)
        m = fld.zeros(d, d)
        m[np.arange(d), np.arange(d)] = _block_signs(x, n)
        comps[n] = m
    return CochainMap(source, target, comps)


def check_epsilon_triangle(x: Complex, lo: int, hi: int) -> bool:
    """ε_X ∘ (η_Λ ⊗ Id_X) = η_X on lo..hi"""
    fld = x.field
    eps = epsilon_map(x, lo, hi)
    eta_x = eta(x, lo, hi)
    return all(
        np.array_equal(fld.matmul(eps.component(n), eta_x.component(n)), eta_x.component(n)) for n in range(lo, hi + 1)
    )


def pbar(x: Complex, lo: int, hi: int, cap: int | None = None) -> Complex:
    """p̄(X) = 𝒴(Λ, Λ) ⊗_Λ 𝔹_{≤Q} ⊗_Λ X on the window, in the tensor model"""
    cap = required_cap(x, lo) if cap is None else cap
    bt = bar_tensor(x.algebra, x, cap)
    return yoneda_space(lambda_stalk(x.algebra), bt).as_complex(lo, hi, twisted=True, name=f"pbar({x.name})")


def kappa(x: Complex, lo: int, hi: int, cap: int | None = None) -> CochainMap:
    """κ_X = ε_X ∘ (Id ⊗ (ε ⊗ Id_X)): 𝒴(Λ, Λ) ⊗ 𝔹_{≤Q} ⊗ X → 𝒴(Λ, X).

    Raises:
        CapInsufficientError: when an explicit cap is below the one the window needs.
    """
    need = required_cap(x, lo)
    if cap is None:
        cap = need
    elif cap < need:
        raise CapInsufficientError(f"Window {lo}..{hi} of {x.name} needs bar cap {need}, got {cap}", cap)
    fld = x.field
    bt = bar_tensor(x.algebra, x, cap)
    post = post_composition(augmentation(bt), lambda_stalk(x.algebra), lo, hi, twisted=True)
    eps = epsilon_map(x, lo, hi)
    comps = {n: fld.matmul(eps.component(n), post.component(n)) for n in range(lo - 1, hi + 2)}
    return CochainMap(post.source, eps.target, comps)


def cocycle_modules_injective(c: Complex, lo: int, hi: int) -> bool:
    """Z^n = ker d^n is injective for every n in lo..hi"""
    for n in range(lo, hi + 1):
        z, _ = kernel_submodule(c.module(n), c.differential(n), f"Z^{n}({c.name})")
        if z.dim and not is_injective(z):
            return False
    return True


@dataclass(eq=False)
class StabWindow:
    """Cone(κ_X) on lo..hi.

    Attributes:
        x: The complex X.
        lo: Lowest reported degree.
        hi: Highest reported degree.
        cap: Bar cap Q of 𝔹_{≤Q} ⊗ X.
        complex: The cone, faithful on lo..hi.
        cohomology: dim H^n per window degree.
        injective: Whether every component in the window is injective.
    """

    x: Complex
    lo: int
    hi: int
    cap: int
    complex: Complex
    cohomology: dict[int, int] = field(default_factory=dict)
    injective: bool = False

    @property
    def acyclic(self) -> bool:
        return not any(self.cohomology.values())

    @property
    def dims(self) -> dict[int, int]:
        return {n: self.complex.dim(n) for n in range(self.lo, self.hi + 1)}

    @cached_property
    def reduced(self) -> ReducedWindow:
        return reduced_window(self.complex, self.lo, self.hi)

    @cached_property
    def contractible(self) -> bool:
        """Acyclic with injective cocycles inside the window"""
        return self.acyclic and cocycle_modules_injective(self.complex, self.lo, self.hi)


def stab(x: Complex, window: Window) -> StabWindow:
    """𝕊(X) = Cone(κ_X) on the window"""
    lo, hi = window.lo, window.hi
    k = kappa(x, lo, hi, window.bar_cap)
    c = cone(k, f"S({x.name})")
    coh = {n: cohomology_dim(c, n) for n in range(lo, hi + 1)}
    injective = all(is_injective(c.module(n)) for n in range(lo, hi + 1) if c.dim(n))
    cap = window.bar_cap if window.bar_cap is not None else required_cap(x, lo)
    result = StabWindow(x, lo, hi, cap, c, coh, injective)
    logger.info(f"S({x.name}) on {lo}..{hi}: dims {result.dims}, acyclic {result.acyclic}, injective {injective}")
    return result


def vartheta(x: Complex, p: int, lo: int, hi: int) -> CochainMap:
    """ϑ_X at stage p: 𝒴(Λ, 𝔹_{≤p} ⊗ X) → 𝒴(Λ, X), f ↦ (ε ⊗ Id_X) ∘ f"""
    bt = bar_tensor(x.algebra, x, p)
    return post_composition(augmentation(bt), lambda_stalk(x.algebra), lo, hi)


def check_vartheta_compatibility(x: Complex, p: int, lo: int, hi: int) -> bool:
    """ϑ_{p+1} ∘ 𝒴(Λ, inc) = ϑ_p, so the stage maps assemble on the colimit"""
    fld = x.field
    lam = lambda_stalk(x.algebra)
    lower = bar_tensor(x.algebra, x, p)
    upper = bar_tensor(x.algebra, x, p + 1)
    inc = post_composition(coordinate_map(lower, upper), lam, lo, hi)
    th_lower = post_composition(augmentation(lower), lam, lo, hi)
    th_upper = post_composition(augmentation(upper), lam, lo, hi)
    return all(
        np.array_equal(fld.matmul(th_upper.component(n), inc.component(n)), th_lower.component(n))
        for n in range(lo - 1, hi + 2)
    )


def vartheta_cone(x: Complex, lo: int, hi: int, stage: int | None = None) -> Complex:
    """Cone(ϑ_X) at a stage deep enough for the window"""
    stage = required_cap(x, lo) + 1 if stage is None else stage
    return cone(vartheta(x, stage, lo, hi), f"Cone(vartheta_{x.name})")


def class_K_certificate(x: Complex, lo: int, hi: int) -> tuple[bool, bool]:
    """(Cone(ε_X) acyclic on lo..hi, its cocycle modules injective on lo..hi)"""
    c = cone(epsilon_map(x, lo, hi), f"Cone(eps_{x.name})")
    acyclic = all(cohomology_dim(c, n) == 0 for n in range(lo, hi + 1))
    return acyclic, acyclic and cocycle_modules_injective(c, lo, hi)


@dataclass
class GorensteinReport:
    """Degrees 1..n_max with Ext^n(S_v, Λ) ≠ 0 for every simple S_v"""

    algebra: str
    n_max: int
    tail: int
    nonvanishing: dict[str, list[int]] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        """No simple has nonvanishing Ext in the last `tail` degrees"""
        cutoff = self.n_max - self.tail
        return all(all(n <= cutoff for n in degrees) for degrees in self.nonvanishing.values())

    @property
    def injective_dimension(self) -> int:
        """Largest degree with a nonvanishing Ext (the self-injective dimension when consistent)"""
        return max((max(d) for d in self.nonvanishing.values() if d), default=0)


def gorenstein_probe(a: Algebra, n_max: int, tail: int | None = None) -> GorensteinReport:
    """Finite-degree evidence for finiteness of {n : Ext^n(M, Λ) ≠ 0} over the simples"""
    if n_max < 1:
        raise WorkbenchError(f"n_max must be at least 1, got {n_max}", n_max)
    tail = min(get_settings().gorenstein_tail if tail is None else tail, n_max)
    report = GorensteinReport(a.name, n_max, tail)
    regular = regular_module(a)
    for v in range(a.num_vertices):
        s = simple_module(a, v)
        dims = ext_oracle(s, regular, n_max)
        report.nonvanishing[s.name] = [n for n in range(1, n_max + 1) if dims[n]]
    if not report.consistent:
        logger.warning(f"{a.name}: Ext^n(S, Λ) does not vanish in degrees {n_max - tail + 1}..{n_max}")
    return report


@dataclass
class ComparisonReport:
    """Windowed evidence that c_X is a homotopy equivalence"""

    x: str
    lo: int
    hi: int
    cone_acyclic: bool
    cocycles_injective: bool
    sy_stage: int
    sy_dims: dict[int, int]
    stab_dims: dict[int, int]
    sy_settled: bool = True
    warnings: list[str] = field(default_factory=list)

    @property
    def dims_agree(self) -> bool:
        return self.sy_dims == self.stab_dims

    @property
    def certified(self) -> bool:
        return self.sy_settled and self.cone_acyclic and self.cocycles_injective and self.dims_agree


def comparison_c(x: Complex, window: Window) -> ComparisonReport:
    """Cone(ε_{𝔹_{≤Q}⊗X}) on the window and the reduced 𝒮𝒴(Λ, X) and 𝕊(X) windows side by side.

    A reduced 𝒮𝒴 window that never settled leaves the report uncertified; its warning is
    recorded and re-raised.

    Raises:
        CapInsufficientError: when the maximal stage leaves too few stages to compare.
    """
    lo, hi = window.lo, window.hi
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonStabilizationWarning)
        stage, sy_red = sy_reduced_window(x, lo, hi, window)
    unsettled = [str(w.message) for w in caught if issubclass(w.category, NonStabilizationWarning)]
    cap = window.bar_cap if window.bar_cap is not None else required_cap(x, lo)
    bt = bar_tensor(x.algebra, x, cap)
    acyclic, injective = class_K_certificate(bt, lo, hi)
    s_red = stab(x, window).reduced
    report = ComparisonReport(x.name, lo, hi, acyclic, injective, stage, sy_red.dims, s_red.dims, not unsettled)
    report.warnings.extend(unsettled)
    for message in unsettled:
        warnings.warn(message, NonStabilizationWarning, stacklevel=2)
    logger.info(f"c_{x.name} on {lo}..{hi}: {'certified' if report.certified else 'not certified'}")
    return report


def injective_multiplicities(m: Module, length: int) -> list[list[int]]:
    """Copies of each I_v in degrees 0..length of a minimal injective resolution of M"""
    alg = m.algebra
    res = proj_resolution(m.dual(), length)
    out = []
    for vertices in res.vertices:
        counts = [0] * alg.num_vertices
        for v in vertices:
            counts[v] += 1
        out.append(counts)
    return out


@dataclass
class CompleteResolution:
    """𝕊(M) on a window with the Gorenstein evidence and the comparison to the injective resolution"""

    window: StabWindow
    probe: GorensteinReport
    matches_injective_resolution: bool
    warnings: list[str] = field(default_factory=list)


def complete_resolution(m: Module, window: Window, probe: GorensteinReport | None = None) -> CompleteResolution:
    """𝕊(M) as a complete injective resolution window.

    In degrees above the self-injective dimension the minimal model must match the
    minimal injective resolution of M.
    """
    alg = m.algebra
    probe = probe or gorenstein_probe(alg, max(window.hi, 1) + get_settings().gorenstein_tail)
    notes = []
    if not probe.consistent:
        message = (
            f"{alg.name} fails the Gorenstein probe up to degree {probe.n_max}; "
            "the window is not a complete resolution"
        )
        notes.append(message)
        logger.warning(message)
        warnings.warn(message, NonStabilizationWarning, stacklevel=2)
    sw = stab(Complex.stalk(m, 0, m.name), window)
    start = max(window.lo, probe.injective_dimension + 1)
    matches = True
    if start <= window.hi:
        expected = injective_multiplicities(m, window.hi)
        red = sw.reduced
        matches = all(red.multiplicities[n] == expected[n] for n in range(start, window.hi + 1))
    return CompleteResolution(sw, probe, matches, notes)
