"""
The singular Yoneda dg category 𝒮𝒴.

𝒮𝒴(X, Y) is the colimit of 𝒴(X, Y) → 𝒴(X, Ω_nc Y) → 𝒴(X, Ω_nc² Y) → ⋯ along f ↦ θ ⊙ f.
The colimit is never materialized: elements are pairs [f; p] with f at stage p, and
every comparison transports both sides to a common stage.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .config import Window, get_settings
from .errors import CapInsufficientError, NoSolution, NonStabilizationWarning, ShapeMismatch
from .homalg import CochainMap, Complex, Module, cohomology_dim
from .ncforms import omega, omega_power, omega_power_on_morphism
from .resolutions import ReducedWindow, reduced_window
from .yoneda import (
    YonedaElement,
    compose,
    identity,
    lambda_stalk,
    phi_retraction,
    psi,
    tensor_space,
    yoneda_space,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class SYElement:
    """[f; p]: a Yoneda element f ∈ 𝒴(X, Ω_nc^p Y) standing for its class in the colimit.

    Attributes:
        representative: The element f.
        stage: The power p.
        base: The complex Y.
    """

    representative: YonedaElement
    stage: int
    base: Complex

    def __post_init__(self):
        if self.representative.target is not omega_power(self.base, self.stage):
            raise ShapeMismatch(
                f"Representative of {self.representative.space.name} "
                f"is not at stage {self.stage} over {self.base.name}",
                self.stage,
            )

    def __repr__(self) -> str:
        return f"SYElement(stage={self.stage}, degree={self.degree}, {self.source.name} → {self.base.name})"

    @classmethod
    def lift(cls, f: YonedaElement) -> SYElement:
        """The canonical image [f; 0]"""
        return cls(f, 0, f.target)

    @property
    def source(self) -> Complex:
        return self.representative.source

    @property
    def degree(self) -> int:
        return self.representative.degree

    def delta(self) -> SYElement:
        return SYElement(self.representative.delta(), self.stage, self.base)

    def advance(self, steps: int = 1) -> SYElement:
        """The same class one stage further, [θ ⊙ f; p+1]"""
        out = self.representative
        for _ in range(steps):
            out = structure_map(out)
        return SYElement(out, self.stage + steps, self.base)

    def at_stage(self, p: int) -> SYElement:
        if p < self.stage:
            raise ShapeMismatch(f"Cannot move stage {self.stage} back to {p}", p)
        return self.advance(p - self.stage)

    def _aligned(self, other: SYElement) -> tuple[SYElement, SYElement]:
        if other.base is not self.base or other.source is not self.source:
            raise ShapeMismatch("Elements of different singular Yoneda spaces", (self, other))
        p = max(self.stage, other.stage)
        return self.at_stage(p), other.at_stage(p)

    def __add__(self, other: SYElement) -> SYElement:
        a, b = self._aligned(other)
        return SYElement(a.representative + b.representative, a.stage, self.base)

    def __sub__(self, other: SYElement) -> SYElement:
        a, b = self._aligned(other)
        return SYElement(a.representative - b.representative, a.stage, self.base)

    def scale(self, c) -> SYElement:
        return SYElement(self.representative.scale(c), self.stage, self.base)

    def is_zero(self, slack: int | None = None) -> bool:
        """Whether the class vanishes after `slack` structure maps (default: the stabilization count)"""
        slack = get_settings().stabilization_count if slack is None else slack
        return self.advance(slack).representative.is_zero()

    def equals(self, other: SYElement, slack: int | None = None) -> bool:
        """Equality decided at stage max(p, q) + slack"""
        return (self - other).is_zero(slack)


def structure_map(f: YonedaElement) -> YonedaElement:
    """f ↦ θ_{Ω^p Y} ⊙ f, i.e. s ā_{1,r+1} ⊗ x ↦ (−1)^{|f|} s ā_1 ⊗ f(s ā_{2,r+1} ⊗ x)"""
    space = f.space
    matrix = structure_matrix(space.source, space.target, f.degree)
    target = yoneda_space(space.source, omega(space.target))
    return YonedaElement.from_vector(target, f.degree, space.field.matmul(matrix, f.vector()))


def structure_matrix(x: Complex, z: Complex, n: int) -> np.ndarray:
    """Matrix of θ_Z ⊙ −: 𝒴(X, Z)^n → 𝒴(X, Ω_nc Z)^n"""
    alg = x.algebra
    fld = x.field
    source = yoneda_space(x, z)
    oz = omega(z)
    target = yoneda_space(x, oz)
    mb = linalg.MatrixBuilder(fld, target.dim(n), source.dim(n))
    sign = fld.sign(n)
    out_cells = target.cells(n)
    for (p, m), cell in source.cells(n).items():
        out = out_cells.get((p + 1, m))
        if out is None:
            continue
        ts = tensor_space(x.module(m), p)
        for a in range(alg.num_letters):
            pre = ts.prepend[a][cell.cols]
            rows = oz.letter_rows(cell.j - 1, a)[cell.rows]
            valid = np.flatnonzero((pre >= 0) & (rows >= 0))
            if valid.size == 0:
                continue
            targets = out.lookup[rows[valid], pre[valid]]
            mb.extend(targets, cell.coordinates[valid], np.full(valid.size, sign, dtype=fld.dtype))
    return mb.build()


def sy_compose(g: SYElement, f: SYElement) -> SYElement:
    """[g; q] ⊙_sg [f; p] = [Ω_nc^p(g) ⊙ f; p+q]

    Raises:
        CompositionError: when g does not start where f ends.
    """
    rep = compose(omega_power_on_morphism(g.representative, f.stage), f.representative)
    return SYElement(rep, f.stage + g.stage, g.base)


def sy_identity(x: Complex) -> SYElement:
    return SYElement.lift(identity(x))


@dataclass
class StabilizationReport:
    """Stage-wise H^n 𝒴(X, Ω_nc^p Y) with the ranks of the maps between consecutive stages.

    `ranks[p]` is the rank of H^n at stage p−1 → H^n at stage p. When `stable`, `value`
    is the common dimension along a run of bijections starting at `stage`.
    """

    degree: int
    dims: dict[int, int] = field(default_factory=dict)
    ranks: dict[int, int] = field(default_factory=dict)
    stable: bool = False
    value: int | None = None
    stage: int | None = None
    warnings: list[str] = field(default_factory=list)


def first_stage(x: Complex, y: Complex, n: int) -> int:
    """Stage from which 𝒴(X, Ω_nc^p Y)^n is counted: max(0, b_X − a_Y − n + 1)"""
    return max(0, x.bounds[1] - y.bounds[0] - n + 1)


def _cohomology_basis(fld: linalg.FieldSpec, d_prev, d_next) -> tuple[np.ndarray, np.ndarray]:
    cycles = linalg.kernel_basis(fld, d_next)
    boundaries = linalg.image_basis(fld, d_prev)
    return linalg.quotient_basis(fld, boundaries, cycles), boundaries


def sy_cohomology(x: Complex, y: Complex, n: int, window: Window | None = None) -> StabilizationReport:
    """dim H^n 𝒮𝒴(X, Y), read off a run of consecutive isomorphisms of stage cohomology.

    Warns with NonStabilizationWarning (and returns an unstable report) when no run of
    the configured length occurs by the window's maximal stage.
    """
    window = window or Window.from_settings()
    fld = x.field
    s = window.stabilization_count
    report = StabilizationReport(n)
    if x.is_zero or y.is_zero:
        report.stable, report.value, report.stage = True, 0, 0
        return report
    p0 = first_stage(x, y, n)
    run = 0
    reps = None
    for p in range(p0, window.max_stage + 1):
        space = yoneda_space(x, omega_power(y, p))
        new_reps, boundaries = _cohomology_basis(fld, space.differential(n - 1), space.differential(n))
        report.dims[p] = new_reps.shape[1]
        if reps is not None:
            images = fld.matmul(structure_matrix(x, omega_power(y, p - 1), n), reps)
            joined = linalg.hstack(fld, [boundaries, images], space.dim(n))
            rank = linalg.rank(fld, joined) - boundaries.shape[1]
            report.ranks[p] = rank
            run = run + 1 if rank == report.dims[p - 1] == report.dims[p] else 0
            if run >= s:
                report.stable, report.value, report.stage = True, report.dims[p], p - s
                logger.info(f"H^{n} SY({x.name},{y.name}) = {report.value}, stable from stage {p - s}")
                return report
        reps = new_reps
    message = f"H^{n} SY({x.name},{y.name}) did not stabilize by stage {window.max_stage}"
    report.warnings.append(message)
    report.value = report.dims.get(window.max_stage)
    logger.warning(message)
    warnings.warn(message, NonStabilizationWarning, stacklevel=2)
    return report


def dsg_hom(m: Module, n: Module, deg: int, window: Window | None = None) -> int | None:
    """dim Hom_{D_sg}(M, N[deg]) through the stabilized H^deg 𝒮𝒴(M, N)"""
    return sy_cohomology(Complex.stalk(m, 0), Complex.stalk(n, 0), deg, window).value


def contraction_witness(x: Complex, window: Window | None = None) -> SYElement | None:
    """[u; p] of degree −1 with δu = θ^p ⊙ Id_X at the first stage p admitting one, or None"""
    window = window or Window.from_settings()
    fld = x.field
    current = identity(x)
    for p in range(window.max_stage + 1):
        space = current.space
        try:
            u = linalg.solve(fld, space.differential(-1), current.vector())
        except NoSolution:
            current = structure_map(current)
            continue
        logger.info(f"{x.name} is contractible in SY: witness at stage {p}")
        return SYElement(YonedaElement.from_vector(space, -1, u), p, x)
    logger.info(f"No contraction of {x.name} up to stage {window.max_stage}")
    return None


def contracting_homotopy(witness: SYElement, f: SYElement) -> SYElement:
    """H(f) = [u; p] ⊙_sg f, so that δH(f) + H(δf) = f in the colimit"""
    return sy_compose(witness, f)


def check_contracting_homotopy(witness: SYElement, f: SYElement, slack: int | None = None) -> bool:
    lhs = contracting_homotopy(witness, f).delta() + contracting_homotopy(witness, f.delta())
    return lhs.equals(f, slack)


def phi_operator(f: SYElement, stage: int, lo: int, hi: int) -> CochainMap:
    """φ(f) on stage `stage` of 𝒮𝒴(Λ, X): [g; q] ↦ [f; p] ⊙_sg [g; q] = [Ω_nc^q(f) ⊙ g; p+q]"""
    return psi(omega_power_on_morphism(f.representative, stage), lo, hi)


def phi_certificate(f: SYElement) -> bool:
    """Φ(φ(f)) recovers the representative of f, so φ is injective on representatives"""
    x = f.source
    lo, hi = x.bounds
    op = phi_operator(f, 0, lo, hi)
    return phi_retraction(op, x, f.representative.target) == f.representative


def sy_window(x: Complex, stage: int, lo: int, hi: int) -> Complex:
    """Stage `stage` of 𝒮𝒴(Λ, X) on the window lo..hi, a complex of injective Λ-modules"""
    space = yoneda_space(lambda_stalk(x.algebra), omega_power(x, stage))
    return space.as_complex(lo, hi, name=f"SY(Λ,{x.name})@{stage}")


def sy_reduced_window(x: Complex, lo: int, hi: int, window: Window | None = None) -> tuple[int, ReducedWindow]:
    """Minimal model of 𝒮𝒴(Λ, X) on lo..hi, taken at the first stage after which it stays
    unchanged for the stabilization count; returns (stage, reduced window).

    Raises:
        CapInsufficientError: when fewer than count + 1 stages from b_X − lo + 2 fit below
            the window's maximal stage.

    Warns with NonStabilizationWarning and returns the last stage tried when the scan
    ends before the model settles.
    """
    window = window or Window.from_settings()
    s = window.stabilization_count
    start = max(0, x.bounds[1] - lo + 2)
    if start + s > window.max_stage:
        raise CapInsufficientError(
            f"Reduced SY(Λ,{x.name}) on {lo}..{hi} needs max stage ≥ {start + s}, got {window.max_stage}",
            (start + s, window.max_stage),
        )
    previous, run = None, 0
    for p in range(start, window.max_stage + 1):
        current = reduced_window(sy_window(x, p, lo, hi), lo, hi)
        same = previous is not None and (current.dims, current.ranks, current.multiplicities) == (
            previous.dims,
            previous.ranks,
            previous.multiplicities,
        )
        run = run + 1 if same else 0
        if run >= s:
            return p - s, current
        previous = current
    message = f"Reduced SY(Λ,{x.name}) window did not settle by stage {window.max_stage}"
    logger.warning(message)
    warnings.warn(message, NonStabilizationWarning, stacklevel=2)
    return window.max_stage, previous


def sy_window_acyclic(x: Complex, stage: int, lo: int, hi: int) -> bool:
    c = sy_window(x, stage, lo, hi)
    return all(cohomology_dim(c, n) == 0 for n in range(lo, hi + 1))
