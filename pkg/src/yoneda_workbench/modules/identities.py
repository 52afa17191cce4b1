"""
Randomized identity suites for the dg structures and the oracle agreements.

Every check is an exact equality; a suite records each failing sample with enough
context to reproduce it from the seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import Algebra
from .bar import augmentation
from .config import Window, get_settings
from .errors import WorkbenchError
from .homalg import Complex, Module, projective_module, simple_module
from .ncforms import check_omega_bar_square, check_one_step_square, omega, omega_on_morphism, omega_power, theta
from .resolutions import ext_oracle, is_self_injective, proj_resolution, stable_hom_oracle
from .singyoneda import SYElement, dsg_hom, sy_compose, sy_identity
from .yoneda import (
    YonedaElement,
    alpha,
    compose,
    from_cochain_map,
    identity,
    iota,
    is_isomorphism,
    random_element,
    yoneda_ext,
    yoneda_space,
)

logger = logging.getLogger(__name__)

DEGREES = (-1, 0, 1)


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, ok: bool, detail: str) -> None:
        self.checked += 1
        if not ok:
            self.failures.append(detail)
            logger.warning(f"{self.name}: {detail}")


def probe_modules(a: Algebra) -> list[Module]:
    """Simple and indecomposable projective modules"""
    out = [simple_module(a, v) for v in range(a.num_vertices)]
    out.extend(projective_module(a, v) for v in range(a.num_vertices))
    return out


def probe_objects(a: Algebra) -> list[Complex]:
    return [Complex.stalk(m, 0, m.name) for m in probe_modules(a)]


class IdentitySuite:
    """Draws random homogeneous elements between the probe objects of one algebra"""

    def __init__(self, algebra: Algebra, seed: int = 0, samples: int | None = None):
        self.algebra = algebra
        self.rng = np.random.default_rng(seed)
        self.samples = get_settings().random_samples if samples is None else samples
        self.objects = probe_objects(algebra)

    def pick(self, k: int = 1) -> list[Complex]:
        return [self.objects[int(i)] for i in self.rng.integers(0, len(self.objects), size=k)]

    def degree(self) -> int:
        return int(self.rng.choice(DEGREES))

    def element(self, x: Complex, y: Complex, n: int | None = None) -> YonedaElement:
        n = self.degree() if n is None else n
        return random_element(yoneda_space(x, y), n, self.rng)

    def _run(self, name: str, check: Callable[[], tuple[bool, str]]) -> SuiteResult:
        result = SuiteResult(name)
        for _ in range(self.samples):
            ok, detail = check()
            result.record(ok, detail)
        return result

    def delta_squared(self) -> SuiteResult:
        def check():
            x, y = self.pick(2)
            f = self.element(x, y)
            return f.delta().delta().is_zero(), f"{f!r}"

        return self._run("delta squared", check)

    def leibniz(self) -> SuiteResult:
        fld = self.algebra.field

        def check():
            x, y, z = self.pick(3)
            f, g = self.element(x, y), self.element(y, z)
            lhs = compose(g, f).delta()
            rhs = compose(g.delta(), f) + compose(g, f.delta()).scale(fld.sign(g.degree))
            return lhs == rhs, f"{g!r} after {f!r}"

        return self._run("graded Leibniz", check)

    def associativity(self) -> SuiteResult:
        def check():
            w, x, y, z = self.pick(4)
            f, g, h = self.element(w, x), self.element(x, y), self.element(y, z)
            assoc = compose(h, compose(g, f)) == compose(compose(h, g), f)
            unit = compose(identity(x), f) == f and compose(f, identity(w)) == f
            return assoc and unit, f"{h!r}, {g!r}, {f!r}"

        return self._run("associativity and unit", check)

    def theta_natural(self) -> SuiteResult:
        def check():
            x, y = self.pick(2)
            f = self.element(x, y)
            closed = theta(x).delta().is_zero()
            natural = compose(theta(y), f) == compose(omega_on_morphism(f), theta(x))
            return closed and natural, f"{f!r}"

        return self._run("theta closed and natural", check)

    def omega_functor(self) -> SuiteResult:
        def check():
            x, y, z = self.pick(3)
            f, g = self.element(x, y), self.element(y, z)
            unit = omega_on_morphism(identity(x)) == identity(omega(x))
            product = omega_on_morphism(compose(g, f)) == compose(omega_on_morphism(g), omega_on_morphism(f))
            dg = omega_on_morphism(f).delta() == omega_on_morphism(f.delta())
            return unit and product and dg, f"{g!r} after {f!r}"

        return self._run("Omega dg functor", check)

    def augmentation_retracts_iota(self, cap: int = 2) -> SuiteResult:
        result = SuiteResult("augmentation after iota")
        for x in self.objects:
            i = iota(x, cap)
            back = compose(from_cochain_map(augmentation(i.target)), i)
            result.record(back == identity(x), x.name)
        return result

    def alpha_isomorphism(self, lo: int = 0, hi: int = 2) -> SuiteResult:
        result = SuiteResult("alpha cochain isomorphism")
        for x in self.objects:
            for y in self.objects:
                result.record(is_isomorphism(alpha(x, y, lo, hi), lo, hi), f"{x.name} → {y.name}")
        return result

    def sy_element(self, x: Complex, y: Complex, stage: int) -> SYElement:
        return SYElement(self.element(x, omega_power(y, stage)), stage, y)

    def sy_laws(self, max_stage: int = 1) -> SuiteResult:
        """Unit, associativity and Leibniz for ⊙_sg; these hold on representatives, so no slack"""
        fld = self.algebra.field

        def stage() -> int:
            return int(self.rng.integers(0, max_stage + 1))

        def check():
            w, x, y, z = self.pick(4)
            f, g, h = self.sy_element(w, x, stage()), self.sy_element(x, y, stage()), self.sy_element(y, z, stage())
            unit = sy_compose(sy_identity(x), f).equals(f, 0) and sy_compose(f, sy_identity(w)).equals(f, 0)
            assoc = sy_compose(h, sy_compose(g, f)).equals(sy_compose(sy_compose(h, g), f), 0)
            rhs = sy_compose(g.delta(), f) + sy_compose(g, f.delta()).scale(fld.sign(g.degree))
            leibniz = sy_compose(g, f).delta().equals(rhs, 0)
            return unit and assoc and leibniz, f"{h!r}, {g!r}, {f!r}"

        return self._run("singular composition laws", check)

    def squares(self, stages: tuple[int, ...] = (0, 1, 2)) -> SuiteResult:
        result = SuiteResult("Omega/bar squares")
        for x in self.objects:
            result.record(check_one_step_square(x, 2), f"one-step square at {x.name}")
            for p in stages:
                result.record(check_omega_bar_square(x, p, p + 2), f"square p={p} at {x.name}")
        return result

    def run_all(self) -> list[SuiteResult]:
        return [
            self.delta_squared(),
            self.leibniz(),
            self.associativity(),
            self.theta_natural(),
            self.omega_functor(),
            self.augmentation_retracts_iota(),
            self.alpha_isomorphism(),
            self.sy_laws(),
            self.squares(),
        ]


def ext_agreement(a: Algebra, max_deg: int = 6) -> SuiteResult:
    """dim H^n 𝒴(M, N) = dim Ext^n(M, N) over the simples and projectives"""
    result = SuiteResult("Ext agreement")
    modules = probe_modules(a)
    for m in modules:
        for n in modules:
            ours, oracle = yoneda_ext(m, n, max_deg), ext_oracle(m, n, max_deg)
            result.record(ours == oracle, f"Ext({m.name},{n.name}): {ours} vs {oracle}")
    return result


def finite_global_dimension(a: Algebra, bound: int | None = None) -> bool:
    """Every simple has projective dimension ≤ bound (default: number of vertices)"""
    bound = a.num_vertices if bound is None else bound
    return all(not proj_resolution(simple_module(a, v), bound + 1).vertices[-1] for v in range(a.num_vertices))


def singular_agreement(a: Algebra, lo: int = -4, hi: int = 4, window: Window | None = None) -> SuiteResult:
    """Stabilized H^n 𝒮𝒴(M, N) against stable Hom over a self-injective algebra, or against 0
    when every simple has finite projective dimension.

    Raises:
        WorkbenchError: when neither oracle applies.
    """
    result = SuiteResult("singularity category agreement")
    simples = [simple_module(a, v) for v in range(a.num_vertices)]
    self_injective = is_self_injective(a)
    if not self_injective and not finite_global_dimension(a):
        raise WorkbenchError(f"No singularity-category oracle for {a.name}", a.name)
    for m in simples:
        for n in simples:
            for deg in range(lo, hi + 1):
                ours = dsg_hom(m, n, deg, window)
                expected = stable_hom_oracle(m, n, deg) if self_injective else 0
                result.record(ours == expected, f"Hom_sg({m.name},{n.name}[{deg}]): {ours} vs {expected}")
    return result


def run_suites(a: Algebra, seed: int = 0, samples: int | None = None, max_deg: int = 4) -> list[SuiteResult]:
    """The identity suites and the Ext agreement for one algebra"""
    suite = IdentitySuite(a, seed, samples)
    results = suite.run_all()
    results.append(ext_agreement(a, max_deg))
    for r in results:
        status = "passed" if r.passed else f"{len(r.failures)} failures"
        logger.info(f"{r.name}: {r.checked} checks, {status}")
    return results
