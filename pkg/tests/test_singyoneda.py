#!/usr/bin/env python3
"""
Tests for the singular Yoneda category: stage elements, stabilized cohomology and contractions
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules.config import Window
from yoneda_workbench.modules.errors import CapInsufficientError, NonStabilizationWarning, ShapeMismatch
from yoneda_workbench.modules.homalg import Complex, simple_module
from yoneda_workbench.modules.ncforms import omega_power, theta
from yoneda_workbench.modules.singyoneda import (
    SYElement,
    check_contracting_homotopy,
    contraction_witness,
    dsg_hom,
    first_stage,
    phi_certificate,
    structure_map,
    sy_cohomology,
    sy_compose,
    sy_identity,
    sy_reduced_window,
)
from yoneda_workbench.modules.yoneda import compose, identity, random_element, yoneda_space


@pytest.fixture
def rng():
    """Seeded generator so failures reproduce"""
    return np.random.default_rng(3)


@pytest.fixture
def quick():
    """A short window that still needs two bijections in a row"""
    return Window(-3, 3, stabilization_count=2, max_stage=6)


@pytest.mark.unit
class TestElements:
    """Test [f; p] and the structure maps"""

    def test_lift_and_advance(self, k_dual):
        """Advancing moves the representative into Ω^p"""
        e = sy_identity(k_dual).advance(2)
        assert e.stage == 2
        assert e.representative.target is omega_power(k_dual, 2)
        assert e.degree == 0

    def test_stage_must_match(self, k_dual):
        """A representative at the wrong stage is rejected"""
        with pytest.raises(ShapeMismatch):
            SYElement(identity(k_dual), 1, k_dual)

    def test_cannot_go_back(self, k_dual):
        """Stages only increase"""
        with pytest.raises(ShapeMismatch):
            sy_identity(k_dual).advance(1).at_stage(0)

    def test_structure_map_is_theta(self, k_dual, lambda_dual, rng):
        """f ↦ θ ⊙ f"""
        f = random_element(yoneda_space(k_dual, lambda_dual), 1, rng)
        assert structure_map(f) == compose(theta(lambda_dual), f)
        assert structure_map(identity(k_dual)) == theta(k_dual)

    def test_classes_compare_across_stages(self, k_dual):
        """[Id; 0] and [θ; 1] are the same class"""
        a = sy_identity(k_dual)
        b = SYElement(theta(k_dual), 1, k_dual)
        assert a.equals(b, 0)
        assert (a - b).is_zero(0)

    def test_composition_laws(self, k_dual, lambda_dual, rng):
        """Units and associativity of ⊙_sg on representatives"""
        f = SYElement(random_element(yoneda_space(k_dual, omega_power(lambda_dual, 1)), 0, rng), 1, lambda_dual)
        g = SYElement(random_element(yoneda_space(lambda_dual, k_dual), 1, rng), 0, k_dual)
        h = SYElement(random_element(yoneda_space(k_dual, omega_power(k_dual, 1)), 0, rng), 1, k_dual)
        assert sy_compose(sy_identity(lambda_dual), f).equals(f, 0)
        assert sy_compose(f, sy_identity(k_dual)).equals(f, 0)
        assert sy_compose(h, sy_compose(g, f)).equals(sy_compose(sy_compose(h, g), f), 0)
        assert sy_compose(g, f).stage == 1

    def test_phi_certificate(self, k_dual, lambda_dual, rng):
        """φ is injective on representatives"""
        assert phi_certificate(sy_identity(k_dual))
        f = SYElement.lift(random_element(yoneda_space(lambda_dual, k_dual), 1, rng))
        assert phi_certificate(f)


@pytest.mark.unit
class TestStabilizedCohomology:
    """Test H^n 𝒮𝒴 against the singularity category"""

    def test_first_stage(self, k_dual):
        """Stages below b_X − a_Y − n + 1 are skipped"""
        assert first_stage(k_dual, k_dual, 0) == 1
        assert first_stage(k_dual, k_dual, 3) == 0

    def test_dual_numbers(self, k_dual, quick):
        """Hom_sg(k, k[n]) = k in every degree, negative ones included"""
        for n in range(-2, 3):
            report = sy_cohomology(k_dual, k_dual, n, quick)
            assert report.stable
            assert report.value == 1
            assert report.warnings == []

    def test_a2_vanishes(self, a2, quick):
        """Hereditary algebras have a zero singularity category"""
        s1, s2 = simple_module(a2, 0), simple_module(a2, 1)
        for m in (s1, s2):
            for n in (s1, s2):
                assert dsg_hom(m, n, 0, quick) == 0

    def test_nakayama(self, nakayama, quick):
        """Shifting swaps the simples of the cyclic Nakayama algebra"""
        s1, s2 = simple_module(nakayama, 0), simple_module(nakayama, 1)
        assert dsg_hom(s1, s1, 0, quick) == 1
        assert dsg_hom(s1, s1, 1, quick) == 0
        assert dsg_hom(s1, s2, 1, quick) == 1

    def test_zero_complex(self, dual_numbers, k_dual):
        """Anything from the zero complex vanishes at stage 0"""
        report = sy_cohomology(Complex(dual_numbers, {}, {}, "0"), k_dual, 0)
        assert (report.stable, report.value, report.stage) == (True, 0, 0)

    def test_non_stabilization_warns(self, k_dual):
        """Too few stages give an unstable report and a warning"""
        with pytest.warns(NonStabilizationWarning):
            report = sy_cohomology(k_dual, k_dual, 0, Window(stabilization_count=3, max_stage=2))
        assert not report.stable
        assert report.warnings


@pytest.mark.unit
class TestContractions:
    """Test contraction witnesses"""

    def test_regular_module_is_contractible(self, lambda_dual):
        """Λ vanishes in the singularity category from stage 1"""
        witness = contraction_witness(lambda_dual, Window(max_stage=4))
        assert witness is not None
        assert witness.stage == 1
        assert witness.degree == -1

    def test_simple_is_not_contractible(self, k_dual):
        """k survives every stage"""
        assert contraction_witness(k_dual, Window(max_stage=4)) is None

    def test_a2_simple_is_contractible(self, s1_a2):
        """S1 has finite projective dimension"""
        witness = contraction_witness(s1_a2, Window(max_stage=4))
        assert witness is not None
        assert witness.stage <= 2

    def test_homotopy_identity(self, lambda_dual, rng):
        """δH(f) + H(δf) = f for the witness of Λ"""
        witness = contraction_witness(lambda_dual, Window(max_stage=4))
        f = SYElement.lift(random_element(yoneda_space(lambda_dual, lambda_dual), 0, rng))
        assert check_contracting_homotopy(witness, f, 0)
        assert check_contracting_homotopy(witness, sy_identity(lambda_dual), 0)


@pytest.mark.integration
class TestReducedWindows:
    """Test minimal models of 𝒮𝒴(Λ, X)"""

    def test_simple_gives_complete_resolution(self, k_dual):
        """𝒮𝒴(Λ, k) is one copy of Λ in every degree"""
        stage, red = sy_reduced_window(k_dual, -2, 2, Window(-2, 2, stabilization_count=1, max_stage=8))
        assert stage >= 4
        assert all(red.multiplicities[n] == [1] for n in range(-2, 3))
        assert all(red.dims[n] == 2 for n in range(-2, 3))

    def test_last_stage_that_fits(self, k_dual):
        """Stages 4 and 5 are enough for lo = −2 with one bijection"""
        stage, red = sy_reduced_window(k_dual, -2, 2, Window(-2, 2, stabilization_count=1, max_stage=5))
        assert stage == 4
        assert all(red.multiplicities[n] == [1] for n in range(-2, 3))

    def test_too_few_stages(self, k_dual):
        """A low window needs stages past the maximal one"""
        with pytest.raises(CapInsufficientError, match="max stage"):
            sy_reduced_window(k_dual, -4, 4, Window(max_stage=5))
        with pytest.raises(CapInsufficientError):
            sy_reduced_window(k_dual, -2, 2, Window(-2, 2, stabilization_count=3, max_stage=6))

    def test_unsettled_over_non_gorenstein(self, k_radical):
        """Stage windows over the radical square zero algebra keep growing"""
        with pytest.warns(NonStabilizationWarning):
            stage, red = sy_reduced_window(k_radical, 0, 0, Window(0, 0, stabilization_count=1, max_stage=3))
        assert stage == 3
        assert red.dims[0] > 0
