#!/usr/bin/env python3
"""
Tests for noncommutative differential forms, θ and the Ω/bar comparison squares
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules.errors import CapInsufficientError, WorkbenchError
from yoneda_workbench.modules.homalg import Complex, regular_module, simple_module
from yoneda_workbench.modules.ncforms import (
    check_omega_bar_square,
    check_one_step_square,
    flat_labels,
    omega,
    omega_on_morphism,
    omega_power,
    root_of,
    theta,
    varsigma,
)
from yoneda_workbench.modules.yoneda import compose, identity, random_element, yoneda_space


@pytest.fixture
def rng():
    """Seeded generator so failures reproduce"""
    return np.random.default_rng(11)


@pytest.mark.unit
class TestOmega:
    """Test the complexes Ω_nc^p X"""

    def test_simple_over_dual_numbers(self, k_dual):
        """Ω^p k is one-dimensional in degree −p"""
        for p in range(1, 4):
            op = omega_power(k_dual, p)
            assert op.support == [-p]
            assert op.dim(-p) == 1

    def test_regular_over_dual_numbers(self, lambda_dual):
        """Ω Λ = s𝛬̄ ⊗ Λ has dimension 2"""
        o = omega(lambda_dual)
        assert o.dim(-1) == 2
        o.module(-1).validate()

    def test_twisted_action_is_a_module(self, truncated_cubic):
        """The twisted action satisfies the module axioms"""
        o = omega_power(Complex.stalk(regular_module(truncated_cubic), 0), 2)
        o.module(-2).validate()
        o.validate()

    def test_arrow_kills_sink(self, a2):
        """No letter ends at the sink of A2, so Ω S2 = 0"""
        assert omega(Complex.stalk(simple_module(a2, 1), 0)).is_zero
        assert omega(Complex.stalk(simple_module(a2, 0), 0)).dim(-1) == 1

    def test_cached(self, k_dual):
        """Ω of the same complex is the same object"""
        assert omega(k_dual) is omega(k_dual)
        assert omega_power(k_dual, 2) is omega(omega(k_dual))
        assert omega_power(k_dual, 0) is k_dual

    def test_negative_power(self, k_dual):
        """Ω^{-1} is not defined"""
        with pytest.raises(WorkbenchError):
            omega_power(k_dual, -1)

    def test_flat_labels_and_root(self, k_dual):
        """Iterated forms remember their letters and their root"""
        op = omega_power(k_dual, 2)
        assert flat_labels(op, -2) == [((0, 0), 0)]
        root, level = root_of(op)
        assert root is k_dual
        assert level == 2


@pytest.mark.unit
class TestTheta:
    """Test θ and Ω on morphisms"""

    def test_theta_closed(self, k_dual, lambda_dual):
        """δθ = 0"""
        for x in (k_dual, lambda_dual):
            assert theta(x).delta().is_zero()
            assert theta(x).degree == 0

    def test_theta_natural(self, k_dual, lambda_dual, rng):
        """θ_Y ⊙ f = Ω(f) ⊙ θ_X"""
        f = random_element(yoneda_space(k_dual, lambda_dual), 1, rng)
        assert compose(theta(lambda_dual), f) == compose(omega_on_morphism(f), theta(k_dual))

    def test_omega_preserves_identity(self, lambda_dual):
        """Ω(Id) = Id"""
        assert omega_on_morphism(identity(lambda_dual)) == identity(omega(lambda_dual))

    def test_omega_multiplicative(self, k_dual, lambda_dual, rng):
        """Ω(g ⊙ f) = Ω(g) ⊙ Ω(f)"""
        f = random_element(yoneda_space(k_dual, lambda_dual), 0, rng)
        g = random_element(yoneda_space(lambda_dual, k_dual), 1, rng)
        assert omega_on_morphism(compose(g, f)) == compose(omega_on_morphism(g), omega_on_morphism(f))

    def test_omega_commutes_with_delta(self, k_dual, lambda_dual, rng):
        """Ω(δf) = δΩ(f)"""
        f = random_element(yoneda_space(k_dual, lambda_dual), 0, rng)
        assert omega_on_morphism(f).delta() == omega_on_morphism(f.delta())


@pytest.mark.unit
class TestSquares:
    """Test the comparison of Ω with the bar filtration"""

    def test_varsigma_is_cochain_map(self, k_dual):
        """ς_1 commutes with the differentials"""
        varsigma(k_dual, 1, 2).validate()

    def test_one_step_square(self, k_dual, lambda_dual):
        """ι_{ΩX} ⊙ θ_X factors through the lower arrow"""
        assert check_one_step_square(k_dual, 2)
        assert check_one_step_square(lambda_dual, 2)

    def test_omega_bar_squares(self, k_dual):
        """The square commutes for the first few p"""
        for p in range(3):
            assert check_omega_bar_square(k_dual, p, p + 2)

    def test_caps_checked(self, k_dual):
        """Caps below the square's needs are rejected"""
        with pytest.raises(CapInsufficientError):
            check_omega_bar_square(k_dual, 2, 2)
        with pytest.raises(CapInsufficientError):
            check_one_step_square(k_dual, 0)
