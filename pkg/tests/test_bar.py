#!/usr/bin/env python3
"""
Tests for the normalized bar resolution and its tensor products
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules.bar import (
    augmentation,
    bar,
    bar_tensor,
    epsilon,
    external_differential,
    truncation_maps,
)
from yoneda_workbench.modules.errors import CapInsufficientError
from yoneda_workbench.modules.homalg import cohomology_dim, quasi_iso_window


@pytest.mark.unit
class TestBar:
    """Test the bar complex of Λ as bimodules"""

    def test_dual_numbers_dimensions(self, dual_numbers):
        """Four basis keys in every degree −d..0"""
        b = bar(dual_numbers, 3)
        assert [b.dim(j) for j in range(-3, 1)] == [4, 4, 4, 4]
        assert b.dim(-4) == 0

    def test_a2_dimensions(self, a2):
        """Λ⊗_E Λ has dimension 4 and a single arrow word contributes one key"""
        b = bar(a2, 2)
        assert b.dim(0) == 4
        assert b.dim(-1) == 1
        assert b.dim(-2) == 0

    def test_is_complex(self, dual_numbers, truncated_cubic):
        """d∘d = 0 and the differentials are Λ-linear"""
        bar(dual_numbers, 3).validate()
        bar(truncated_cubic, 2).validate()

    def test_exact_below_top(self, dual_numbers):
        """H^0 = Λ and no cohomology between the cap and 0"""
        b = bar(dual_numbers, 3)
        assert cohomology_dim(b, 0) == 2
        assert cohomology_dim(b, -1) == 0
        assert cohomology_dim(b, -2) == 0

    def test_carries_right_action(self, dual_numbers):
        """Components of 𝔹 are bimodules"""
        assert bar(dual_numbers, 2).module(0).right_action is not None

    def test_external_differential_shape(self, dual_numbers):
        """d_ex in degree −1 is a 4 × 4 matrix"""
        assert external_differential(dual_numbers, 1).shape == (4, 4)

    def test_key_labels(self, dual_numbers):
        """Keys record the algebra element, the word and the vector of X"""
        b = bar(dual_numbers, 2)
        a, letters, _z = b.key_label(-2, 0)
        assert letters == (0, 0)
        assert 0 <= a < dual_numbers.dim
        assert b.word_lengths(-2) == [2]


@pytest.mark.unit
class TestAugmentation:
    """Test ε and ε ⊗ Id_X"""

    def test_epsilon_is_quasi_isomorphism(self, dual_numbers):
        """𝔹_{≤3} → Λ is exact on cones down to degree −3"""
        eps = epsilon(dual_numbers, 3)
        eps.validate()
        assert quasi_iso_window(eps, -3, 0)

    def test_resolution_of_simple(self, dual_numbers, k_dual):
        """𝔹⊗k resolves k"""
        bt = bar_tensor(dual_numbers, k_dual, 3)
        bt.validate()
        assert [bt.dim(j) for j in range(-3, 1)] == [2, 2, 2, 2]
        assert cohomology_dim(bt, 0) == 1
        assert cohomology_dim(bt, -1) == 0
        aug = augmentation(bt)
        aug.validate()
        assert quasi_iso_window(aug, -2, 0)

    def test_augmentation_needs_floor_zero(self, dual_numbers, k_dual):
        """Quotients by short words have no augmentation"""
        with pytest.raises(CapInsufficientError):
            augmentation(bar_tensor(dual_numbers, k_dual, 3, floor=1))


@pytest.mark.unit
class TestTruncations:
    """Test the filtration by word length"""

    def test_maps_are_cochain_maps(self, dual_numbers, k_dual):
        """The inclusion of short words and the projection to long words commute with d"""
        inc, proj = truncation_maps(dual_numbers, 1, 3, k_dual)
        inc.validate()
        proj.validate()
        assert inc.target.cap == 3
        assert proj.source.floor == 1
        assert proj.target.floor == 2

    def test_p_zero(self, dual_numbers):
        """Nothing sits below word length 0"""
        inc, _ = truncation_maps(dual_numbers, 0, 2)
        assert inc.source.is_zero

    def test_cap_below_floor(self, dual_numbers, k_dual):
        """cap < floor is rejected"""
        with pytest.raises(CapInsufficientError):
            bar_tensor(dual_numbers, k_dual, 1, floor=2)
        with pytest.raises(CapInsufficientError):
            truncation_maps(dual_numbers, 3, 2)
