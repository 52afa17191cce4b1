#!/usr/bin/env python3
"""
Tests for the Yoneda dg category: coordinates, δ, composition and the comparison maps
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules.bar import augmentation
from yoneda_workbench.modules.errors import CompositionError
from yoneda_workbench.modules.homalg import Complex, cohomology_dim, simple_module
from yoneda_workbench.modules.yoneda import (
    YonedaElement,
    YonedaSpace,
    alpha,
    compose,
    eta,
    from_cochain_map,
    identity,
    iota,
    is_isomorphism,
    psi,
    random_element,
    y_hom,
    yoneda_ext,
    yoneda_space,
)


@pytest.fixture
def rng():
    """Seeded generator so failures reproduce"""
    return np.random.default_rng(7)


@pytest.mark.unit
class TestCoordinates:
    """Test the cells of 𝒴(X, Y)"""

    def test_dual_numbers_dimensions(self, k_dual):
        """𝒴(k, k)^n is one-dimensional for n ≥ 0"""
        space = yoneda_space(k_dual, k_dual)
        assert [space.dim(n) for n in range(-1, 4)] == [0, 1, 1, 1, 1]
        assert list(space.cells(2)) == [(2, 0)]

    def test_a2_dimensions(self, a2):
        """Only the arrow word contributes to 𝒴(S1, S2)"""
        space = yoneda_space(Complex.stalk(simple_module(a2, 0), 0), Complex.stalk(simple_module(a2, 1), 0))
        assert [space.dim(n) for n in range(3)] == [0, 1, 0]

    def test_spaces_are_shared(self, k_dual):
        """Yoneda spaces are cached per pair of complexes"""
        assert yoneda_space(k_dual, k_dual) is yoneda_space(k_dual, k_dual)

    def test_different_algebras(self, k_dual, s1_a2):
        """Complexes over different algebras have no Yoneda space"""
        with pytest.raises(CompositionError):
            YonedaSpace(k_dual, s1_a2)

    def test_vector_coordinates(self, k_dual, lambda_dual, rng):
        """Reading an element back from its coordinates gives the same element"""
        space = yoneda_space(k_dual, lambda_dual)
        f = random_element(space, 1, rng)
        assert YonedaElement.from_vector(space, 1, f.vector()) == f

    def test_truncate(self, k_dual):
        """Truncating below the only filtration leaves zero"""
        space = yoneda_space(k_dual, k_dual)
        f = YonedaElement.from_vector(space, 2, space.field.array([1]))
        assert f.filtrations == [2]
        assert f.truncate(1).is_zero()
        assert f.truncate(2) == f


@pytest.mark.unit
class TestDifferential:
    """Test δ and the cohomology of 𝒴"""

    def test_delta_squared(self, k_dual, lambda_dual, rng):
        """δ∘δ = 0 on random elements"""
        for x, y in [(k_dual, lambda_dual), (lambda_dual, k_dual), (lambda_dual, lambda_dual)]:
            for n in (-1, 0, 1):
                f = random_element(yoneda_space(x, y), n, rng)
                assert f.delta().delta().is_zero()

    def test_ext_dual_numbers(self, dual_numbers):
        """H^n 𝒴(k, k) = Ext^n(k, k) = k"""
        k = simple_module(dual_numbers, 0)
        assert yoneda_ext(k, k, 4) == [1, 1, 1, 1, 1]

    def test_ext_a2(self, a2):
        """H^1 𝒴(S1, S2) = k"""
        assert yoneda_ext(simple_module(a2, 0), simple_module(a2, 1), 2) == [0, 1, 0]

    def test_y_hom_window(self, k_dual):
        """The windowed complex carries the cohomology"""
        hom = y_hom(k_dual, k_dual, 0, 2)
        assert [cohomology_dim(hom, n) for n in range(0, 3)] == [1, 1, 1]


@pytest.mark.unit
class TestComposition:
    """Test ⊙ and identities"""

    def test_units(self, k_dual, lambda_dual, rng):
        """Id ⊙ f = f = f ⊙ Id"""
        f = random_element(yoneda_space(k_dual, lambda_dual), 1, rng)
        assert compose(identity(lambda_dual), f) == f
        assert compose(f, identity(k_dual)) == f

    def test_degrees_add(self, k_dual):
        """The generator of 𝒴(k, k)^1 composes with itself to the generator of degree 2"""
        space = yoneda_space(k_dual, k_dual)
        one = YonedaElement.from_vector(space, 1, space.field.array([1]))
        two = compose(one, one)
        assert two.degree == 2
        assert not two.is_zero()

    def test_associative(self, k_dual, lambda_dual, rng):
        """(h ⊙ g) ⊙ f = h ⊙ (g ⊙ f)"""
        f = random_element(yoneda_space(k_dual, lambda_dual), 0, rng)
        g = random_element(yoneda_space(lambda_dual, k_dual), 1, rng)
        h = random_element(yoneda_space(k_dual, k_dual), 1, rng)
        assert compose(compose(h, g), f) == compose(h, compose(g, f))

    def test_leibniz(self, k_dual, lambda_dual, rng):
        """δ(g ⊙ f) = δg ⊙ f + (−1)^{|g|} g ⊙ δf"""
        fld = k_dual.field
        f = random_element(yoneda_space(k_dual, lambda_dual), 0, rng)
        g = random_element(yoneda_space(lambda_dual, k_dual), 1, rng)
        rhs = compose(g.delta(), f) + compose(g, f.delta()).scale(fld.sign(g.degree))
        assert compose(g, f).delta() == rhs

    def test_not_composable(self, k_dual, lambda_dual):
        """The target of f must be the source of g"""
        with pytest.raises(CompositionError):
            compose(identity(k_dual), identity(lambda_dual))


@pytest.mark.unit
class TestComparisonMaps:
    """Test ι, α, η and Ψ"""

    def test_augmentation_retracts_iota(self, k_dual, lambda_dual):
        """(ε ⊗ Id) ⊙ ι = Id"""
        for x in (k_dual, lambda_dual):
            i = iota(x, 2)
            assert compose(from_cochain_map(augmentation(i.target)), i) == identity(x)

    def test_alpha_isomorphism(self, k_dual, lambda_dual):
        """α is a cochain isomorphism onto Hom(𝔹 ⊗ X, Y)"""
        for x, y in [(k_dual, k_dual), (lambda_dual, k_dual), (k_dual, lambda_dual)]:
            assert is_isomorphism(alpha(x, y, 0, 2), 0, 2)

    def test_alpha_a2(self, a2, s1_a2):
        """α over a quiver algebra"""
        s2 = Complex.stalk(simple_module(a2, 1), 0)
        assert is_isomorphism(alpha(s1_a2, s2, 0, 1), 0, 1)

    def test_eta_commutes(self, k_dual):
        """η_k is a cochain map into 𝒴(Λ, k)"""
        eta(k_dual, 0, 2).validate(range(0, 3))

    def test_psi_of_identity(self, k_dual):
        """Ψ(Id) is the identity operator"""
        op = psi(identity(k_dual), 0, 2)
        assert op.degree == 0
        assert is_isomorphism(op, 0, 2)
        for n in range(-1, 4):
            comp = op.component(n)
            assert np.array_equal(comp, k_dual.field.identity(comp.shape[0]))
