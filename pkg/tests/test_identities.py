#!/usr/bin/env python3
"""
Tests for the randomized identity suites and the oracle agreements
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules.config import Window
from yoneda_workbench.modules.errors import WorkbenchError
from yoneda_workbench.modules.identities import (
    IdentitySuite,
    SuiteResult,
    ext_agreement,
    finite_global_dimension,
    probe_objects,
    run_suites,
    singular_agreement,
)


@pytest.fixture
def short_window():
    """Small window with a short stabilization run"""
    return Window(-2, 2, stabilization_count=2, max_stage=6)


@pytest.mark.unit
class TestSuiteResult:
    """Test the bookkeeping of a suite"""

    def test_records_failures(self):
        """Failures keep their detail and flip `passed`"""
        result = SuiteResult("demo")
        result.record(True, "fine")
        result.record(False, "broken sample")
        assert result.checked == 2
        assert result.failures == ["broken sample"]
        assert not result.passed

    def test_empty_suite_passes(self):
        """Nothing checked, nothing failed"""
        assert SuiteResult("empty").passed

    def test_probe_objects(self, a2):
        """Simples then projectives, as stalks"""
        names = [x.name for x in probe_objects(a2)]
        assert names == ["S1", "S2", "P1", "P2"]


@pytest.mark.unit
class TestIdentitySuite:
    """Test individual suites on the dual numbers"""

    def test_seeded_draws_repeat(self, dual_numbers):
        """The same seed gives the same elements"""
        a, b = IdentitySuite(dual_numbers, seed=5, samples=1), IdentitySuite(dual_numbers, seed=5, samples=1)
        x, y = a.pick(2)
        f = a.element(x, y, 1)
        assert [o.name for o in b.pick(2)] == [x.name, y.name]
        assert b.element(x, y, 1) == f

    def test_dg_laws(self, dual_numbers):
        """δ², Leibniz, associativity and units"""
        suite = IdentitySuite(dual_numbers, seed=1, samples=4)
        for result in (suite.delta_squared(), suite.leibniz(), suite.associativity()):
            assert result.passed, result.failures
            assert result.checked == 4

    def test_omega_laws(self, dual_numbers):
        """θ and Ω on morphisms"""
        suite = IdentitySuite(dual_numbers, seed=2, samples=3)
        assert suite.theta_natural().passed
        assert suite.omega_functor().passed

    def test_singular_laws(self, dual_numbers):
        """⊙_sg is unital, associative and Leibniz"""
        assert IdentitySuite(dual_numbers, seed=3, samples=3).sy_laws().passed

    def test_comparison_maps(self, dual_numbers):
        """ι, α and the Ω/bar squares"""
        suite = IdentitySuite(dual_numbers, seed=0, samples=1)
        assert suite.augmentation_retracts_iota().passed
        assert suite.alpha_isomorphism(0, 1).passed
        assert suite.squares((0, 1)).passed


@pytest.mark.integration
class TestAgreement:
    """Test the oracle agreements"""

    def test_ext_agreement(self, dual_numbers, a2, nakayama):
        """H^n 𝒴 matches minimal resolutions"""
        for algebra in (dual_numbers, a2, nakayama):
            result = ext_agreement(algebra, 3)
            assert result.passed, result.failures

    def test_finite_global_dimension(self, a2, dual_numbers, nakayama):
        """A2 is hereditary, the others are not"""
        assert finite_global_dimension(a2)
        assert not finite_global_dimension(dual_numbers)
        assert not finite_global_dimension(nakayama)

    def test_singular_agreement_self_injective(self, dual_numbers, nakayama, short_window):
        """Stable Hom oracle"""
        assert singular_agreement(dual_numbers, -2, 2, short_window).passed
        assert singular_agreement(nakayama, -1, 1, short_window).passed

    def test_singular_agreement_hereditary(self, a2, short_window):
        """Everything vanishes over A2"""
        result = singular_agreement(a2, -1, 1, short_window)
        assert result.passed
        assert result.checked == 12

    def test_no_oracle(self, radical_square_zero):
        """Neither oracle applies to k[x,y]/(x,y)^2"""
        with pytest.raises(WorkbenchError):
            singular_agreement(radical_square_zero)

    @pytest.mark.slow
    def test_run_suites_over_rationals(self, a2):
        """Every suite passes over Q, where signs matter"""
        results = run_suites(a2, seed=0, samples=2, max_deg=3)
        failed = [r.name for r in results if not r.passed]
        assert failed == []
