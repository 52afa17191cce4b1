#!/usr/bin/env python3
"""
Shared fixtures: the shipped test algebras and a few standard objects over them
"""

import os
import sys
from pathlib import Path

import pytest

# Add the src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from yoneda_workbench.modules.algebra import load_algebra
from yoneda_workbench.modules.homalg import Complex, regular_module, simple_module

ALGEBRAS = Path(__file__).resolve().parent.parent / "data" / "algebras"
COMPLEXES = Path(__file__).resolve().parent.parent / "data" / "complexes"


@pytest.fixture(scope="session")
def algebra_dir():
    """Directory of the shipped algebra documents"""
    return ALGEBRAS


@pytest.fixture(scope="session")
def dual_numbers():
    """k[x]/(x^2) over F_2"""
    return load_algebra(ALGEBRAS / "dual_numbers_f2.toml")


@pytest.fixture(scope="session")
def truncated_cubic():
    """k[x]/(x^3) over F_3"""
    return load_algebra(ALGEBRAS / "truncated_cubic_f3.toml")


@pytest.fixture(scope="session")
def a2():
    """Path algebra of 1 -> 2 over Q"""
    return load_algebra(ALGEBRAS / "a2_rational.toml")


@pytest.fixture(scope="session")
def radical_square_zero():
    """k[x,y]/(x,y)^2 over F_2, not Gorenstein"""
    return load_algebra(ALGEBRAS / "radical_square_zero_f2.toml")


@pytest.fixture(scope="session")
def nakayama():
    """Cyclic Nakayama algebra with two vertices and radical square zero over F_3"""
    return load_algebra(ALGEBRAS / "cyclic_nakayama_f3.toml")


@pytest.fixture(scope="session")
def k_dual(dual_numbers):
    """The simple module k over the dual numbers, as a stalk complex"""
    return Complex.stalk(simple_module(dual_numbers, 0), 0)


@pytest.fixture(scope="session")
def lambda_dual(dual_numbers):
    """The regular module over the dual numbers, as a stalk complex"""
    return Complex.stalk(regular_module(dual_numbers), 0)


@pytest.fixture(scope="session")
def s1_a2(a2):
    """The simple S1 over A2, as a stalk complex"""
    return Complex.stalk(simple_module(a2, 0), 0)


@pytest.fixture(scope="session")
def k_radical(radical_square_zero):
    """The simple module k over the radical square zero algebra, as a stalk complex"""
    return Complex.stalk(simple_module(radical_square_zero, 0), 0)
