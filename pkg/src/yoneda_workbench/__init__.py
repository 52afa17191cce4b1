"""
Yoneda Workbench - exact computations in the singularity category

A toolkit over finite-dimensional split algebras for bar constructions, Yoneda
Hom complexes, noncommutative differential forms and the singular Yoneda dg
category, with a stabilization functor and cross-checking oracles.
"""

__version__ = "0.1.0"
__author__ = "Yoneda Workbench Team"
__description__ = "Exact computational workbench for singular Yoneda dg categories"
