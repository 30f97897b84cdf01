"""Exact symbolic calculus for conformally rescaled Laplacians on
noncommutative tori, with a numerical Fourier-side oracle."""

from .ncalg import Algebra, Letter, NCPoly, Scalar

__all__ = ["Algebra", "Letter", "NCPoly", "Scalar"]
__version__ = "0.1.0"
