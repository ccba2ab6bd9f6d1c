"""Symbolic and numeric verification of tensor identities on spheres.

The package has two halves.  The symbolic half re-derives a family of
divergence and commutation identities by term rewriting over exact
coefficients.  The numeric half evaluates the same statements on round
spheres and CR spheres to floating point precision, so the axioms and
the models check each other.
"""

from __future__ import annotations

__version__ = "0.1.0"
