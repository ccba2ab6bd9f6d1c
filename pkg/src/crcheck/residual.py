"""Shared record types and seeding for the numerical check suites."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL_FIRST_ORDER = 1e-10
TOL_HIGHER_ORDER = 1e-8

__all__ = [
    "TOL_FIRST_ORDER",
    "TOL_HIGHER_ORDER",
    "ResidualReport",
    "AdjudicationMeasurement",
    "rng_for",
    "worst",
]


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one sample, stable under reordering.

    Streams are keyed by (seed, *path), so results do not depend on how
    work is batched or interleaved.
    """
    return np.random.default_rng((seed,) + path)


@dataclass(frozen=True, slots=True)
class ResidualReport:
    """Worst-case residual of one check over a batch of samples."""

    name: str
    samples: int
    max_abs_residual: float
    tolerance: float
    seed: int

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_abs_residual) and (
            self.max_abs_residual <= self.tolerance
        )

    def __str__(self) -> str:
        tag = "pass" if self.passed else "FAIL"
        return (
            f"{self.name}: max |residual| = {self.max_abs_residual:.3e} "
            f"over {self.samples} samples (tol {self.tolerance:.1e}) [{tag}]"
        )


def worst(
    name: str,
    residuals: Sequence[float],
    tolerance: float,
    seed: int,
) -> ResidualReport:
    """Reduce a batch of per-sample residuals to its worst case."""
    vals = np.abs(np.asarray(residuals, dtype=complex))
    top = float(vals.max()) if vals.size else 0.0
    return ResidualReport(name, len(residuals), top, tolerance, seed)


@dataclass(frozen=True, slots=True)
class AdjudicationMeasurement:
    """Residuals of two readings of a disputed display, measured side by side.

    ``corrected_residual`` is the reading the checks adopt and must sit below
    ``tolerance``; ``displayed_residual`` is the reading as printed and is
    expected to be large.  Both numbers are reported, never just the verdict.
    """

    name: str
    corrected_residual: float
    displayed_residual: float
    samples: int
    tolerance: float
    seed: int

    @property
    def resolved(self) -> bool:
        return (
            math.isfinite(self.corrected_residual)
            and self.corrected_residual <= self.tolerance
            and self.displayed_residual > self.tolerance
        )

    def __str__(self) -> str:
        tag = "resolved" if self.resolved else "UNRESOLVED"
        return (
            f"{self.name}: corrected {self.corrected_residual:.3e} vs "
            f"displayed {self.displayed_residual:.3e} "
            f"(tol {self.tolerance:.1e}) [{tag}]"
        )
