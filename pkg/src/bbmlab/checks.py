"""Randomized property suites for the norm engines.

Shared by the check-spaces CLI subcommand and the acceptance tests: the
lattice, Fatou-via-truncation, triangle, and homogeneity audits run per
engine on seeded random fields, and the reduction suite compares each
engine against the Lebesgue norm it must collapse to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import SampledField
from .geometry import Box, Interval, sample_quadrature
from .spaces import (
    BesovBourgainMorrey,
    HerzGlobal,
    HerzLocal,
    Lebesgue,
    Lorentz,
    MixedLebesgue,
    Morrey,
    OrliczSlice,
    OrliczSpace,
    PowerOrlicz,
    PowerWeight,
    ConstantWeight,
    VariableLebesgue,
    WeightedLebesgue,
    norm,
)

__all__ = [
    "CheckResult",
    "engine_catalog",
    "lattice_violation",
    "fatou_violation",
    "triangle_violation",
    "homogeneity_violation",
    "reduction_pairs",
    "run_axiom_suites",
    "run_reduction_suite",
    "LATTICE_SLACK",
    "TRIANGLE_SLACK",
    "HOMOGENEITY_SLACK",
    "FATOU_SLACK",
    "REDUCTION_TOL",
]

LATTICE_SLACK = 1e-12
TRIANGLE_SLACK = 1e-10
HOMOGENEITY_SLACK = 1e-12
FATOU_SLACK = 1e-10
REDUCTION_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _interval_grid(points: int = 24):
    return sample_quadrature(Interval(0.0, 1.0), 1.0 / points)


def _square_grid(cells: int = 6):
    return sample_quadrature(Box((0.0, 0.0), (1.0, 1.0)), 1.0 / cells)


def engine_catalog():
    """(name, spec, grid) triples covering every norm family."""
    g1 = _interval_grid()
    g2 = _square_grid()
    return [
        ("lebesgue", Lebesgue(2.0), g1),
        ("weighted", WeightedLebesgue(2.0, PowerWeight(0.5)), g1),
        ("lorentz", Lorentz(2.5, 1.5), g1),
        ("orlicz", OrliczSpace(PowerOrlicz(2.5)), g1),
        ("morrey", Morrey(3.0, 2.0), g1),
        ("variable", VariableLebesgue(lambda pts: 2.0 + 0.5 * pts[:, 0]), g1),
        ("mixed", MixedLebesgue((1.5, 2.5)), g2),
        ("herz_local", HerzLocal(2.0, 2.0, 0.3, (-0.1,)), g1),
        ("herz_global", HerzGlobal(2.0, 2.0, -0.1), g1),
        ("bbmorrey", BesovBourgainMorrey(1.5, 2.0, 2.5, 2.0), g1),
        ("orlicz_slice", OrliczSlice(PowerOrlicz(2.0), 2.0, 0.15), g1),
    ]


def _random_field(grid, rng) -> SampledField:
    values = rng.normal(scale=2.0, size=len(grid))
    return SampledField(grid, values)


def lattice_violation(spec, grid, rng) -> float:
    """norm(g) - norm(f) for |g| <= |f| pointwise (should be <= 0)."""
    f = _random_field(grid, rng)
    damp = rng.uniform(0.0, 1.0, size=len(grid))
    g = SampledField(grid, f.values * damp)
    return norm(spec, g) - norm(spec, f)


def fatou_violation(spec, grid, rng) -> float:
    """Truncations min(|f|, c) must have norms increasing to norm(|f|)."""
    f = SampledField(grid, np.abs(_random_field(grid, rng).values))
    top = float(f.values.max())
    cuts = np.linspace(0.2, 1.0, 5) * max(top, 1e-9)
    norms = [norm(spec, SampledField(grid, np.minimum(f.values, c)))
             for c in cuts]
    worst = max(
        (norms[i] - norms[i + 1] for i in range(len(norms) - 1)),
        default=0.0,
    )
    return max(worst, abs(norms[-1] - norm(spec, f)))


def triangle_violation(spec, grid, rng) -> float:
    f = _random_field(grid, rng)
    g = _random_field(grid, rng)
    fg = SampledField(grid, f.values + g.values)
    return norm(spec, fg) - norm(spec, f) - norm(spec, g)


def homogeneity_violation(spec, grid, rng) -> float:
    """Relative |norm(cf) - |c| norm(f)|."""
    f = _random_field(grid, rng)
    c = float(rng.uniform(0.1, 10.0)) * float(rng.choice([-1.0, 1.0]))
    scaled = SampledField(grid, c * f.values)
    ref = abs(c) * norm(spec, f)
    return abs(norm(spec, scaled) - ref) / max(ref, 1.0)


def reduction_pairs():
    """Engines that must agree with a Lebesgue norm, with their grids."""
    g1 = _interval_grid()
    g2 = _square_grid()
    return [
        ("lorentz(r,r)", Lorentz(2.0, 2.0), Lebesgue(2.0), g1),
        ("orlicz(power q)", OrliczSpace(PowerOrlicz(2.5)), Lebesgue(2.5), g1),
        ("morrey(alpha=r)", Morrey(2.0, 2.0), Lebesgue(2.0), g1),
        ("mixed(equal)", MixedLebesgue((2.0, 2.0)), Lebesgue(2.0), g2),
        ("variable(const)", VariableLebesgue(2.0), Lebesgue(2.0), g1),
        ("weighted(1)", WeightedLebesgue(2.0, ConstantWeight(1.0)),
         Lebesgue(2.0), g1),
    ]


def run_axiom_suites(cases: int = 1000, seed: int = 0):
    """Run all four audits per engine; returns CheckResult rows."""
    results = []
    suites = [
        ("lattice", lattice_violation, LATTICE_SLACK),
        ("fatou", fatou_violation, FATOU_SLACK),
        ("triangle", triangle_violation, TRIANGLE_SLACK),
        ("homogeneity", homogeneity_violation, HOMOGENEITY_SLACK),
    ]
    for engine_name, spec, grid in engine_catalog():
        for suite_name, check, slack in suites:
            rng = np.random.default_rng(seed)
            worst = -math.inf
            for _ in range(cases):
                worst = max(worst, check(spec, grid, rng))
            results.append(CheckResult(
                f"{suite_name}:{engine_name}",
                worst <= slack,
                f"worst violation {worst:.3e} (slack {slack:.0e})",
            ))
    return results


def run_reduction_suite(cases: int = 100, seed: int = 0):
    results = []
    for name, spec, ref, grid in reduction_pairs():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(cases):
            f = _random_field(grid, rng)
            a = norm(spec, f)
            b = norm(ref, f)
            worst = max(worst, abs(a - b) / max(b, 1e-30))
        results.append(CheckResult(
            f"reduction:{name}",
            worst <= REDUCTION_TOL,
            f"worst relative deviation {worst:.3e}",
        ))
    return results
