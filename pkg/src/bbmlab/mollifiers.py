"""Radial decreasing approximations of the identity.

Two families ship: the fractional kernel nu*p*(2R)^(-nu*p) * r^(nu*p-n) on
(0, 2R], which turns the nonlocal energy into the Gagliardo seminorm, and a
compact bump n/nu^n on (0, nu].  Both have unit radial mass
int_0^inf rho_nu(r) r^(n-1) dr = 1 for every admissible nu, and their mass
concentrates at the origin as nu shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "RdatiFamily",
    "fractional_family",
    "bump_family",
    "normalization_defect",
    "tail_mass",
    "family_from_record",
]


@dataclass(frozen=True)
class RdatiFamily:
    """One-parameter family nu -> rho_nu of radial decreasing profiles.

    kind: "fractional" (needs exponent p and enclosing radius R) or "bump".
    nu_max is the open upper end of the admissible scale range.
    """

    kind: str
    n: int
    p: float = math.nan
    R: float = math.nan

    @property
    def nu_max(self) -> float:
        if self.kind == "fractional":
            return min(self.n / self.p, 1.0)
        return 1.0

    def _check_nu(self, nu: float) -> None:
        if not 0.0 < nu < self.nu_max:
            raise ValueError(
                f"nu={nu} outside the admissible range (0, {self.nu_max})"
            )

    def rho(self, nu: float, r) -> np.ndarray:
        """Evaluate rho_nu at radii r (vectorized)."""
        self._check_nu(nu)
        r = np.asarray(r, dtype=float)
        if self.kind == "fractional":
            np_exp = nu * self.p
            cut = 2.0 * self.R
            with np.errstate(divide="ignore"):
                out = np_exp * cut ** (-np_exp) * r ** (-self.n + np_exp)
            return np.where((r > 0) & (r <= cut), out, 0.0)
        if self.kind == "bump":
            return np.where((r > 0) & (r <= nu), self.n / nu**self.n, 0.0)
        raise ValueError(f"unknown family {self.kind!r}")

    def radial_mass_below(self, nu: float, t: float) -> float:
        """Closed form of int_0^t rho_nu(r) r^(n-1) dr."""
        self._check_nu(nu)
        if t <= 0:
            return 0.0
        if self.kind == "fractional":
            return (min(t, 2.0 * self.R) / (2.0 * self.R)) ** (nu * self.p)
        if self.kind == "bump":
            return (min(t, nu) / nu) ** self.n
        raise ValueError(f"unknown family {self.kind!r}")

    def support_radius(self, nu: float) -> float:
        return 2.0 * self.R if self.kind == "fractional" else nu


def fractional_family(p: float, R: float, n: int) -> RdatiFamily:
    """The kernel driving the Gagliardo-seminorm limit, cut off at 2R."""
    if p < 1 or R <= 0:
        raise ValueError("fractional family needs p >= 1 and R > 0")
    return RdatiFamily("fractional", n, p=float(p), R=float(R))


def bump_family(n: int) -> RdatiFamily:
    """Compactly supported constant profile n/nu^n on (0, nu]."""
    return RdatiFamily("bump", n)


def family_from_record(record: dict, n: int, R: float) -> RdatiFamily:
    kind = record.get("kind")
    if kind == "bump":
        return bump_family(n)
    if kind == "fractional":
        return fractional_family(record["p"], R, n)
    raise ValueError(f"family.kind {kind!r} not in catalog (bump, fractional)")


def normalization_defect(family: RdatiFamily, nu: float) -> float:
    """|numeric radial mass - 1| with singularity-aware quadrature.

    The fractional integrand r^(nu*p - 1) is flattened by the substitution
    u = r^(nu*p); the bump integrand is smooth on its support.
    """
    family._check_nu(nu)
    if family.kind == "fractional":
        np_exp = nu * family.p
        cut = 2.0 * family.R

        def integrand(u):
            # u = r^(nu p) flattens the r^(nu p - 1) singularity at zero;
            # composed in log space because r itself underflows for tiny nu p
            log_r = math.log(u) / np_exp
            log_rho = (math.log(np_exp) - np_exp * math.log(cut)
                       + (np_exp - family.n) * log_r)
            log_jacobian = (1.0 - np_exp) * log_r - math.log(np_exp)
            return math.exp(log_rho + (family.n - 1) * log_r + log_jacobian)

        val, _ = integrate.quad(
            integrand, 0.0, cut**np_exp, limit=200, epsabs=1e-13, epsrel=1e-13
        )
    else:
        sup = family.support_radius(nu)
        val, _ = integrate.quad(
            lambda r: float(family.rho(nu, r)) * r ** (family.n - 1),
            0.0,
            sup,
            limit=200,
            epsabs=1e-13,
            epsrel=1e-13,
        )
    return abs(val - 1.0)


def tail_mass(family: RdatiFamily, nu: float, delta: float) -> float:
    """Numeric int_delta^inf rho_nu(r) r^(n-1) dr."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    family._check_nu(nu)
    sup = family.support_radius(nu)
    if delta >= sup:
        return 0.0
    val, _ = integrate.quad(
        lambda r: float(family.rho(nu, r)) * r ** (family.n - 1),
        delta,
        sup,
        limit=200,
        epsabs=1e-13,
        epsrel=1e-13,
    )
    return float(val)
