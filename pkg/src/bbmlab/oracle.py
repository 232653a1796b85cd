"""Independent brute-force references for the derived numbers.

Nothing here imports kernels or norm engines from the modules it checks:
the sphere moment is plain Monte Carlo, the one-dimensional functional is
a direct double Riemann sum with its own inline kernel formulas, and the
rearrangement follows the distribution-function definition without
sorting.
"""

from __future__ import annotations

import math

import numpy as np

from .field import TestFunction
from .geometry import Interval

__all__ = [
    "mc_sphere_moment",
    "dense_1d_functional",
    "rearrangement_oracle",
]


def mc_sphere_moment(p: float, n: int, samples: int, seed: int = 0) -> float:
    """Surface-measure Monte Carlo estimate of the directional moment.

    Isotropic directions come from normalized Gaussian vectors; the mean of
    |omega_1|^p is scaled by the sphere surface 2 pi^(n/2) / Gamma(n/2).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    surface = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    total = 0.0
    remaining = samples
    while remaining > 0:
        m = min(remaining, 1_000_000)
        g = rng.standard_normal((m, n))
        norms = np.linalg.norm(g, axis=1)
        good = norms > 0
        first = np.abs(g[good, 0] / norms[good])
        total += float(np.sum(first**p)) + float(np.sum(~good)) * 0.0
        remaining -= m
    return surface * total / samples


def dense_1d_functional(fn: TestFunction, domain: Interval, p: float,
                        q: float, scale: float, resolution: float,
                        family_kind: str = "bump",
                        mode: str = "rdati") -> float:
    """Direct double Riemann sum of the 1-d functional at fine resolution.

    Reimplements the kernel formulas and the analytic near-field rule
    inline, so it shares no code with the main engine.  `scale` is nu for
    mode "rdati" and s for mode "gagliardo".
    """
    if not isinstance(domain, Interval):
        raise ValueError("the dense oracle is one-dimensional")
    h = float(resolution)
    a, b = domain.a, domain.b
    m = int(math.ceil((b - a) / h))
    x = a + (b - a) * (np.arange(m) + 0.5) / m
    h = (b - a) / m
    f = fn(x.reshape(-1, 1))

    if mode == "rdati":
        nu = float(scale)
        if family_kind == "bump":
            def rho(r):
                return np.where((r > 0) & (r <= nu), 1.0 / nu, 0.0)

            def mass_below(t):
                return min(t, nu) / nu
        elif family_kind == "fractional":
            R = 2.0 * max(abs(a), abs(b))
            np_exp = nu * p

            def rho(r):
                out = np_exp * (2.0 * R) ** (-np_exp) * r ** (np_exp - 1.0)
                return np.where((r > 0) & (r <= 2.0 * R), out, 0.0)

            def mass_below(t):
                return (min(t, 2.0 * R) / (2.0 * R)) ** np_exp
        else:
            raise ValueError(f"unknown family {family_kind!r}")
        prefactor = 1.0
    elif mode == "gagliardo":
        s = float(scale)

        # rho / r^p must equal the Gagliardo kernel r^(-n - s p), n = 1
        def rho(r):
            return r ** (p - 1.0 - s * p)

        def mass_below(t):
            return t ** ((1.0 - s) * p) / ((1.0 - s) * p)

        prefactor = (1.0 - s) ** (1.0 / p)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    near_radius = 2.0 * h
    energies = np.zeros(m)
    block = max(1, 4_000_000 // m)
    for start in range(0, m, block):
        xi = x[start:start + block]
        fi = f[start:start + block]
        r = np.abs(xi[:, None] - x[None, :])
        df = np.abs(fi[:, None] - f[None, :])
        far = r >= near_radius
        with np.errstate(divide="ignore", invalid="ignore"):
            far_term = np.where(far, df**p / r**p * rho(r) * h, 0.0)
        near = (r > 0) & (r < near_radius)
        with np.errstate(divide="ignore", invalid="ignore"):
            quot = np.where(near, (df / r) ** p, 0.0)
        counts = near.sum(axis=1)
        qbar = np.divide(quot.sum(axis=1), counts,
                         out=np.zeros(len(xi)), where=counts > 0)
        r_eff = (counts + 1) * h / 2.0
        near_term = qbar * 2.0 * np.array([mass_below(t) for t in r_eff])
        energies[start:start + len(xi)] = \
            np.nansum(far_term, axis=1) + near_term
    value = float(np.sum(h * energies ** (q / p)) ** (1.0 / q))
    return prefactor * value


class _DistributionStep:
    """f* evaluated straight from the distribution function."""

    def __init__(self, values, weights):
        self._abs = [abs(v) for v in values]
        self._weights = list(weights)
        self._candidates = [0.0]
        for v in self._abs:
            if v not in self._candidates:
                self._candidates.append(v)

    def _measure_above(self, s: float) -> float:
        return sum(w for v, w in zip(self._abs, self._weights) if v > s)

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        # slack absorbs summation-order roundoff when t sits exactly on a
        # breakpoint produced by a differently ordered cumulative sum
        slack = 1e-12 * max(sum(self._weights), 1.0)
        out = []
        for ti in t:
            feasible = [s for s in self._candidates
                        if self._measure_above(s) <= ti + slack]
            out.append(min(feasible) if feasible else math.inf)
        result = np.asarray(out)
        return result if result.size > 1 else float(result[0])


def rearrangement_oracle(values, weights) -> _DistributionStep:
    """Decreasing rearrangement via inf{s : |{|f| > s}| <= t}, no sorting."""
    values = list(values)
    weights = list(weights)
    if len(values) != len(weights):
        raise ValueError("values and weights must have equal length")
    return _DistributionStep(values, weights)
