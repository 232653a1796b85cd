"""The sphere-moment constant, convergence studies, and membership verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln
from scipy.stats import kendalltau

from .field import SampledField, gradient_magnitude_field
from .mollifiers import RdatiFamily
from .nonlocal_energy import bbm_functional_schedule, gagliardo_functional
from .spaces import SpaceSpec, describe, has_absolutely_continuous_norm, norm

__all__ = [
    "kappa",
    "sobolev_target",
    "ConvergenceReport",
    "convergence_study",
    "fit_limit",
    "upper_bound_diagnostics",
    "CSV_HEADER",
]

CSV_HEADER = "nu_or_s,value,target,ratio"

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_TAIL = 5


def kappa(p: float, n: int) -> float:
    """p-th directional moment of surface measure on the unit sphere,
    2 pi^((n-1)/2) Gamma((p+1)/2) / Gamma((p+n)/2)."""
    if p < 1 or n < 1:
        raise ValueError("kappa needs p >= 1 and integer n >= 1")
    if n == 1:
        return 2.0
    log_val = (
        math.log(2.0)
        + 0.5 * (n - 1) * math.log(math.pi)
        + gammaln((p + 1.0) / 2.0)
        - gammaln((p + n) / 2.0)
    )
    return float(math.exp(log_val))


def sobolev_target(field: SampledField, p: float, spec: SpaceSpec) -> float:
    """kappa(p,n)^(1/p) times the X-norm of |grad f|."""
    if field.gradient_values is None:
        raise ValueError("field carries no gradient values")
    n = field.grid.dimension
    return kappa(p, n) ** (1.0 / p) * norm(spec, gradient_magnitude_field(field))


def fit_limit(scales: np.ndarray, values: np.ndarray):
    """Fit v = L + C * scale^beta over the last four points, beta in [1/2, 2].

    Returns (L, C, beta, residual) with residual the RMS misfit.  The rate
    is left free because no convergence order is guaranteed; the fit only
    has to extrapolate a boundary-layer decay.
    """
    scales = np.asarray(scales, dtype=float)[-4:]
    values = np.asarray(values, dtype=float)[-4:]
    if np.ptp(values) == 0.0:
        return float(values[-1]), 0.0, 1.0, 0.0

    def misfit(beta):
        design = np.stack([np.ones_like(scales), scales**beta], axis=1)
        coef, _, _, _ = np.linalg.lstsq(design, values, rcond=None)
        resid = values - design @ coef
        return float(np.sqrt(np.mean(resid**2))), coef

    best = min(
        (misfit(b)[0], b) for b in np.linspace(0.5, 2.0, 16)
    )[1]
    res = minimize_scalar(lambda b: misfit(b)[0], bounds=(0.5, 2.0),
                          method="bounded",
                          options={"xatol": 1e-6})
    beta = float(res.x) if res.fun <= misfit(best)[0] else float(best)
    residual, coef = misfit(beta)
    return float(coef[0]), float(coef[1]), beta, residual


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of one scale sweep of the nonlocal functional.

    schedule holds the user-facing parameter (nu, or s for the Gagliardo
    mode); scales the equivalent strictly decreasing kernel scales.  The
    verdict is a numerical diagnosis, not a proof: member needs the
    extrapolated limit within tolerance of the target (and a space whose
    norm is absolutely continuous), non-member needs the divergence
    criterion, and everything else stays inconclusive.
    """

    mode: str
    p: float
    spec_label: str
    schedule: tuple
    scales: tuple
    functional_values: tuple
    target: Optional[float]
    extrapolated_limit: Union[float, str]
    relative_error: Optional[float]
    verdict: str
    fitted_beta: float
    fit_residual: float
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "p": self.p,
            "spec": self.spec_label,
            "schedule": list(self.schedule),
            "scales": list(self.scales),
            "functional_values": list(self.functional_values),
            "target": self.target,
            "extrapolated_limit": self.extrapolated_limit,
            "relative_error": self.relative_error,
            "verdict": self.verdict,
            "fitted_beta": self.fitted_beta,
            "fit_residual": self.fit_residual,
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConvergenceReport":
        return cls(
            mode=data["mode"],
            p=data["p"],
            spec_label=data["spec"],
            schedule=tuple(data["schedule"]),
            scales=tuple(data["scales"]),
            functional_values=tuple(data["functional_values"]),
            target=data["target"],
            extrapolated_limit=data["extrapolated_limit"],
            relative_error=data["relative_error"],
            verdict=data["verdict"],
            fitted_beta=data["fitted_beta"],
            fit_residual=data["fit_residual"],
            tolerance=data["tolerance"],
        )

    def csv_rows(self):
        rows = []
        for param, value in zip(self.schedule, self.functional_values):
            ratio = value / self.target if self.target else math.nan
            target = self.target if self.target is not None else math.nan
            rows.append((param, value, target, ratio))
        return rows


def _diverging(values: np.ndarray) -> bool:
    if values[0] <= 0.0:
        return False
    tail = values[-min(DIVERGENCE_TAIL, len(values)):]
    return bool(
        values[-1] > DIVERGENCE_FACTOR * values[0]
        and np.all(np.diff(tail) > 0)
    )


def convergence_study(field: SampledField, p: float, spec: SpaceSpec,
                      family: Optional[RdatiFamily], schedule,
                      mode: str = "rdati", tolerance: float = 0.05,
                      stride: int = 1) -> ConvergenceReport:
    """Sweep the functional over a scale schedule and classify the field.

    mode "rdati": schedule lists kernel scales nu, strictly decreasing.
    mode "gagliardo": schedule lists s values increasing to 1; internally
    the sweep runs over scales nu = 1 - s.
    """
    schedule = [float(v) for v in schedule]
    if len(schedule) < 4:
        raise ValueError("schedule needs at least 4 points")
    if mode == "rdati":
        if family is None:
            raise ValueError("rdati mode needs a kernel family")
        scales = list(schedule)
    elif mode == "gagliardo":
        scales = [1.0 - s for s in schedule]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if np.any(np.diff(scales) >= 0):
        raise ValueError("schedule scales must be strictly decreasing")

    if mode == "rdati":
        values = bbm_functional_schedule(field, p, family, scales, spec,
                                         stride=stride)
        target_factor = kappa(p, field.grid.dimension) ** (1.0 / p)
    else:
        values = np.array([
            gagliardo_functional(field, p, s, spec, stride=stride)
            for s in schedule
        ])
        target_factor = (kappa(p, field.grid.dimension) / p) ** (1.0 / p)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("functional values must be finite and nonnegative")

    target = None
    if field.gradient_values is not None:
        target = target_factor * norm(spec, gradient_magnitude_field(field))

    diverging = _diverging(values)
    if diverging:
        limit: Union[float, str] = "diverging"
        rel_err = None
        beta, residual = math.nan, math.nan
        verdict = "non-member"
    else:
        fit_l, _, beta, residual = fit_limit(np.asarray(scales), values)
        limit = fit_l
        if target is None:
            rel_err = None
            verdict = "inconclusive"
        else:
            rel_err = abs(fit_l - target) / target if target > 0 else abs(fit_l)
            exact_ok = has_absolutely_continuous_norm(spec)
            if exact_ok and rel_err <= tolerance:
                verdict = "member"
            else:
                verdict = "inconclusive"

    return ConvergenceReport(
        mode=mode,
        p=p,
        spec_label=describe(spec),
        schedule=tuple(schedule),
        scales=tuple(scales),
        functional_values=tuple(float(v) for v in values),
        target=target,
        extrapolated_limit=limit,
        relative_error=rel_err,
        verdict=verdict,
        fitted_beta=beta,
        fit_residual=residual,
        tolerance=tolerance,
    )


def upper_bound_diagnostics(field: SampledField, p: float, spec: SpaceSpec,
                            family: RdatiFamily, schedule,
                            stride: int = 1):
    """Ratios functional / |grad f|-norm over a schedule plus their
    Kendall tau against 1/nu (a growth-trend detector)."""
    denom = norm(spec, gradient_magnitude_field(field))
    values = bbm_functional_schedule(field, p, family, schedule, spec,
                                     stride=stride)
    ratios = values / denom
    tau = kendalltau(1.0 / np.asarray(schedule), ratios).statistic
    return ratios, float(tau)
