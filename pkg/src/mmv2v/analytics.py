"""Closed-form single-hop laws and quadrature-evaluated multi-hop metrics
under random relay selection.

Relays are uniform over the positive-progress half of the Manhattan ball,
which gives uniform forward progress on ``[0, lt/sqrt(2)]`` and Manhattan
distance with CDF ``(d/lt)**2``. The SNR law mixes that distance with
log-normal shadowing; delay and reliability follow from it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate as spi, special

from mmv2v.radiolink import LinkBudget, single_hop_delay

SQRT2 = math.sqrt(2.0)


class QuadratureError(ArithmeticError):
    """Adaptive integration failed to meet its tolerance."""

    def __init__(self, message: str, evaluations: int):
        super().__init__(f"{message} (after {evaluations} evaluations)")
        self.evaluations = evaluations


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration controls.

    ``rho_range_db`` bounds the shadowing integral; ``None`` means
    ``[-8 sigma, 8 sigma]``. ``rho_nodes`` is the Gauss-Legendre order used
    on that range (half as many nodes give the error estimate).
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    rho_range_db: tuple[float, float] | None = None
    rho_nodes: int = 128

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.rho_range_db is not None and not self.rho_range_db[0] < self.rho_range_db[1]:
            raise ValueError(f"empty shadowing range {self.rho_range_db}")
        if self.rho_nodes < 4 or self.rho_nodes % 2:
            raise ValueError("rho_nodes must be an even number >= 4")

    def rho_range(self, sigma: float) -> tuple[float, float]:
        if self.rho_range_db is not None:
            return self.rho_range_db
        return -8.0 * sigma, 8.0 * sigma


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class AnalyticResult:
    value: float
    est_error: float
    evaluations: int

    def __float__(self) -> float:
        return self.value


def fp_pdf(z, lt: float):
    """Forward progress density: uniform on ``[0, lt/sqrt(2)]``."""
    if lt <= 0:
        raise ValueError("lt must be positive")
    z = np.asarray(z, dtype=float)
    out = np.where((z >= 0) & (z <= lt / SQRT2), SQRT2 / lt, 0.0)
    return float(out) if out.ndim == 0 else out


def hop_count(r_valid: float, lt: float) -> float:
    """Real-valued hop count: distance over mean forward progress ``lt/(2 sqrt 2)``."""
    if lt <= 0 or r_valid <= 0:
        raise ValueError("r_valid and lt must be positive")
    return 2.0 * SQRT2 * r_valid / lt


def manhattan_pdf(d, lt: float):
    if lt <= 0:
        raise ValueError("lt must be positive")
    d = np.asarray(d, dtype=float)
    out = np.where((d >= 0) & (d <= lt), 2.0 * d / (lt * lt), 0.0)
    return float(out) if out.ndim == 0 else out


def manhattan_cdf(d, lt: float):
    if lt <= 0:
        raise ValueError("lt must be positive")
    d = np.clip(np.asarray(d, dtype=float), 0.0, lt)
    out = d * d / (lt * lt)
    return float(out) if out.ndim == 0 else out


def integrate(func, a: float, b: float, quad: QuadratureSpec = DEFAULT_QUAD, what: str = "integral") -> AnalyticResult:
    """Adaptive Gauss-Kronrod integral of a scalar function; raises on non-convergence."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spi.IntegrationWarning)
        out = spi.quad(
            func, a, b,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol,
            limit=quad.max_subdivisions, full_output=1,
        )
    value, err, info = out[0], out[1], out[2]
    neval = int(info["neval"])
    if len(out) > 3:
        raise QuadratureError(f"{what}: {out[3].strip()}", neval)
    if not np.isfinite(value):
        raise QuadratureError(f"{what}: non-finite result", neval)
    return AnalyticResult(value, abs(err), neval)


def _clamp_probability(res: AnalyticResult, quad: QuadratureSpec, what: str) -> AnalyticResult:
    v = res.value
    if 0.0 <= v <= 1.0:
        return res
    overshoot = -v if v < 0 else v - 1.0
    if overshoot >= quad.abs_tol:
        raise QuadratureError(f"{what}: probability {v!r} outside [0, 1]", res.evaluations)
    return AnalyticResult(min(max(v, 0.0), 1.0), res.est_error, res.evaluations)


def _deterministic_snr_cdf(gamma_db: float, budget: LinkBudget, lt: float) -> float:
    # sigma = 0: SNR <= gamma  <=>  d >= 10**((M - gamma) / (10 alpha))
    d_star = 10.0 ** ((budget.margin_db - gamma_db) / (10.0 * budget.alpha))
    return 1.0 - float(manhattan_cdf(d_star, lt))


def snr_cdf(
    gamma_db: float,
    budget: LinkBudget,
    lt: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> AnalyticResult:
    """P(SNR <= gamma) for a randomly selected relay, in dB."""
    if lt <= 0:
        raise ValueError("lt must be positive")
    if gamma_db == -math.inf:
        return AnalyticResult(0.0, 0.0, 0)
    if gamma_db == math.inf:
        return AnalyticResult(1.0, 0.0, 0)
    if budget.sigma == 0:
        return AnalyticResult(_deterministic_snr_cdf(gamma_db, budget, lt), 0.0, 0)

    m = budget.margin_db
    scale = SQRT2 * budget.sigma
    slope = 10.0 * budget.alpha

    def integrand(d: float) -> float:
        if d <= 0.0:
            return 0.0
        y = (m - gamma_db - slope * math.log10(d)) / scale
        return special.erf(y) * 2.0 * d / (lt * lt)

    mean_erf = integrate(integrand, 0.0, lt, quad, "SNR CDF")
    res = AnalyticResult(0.5 - 0.5 * mean_erf.value, 0.5 * mean_erf.est_error, mean_erf.evaluations)
    return _clamp_probability(res, quad, "SNR CDF")


class _ShadowingAverage:
    """E_rho[g(M - 10 alpha log10 d - rho)] by Gauss-Legendre on a truncated
    Gaussian range, tracking the worst disagreement with a half-order rule."""

    def __init__(self, sigma: float, quad: QuadratureSpec):
        lo, hi = quad.rho_range(sigma)
        self.rules = []
        for n in (quad.rho_nodes, quad.rho_nodes // 2):
            x, w = np.polynomial.legendre.leggauss(n)
            rho = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            weight = 0.5 * (hi - lo) * w * np.exp(-0.5 * (rho / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
            self.rules.append((rho, weight))
        self.max_abs_gap = 0.0
        self.calls = 0

    def __call__(self, g, snr_median_db: float) -> float:
        fine, coarse = (float(np.dot(w, g(snr_median_db - rho))) for rho, w in self.rules)
        self.max_abs_gap = max(self.max_abs_gap, abs(fine - coarse))
        self.calls += 1
        return fine


def mean_hop_delay(
    budget: LinkBudget,
    lt: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> AnalyticResult:
    """E[p_s / rate] over the relay distance law and shadowing."""
    if lt <= 0:
        raise ValueError("lt must be positive")
    m = budget.margin_db
    slope = 10.0 * budget.alpha

    def hop_delay(snr):
        return single_hop_delay(budget, snr)

    if budget.sigma == 0:
        def integrand(d: float) -> float:
            if d <= 0.0:
                return 0.0
            return hop_delay(m - slope * math.log10(d)) * 2.0 * d / (lt * lt)

        return integrate(integrand, 0.0, lt, quad, "mean hop delay")

    shadow = _ShadowingAverage(budget.sigma, quad)

    def integrand(d: float) -> float:
        # d -> 0 sends SNR to +inf and the hop delay to 0.
        if d <= 0.0:
            return 0.0
        return shadow(hop_delay, m - slope * math.log10(d)) * 2.0 * d / (lt * lt)

    outer = integrate(integrand, 0.0, lt, quad, "mean hop delay")
    inner_err = shadow.max_abs_gap
    tol = max(quad.abs_tol, quad.rel_tol * abs(outer.value))
    evaluations = outer.evaluations * (quad.rho_nodes + quad.rho_nodes // 2)
    if inner_err > tol:
        raise QuadratureError(
            f"mean hop delay: shadowing rule disagreement {inner_err:.3g} exceeds {tol:.3g}; "
            "raise rho_nodes",
            evaluations,
        )
    return AnalyticResult(outer.value, outer.est_error + inner_err, evaluations)


def avg_total_delay(
    budget: LinkBudget,
    r_valid: float,
    lt: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> AnalyticResult:
    """``k * E[hop delay] + (k - 1) * t_proc`` with real-valued ``k``."""
    k = hop_count(r_valid, lt)
    hop = mean_hop_delay(budget, lt, quad)
    return AnalyticResult(k * hop.value + (k - 1.0) * budget.t_proc, k * hop.est_error, hop.evaluations)


def avg_total_reliability(
    budget: LinkBudget,
    r_valid: float,
    lt: float,
    epsilon: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> AnalyticResult:
    """Every hop clears ``epsilon``: ``(1 - F_SNR(epsilon)) ** k``."""
    k = hop_count(r_valid, lt)
    cdf = snr_cdf(epsilon, budget, lt, quad)
    per_hop = 1.0 - cdf.value
    value = per_hop ** k
    err = k * per_hop ** (k - 1.0) * cdf.est_error if per_hop > 0 else cdf.est_error
    return AnalyticResult(value, err, cdf.evaluations)
